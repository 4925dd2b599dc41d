#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "apsift/bohr.hpp"
#include "apsift/group.hpp"
#include "apsift/harmonic.hpp"
#include "apsift/increment.hpp"
#include "apsift/sift.hpp"

namespace apsift {

using ordered_json = nlohmann::ordered_json;

inline ordered_json bohr_to_json(const BohrSet& b) {
  ordered_json j;
  j["factors"] = b.group().factors();
  ordered_json freqs = ordered_json::array();
  for (const auto& c : b.freqs()) freqs.push_back(c.exps);
  j["freqs"] = freqs;
  j["radius"] = b.radius();
  j["regular"] = b.regular();
  j["rank"] = b.rank();
  j["size"] = b.size();
  return j;
}

inline ordered_json set_to_json(const GroupSpec& g, const GroupSet& a) {
  ordered_json arr = ordered_json::array();
  for (Elem x : a) arr.push_back(g.residues(x));
  return arr;
}

inline ordered_json sift_outcome_to_json_basic(const SiftOutcome& o) {
  ordered_json j;
  j["sigma"] = o.sigma;
  j["level_set_size"] = o.level_set.size();
  j["a1_size"] = o.a1.size();
  j["a2_size"] = o.a2.size();
  j["corr_s"] = o.corr_s;
  j["corr_s_bound"] = o.corr_s_bound;
  j["self1"] = o.self1;
  j["self2"] = o.self2;
  j["self_bound"] = o.self_bound;
  j["dens1"] = o.dens1;
  j["dens2"] = o.dens2;
  j["p"] = o.p_used;
  j["q"] = o.q_used;
  j["sampled"] = o.sampled;
  if (o.has_hosts) {
    j["bprime"] = bohr_to_json(*o.bprime);
    j["bdprime"] = bohr_to_json(*o.bdprime);
    j["translate"] = o.translate;
  }
  ordered_json chain = ordered_json::array();
  for (const auto& st : o.chain) {
    ordered_json cj;
    cj["j"] = st.j;
    cj["size1"] = st.size1;
    cj["size2"] = st.size2;
    cj["zeta1"] = st.zeta1;
    cj["zeta2"] = st.zeta2;
    cj["corr"] = st.corr;
    cj["ratio"] = st.ratio;
    cj["via_case"] = st.via_case;
    chain.push_back(cj);
  }
  j["chain"] = chain;
  return j;
}

inline ordered_json sift_outcome_to_json(const GroupSpec& g, const SiftOutcome& o) {
  ordered_json j = sift_outcome_to_json_basic(o);
  if (o.has_hosts) j["translate"] = g.residues(o.translate);
  return j;
}

inline ordered_json config_to_json(const PipelineConfig& c) {
  ordered_json j;
  j["c"] = c.c;
  j["p_cap"] = c.p_cap;
  j["j_cap"] = c.j_cap;
  j["k_cap"] = c.k_cap;
  j["eps_grid"] = c.eps_grid;
  j["tolerance"] = c.tolerance;
  j["seed"] = c.seed;
  j["fallback_to_oracle"] = c.fallback_to_oracle;
  j["oracle_codim"] = c.oracle_codim;
  j["exhaustive_cap"] = c.exhaustive_cap;
  j["sample_draws"] = c.sample_draws;
  return j;
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  if (j.contains("c")) c.c = j["c"].get<double>();
  if (j.contains("p_cap")) c.p_cap = j["p_cap"].get<int>();
  if (j.contains("j_cap")) c.j_cap = j["j_cap"].get<int>();
  if (j.contains("k_cap")) c.k_cap = j["k_cap"].get<int>();
  if (j.contains("eps_grid")) c.eps_grid = j["eps_grid"].get<std::vector<double>>();
  if (j.contains("tolerance")) c.tolerance = j["tolerance"].get<double>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("fallback_to_oracle")) c.fallback_to_oracle = j["fallback_to_oracle"].get<bool>();
  if (j.contains("oracle_codim")) c.oracle_codim = j["oracle_codim"].get<int>();
  if (j.contains("exhaustive_cap")) c.exhaustive_cap = j["exhaustive_cap"].get<std::int64_t>();
  if (j.contains("sample_draws")) c.sample_draws = j["sample_draws"].get<int>();
  c.validate();
  return c;
}

inline ordered_json step_to_json(const StepRecord& s) {
  ordered_json j;
  j["j"] = s.j;
  j["path"] = s.path;
  j["branch"] = s.branch;
  j["lemma"] = s.detail;
  ordered_json params;
  params["p"] = s.p;
  params["k"] = s.k;
  params["nu"] = s.nu;
  j["params"] = params;
  ordered_json host;
  host["kind"] = s.host.kind;
  host["rank"] = s.host.rank;
  host["radius"] = s.host.radius;
  host["size"] = s.host.size;
  if (s.host.codim >= 0) host["codim"] = s.host.codim;
  if (!s.host.freq_exps.empty()) host["freqs"] = s.host.freq_exps;
  j["host"] = host;
  j["translate"] = s.translate;
  j["sigma"] = s.sigma;
  ordered_json dens;
  dens["old"] = s.old_density;
  dens["new"] = s.new_density;
  j["densities"] = dens;
  ordered_json res;
  for (const auto& [k2, v] : s.residuals) res[k2] = v;
  j["residuals"] = res;
  j["fallback"] = s.fallback;
  if (s.sift) j["sift"] = sift_outcome_to_json_basic(*s.sift);
  if (!s.x_elems.empty()) j["almost_periods"] = s.x_elems;
  if (!s.spectrum_exps.empty()) j["spectrum"] = s.spectrum_exps;
  return j;
}

inline ordered_json trace_to_json(const PipelineTrace& t, const PipelineConfig& cfg) {
  ordered_json j;
  j["schema"] = 1;
  j["mode"] = t.mode;
  j["group"] = t.group;
  j["config"] = config_to_json(cfg);
  j["initial_size"] = t.initial_size;
  j["initial_density"] = t.initial_density;
  ordered_json steps = ordered_json::array();
  for (const auto& s : t.steps) steps.push_back(step_to_json(s));
  j["steps"] = steps;
  j["status"] = t.status;
  j["sigma_product"] = t.sigma_product;
  j["sigma_budget"] = t.sigma_budget;
  if (t.closing.emitted) {
    ordered_json c;
    c["guaranteed"] = t.closing.guaranteed;
    c["achieved"] = t.closing.achieved;
    c["trivial_count"] = t.closing.trivial_count;
    c["ap_free_input"] = t.closing.ap_free_input;
    c["holds"] = t.closing.holds;
    j["closing_inequality"] = c;
  } else {
    j["closing_inequality"] = nullptr;
  }
  return j;
}

// GroupFn serialization: CSV of canonical index -> value
inline std::string fn_to_csv(const GroupFn& f) {
  std::ostringstream os;
  os << "index,value\n";
  os.precision(17);
  for (Elem x = 0; x < f.n(); ++x) os << x << ',' << f(x) << '\n';
  return os.str();
}

}  // namespace apsift

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "apsift/bohr.hpp"
#include "apsift/extremal.hpp"
#include "apsift/group.hpp"
#include "apsift/harmonic.hpp"
#include "apsift/periodicity.hpp"
#include "apsift/sift.hpp"
#include "apsift/util.hpp"

namespace apsift {

struct PipelineConfig {
  double c = 1.0 / (8192.0 * 100.0);  // Bohr narrowing constant
  int p_cap = 64;
  int j_cap = 256;
  int k_cap = 32;
  // epsilon ladder the property suites drive the sift and smoothing
  // operations through; the lemma path itself pins its epsilons
  std::vector<double> eps_grid = {0.5, 0.125, 0.03125, 0.0078125};
  double tolerance = 1e-9;
  std::uint64_t seed = 1;
  bool fallback_to_oracle = true;
  int oracle_codim = 4;
  std::int64_t exhaustive_cap = 10'000'000;
  int sample_draws = 200;

  void validate() const {
    if (!(c > 0 && c <= 0.01))
      throw std::invalid_argument("PipelineConfig: c must lie in (0, 1/100]");
    if (p_cap < 1 || j_cap < 1 || k_cap < 1)
      throw std::invalid_argument("PipelineConfig: caps must be >= 1");
  }

  SiftConfig sift() const {
    SiftConfig s;
    s.exhaustive_cap = exhaustive_cap;
    s.sample_draws = sample_draws;
    s.seed = seed;
    s.c = c;
    return s;
  }
};

struct HostDesc {
  std::string kind;  // "subspace" | "bohr"
  int rank = 0;
  double radius = 0;
  std::int64_t size = 0;
  int codim = -1;  // subspace hosts
  std::vector<std::vector<std::int64_t>> freq_exps;
};

struct IncrementCertificate {
  enum class Kind { many_aps, density_increment };
  Kind kind = Kind::many_aps;
  bool via_oracle = false;
  bool verified = false;
  // many_aps
  double ap_count = 0;
  double ap_threshold = 0;
  // density increment
  std::optional<BohrSet> host;
  HostDesc host_desc;
  Elem translate = 0;
  double sigma = 0;
  double old_density = 0;
  double new_density = 0;
};

struct StepRecord {
  int j = 0;
  std::string path;    // "lemma" | "oracle"
  std::string branch;  // "many_aps" | "increment"
  std::string detail;
  int p = 0, k = 0;
  double nu = 0;
  double sigma = 0;
  HostDesc host;
  Elem translate = 0;
  double old_density = 0, new_density = 0;
  std::vector<std::pair<std::string, double>> residuals;
  bool fallback = false;
  // lemma-path artifacts for the trace: the sift outcome, the almost-period
  // set and the spectrum behind the Chang host (residue/exponent vectors)
  std::shared_ptr<SiftOutcome> sift;
  std::vector<std::vector<std::int64_t>> x_elems;
  std::vector<std::vector<std::int64_t>> spectrum_exps;
};

struct StepResult {
  IncrementCertificate cert;
  StepRecord rec;
  bool ok = false;             // a certificate was produced and re-verified
  bool cert_produced = false;  // distinguishes "falsified" from "no certificate"
};

inline HostDesc describe_host(const BohrSet& b, bool subspace) {
  HostDesc h;
  h.kind = subspace ? "subspace" : "bohr";
  h.rank = b.rank();
  h.radius = b.radius();
  h.size = b.size();
  if (subspace) h.codim = b.rank();
  for (const auto& c : b.freqs()) h.freq_exps.push_back(c.exps);
  return h;
}

// ---- unbalancing -------------------------------------------------------------

// smallest p' in [p, p_cap] with ||f + 1||_{p'(nu)} >= 1 + eps/2, for f
// with nonnegative transform and ||f||_{p(nu)} >= eps.
inline int unbalance_exponent(const GroupFn& f, const ProbMeasure& nu, int p, double eps,
                              int p_cap = 64) {
  if (p < 1) throw std::invalid_argument("unbalance_exponent: p >= 1");
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("unbalance_exponent: eps in (0,1)");
  FourierFn fh = fourier(f);
  for (Elem e = 0; e < f.n(); ++e)
    if (fh(e).real() < -1e-9 || std::fabs(fh(e).imag()) > 1e-7)
      throw precondition_error("unbalance_exponent: fhat >= 0 fails");
  FourierFn nh = fourier(nu.fn);
  for (Elem e = 0; e < f.n(); ++e)
    if (nh(e).real() < -1e-9 || std::fabs(nh(e).imag()) > 1e-7)
      throw precondition_error("unbalance_exponent: nuhat >= 0 fails");
  if (!approx_ge(lp_norm(f, p, nu), eps))
    throw precondition_error("unbalance_exponent: ||f||_{p(nu)} >= eps fails");
  GroupFn shifted = add_const(f, 1.0);
  for (int pp = p; pp <= p_cap; ++pp)
    if (approx_ge(lp_norm(shifted, pp, nu), 1.0 + eps / 2.0)) return pp;
  throw not_found_error("unbalance_exponent: scan exhausted the p-cap");
}

// ---- Holder lifting and unbalancing -------------------------------------------

struct HolderLift {
  int which_case = 0;
  double inv_b = 0;  // mu(B)^{-1}
  // case 1
  double corr = 0;  // <mu_A * mu_A, mu_C>
  // case 2
  Elem witness = 0;
  double sup_val = 0;
  // case 3
  std::optional<BohrSet> b2, b3;
  int p = 0;
  double lp_val = 0;
};

// Trichotomy behind the cyclic step: enough progressions, an immediate
// increment on B', or an L^p lower bound against the four-fold Bohr
// measure.  Cases are checked in order; the one returned has its
// inequality evaluated directly.
inline HolderLift holder_lift(const GroupSpec& g, const GroupSet& a, const BohrSet& b,
                              const BohrSet& bp, const GroupSet& c, const PipelineConfig& cfg) {
  if (a.empty() || c.empty()) throw std::invalid_argument("holder_lift: empty set");
  if (!b.regular() || !bp.regular())
    throw precondition_error("holder_lift: Bohr sets must be regular");
  if (!subset_of(a, b.members())) throw precondition_error("holder_lift: A not inside B");
  if (!subset_of(c, bp.members())) throw precondition_error("holder_lift: C not inside B'");
  HolderLift out;
  out.inv_b = 1.0 / b.density();
  ProbMeasure mu_a = normalized_indicator(g, a);
  GroupFn astar = convolve(mu_a.fn, mu_a.fn, Conv::star);
  out.corr = inner(astar, GroupFn(g, 1.0), normalized_indicator(g, c));
  if (approx_ge(out.corr, 0.5 * out.inv_b)) {
    out.which_case = 1;
    return out;
  }
  GroupFn conv = convolve(mu_a.fn, normalized_indicator(g, bp.members()).fn, Conv::star);
  Elem arg = 0;
  double mx = -1;
  for (Elem x = 0; x < g.size(); ++x)
    if (conv(x) > mx) {
      mx = conv(x);
      arg = x;
    }
  if (approx_ge(mx, 2.0 * out.inv_b)) {
    out.which_case = 2;
    out.witness = arg;
    out.sup_val = mx;
    return out;
  }
  int d = std::max(1, b.rank());
  BohrSet b2 = nested_regular(bp, cfg.c / d);
  BohrSet b3 = nested_regular(b2, cfg.c / d);
  ProbMeasure m2 = normalized_indicator(g, b2.members());
  ProbMeasure m3 = normalized_indicator(g, b3.members());
  ProbMeasure nu(convolve(convolve(m2.fn, m2.fn, Conv::circ),
                          convolve(m3.fn, m3.fn, Conv::circ), Conv::star),
                 false);
  GroupFn acirc = convolve(mu_a.fn, mu_a.fn, Conv::circ);
  double target = (1.0 + std::pow(2.0, -5)) * out.inv_b;
  for (int p = 1; p <= cfg.p_cap; ++p) {
    double v = lp_norm(acirc, p, nu);
    if (approx_ge(v, target)) {
      out.which_case = 3;
      out.b2 = b2;
      out.b3 = b3;
      out.p = p;
      out.lp_val = v;
      return out;
    }
  }
  throw internal_error("holder_lift: all three cases failed within the p-cap");
}

// ---- finite-field step ---------------------------------------------------------

namespace detail {

inline GroupSet whole_group(const GroupSpec& g) {
  GroupSet s(static_cast<std::size_t>(g.size()));
  for (Elem x = 0; x < g.size(); ++x) s[static_cast<std::size_t>(x)] = x;
  return s;
}

// direct relative density of (A + t) cap H in H
inline double translate_density(const GroupSpec& g, const GroupSet& a, const GroupSet& host,
                                Elem t) {
  Bitset abits = to_bitset(g, a);
  std::int64_t cnt = 0;
  for (Elem v : host)
    if (abits.test(g.sub(v, t))) ++cnt;
  return static_cast<double>(cnt) / static_cast<double>(host.size());
}

// annihilator-row enumeration: all RREF matrices with `codim` rows
inline void enumerate_annihilators(const GroupSpec& g, int codim,
                                   const std::function<void(const std::vector<Character>&)>& fn) {
  std::int64_t q = g.factors()[0];
  int n = static_cast<int>(g.rank());
  if (codim == 0) {
    fn({});
    return;
  }
  std::vector<int> piv(static_cast<std::size_t>(codim));
  std::function<void(int, int)> choose = [&](int idx, int start) {
    if (idx == codim) {
      std::vector<std::pair<int, int>> free_pos;
      for (int i = 0; i < codim; ++i)
        for (int j = piv[static_cast<std::size_t>(i)] + 1; j < n; ++j)
          if (std::find(piv.begin(), piv.end(), j) == piv.end()) free_pos.emplace_back(i, j);
      std::vector<std::int64_t> vals(free_pos.size(), 0);
      while (true) {
        std::vector<Character> rows(static_cast<std::size_t>(codim));
        for (int i = 0; i < codim; ++i) {
          rows[static_cast<std::size_t>(i)].exps.assign(static_cast<std::size_t>(n), 0);
          rows[static_cast<std::size_t>(i)].exps[static_cast<std::size_t>(
              piv[static_cast<std::size_t>(i)])] = 1;
        }
        for (std::size_t t = 0; t < free_pos.size(); ++t)
          rows[static_cast<std::size_t>(free_pos[t].first)]
              .exps[static_cast<std::size_t>(free_pos[t].second)] = vals[t];
        fn(rows);
        std::size_t t = 0;
        while (t < vals.size() && ++vals[t] == q) vals[t++] = 0;
        if (vals.empty() || t == vals.size()) break;
      }
      return;
    }
    for (int j = start; j < n; ++j) {
      piv[static_cast<std::size_t>(idx)] = j;
      choose(idx + 1, j + 1);
    }
  };
  choose(0, 0);
}

}  // namespace detail

// One finite-field dichotomy step: either enough progressions or a
// verified density increment on a translate of a subspace.  The lemma
// pipeline (Holder/unbalance -> iterated sift -> almost-periodicity ->
// Chang -> averaging) is attempted first; on failure and with fallback
// enabled, the brute-force oracle certifies the dichotomy directly.
inline StepResult ff_step(const GroupSpec& g, const GroupSet& a, const PipelineConfig& cfg) {
  cfg.validate();
  if (a.empty()) throw std::invalid_argument("ff_step: empty A");
  StepResult out;
  const double n = static_cast<double>(g.size());
  double alpha = static_cast<double>(a.size()) / n;
  out.rec.old_density = alpha;
  out.rec.path = "lemma";

  double t_fun = ap_functional(g, a);
  out.rec.residuals.emplace_back("ap_functional", t_fun);
  if (std::fabs(t_fun - 1.0) <= 0.5) {
    auto cnt = count_3aps(g, a);
    out.cert.kind = IncrementCertificate::Kind::many_aps;
    out.cert.ap_count = static_cast<double>(cnt.total);
    out.cert.ap_threshold = 0.5 * alpha * alpha * alpha * n * n;
    out.cert.verified = approx_ge(out.cert.ap_count, out.cert.ap_threshold);
    out.cert_produced = true;
    out.rec.branch = "many_aps";
    out.rec.detail = "ap functional within 1/2 of 1";
    out.ok = out.cert.verified;
    return out;
  }

  auto finish_increment = [&](const BohrSet& host, Elem translate, const std::string& detail,
                              bool oracle_path, double require_sigma) -> bool {
    double nd = detail::translate_density(g, a, host.members(), translate);
    double sigma = nd / alpha;
    if (!approx_ge(sigma, require_sigma)) return false;
    out.cert.kind = IncrementCertificate::Kind::density_increment;
    out.cert.host = host;
    out.cert.host_desc = describe_host(host, true);
    out.cert.translate = translate;
    out.cert.sigma = sigma;
    out.cert.old_density = alpha;
    out.cert.new_density = nd;
    out.cert.via_oracle = oracle_path;
    out.cert.verified = true;
    out.cert_produced = true;
    out.rec.branch = "increment";
    out.rec.detail = detail;
    out.rec.sigma = sigma;
    out.rec.host = out.cert.host_desc;
    out.rec.translate = translate;
    out.rec.new_density = nd;
    out.rec.path = oracle_path ? "oracle" : "lemma";
    out.rec.fallback = oracle_path;
    out.ok = true;
    return true;
  };

  const double ff_sigma = 1.0 + std::pow(2.0, -5);
  try {
    ProbMeasure mu_a = normalized_indicator(g, a);
    GroupFn gg = convolve(mu_a.fn, mu_a.fn, Conv::circ);
    int p = 0;
    for (int pp = 1; pp <= cfg.p_cap; ++pp)
      if (approx_ge(lp_norm(gg, pp), 1.0 + 0.125)) {
        p = pp;
        break;
      }
    if (p == 0)
      throw not_found_error("ff_step: no p <= p_cap with ||mu_A o mu_A||_p >= 1 + 2^-3");
    out.rec.p = p;
    SiftOutcome sift = ff_iterated_sift(g, a, p, cfg.sift());
    out.rec.residuals.emplace_back("sift_sigma", sift.sigma);
    out.rec.residuals.emplace_back("sift_corr_s", sift.corr_s);

    const int k = 7;  // 2^{2-k} <= 2^{-5}
    out.rec.k = k;
    GroupSet whole = detail::whole_group(g);
    GroupSet x = almost_periods(g, sift.a1, sift.a2, sift.level_set, whole, k,
                                std::pow(2.0, -7));
    GroupFn g12 = convolve(normalized_indicator(g, sift.a1).fn,
                           normalized_indicator(g, sift.a2).fn, Conv::circ);
    GroupFn xk = power_convolve(normalized_indicator(g, x).fn, k);
    GroupFn smoothed = convolve(g12, xk, Conv::star);
    double corr_k = inner(indicator(g, sift.level_set), smoothed);
    out.rec.residuals.emplace_back("corr_k", corr_k);
    if (!approx_ge(corr_k, 1.0 - std::pow(2.0, -6)))
      throw internal_error("ff_step: smoothed correlation fell below 1 - 2^-6");

    out.rec.sift = std::make_shared<SiftOutcome>(sift);
    for (Elem t : x) out.rec.x_elems.push_back(g.residues(t));
    BohrSet v = chang_subspace(g, x);
    for (const auto& ch : spectrum(g, x, 0.5).chars) out.rec.spectrum_exps.push_back(ch.exps);
    out.rec.residuals.emplace_back("chang_codim", static_cast<double>(v.rank()));
    GroupFn conv = convolve(mu_a.fn, normalized_indicator(g, v.members()).fn, Conv::star);
    Elem arg = 0;
    double mx = -1;
    for (Elem y = 0; y < g.size(); ++y)
      if (conv(y) > mx) {
        mx = conv(y);
        arg = y;
      }
    out.rec.residuals.emplace_back("sup_mu_A_conv_mu_V", mx);
    if (!approx_ge(mx, ff_sigma))
      throw internal_error("ff_step: ||mu_A * mu_V||_inf < 1 + 2^-5");
    if (finish_increment(v, g.neg(arg), "sift + almost-periodicity + Chang subspace", false,
                         ff_sigma))
      return out;
    throw internal_error("ff_step: direct density recount disagreed with the witness");
  } catch (const std::exception& e) {
    out.rec.residuals.emplace_back("lemma_path_failed", 1.0);
    out.rec.detail = std::string("lemma path: ") + e.what();
    if (!cfg.fallback_to_oracle) {
      out.ok = false;
      return out;
    }
  }

  // oracle fallback: direct dichotomy certification
  {
    auto cnt = count_3aps(g, a);
    double thr = 0.5 * alpha * alpha * alpha * n * n;
    if (approx_ge(static_cast<double>(cnt.total), thr)) {
      out.cert.kind = IncrementCertificate::Kind::many_aps;
      out.cert.ap_count = static_cast<double>(cnt.total);
      out.cert.ap_threshold = thr;
      out.cert.via_oracle = true;
      out.cert.verified = true;
      out.cert_produced = true;
      out.rec.branch = "many_aps";
      out.rec.path = "oracle";
      out.rec.fallback = true;
      out.ok = true;
      return out;
    }
    int nn = static_cast<int>(g.rank());
    std::optional<BohrSet> best;
    Elem best_t = 0;
    double best_d = -1;
    auto consider = [&](const std::vector<Character>& rows) {
      BohrSet host = annihilator_subspace(g, rows);
      for (Elem t = 0; t < g.size(); ++t) {
        double dd = detail::translate_density(g, a, host.members(), t);
        if (dd > best_d + 1e-15) {
          best_d = dd;
          best = host;
          best_t = t;
        }
      }
    };
    for (int r = 0; r <= std::min(nn, cfg.oracle_codim); ++r)
      detail::enumerate_annihilators(g, r, consider);
    if (cfg.oracle_codim < nn) {
      // the zero subspace always qualifies as a host
      std::vector<Character> rows;
      for (int i = 0; i < nn; ++i) {
        Character c;
        c.exps.assign(static_cast<std::size_t>(nn), 0);
        c.exps[static_cast<std::size_t>(i)] = 1;
        rows.push_back(c);
      }
      consider(rows);
    }
    if (best && finish_increment(*best, best_t, "oracle subspace scan", true, ff_sigma))
      return out;
  }
  out.ok = false;
  return out;
}

// ---- cyclic step ----------------------------------------------------------------

inline StepResult cyclic_step(const GroupSpec& g, const GroupSet& a, const BohrSet& b,
                              const BohrSet& b1, const BohrSet& b2,
                              const PipelineConfig& cfg) {
  cfg.validate();
  if (a.empty()) throw std::invalid_argument("cyclic_step: empty A");
  if (!b.regular()) throw precondition_error("cyclic_step: B must be regular");
  if (!subset_of(a, b.members())) throw precondition_error("cyclic_step: A not inside B");

  StepResult out;
  const double n = static_cast<double>(g.size());
  double alpha = static_cast<double>(a.size()) / static_cast<double>(b.size());
  out.rec.old_density = alpha;
  out.rec.path = "lemma";
  double many_thr = 0.25 * alpha * alpha * alpha * n * n * b1.density() * b2.density();
  const double min_sigma = 1.0 + std::pow(2.0, -12);
  out.rec.residuals.emplace_back("mu_b1", b1.density());
  out.rec.residuals.emplace_back("mu_b2", b2.density());

  auto finish_increment = [&](const BohrSet& host, Elem translate, const std::string& detail,
                              bool oracle_path) -> bool {
    if (host.size() == 0) return false;
    double nd = detail::translate_density(g, a, host.members(), translate);
    double sigma = nd / alpha;
    if (!approx_ge(sigma, min_sigma)) return false;
    out.cert.kind = IncrementCertificate::Kind::density_increment;
    out.cert.host = host;
    out.cert.host_desc = describe_host(host, false);
    out.cert.translate = translate;
    out.cert.sigma = sigma;
    out.cert.old_density = alpha;
    out.cert.new_density = nd;
    out.cert.via_oracle = oracle_path;
    out.cert.verified = true;
    out.cert_produced = true;
    out.rec.branch = "increment";
    out.rec.detail = detail;
    out.rec.sigma = sigma;
    out.rec.host = out.cert.host_desc;
    out.rec.translate = translate;
    out.rec.new_density = nd;
    out.rec.path = oracle_path ? "oracle" : "lemma";
    out.rec.fallback = oracle_path;
    out.ok = true;
    return true;
  };

  auto finish_many = [&](double count, bool oracle_path, const std::string& detail) {
    out.cert.kind = IncrementCertificate::Kind::many_aps;
    out.cert.ap_count = count;
    out.cert.ap_threshold = many_thr;
    out.cert.via_oracle = oracle_path;
    out.cert.verified = approx_ge(count, many_thr);
    out.cert_produced = true;
    out.rec.branch = "many_aps";
    out.rec.detail = detail;
    out.rec.path = oracle_path ? "oracle" : "lemma";
    out.rec.fallback = oracle_path;
    out.ok = out.cert.verified;
  };

  try {
    double delta = b1.radius() / b.radius();
    auto nd = narrow_density_dichotomy(a, b, b1, b2, std::pow(2.0, -13), delta);
    if (nd.which == 2) {
      const BohrSet& host = nd.violator == 1 ? b1 : b2;
      if (finish_increment(host, g.neg(nd.witness), "narrow-density sup-norm witness", false))
        return out;
      throw internal_error("cyclic_step: narrow-density witness did not recount");
    }
    Elem y = g.neg(nd.witness);
    GroupSet shifted = translate_set(g, a, y);
    GroupSet a_prime = intersect_sets(shifted, b1.members());
    GroupSet a_second = intersect_sets(shifted, b2.members());
    if (a_prime.empty() || a_second.empty())
      throw not_found_error("cyclic_step: adjusted set misses the inner Bohr sets");
    double alpha_prime =
        static_cast<double>(a_prime.size()) / static_cast<double>(b1.size());
    out.rec.residuals.emplace_back("alpha_prime", alpha_prime);

    BohrSet bh = dilate_bohr_set(b2, 2);
    GroupSet c = dilate_set(g, a_second, 2);
    HolderLift hl = holder_lift(g, a_prime, b1, bh, c, cfg);
    out.rec.residuals.emplace_back("holder_case", static_cast<double>(hl.which_case));
    if (hl.which_case == 1) {
      auto cnt = count_3aps(g, a);
      finish_many(static_cast<double>(cnt.total), false, "holder case 1");
      if (!out.ok) throw internal_error("cyclic_step: holder case-1 count below threshold");
      return out;
    }
    if (hl.which_case == 2) {
      if (finish_increment(bh, g.sub(y, hl.witness), "holder case 2 on 2.B^2", false))
        return out;
      throw internal_error("cyclic_step: holder case-2 increment did not recount");
    }
    out.rec.p = hl.p;
    SiftOutcome sift =
        bohr_iterated_sift(g, a_prime, b1, *hl.b2, *hl.b3, hl.p, cfg.sift());
    out.rec.residuals.emplace_back("sift_sigma", sift.sigma);
    const BohrSet& b5 = *sift.bprime;
    const BohrSet& b6 = *sift.bdprime;
    Elem t6 = sift.translate;
    double inv_b1 = 1.0 / b1.density();
    double sigma_p = sift.sigma;

    int d6 = std::max(1, b6.rank());
    BohrSet b7 = nested_regular(b6, cfg.c / d6);
    const int k = 19;
    const double nu = std::pow(2.0, -18);  // (nu + 2^{1-k}) 2^8 <= 2^{-9}
    if (k > cfg.k_cap) throw resource_limit_error("cyclic_step: k exceeds k-cap");
    out.rec.k = k;
    out.rec.nu = nu;

    GroupSet window = translate_set(g, sumset(g, b5.members(), b6.members()), t6);
    GroupSet window_sym = canonical_set([&] {
      GroupSet w = window;
      GroupSet neg = negate_set(g, window);
      w.insert(w.end(), neg.begin(), neg.end());
      return w;
    }());
    GroupSet s_loc = intersect_sets(sift.level_set, window_sym);
    if (s_loc.empty()) throw not_found_error("cyclic_step: localized level set is empty");

    // doubling and density ratios consumed by the almost-periodicity size
    // bound; logged only
    out.rec.residuals.emplace_back(
        "ap_doubling_K",
        static_cast<double>(sumset(g, sift.a2, b7.members()).size()) /
            static_cast<double>(sift.a2.size()));
    out.rec.residuals.emplace_back("ap_eta", static_cast<double>(sift.a1.size()) /
                                                 static_cast<double>(s_loc.size()));
    GroupSet x = almost_periods(g, sift.a1, sift.a2, s_loc, b7.members(), k,
                                std::pow(2.0, -12));
    BohrSet b8 = chang_bohr(g, x, b7, nu);
    out.rec.sift = std::make_shared<SiftOutcome>(sift);
    for (Elem t : x) out.rec.x_elems.push_back(g.residues(t));
    for (const auto& ch : spectrum(g, x, 0.5).chars) out.rec.spectrum_exps.push_back(ch.exps);
    out.rec.residuals.emplace_back("chang_rank", static_cast<double>(b8.rank()));

    ProbMeasure mu_ap = normalized_indicator(g, a_prime);
    GroupFn gap = convolve(mu_ap.fn, mu_ap.fn, Conv::circ);
    GroupFn g12 = convolve(normalized_indicator(g, sift.a1).fn,
                           normalized_indicator(g, sift.a2).fn, Conv::circ);
    GroupFn f = convolve(gap, g12, Conv::star);
    GroupFn fk = convolve(power_convolve(normalized_indicator(g, x).fn, k), f, Conv::star);
    double val0 = fk(0);
    out.rec.residuals.emplace_back("smoothed_at_0", val0);
    if (!approx_ge(val0, (1.0 - std::pow(2.0, -9)) * sigma_p * inv_b1))
      throw internal_error("cyclic_step: smoothed correlation at 0 too small");
    double shift_err = 0;
    for (Elem t : b8.members()) {
      double worst = 0;
      for (Elem yy = 0; yy < g.size(); ++yy)
        worst = std::max(worst, std::fabs(fk(g.add(yy, t)) - fk(yy)));
      shift_err = std::max(shift_err, worst);
    }
    out.rec.residuals.emplace_back("shift_err", shift_err);
    if (!approx_le(shift_err, std::pow(2.0, -9) * sigma_p * inv_b1))
      throw internal_error("cyclic_step: Chang-set shift error exceeded 2^-9 sigma mu(B1)^-1");
    GroupFn conv8 = convolve(mu_ap.fn, normalized_indicator(g, b8.members()).fn, Conv::star);
    Elem arg = 0;
    double mx = -1;
    for (Elem yy = 0; yy < g.size(); ++yy)
      if (conv8(yy) > mx) {
        mx = conv8(yy);
        arg = yy;
      }
    out.rec.residuals.emplace_back("sup_mu_Ap_conv_mu_B8", mx);
    if (!approx_ge(mx, (1.0 - std::pow(2.0, -8)) * sigma_p * inv_b1))
      throw internal_error("cyclic_step: averaging lower bound failed");
    if (finish_increment(b8, g.sub(y, arg), "sift + almost-periodicity + Chang Bohr set",
                         false))
      return out;
    throw internal_error("cyclic_step: Chang-set increment did not recount");
  } catch (const std::exception& e) {
    out.rec.residuals.emplace_back("lemma_path_failed", 1.0);
    out.rec.detail = std::string("lemma path: ") + e.what();
    if (!cfg.fallback_to_oracle) {
      out.ok = false;
      return out;
    }
  }

  // oracle fallback over a configured Bohr family
  {
    auto cnt = count_3aps(g, a);
    if (approx_ge(static_cast<double>(cnt.total), many_thr)) {
      finish_many(static_cast<double>(cnt.total), true, "direct count");
      return out;
    }
    std::vector<BohrSet> family;
    {
      std::vector<Character> zero_rows;
      for (std::size_t j = 0; j < g.rank(); ++j) {
        Character cch;
        cch.exps.assign(g.rank(), 0);
        cch.exps[j] = 1;
        zero_rows.push_back(cch);
      }
      family.push_back(bohr_build(g, zero_rows, 0.0));
    }
    family.push_back(b1);
    family.push_back(b2);
    for (double r : {0.5, 0.25}) {
      try {
        family.push_back(nested_regular(b1, r));
      } catch (const internal_error&) {
      }
    }
    for (const auto& host : family) {
      Elem best_t = 0;
      double best_d = -1;
      for (Elem t = 0; t < g.size(); ++t) {
        double dd = detail::translate_density(g, a, host.members(), t);
        if (dd > best_d + 1e-15) {
          best_d = dd;
          best_t = t;
        }
      }
      if (best_d / alpha >= min_sigma &&
          finish_increment(host, best_t, "oracle Bohr-family scan", true))
        return out;
    }
  }
  out.ok = false;
  return out;
}

// ---- outer drivers ----------------------------------------------------------------

struct ClosingInequality {
  bool emitted = false;
  double guaranteed = 0;
  double achieved = 0;
  double trivial_count = 0;
  bool ap_free_input = false;
  bool holds = false;
};

struct PipelineTrace {
  std::string mode;
  std::string group;
  std::int64_t initial_size = 0;
  double initial_density = 0;
  std::vector<StepRecord> steps;
  std::string status;  // complete | incomplete | falsified
  ClosingInequality closing;
  double sigma_product = 1.0;
  double sigma_budget = 0;
  // per-step snapshots so certificates can be re-verified from outside
  std::vector<IncrementCertificate> certs;
  std::vector<GroupSpec> step_groups;
  std::vector<GroupSet> step_sets;
};

namespace detail {

// basis of the nullspace of the RREF rows (the subspace itself), plus the
// coordinate extraction for re-coordinatizing the quotient step
struct SubspaceBasis {
  std::vector<int> free_cols;
  int dim = 0;
};

inline SubspaceBasis subspace_basis(const std::vector<Character>& rows, int n) {
  SubspaceBasis sb;
  std::vector<char> is_pivot(static_cast<std::size_t>(n), 0);
  for (const auto& r : rows) {
    for (int j = 0; j < n; ++j)
      if (r.exps[static_cast<std::size_t>(j)] != 0) {
        is_pivot[static_cast<std::size_t>(j)] = 1;
        break;
      }
  }
  for (int j = 0; j < n; ++j)
    if (!is_pivot[static_cast<std::size_t>(j)]) sb.free_cols.push_back(j);
  sb.dim = static_cast<int>(sb.free_cols.size());
  return sb;
}

}  // namespace detail

// project (A + t) cap V onto V's own coordinates (free columns of the
// annihilator's RREF)
inline std::pair<GroupSpec, GroupSet> project_to_subspace(const GroupSpec& g, const GroupSet& a,
                                                          const BohrSet& host, Elem translate) {
  int n = static_cast<int>(g.rank());
  std::int64_t q = g.factors()[0];
  auto sb = detail::subspace_basis(host.freqs(), n);
  GroupSpec g2 = sb.dim == 0 ? GroupSpec::make({1})
                             : GroupSpec::make(std::vector<std::int64_t>(
                                   static_cast<std::size_t>(sb.dim), q));
  if (static_cast<std::int64_t>(host.members().size()) != g2.size())
    throw internal_error("project_to_subspace: host size disagrees with its annihilator rank");
  Bitset abits = to_bitset(g, a);
  GroupSet out;
  for (Elem v : host.members()) {
    if (!abits.test(g.sub(v, translate))) continue;  // v in (A + t) iff v - t in A
    if (sb.dim == 0) {
      out.push_back(0);
      continue;
    }
    auto res = g.residues(v);
    std::vector<std::int64_t> coords(static_cast<std::size_t>(sb.dim));
    for (int i = 0; i < sb.dim; ++i)
      coords[static_cast<std::size_t>(i)] = res[static_cast<std::size_t>(sb.free_cols[i])];
    out.push_back(g2.index(coords));
  }
  return {g2, canonical_set(std::move(out))};
}

inline PipelineTrace drive(const GroupSpec& g0, const GroupSet& a0, const std::string& mode,
                           PipelineConfig cfg) {
  cfg.validate();
  if (a0.empty()) throw std::invalid_argument("drive: empty A");
  PipelineTrace tr;
  tr.mode = mode;
  tr.group = g0.descriptor();
  tr.initial_size = static_cast<std::int64_t>(a0.size());
  tr.initial_density = static_cast<double>(a0.size()) / static_cast<double>(g0.size());
  tr.sigma_budget = 1.0 / tr.initial_density;
  tr.status = "incomplete";

  auto emit_closing = [&](const GroupSpec& g, const GroupSet& a, double guaranteed) {
    auto cnt = count_3aps(g, a);
    tr.closing.emitted = true;
    tr.closing.guaranteed = guaranteed;
    tr.closing.achieved = static_cast<double>(cnt.total);
    tr.closing.trivial_count = static_cast<double>(a0.size());
    tr.closing.ap_free_input = is_ap_free(g0, a0);
    tr.closing.holds = approx_ge(tr.closing.achieved, tr.closing.guaranteed);
  };

  if (mode == "ff") {
    if (!g0.is_prime_power_vector() || g0.factors()[0] < 3)
      throw std::invalid_argument("drive: ff mode needs F_q^n with q >= 3 prime");
    GroupSpec g = g0;
    GroupSet a = a0;
    for (int j = 1; j <= cfg.j_cap; ++j) {
      StepResult sr = ff_step(g, a, cfg);
      sr.rec.j = j;
      tr.steps.push_back(sr.rec);
      tr.certs.push_back(sr.cert);
      tr.step_groups.push_back(g);
      tr.step_sets.push_back(a);
      if (!sr.ok) {
        tr.status = sr.cert_produced ? "falsified" : "incomplete";
        return tr;
      }
      if (sr.cert.kind == IncrementCertificate::Kind::many_aps) {
        tr.status = "complete";
        emit_closing(g, a, sr.cert.ap_threshold);
        return tr;
      }
      tr.sigma_product *= sr.cert.sigma;
      auto [g2, a2] = project_to_subspace(g, a, *sr.cert.host, sr.cert.translate);
      g = std::move(g2);
      a = std::move(a2);
    }
    return tr;
  }

  if (mode == "cyclic") {
    if (g0.rank() != 1) throw std::invalid_argument("drive: cyclic mode needs Z/N");
    if (g0.size() % 2 == 0) throw std::invalid_argument("drive: cyclic mode needs N odd");
    GroupSpec g = g0;
    // ambient host: trivial frequency, rank 1, radius 1; equals G and is regular
    BohrSet b = bohr_build(g, {Character{{0}}}, 1.0);
    GroupSet a = a0;
    for (int j = 1; j <= cfg.j_cap; ++j) {
      int d = std::max(1, b.rank());
      BohrSet b1 = nested_regular(b, cfg.c / d);
      BohrSet b2 = nested_regular(b1, cfg.c / (2.0 * d));
      StepResult sr = cyclic_step(g, a, b, b1, b2, cfg);
      sr.rec.j = j;
      tr.steps.push_back(sr.rec);
      tr.certs.push_back(sr.cert);
      tr.step_groups.push_back(g);
      tr.step_sets.push_back(a);
      if (!sr.ok) {
        tr.status = sr.cert_produced ? "falsified" : "incomplete";
        return tr;
      }
      if (sr.cert.kind == IncrementCertificate::Kind::many_aps) {
        tr.status = "complete";
        emit_closing(g, a, sr.cert.ap_threshold);
        return tr;
      }
      tr.sigma_product *= sr.cert.sigma;
      b = *sr.cert.host;
      a = intersect_sets(translate_set(g, a, sr.cert.translate), b.members());
      if (a.empty()) {
        tr.status = "falsified";  // a verified increment cannot produce an empty set
        return tr;
      }
    }
    return tr;
  }

  throw std::invalid_argument("drive: mode must be ff or cyclic");
}

}  // namespace apsift

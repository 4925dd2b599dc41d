#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apsift/bohr.hpp"
#include "apsift/group.hpp"
#include "apsift/harmonic.hpp"
#include "apsift/util.hpp"

namespace apsift {

struct SiftConfig {
  std::int64_t exhaustive_cap = 10'000'000;  // enumerate s in G^p when |G|^p <= cap
  int sample_draws = 200;
  std::uint64_t seed = 1;
  double c = 1.0 / (8192.0 * 100.0);  // Bohr narrowing constant
  int j_cap_slack = 2;
};

// smallest integer q >= base with 4 (1-eps)^q <= delta
inline int boost_exponent(int base, double eps, double delta) {
  double need = std::ceil(std::log(4.0 / delta) / -std::log1p(-eps));
  return std::max(base, static_cast<int>(need));
}

// ---- the exact weighted-sifting identity -----------------------------------

struct SiftIdentity {
  double lhs = 0;
  double rhs = 0;
  double prob_total = 0;   // sum of P(s); a probability measure, so 1
  bool prob_defined = false;  // false when ||mu_A o mu_A||_{p(mu)} = 0
};

inline SiftIdentity sift_identity(const GroupSpec& g, const GroupSet& a, const GroupSet& c1,
                                  const GroupSet& c2, int p, const GroupFn& f,
                                  std::int64_t cap = 10'000'000) {
  if (a.empty() || c1.empty() || c2.empty())
    throw std::invalid_argument("sift_identity: sets must be non-empty");
  if (p < 1) throw std::invalid_argument("sift_identity: p >= 1");
  double tuple_count = std::pow(static_cast<double>(g.size()), p);
  if (tuple_count > static_cast<double>(cap))
    throw resource_limit_error("sift_identity: |G|^p exceeds enumeration cap");

  const double n = static_cast<double>(g.size());
  double alpha = static_cast<double>(a.size()) / n;
  double g1 = static_cast<double>(c1.size()) / n;
  double g2 = static_cast<double>(c2.size()) / n;

  ProbMeasure mu_a = normalized_indicator(g, a);
  GroupFn gg = convolve(mu_a.fn, mu_a.fn, Conv::circ);
  ProbMeasure mu(convolve(normalized_indicator(g, c1).fn, normalized_indicator(g, c2).fn,
                          Conv::circ),
                 false);

  SiftIdentity out;
  out.lhs = inner(pointwise_pow(gg, p), f, mu);

  Bitset c1bits = to_bitset(g, c1), c2bits = to_bitset(g, c2);
  double norm_p = lp_norm(gg, p, mu);
  out.prob_defined = norm_p > 0;
  double prob_denom = std::pow(n, p) * std::pow(alpha, 2 * p) * g1 * g2 * std::pow(norm_p, p);
  std::vector<Elem> s(static_cast<std::size_t>(p), 0);
  double sum = 0, prob = 0;
  while (true) {
    Bitset b1 = c1bits, b2 = c2bits;
    for (Elem sh : s) {
      Bitset shifted(g.size());
      for (Elem x : a) shifted.set(g.add(x, sh));
      b1.intersect_with(shifted);
      b2.intersect_with(shifted);
    }
    std::int64_t n1 = b1.count(), n2 = b2.count();
    if (n1 > 0 && n2 > 0) {
      double a1 = static_cast<double>(n1) / n, a2 = static_cast<double>(n2) / n;
      sum += a1 * a2 * circ_inner_sets(g, b1.members(), b2.members(), f);
      if (out.prob_defined) prob += a1 * a2 / prob_denom;
    }
    int j = p - 1;
    while (j >= 0 && ++s[static_cast<std::size_t>(j)] == g.size())
      s[static_cast<std::size_t>(j--)] = 0;
    if (j < 0) break;
  }
  out.rhs = sum / (std::pow(n, p) * std::pow(alpha, 2 * p) * g1 * g2);
  out.prob_total = prob;
  return out;
}

// ---- Markov search sift -----------------------------------------------------

struct WeightedSiftResult {
  GroupSet a1, a2;
  double norm = 0;        // ||mu_A o mu_A||_{p(mu_{C1} o mu_{C2})}
  double level = 0;       // (1 - eps) * norm
  double corr_high = 0;   // <mu_{A1} o mu_{A2}, 1_{G \ S}>
  double corr_bound = 0;  // 1 - 4 (1-eps)^p
  double dens1 = 0, dens2 = 0;  // relative densities in C1, C2
  double dens_bound_log = 0;    // log((1/4) alpha^p)
  bool sampled = false;
  int draws = 0;
  std::vector<Elem> shifts;  // distinct shift values of the accepted tuple
};

// Markov-search sift.  Finds s in G^p such that A_i(s) = C_i cap (A+s_1)
// cap ... cap (A+s_p) have relative density >= (1/4) alpha^p in C_i and
// mu_{A1(s)} o mu_{A2(s)} puts mass <= 4(1-eps)^p below the level
// (1-eps)||mu_A o mu_A||_{p(mu)}.  alpha_rel is the relative density of A
// in its container, beta the container's density in G (the hypothesis is
// ||mu_A o mu_A||_{p(mu)} >= beta^{-1}).  Exhaustive enumeration when
// |G|^p is small; otherwise the tuple is drawn from the measure
// P(s) ~ alpha_1(s) alpha_2(s) via its two-point factorization, which
// inherits Markov's >= 1/4 acceptance rate.
inline WeightedSiftResult weighted_sift(const GroupSpec& g, const GroupSet& a, double alpha_rel,
                                        double beta, const GroupSet& c1, const GroupSet& c2,
                                        int p, double eps, const SiftConfig& cfg, Rng& rng) {
  if (a.empty() || c1.empty() || c2.empty())
    throw std::invalid_argument("weighted_sift: sets must be non-empty");
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("weighted_sift: eps in (0,1)");
  if (p < 1) throw std::invalid_argument("weighted_sift: p >= 1");

  const double n = static_cast<double>(g.size());
  ProbMeasure mu_a = normalized_indicator(g, a);
  GroupFn gg = convolve(mu_a.fn, mu_a.fn, Conv::circ);
  ProbMeasure mu(convolve(normalized_indicator(g, c1).fn, normalized_indicator(g, c2).fn,
                          Conv::circ),
                 false);
  double norm = lp_norm(gg, static_cast<double>(p), mu);
  if (!approx_ge(norm, 1.0 / beta, 1e-9))
    throw precondition_error("weighted_sift: ||mu_A o mu_A||_{p(mu)} >= beta^{-1} fails");

  WeightedSiftResult out;
  out.norm = norm;
  out.level = (1.0 - eps) * norm;
  out.dens_bound_log = std::log(0.25) + p * std::log(alpha_rel);
  double corr_low_bound;  // 4 (1-eps)^p, log-safe
  {
    double lg = std::log(4.0) + p * std::log1p(-eps);
    corr_low_bound = lg < -700 ? 0.0 : std::exp(lg);
  }
  out.corr_bound = 1.0 - corr_low_bound;

  GroupFn low_ind(g, 0.0);
  for (Elem x = 0; x < g.size(); ++x)
    if (gg(x) <= out.level) low_ind[x] = 1.0;

  auto try_tuple = [&](const Bitset& b1, const Bitset& b2) -> bool {
    std::int64_t n1 = b1.count(), n2 = b2.count();
    if (n1 == 0 || n2 == 0) return false;
    double d1 = static_cast<double>(n1) / static_cast<double>(c1.size());
    double d2 = static_cast<double>(n2) / static_cast<double>(c2.size());
    if (std::log(d1) < out.dens_bound_log - 1e-12 || std::log(d2) < out.dens_bound_log - 1e-12)
      return false;
    auto m1 = b1.members(), m2 = b2.members();
    double corr_low = circ_inner_sets(g, m1, m2, low_ind);
    if (corr_low > corr_low_bound + 1e-12) return false;
    out.a1 = std::move(m1);
    out.a2 = std::move(m2);
    out.dens1 = d1;
    out.dens2 = d2;
    out.corr_high = 1.0 - corr_low;
    return true;
  };

  Bitset abits = to_bitset(g, a);
  Bitset c1bits = to_bitset(g, c1), c2bits = to_bitset(g, c2);
  auto shifted_bits = [&](Elem sh) {
    Bitset bs(g.size());
    for (Elem x : a) bs.set(g.add(x, sh));
    return bs;
  };

  if (std::pow(n, p) <= static_cast<double>(cfg.exhaustive_cap)) {
    std::vector<Elem> s(static_cast<std::size_t>(p), 0);
    while (true) {
      Bitset b1 = c1bits, b2 = c2bits;
      for (Elem sh : s) {
        Bitset bs = shifted_bits(sh);
        b1.intersect_with(bs);
        b2.intersect_with(bs);
      }
      if (try_tuple(b1, b2)) {
        out.shifts = canonical_set(s);
        return out;
      }
      int j = p - 1;
      while (j >= 0 && ++s[static_cast<std::size_t>(j)] == g.size())
        s[static_cast<std::size_t>(j--)] = 0;
      if (j < 0) break;
    }
    throw internal_error("weighted_sift: exhaustive enumeration found no tuple");
  }

  // sampling: difference x with weight cnt(x) n(x)^p, then c1 uniform among
  // pairs realizing x, then p shifts uniform from {c1 - u : u, u+x in A}
  std::vector<std::int64_t> pair_diff(static_cast<std::size_t>(g.size()), 0);
  for (Elem u : c1)
    for (Elem v : c2) ++pair_diff[static_cast<std::size_t>(g.sub(v, u))];
  std::vector<std::int64_t> auto_corr(static_cast<std::size_t>(g.size()), 0);
  for (Elem u : a)
    for (Elem v : a) ++auto_corr[static_cast<std::size_t>(g.sub(v, u))];
  std::vector<Elem> diffs;
  std::vector<double> logw;
  for (Elem x = 0; x < g.size(); ++x) {
    auto pd = pair_diff[static_cast<std::size_t>(x)];
    auto ac = auto_corr[static_cast<std::size_t>(x)];
    if (pd > 0 && ac > 0) {
      diffs.push_back(x);
      logw.push_back(std::log(static_cast<double>(pd)) +
                     static_cast<double>(p) * std::log(static_cast<double>(ac)));
    }
  }
  if (diffs.empty()) throw internal_error("weighted_sift: tuple measure is empty");
  double mx = *std::max_element(logw.begin(), logw.end());
  std::vector<double> cdf(logw.size());
  double acc = 0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    acc += std::exp(logw[i] - mx);
    cdf[i] = acc;
  }
  for (int draw = 0; draw < cfg.sample_draws; ++draw) {
    out.draws = draw + 1;
    double r = rng.unit() * acc;
    std::size_t pick =
        static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
    if (pick >= diffs.size()) pick = diffs.size() - 1;
    Elem x = diffs[pick];
    std::vector<Elem> c1cands;
    for (Elem u : c1)
      if (c2bits.test(g.add(u, x))) c1cands.push_back(u);
    Elem cc1 =
        c1cands[static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(c1cands.size())))];
    std::vector<Elem> ivals;
    for (Elem u : a)
      if (abits.test(g.add(u, x))) ivals.push_back(g.sub(cc1, u));
    std::vector<Elem> picked(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i)
      picked[static_cast<std::size_t>(i)] =
          ivals[static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(ivals.size())))];
    GroupSet uniq = canonical_set(picked);
    Bitset b1 = c1bits, b2 = c2bits;
    for (Elem sh : uniq) {
      Bitset bs = shifted_bits(sh);
      b1.intersect_with(bs);
      b2.intersect_with(bs);
    }
    if (try_tuple(b1, b2)) {
      out.sampled = true;
      out.shifts = std::move(uniq);
      return out;
    }
  }
  throw not_found_error("weighted_sift: sampling exhausted without an admissible tuple");
}

// argmax over t in P - Q of E_{u in P, v in Q} gp(v - u + t); realizes the
// decomposition mu_P o mu_P * mu_Q o mu_Q = E_t mu_P o mu_{Q + t}.  The
// histogram of differences keeps this near |G| |supp| instead of
// |P||Q||G|.
inline Elem best_decomposition_shift(const GroupSpec& g, const GroupFn& gp, const GroupSet& p_set,
                                     const GroupSet& q_set) {
  std::vector<std::int64_t> h(static_cast<std::size_t>(g.size()), 0);
  for (Elem u : p_set)
    for (Elem v : q_set) ++h[static_cast<std::size_t>(g.sub(v, u))];
  std::vector<Elem> supp;
  for (Elem w = 0; w < g.size(); ++w)
    if (h[static_cast<std::size_t>(w)] > 0) supp.push_back(w);
  Elem best_t = 0;
  double best = -1.0;
  for (Elem w : supp) {
    Elem t = g.neg(w);  // candidates are P - Q, the negatives of the support
    double s = 0;
    for (Elem ww : supp) s += static_cast<double>(h[static_cast<std::size_t>(ww)]) * gp(g.add(ww, t));
    if (s > best) {
      best = s;
      best_t = t;
    }
  }
  return best_t;
}

// ---- iterated sifting ---------------------------------------------------------

struct ChainStep {
  int j = 0;
  std::int64_t size1 = 0, size2 = 0;
  double zeta1 = 0, zeta2 = 0;  // relative densities in their hosts
  double corr = 0;              // chain correlation / doubling value
  double ratio = 0;             // corr / previous corr
  int via_case = 0;             // which localized-sift case extended the chain
};

struct SiftOutcome {
  double sigma = 0;
  GroupSet level_set;  // S
  GroupSet a1, a2;
  double corr_s = 0;  // <1_S, mu_{A1} o mu_{A2}>
  double corr_s_bound = 0;
  double self1 = 0, self2 = 0;  // <mu_A o mu_A, mu_{A_i} o mu_{A_i}>
  double self_bound = 0;
  double dens1 = 0, dens2 = 0;
  std::vector<ChainStep> chain;
  bool has_hosts = false;
  std::optional<BohrSet> bprime, bdprime;
  Elem translate = 0;
  int p_used = 0, q_used = 0;
  bool sampled = false;
};

// Finite-field iterated sift: sift against the ambient group, then chase
// the doubling chain of sets whose self-correlation violates the 2 sigma
// bound; the exit certificate is re-verified before returning.
inline SiftOutcome ff_iterated_sift(const GroupSpec& g, const GroupSet& a, int p,
                                    const SiftConfig& cfg) {
  if (a.empty()) throw std::invalid_argument("ff_iterated_sift: empty A");
  const double n = static_cast<double>(g.size());
  double alpha = static_cast<double>(a.size()) / n;
  ProbMeasure mu_a = normalized_indicator(g, a);
  GroupFn gg = convolve(mu_a.fn, mu_a.fn, Conv::circ);
  if (!approx_ge(lp_norm(gg, p), 1.0 + 0.125))
    throw precondition_error("ff_iterated_sift: ||mu_A o mu_A||_p >= 1 + 2^-3 fails");

  Rng rng(cfg.seed);
  const double eps = std::pow(2.0, -7);
  int q = boost_exponent(p, eps, eps);

  GroupSet whole(static_cast<std::size_t>(g.size()));
  for (Elem x = 0; x < g.size(); ++x) whole[static_cast<std::size_t>(x)] = x;

  SiftOutcome out;
  out.p_used = p;
  out.q_used = q;

  auto self_corr = [&](const GroupSet& z) { return circ_inner_sets(g, z, z, gg); };

  WeightedSiftResult ws = weighted_sift(g, a, alpha, 1.0, whole, whole, q, eps, cfg, rng);
  out.sampled = ws.sampled;
  double sigma = ws.norm;
  double t1 = self_corr(ws.a1), t2 = self_corr(ws.a2);
  int j_cap = static_cast<int>(std::ceil(std::log2(1.0 / alpha))) + cfg.j_cap_slack;

  if (t1 > 2.0 * sigma || t2 > 2.0 * sigma) {
    bool pick1 = t1 > 2.0 * sigma;
    GroupSet chain_set = pick1 ? ws.a1 : ws.a2;
    double d = pick1 ? t1 : t2;
    {
      ChainStep st;
      st.j = 1;
      st.size1 = static_cast<std::int64_t>(chain_set.size());
      st.zeta1 = static_cast<double>(chain_set.size()) / n;
      st.corr = d;
      out.chain.push_back(st);
    }
    int q1 = boost_exponent(1, eps, eps);
    while (true) {
      if (static_cast<int>(out.chain.size()) > j_cap)
        throw internal_error("ff_iterated_sift: doubling chain exceeded its cap");
      WeightedSiftResult wj =
          weighted_sift(g, a, alpha, 1.0, chain_set, chain_set, q1, eps, cfg, rng);
      out.sampled = out.sampled || wj.sampled;
      double u1 = self_corr(wj.a1), u2 = self_corr(wj.a2);
      if (u1 >= 2.0 * d || u2 >= 2.0 * d) {
        bool ext1 = u1 >= 2.0 * d;
        GroupSet next = ext1 ? wj.a1 : wj.a2;
        double dn = ext1 ? u1 : u2;
        ChainStep st;
        st.j = static_cast<int>(out.chain.size()) + 1;
        st.size1 = static_cast<std::int64_t>(next.size());
        st.zeta1 = static_cast<double>(next.size()) / static_cast<double>(chain_set.size());
        st.corr = dn;
        st.ratio = dn / d;
        out.chain.push_back(st);
        chain_set = std::move(next);
        d = dn;
        continue;
      }
      sigma = wj.norm;
      ws = std::move(wj);
      break;
    }
  }

  out.sigma = sigma;
  out.a1 = ws.a1;
  out.a2 = ws.a2;
  out.dens1 = static_cast<double>(out.a1.size()) / n;
  out.dens2 = static_cast<double>(out.a2.size()) / n;
  out.level_set = super_level_set(gg, (1.0 - eps) * sigma);
  out.corr_s = circ_inner_sets(g, out.a1, out.a2, indicator(g, out.level_set));
  out.corr_s_bound = 1.0 - eps;
  out.self1 = self_corr(out.a1);
  out.self2 = self_corr(out.a2);
  out.self_bound = 2.0 * sigma;

  if (!approx_ge(out.corr_s, out.corr_s_bound))
    throw internal_error("ff_iterated_sift: level-set correlation conclusion failed");
  if (!approx_le(out.self1, out.self_bound) || !approx_le(out.self2, out.self_bound))
    throw internal_error("ff_iterated_sift: self-correlation conclusion failed");
  if (!approx_ge(out.sigma, 1.0 + 0.125) || !approx_le(out.sigma, 1.0 / alpha))
    throw internal_error("ff_iterated_sift: sigma outside [1 + 2^-3, alpha^{-1}]");
  return out;
}

// ---- localized sift (Bohr hosts) ----------------------------------------------

struct LocalizedSift {
  int which_case = 0;  // 1: translate search, 2: weighted sift at level 8 sigma
  BohrSet bprime, bdprime;
  Elem translate = 0;
  GroupSet a1, a2;
  double corr = 0;  // <mu_A o mu_A, mu_{A1} o mu_{A2}>, re-verified >= sigma
  double dens1 = 0, dens2 = 0;
  int p_used = 0;
  bool sampled = false;
};

// Splits on sup_t ||mu_A o mu_A||_{p(mu_{B^2+t})} vs 8 sigma: below, a
// translate of C already correlates (case 1); above, sift inside a
// narrower pair of Bohr sets (case 2).  All powers of mu_A o mu_A are
// taken after normalizing by its sup so large p cannot overflow.
inline LocalizedSift localized_sift(const GroupSpec& g, const GroupSet& a, const BohrSet& b,
                                    const BohrSet& b1, const GroupSet& c_set, double sigma,
                                    const SiftConfig& cfg, Rng& rng) {
  if (a.empty() || c_set.empty()) throw std::invalid_argument("localized_sift: empty set");
  if (!b.regular() || !b1.regular())
    throw precondition_error("localized_sift: hosts must be regular");
  if (!subset_of(a, b.members())) throw precondition_error("localized_sift: A not inside B");
  if (!subset_of(c_set, b1.members()))
    throw precondition_error("localized_sift: C not inside B^1");
  double inv_b = 1.0 / b.density();
  if (!approx_ge(sigma, inv_b, 1e-9))
    throw precondition_error("localized_sift: sigma >= mu(B)^{-1} required");

  ProbMeasure mu_a = normalized_indicator(g, a);
  GroupFn gg = convolve(mu_a.fn, mu_a.fn, Conv::circ);
  {
    double hyp = circ_inner_sets(g, c_set, c_set, gg);
    if (!approx_ge(hyp, 128.0 * sigma))
      throw precondition_error("localized_sift: <mu_A o mu_A, mu_C o mu_C> >= 2^7 sigma fails");
  }

  double alpha_rel = static_cast<double>(a.size()) / static_cast<double>(b.size());
  double gamma = static_cast<double>(c_set.size()) / static_cast<double>(b1.size());
  auto lo = [](double x) { return std::log(2.0 / x); };
  int p = std::max({3, static_cast<int>(std::ceil(lo(gamma) / lo(alpha_rel))),
                    static_cast<int>(std::ceil(lo(alpha_rel) / std::log(2.0)))});

  int d = std::max(1, b1.rank());
  BohrSet b2 = nested_regular(b1, cfg.c / d);
  BohrSet b0 = b1.dilate(1.0 + 1.0 / (200.0 * d));

  double gmax = sup_norm(gg);
  GroupFn gp(g, 0.0);  // (gg / gmax)^p, values in [0,1]
  for (Elem x = 0; x < g.size(); ++x) gp[x] = std::pow(gg(x) / gmax, p);

  bool case2 = false;
  if (8.0 * sigma <= gmax) {
    double thr_log = p * std::log(8.0 * sigma / gmax);
    for (Elem t = 0; t < g.size() && !case2; ++t) {
      double s = 0;
      for (Elem x : b2.members()) s += gp(g.add(t, x));
      s /= static_cast<double>(b2.size());
      if (s > 0 && std::log(s) >= thr_log) case2 = true;
    }
  }

  LocalizedSift out;
  out.p_used = p;

  if (case2) {
    BohrSet bp = nested_regular(b2, cfg.c / d);
    BohrSet bpp = nested_regular(bp, cfg.c / d);
    // t' from nu = E_{t' ~ law(b' - b'')} mu_{B'} o mu_{B'' + t'}
    Elem best_t = best_decomposition_shift(g, gp, bp.members(), bpp.members());
    GroupSet c2t = translate_set(g, bpp.members(), best_t);
    WeightedSiftResult ws =
        weighted_sift(g, a, alpha_rel, b.density(), bp.members(), c2t, p, 0.5, cfg, rng);
    out.which_case = 2;
    out.sampled = ws.sampled;
    out.bprime = bp;
    out.bdprime = bpp;
    out.translate = best_t;
    out.a1 = ws.a1;
    out.a2 = ws.a2;
    out.dens1 = ws.dens1;
    out.dens2 = ws.dens2;
  } else {
    out.which_case = 1;
    Bitset cbits = to_bitset(g, c_set);
    std::optional<Elem> found;
    GroupSet found_slice;
    for (Elem y : b0.members()) {
      GroupSet slice;
      for (Elem x : b2.members()) {
        Elem cand = g.add(x, y);
        if (cbits.test(cand)) slice.push_back(cand);
      }
      if (slice.empty()) continue;
      double gy = static_cast<double>(slice.size()) / static_cast<double>(b2.size());
      if (gy + 1e-12 < alpha_rel * gamma) continue;
      GroupSet cslice = canonical_set(slice);
      double corr = circ_inner_sets(g, c_set, cslice, gg);
      if (approx_ge(corr, 64.0 * sigma)) {
        found = y;
        found_slice = std::move(cslice);
        break;
      }
    }
    if (!found) throw internal_error("localized_sift: case-1 scan found no admissible slice");
    out.bprime = b1;
    out.bdprime = b2;
    out.translate = *found;
    out.a1 = c_set;
    out.a2 = found_slice;
    out.dens1 = gamma;
    out.dens2 = static_cast<double>(found_slice.size()) / static_cast<double>(b2.size());
  }

  out.corr = circ_inner_sets(g, out.a1, out.a2, gg);
  if (!approx_ge(out.corr, sigma))
    throw internal_error("localized_sift: correlation conclusion < sigma");
  return out;
}

// ---- Bohr-set iterated sift -----------------------------------------------------

// Chain of localized sifts inside nested regular Bohr sets; the final
// sift's pair is accepted once its self-correlations fall under 2^8 times
// the chain correlation, mirroring the maximal-chain construction.
inline SiftOutcome bohr_iterated_sift(const GroupSpec& g, const GroupSet& a, const BohrSet& b,
                                      const BohrSet& b1, const BohrSet& b2, int p,
                                      const SiftConfig& cfg) {
  if (a.empty()) throw std::invalid_argument("bohr_iterated_sift: empty A");
  if (!b.regular() || !b1.regular() || !b2.regular())
    throw precondition_error("bohr_iterated_sift: hosts must be regular");
  if (!subset_of(a, b.members()))
    throw precondition_error("bohr_iterated_sift: A not inside B");
  if (b2.table() != b1.table())
    throw precondition_error("bohr_iterated_sift: B^2 must be a dilate of B^1");

  Rng rng(cfg.seed);
  double beta = b.density();
  double inv_b = 1.0 / beta;
  double alpha_rel = static_cast<double>(a.size()) / static_cast<double>(b.size());

  ProbMeasure mu_a = normalized_indicator(g, a);
  GroupFn gg = convolve(mu_a.fn, mu_a.fn, Conv::circ);
  {
    ProbMeasure m1 = normalized_indicator(g, b1.members());
    ProbMeasure m2 = normalized_indicator(g, b2.members());
    ProbMeasure nu(convolve(convolve(m1.fn, m1.fn, Conv::circ),
                            convolve(m2.fn, m2.fn, Conv::circ), Conv::star),
                   false);
    if (!approx_ge(lp_norm(gg, static_cast<double>(p), nu), (1.0 + std::pow(2.0, -5)) * inv_b))
      throw precondition_error("bohr_iterated_sift: L^p hypothesis fails");
  }

  const double eps1 = std::pow(2.0, -7);
  int p_eff = boost_exponent(p, eps1, eps1);

  double gmax = sup_norm(gg);
  GroupFn gp(g, 0.0);
  for (Elem x = 0; x < g.size(); ++x) gp[x] = std::pow(gg(x) / gmax, p);

  Elem t1 = best_decomposition_shift(g, gp, b1.members(), b2.members());

  SiftOutcome out;
  out.p_used = p;
  out.q_used = p_eff;

  BohrSet cur1 = b1, cur2 = b2;
  Elem cur_t = t1;
  WeightedSiftResult ws = weighted_sift(g, a, alpha_rel, beta, b1.members(),
                                        translate_set(g, b2.members(), t1), p_eff, eps1, cfg,
                                        rng);
  out.sampled = ws.sampled;
  GroupSet z1 = ws.a1, z2 = ws.a2;
  double w = circ_inner_sets(g, z1, z2, gg);
  {
    ChainStep st;
    st.j = 1;
    st.size1 = static_cast<std::int64_t>(z1.size());
    st.size2 = static_cast<std::int64_t>(z2.size());
    st.zeta1 = static_cast<double>(z1.size()) / static_cast<double>(cur1.size());
    st.zeta2 = static_cast<double>(z2.size()) / static_cast<double>(cur2.size());
    st.corr = w;
    out.chain.push_back(st);
  }

  const double eps2 = std::pow(2.0, -10);
  int q = boost_exponent(1, eps2, std::pow(2.0, -12));
  int j_cap = static_cast<int>(std::ceil(std::log2(1.0 / alpha_rel))) + cfg.j_cap_slack;

  while (true) {
    WeightedSiftResult wf = weighted_sift(g, a, alpha_rel, beta, z1, z2, q, eps2, cfg, rng);
    out.sampled = out.sampled || wf.sampled;
    double u1 = circ_inner_sets(g, wf.a1, wf.a1, gg);
    double u2 = circ_inner_sets(g, wf.a2, wf.a2, gg);
    if (u1 <= 256.0 * w && u2 <= 256.0 * w) {
      out.sigma = w * beta;
      out.a1 = wf.a1;
      out.a2 = wf.a2;
      out.self1 = u1;
      out.self2 = u2;
      out.self_bound = 256.0 * w;
      break;
    }
    if (static_cast<int>(out.chain.size()) > j_cap)
      throw internal_error("bohr_iterated_sift: chain exceeded its cap");
    int viol = u1 > 256.0 * w ? 1 : 2;
    GroupSet c_next = viol == 1 ? wf.a1 : translate_set(g, wf.a2, g.neg(cur_t));
    const BohrSet& host_next = viol == 1 ? cur1 : cur2;
    LocalizedSift ls = localized_sift(g, a, b, host_next, c_next, 2.0 * w, cfg, rng);
    out.sampled = out.sampled || ls.sampled;
    cur1 = ls.bprime;
    cur2 = ls.bdprime;
    cur_t = ls.translate;
    z1 = ls.a1;
    z2 = ls.a2;
    ChainStep st;
    st.j = static_cast<int>(out.chain.size()) + 1;
    st.size1 = static_cast<std::int64_t>(z1.size());
    st.size2 = static_cast<std::int64_t>(z2.size());
    st.zeta1 = static_cast<double>(z1.size()) / static_cast<double>(cur1.size());
    st.zeta2 = static_cast<double>(z2.size()) / static_cast<double>(cur2.size());
    st.corr = ls.corr;
    st.ratio = ls.corr / w;
    st.via_case = ls.which_case;
    out.chain.push_back(st);
    w = ls.corr;
  }

  out.has_hosts = true;
  out.bprime = cur1;
  out.bdprime = cur2;
  out.translate = cur_t;
  out.dens1 = static_cast<double>(out.a1.size()) / static_cast<double>(cur1.size());
  out.dens2 = static_cast<double>(out.a2.size()) / static_cast<double>(cur2.size());
  out.level_set = super_level_set(gg, (1.0 - eps2) * out.sigma * inv_b);
  out.corr_s = circ_inner_sets(g, out.a1, out.a2, indicator(g, out.level_set));
  out.corr_s_bound = 1.0 - std::pow(2.0, -12);

  if (!approx_ge(out.corr_s, out.corr_s_bound))
    throw internal_error("bohr_iterated_sift: conclusion (1) failed");
  if (!approx_ge(out.sigma, 1.0 + std::pow(2.0, -7)) || !approx_le(out.sigma, 1.0 / alpha_rel))
    throw internal_error("bohr_iterated_sift: sigma outside [1 + 2^-7, alpha^{-1}]");
  return out;
}

}  // namespace apsift

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "apsift/bohr.hpp"
#include "apsift/extremal.hpp"
#include "apsift/group.hpp"
#include "apsift/harmonic.hpp"
#include "apsift/increment.hpp"
#include "apsift/periodicity.hpp"
#include "apsift/sift.hpp"
#include "apsift/util.hpp"

// Seeded verification suites shared by the acceptance binary and the
// `verify` subcommand of the CLI.  Every inequality asserted here is the
// displayed conclusion of one of the statements the library implements,
// evaluated directly.

namespace apsift::checks {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace gen {

inline GroupSpec random_group(Rng& rng, std::int64_t max_size, bool allow_two_factor = true) {
  if (allow_two_factor && max_size >= 4 && rng.below(2) == 0) {
    std::int64_t n1 = 2 + rng.below(std::max<std::int64_t>(1, max_size / 2 - 1));
    std::int64_t cap2 = std::max<std::int64_t>(2, max_size / n1);
    std::int64_t n2 = 2 + rng.below(std::max<std::int64_t>(1, cap2 - 1));
    return GroupSpec::make({n1, n2});
  }
  return GroupSpec::make({2 + rng.below(std::max<std::int64_t>(1, max_size - 1))});
}

inline GroupSet random_subset(const GroupSpec& g, Rng& rng, double prob) {
  GroupSet a;
  for (int attempt = 0; attempt < 64; ++attempt) {
    a.clear();
    for (Elem x = 0; x < g.size(); ++x)
      if (rng.unit() < prob) a.push_back(x);
    if (!a.empty()) return a;
  }
  a.push_back(rng.below(g.size()));
  return a;
}

inline GroupFn random_fn(const GroupSpec& g, Rng& rng, double lo = -1.0, double hi = 1.0) {
  GroupFn f(g, 0.0);
  for (Elem x = 0; x < g.size(); ++x) f[x] = lo + (hi - lo) * rng.unit();
  return f;
}

inline ProbMeasure random_measure(const GroupSpec& g, Rng& rng) {
  GroupFn f(g, 0.0);
  double s = 0;
  for (Elem x = 0; x < g.size(); ++x) {
    f[x] = rng.unit();
    s += f[x];
  }
  double scale = static_cast<double>(g.size()) / s;
  for (Elem x = 0; x < g.size(); ++x) f[x] *= scale;
  return ProbMeasure(std::move(f), false);
}

inline ProbMeasure random_measure_on(const GroupSpec& g, const GroupSet& supp, Rng& rng) {
  GroupFn f(g, 0.0);
  double s = 0;
  for (Elem x : supp) {
    double v = 0.05 + rng.unit();
    f[x] = v;
    s += v;
  }
  double scale = static_cast<double>(g.size()) / s;
  for (Elem x : supp) f[x] *= scale;
  return ProbMeasure(std::move(f), false);
}

}  // namespace gen

// 1. weighted-sifting identity on seeded instances
inline Check sift_identity_suite(std::uint64_t seed, int instances = 500,
                                 std::int64_t gcap = 12) {
  Rng rng(seed);
  Check c{"sift-identity", true, ""};
  double worst = 0;
  for (int i = 0; i < instances; ++i) {
    GroupSpec g = gen::random_group(rng, gcap);
    GroupSet a = gen::random_subset(g, rng, 0.3 + 0.4 * rng.unit());
    GroupSet c1 = gen::random_subset(g, rng, 0.5);
    GroupSet c2 = gen::random_subset(g, rng, 0.5);
    GroupFn f = gen::random_fn(g, rng);
    int p = 1 + static_cast<int>(rng.below(2));
    auto r = sift_identity(g, a, c1, c2, p, f);
    double err = std::fabs(r.lhs - r.rhs) / std::max(1.0, std::fabs(r.lhs));
    worst = std::max(worst, err);
    if (err > 1e-9) {
      c.pass = false;
      c.detail = "identity mismatch at instance " + std::to_string(i);
      return c;
    }
    if (r.prob_defined && std::fabs(r.prob_total - 1.0) > 1e-9) {
      c.pass = false;
      c.detail = "P(s) does not sum to 1 at instance " + std::to_string(i);
      return c;
    }
  }
  std::ostringstream os;
  os << instances << " instances, worst relative error " << worst;
  c.detail = os.str();
  return c;
}

// 2. the six standard identities
inline Check standard_facts_suite(std::uint64_t seed, int instances = 200,
                                  std::int64_t gcap = 64) {
  Rng rng(seed);
  Check c{"standard-facts", true, ""};
  double worst = 0;
  auto fail = [&](int i, const std::string& which) {
    c.pass = false;
    c.detail = which + " failed at instance " + std::to_string(i);
    return c;
  };
  for (int i = 0; i < instances; ++i) {
    GroupSpec g = gen::random_group(rng, gcap);
    GroupFn f = gen::random_fn(g, rng), h = gen::random_fn(g, rng), k = gen::random_fn(g, rng);
    ProbMeasure mu = gen::random_measure(g, rng);
    // adjoint: <f*h, k> = <f, h o k>
    {
      double lhs = inner(convolve(f, h, Conv::star), k);
      double rhs = inner(f, convolve(h, k, Conv::circ));
      double err = std::fabs(lhs - rhs);
      worst = std::max(worst, err);
      if (err > 1e-10) return fail(i, "adjoint identity");
    }
    // norm monotonicity
    {
      double p = 1.0 + 2.0 * rng.unit();
      double pp = p + 3.0 * rng.unit();
      if (lp_norm(f, p, mu) > lp_norm(f, pp, mu) + 1e-10) return fail(i, "norm monotonicity");
    }
    // L1 of nonnegative f as inner product with mu
    {
      GroupFn af = f;
      for (auto& v : af.v) v = std::fabs(v);
      double err = std::fabs(lp_norm(af, 1.0, mu) - inner(af, GroupFn(g, 1.0), mu));
      worst = std::max(worst, err);
      if (err > 1e-10) return fail(i, "L1 as inner product");
    }
    // convolution theorem, both kinds
    {
      FourierFn fs = fourier(f), hs = fourier(h);
      FourierFn star = fourier(convolve(f, h, Conv::star));
      FourierFn circ = fourier(convolve(f, h, Conv::circ));
      for (Elem e = 0; e < g.size(); ++e) {
        double e1 = std::abs(star(e) - fs(e) * hs(e));
        double e2 = std::abs(circ(e) - std::conj(fs(e)) * hs(e));
        worst = std::max({worst, e1, e2});
        if (e1 > 1e-10 || e2 > 1e-10) return fail(i, "convolution theorem");
      }
    }
    // inversion
    {
      GroupFn back = fourier_inverse(fourier(f));
      for (Elem x = 0; x < g.size(); ++x) {
        double err = std::fabs(back(x) - f(x));
        worst = std::max(worst, err);
        if (err > 1e-10) return fail(i, "inversion");
      }
    }
    // Parseval
    {
      FourierFn fs = fourier(f), hs = fourier(h);
      cplx sum(0, 0);
      for (Elem e = 0; e < g.size(); ++e) sum += fs(e) * std::conj(hs(e));
      double err = std::abs(sum - cplx(inner(f, h), 0.0));
      worst = std::max(worst, err);
      if (err > 1e-10) return fail(i, "Parseval");
    }
  }
  std::ostringstream os;
  os << instances << " instances, worst error " << worst;
  c.detail = os.str();
  return c;
}

// 3. Fourier round trip and Parseval at larger sizes
inline Check fourier_suite(std::uint64_t seed, int instances = 200, std::int64_t gcap = 256) {
  Rng rng(seed);
  Check c{"fourier-roundtrip-parseval", true, ""};
  double worst = 0;
  for (int i = 0; i < instances; ++i) {
    GroupSpec g = gen::random_group(rng, gcap);
    GroupFn f = gen::random_fn(g, rng), h = gen::random_fn(g, rng);
    GroupFn back = fourier_inverse(fourier(f));
    for (Elem x = 0; x < g.size(); ++x) worst = std::max(worst, std::fabs(back(x) - f(x)));
    FourierFn fs = fourier(f), hs = fourier(h);
    cplx sum(0, 0);
    for (Elem e = 0; e < g.size(); ++e) sum += fs(e) * std::conj(hs(e));
    worst = std::max(worst, std::abs(sum - cplx(inner(f, h), 0.0)));
    if (worst > 1e-10) {
      c.pass = false;
      c.detail = "error " + std::to_string(worst) + " at instance " + std::to_string(i);
      return c;
    }
  }
  std::ostringstream os;
  os << instances << " instances, worst error " << worst;
  c.detail = os.str();
  return c;
}

// 4. 3-AP count: exact loop vs Fourier expression
inline Check ap_count_suite(std::uint64_t seed, int random_instances = 300,
                            std::int64_t ncap = 49) {
  Rng rng(seed);
  Check c{"ap-count-crosscheck", true, ""};
  auto agree = [&](const GroupSpec& g, const GroupSet& a) {
    auto cnt = count_3aps(g, a);  // throws internally on mismatch
    double alpha = static_cast<double>(a.size()) / static_cast<double>(g.size());
    double t = ap_functional(g, a);
    double predicted = t * alpha * alpha * alpha * static_cast<double>(g.size()) *
                       static_cast<double>(g.size());
    return std::llround(predicted) == cnt.total;
  };
  GroupSpec g7 = GroupSpec::make({7});
  for (int m = 1; m < 128; ++m) {
    GroupSet a;
    for (int i = 0; i < 7; ++i)
      if (m >> i & 1) a.push_back(i);
    if (!agree(g7, a)) {
      c.pass = false;
      c.detail = "mismatch on a subset of Z/7";
      return c;
    }
  }
  for (int i = 0; i < random_instances; ++i) {
    std::int64_t n = 3 + 2 * rng.below((ncap - 1) / 2);  // odd, 3..ncap
    GroupSpec g = GroupSpec::make({n});
    GroupSet a = gen::random_subset(g, rng, 0.1 + 0.8 * rng.unit());
    if (!agree(g, a)) {
      c.pass = false;
      c.detail = "mismatch on a random set, N = " + std::to_string(n);
      return c;
    }
  }
  c.detail = "all of Z/7 plus " + std::to_string(random_instances) + " random sets agree exactly";
  return c;
}

namespace gen {

inline BohrSet random_bohr(Rng& rng, std::int64_t ncap, int max_rank = 3) {
  std::int64_t n = 31 + rng.below(ncap - 30);
  if (n % 2 == 0) ++n;
  GroupSpec g = GroupSpec::make({n});
  int rank = 1 + static_cast<int>(rng.below(max_rank));
  std::vector<Character> freqs;
  for (int i = 0; i < rank; ++i) freqs.push_back(Character{{1 + rng.below(n - 1)}});
  double rho = 0.1 + 1.2 * rng.unit();
  return bohr_build(g, freqs, rho);
}

}  // namespace gen

// 5. Bohr suite: regularization, size bound, narrow support, regular
// approximation
inline Check bohr_suite(std::uint64_t seed, int instances = 100, std::int64_t ncap = 10007) {
  Rng rng(seed);
  Check c{"bohr-suite", true, ""};
  for (int i = 0; i < instances; ++i) {
    BohrSet raw = gen::random_bohr(rng, ncap);
    BohrSet reg = regularize(raw);
    if (!(reg.radius() >= raw.radius() / 2 - 1e-15 && reg.radius() <= raw.radius() + 1e-15) ||
        !reg.regular()) {
      c.pass = false;
      c.detail = "regularize outside [rho/2, rho] or not regular at instance " +
                 std::to_string(i);
      return c;
    }
    for (int s = 0; s < 10; ++s) {
      double rho = 0.02 + 0.96 * rng.unit();
      auto sb = size_bound_check(reg, rho);
      if (!sb.holds()) {
        c.pass = false;
        c.detail = "size bound failed at instance " + std::to_string(i);
        return c;
      }
    }
    int d = reg.rank();
    {
      double rho_n = (0.2 + 0.3 * rng.unit()) / (100.0 * d);
      double delta_n = (0.2 + 0.25 * rng.unit()) / (100.0 * d);
      ProbMeasure mu = gen::random_measure_on(reg.group(), reg.dilate(rho_n).members(), rng);
      auto ns = narrow_support_check(reg, rho_n, delta_n, mu);
      if (!ns.holds()) {
        c.pass = false;
        c.detail = "narrow support bound failed at instance " + std::to_string(i);
        return c;
      }
    }
    {
      int l = 1 + static_cast<int>(rng.below(2));
      double rho_r = (0.3 + 0.6 * rng.unit()) / (100.0 * l * d);
      GroupSet small = reg.dilate(rho_r).members();
      GroupSet supp = small;
      for (int t = 1; t < l; ++t) supp = sumset(reg.group(), supp, small);
      ProbMeasure nu = gen::random_measure_on(reg.group(), supp, rng);
      auto ra = regular_approx_check(reg, l, rho_r, nu);
      if (!ra.holds()) {
        c.pass = false;
        c.detail = "regular approximation failed at instance " + std::to_string(i);
        return c;
      }
    }
  }
  c.detail = std::to_string(instances) + " Bohr sets: regularization and appendix bounds hold";
  return c;
}

// 6. the even-moment comparison, both variants
inline Check compare_suite(std::uint64_t seed, int instances = 100) {
  Rng rng(seed);
  Check c{"lp-compare", true, ""};
  const std::int64_t sizes[] = {301, 1009, 3001, 10007};
  for (int i = 0; i < instances; ++i) {
    std::int64_t n = sizes[rng.below(4)];
    GroupSpec g = GroupSpec::make({n});
    int rank = 1 + static_cast<int>(rng.below(2));
    std::vector<Character> freqs;
    for (int r = 0; r < rank; ++r) freqs.push_back(Character{{1 + rng.below(n - 1)}});
    BohrSet b = regularize(bohr_build(g, freqs, 0.5 + 0.5 * rng.unit()));
    int d = std::max(1, b.rank());
    BohrSet b1 = nested_regular(b, 1.0 / (400.0 * d));
    BohrSet b2 = nested_regular(b1, 0.5 + 0.4 * rng.unit());
    GroupFn f(g, 0.0);
    std::int64_t nnz = std::min<std::int64_t>(n, 40 + rng.below(160));
    for (std::int64_t t = 0; t < nnz; ++t) f[rng.below(n)] = 2.0 * rng.unit() - 1.0;
    Elem t = rng.below(n);
    int p = rng.below(2) == 0 ? 2 : 4;
    auto r = lp_compare(f, b, b1, b2, t, p);
    if (!approx_ge(r.lhs, r.rhs_star) || !approx_ge(r.lhs, r.rhs_circ)) {
      c.pass = false;
      c.detail = "comparison failed at instance " + std::to_string(i);
      return c;
    }
  }
  c.detail = std::to_string(instances) + " instances, p in {2,4}, both variants hold";
  return c;
}

// 7. weighted sift succeeds and re-verifies whenever feasible + hypothesis
inline Check weighted_sift_suite(std::uint64_t seed, int instances = 50) {
  Rng rng(seed);
  SiftConfig cfg;
  cfg.seed = seed;
  Check c{"weighted-sift", true, ""};
  int done = 0, attempts = 0;
  while (done < instances && attempts < instances * 200) {
    ++attempts;
    GroupSpec g = gen::random_group(rng, 12);
    GroupSet a = gen::random_subset(g, rng, 0.3 + 0.5 * rng.unit());
    GroupSet c1 = gen::random_subset(g, rng, 0.6);
    GroupSet c2 = gen::random_subset(g, rng, 0.6);
    int p = 1 + static_cast<int>(rng.below(2));
    const auto& grid = PipelineConfig{}.eps_grid;
    double eps = grid[static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(grid.size())))];
    if (std::pow(static_cast<double>(g.size()), p) > 1e7) continue;
    double alpha = static_cast<double>(a.size()) / static_cast<double>(g.size());
    // hypothesis with container G: ||mu_A o mu_A||_{p(mu)} >= 1
    {
      ProbMeasure mu_a = normalized_indicator(g, a);
      GroupFn gg = convolve(mu_a.fn, mu_a.fn, Conv::circ);
      ProbMeasure mu(convolve(normalized_indicator(g, c1).fn,
                              normalized_indicator(g, c2).fn, Conv::circ),
                     false);
      if (lp_norm(gg, p, mu) < 1.0) continue;
    }
    Rng local = rng.fork(done);
    auto ws = weighted_sift(g, a, alpha, 1.0, c1, c2, p, eps, cfg, local);
    // re-verify both conclusions from scratch
    ProbMeasure mu_a = normalized_indicator(g, a);
    GroupFn gg = convolve(mu_a.fn, mu_a.fn, Conv::circ);
    GroupFn high(g, 0.0);
    for (Elem x = 0; x < g.size(); ++x)
      if (gg(x) > ws.level) high[x] = 1.0;
    double corr = circ_inner_sets(g, ws.a1, ws.a2, high);
    double dens_bound = 0.25 * std::pow(alpha, p);
    if (!approx_ge(ws.dens1, dens_bound) || !approx_ge(ws.dens2, dens_bound) ||
        !approx_ge(corr, ws.corr_bound)) {
      c.pass = false;
      c.detail = "returned inequalities failed to re-verify";
      return c;
    }
    ++done;
  }
  if (done < instances) {
    c.pass = false;
    c.detail = "could not generate enough admissible instances";
    return c;
  }
  c.detail = std::to_string(done) + " exhaustive instances succeeded and re-verified";
  return c;
}

// 8. almost-periodicity and the Cauchy-Schwarz smoothing bound
inline Check periodicity_suite(std::uint64_t seed, int instances = 50) {
  Rng rng(seed);
  Check c{"almost-periodicity", true, ""};
  for (int i = 0; i < instances; ++i) {
    GroupSpec g = rng.below(3) == 0 ? GroupSpec::make({3, 3, 3})
                                    : GroupSpec::make({11 + 2 * rng.below(40)});
    GroupSet a1 = gen::random_subset(g, rng, 0.2 + 0.4 * rng.unit());
    GroupSet a2 = gen::random_subset(g, rng, 0.2 + 0.4 * rng.unit());
    GroupSet s = gen::random_subset(g, rng, 0.3 + 0.5 * rng.unit());
    int k = 2 + static_cast<int>(rng.below(6));
    const auto& grid = PipelineConfig{}.eps_grid;
    double eps = grid[static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(grid.size())))];
    GroupSet whole(static_cast<std::size_t>(g.size()));
    for (Elem x = 0; x < g.size(); ++x) whole[static_cast<std::size_t>(x)] = x;
    GroupSet x = almost_periods(g, a1, a2, s, whole, k, eps);
    double err = verify_smoothing(g, x, k, a1, a2, s);
    if (err > eps + 1e-12) {
      c.pass = false;
      c.detail = "smoothing error above eps at instance " + std::to_string(i);
      return c;
    }
    GroupSet a = gen::random_subset(g, rng, 0.3 + 0.4 * rng.unit());
    bool subspace_variant = g.is_prime_power_vector() && rng.below(2) == 0;
    auto sb = subspace_variant ? cs_smoothing_bound(g, a, a1, a2, x, k)
                               : cs_smoothing_bound(g, a, a1, a2, x, k, 0.1 + 0.5 * rng.unit());
    if (!approx_le(sb.lhs, sb.rhs)) {
      c.pass = false;
      c.detail = "smoothing bound lhs > rhs at instance " + std::to_string(i);
      return c;
    }
  }
  c.detail = std::to_string(instances) + " instances: smoothing <= eps and CS bound hold";
  return c;
}

// 9. Chang hosts: exact orthogonality / nu-guarantee
inline Check chang_suite(std::uint64_t seed, int instances = 50) {
  Rng rng(seed);
  Check c{"chang", true, ""};
  GroupSpec g4 = GroupSpec::make({3, 3, 3, 3});
  for (int i = 0; i < instances; ++i) {
    GroupSet x = gen::random_subset(g4, rng, 0.05 + 0.5 * rng.unit());
    Spectrum sp = spectrum(g4, x, 0.5);
    BohrSet v = chang_subspace(g4, x);
    for (const auto& ch : sp.chars) {
      for (Elem vm : v.members()) {
        std::int64_t dot = 0;
        auto res = g4.residues(vm);
        for (std::size_t j = 0; j < 4; ++j) dot += ch.exps[j] * res[j];
        if (dot % 3 != 0) {
          c.pass = false;
          c.detail = "chang_subspace orthogonality violated";
          return c;
        }
      }
    }
  }
  GroupSpec gz = GroupSpec::make({1009});
  for (int i = 0; i < instances; ++i) {
    BohrSet host = regularize(bohr_build(gz, {Character{{1 + rng.below(1008)}}},
                                         0.3 + 0.7 * rng.unit()));
    GroupSet x;
    for (Elem m : host.members())
      if (rng.unit() < 0.5) x.push_back(m);
    if (x.empty()) x.push_back(host.members()[0]);
    double nu = 0.05 + 0.9 * rng.unit();
    BohrSet bp = chang_bohr(gz, x, host, nu);
    Spectrum sp = spectrum(gz, x, 0.5);
    for (const auto& ch : sp.chars) {
      Elem e = character_index(gz, ch);
      for (Elem t : bp.members())
        if (gz.bohr_norm_of(e, t) > nu) {
          c.pass = false;
          c.detail = "chang_bohr nu-guarantee violated";
          return c;
        }
    }
  }
  c.detail = std::to_string(instances) + "+" + std::to_string(instances) +
             " instances, exact guarantees hold";
  return c;
}

// certificate re-verification common to both drive suites
inline bool reverify_trace(const PipelineTrace& tr, bool subspace_dominance,
                           std::string& why) {
  if (tr.status != "complete") {
    why = "trace status " + tr.status;
    return false;
  }
  double min_sigma = 1.0 + std::pow(2.0, -12);
  double sig_prod = 1.0;
  for (std::size_t i = 0; i < tr.certs.size(); ++i) {
    const auto& cert = tr.certs[i];
    const GroupSpec& g = tr.step_groups[i];
    const GroupSet& a = tr.step_sets[i];
    if (cert.kind == IncrementCertificate::Kind::many_aps) {
      auto cnt = count_3aps(g, a);
      if (!approx_ge(static_cast<double>(cnt.total), cert.ap_threshold)) {
        why = "many-aps certificate fails the independent count";
        return false;
      }
    } else {
      if (!cert.host) {
        why = "increment certificate without a host";
        return false;
      }
      Bitset abits = to_bitset(g, a);
      std::int64_t hit = 0;
      for (Elem v : cert.host->members())
        if (abits.test(g.sub(v, cert.translate))) ++hit;
      double dens = static_cast<double>(hit) / static_cast<double>(cert.host->size());
      if (!approx_eq(dens, cert.new_density, 1e-9)) {
        why = "increment density recount mismatch";
        return false;
      }
      if (!approx_ge(cert.sigma, min_sigma) ||
          !approx_le(cert.sigma, 1.0 / cert.old_density) ||
          !approx_ge(dens, cert.sigma * cert.old_density, 1e-7)) {
        why = "increment sigma bound fails";
        return false;
      }
      sig_prod *= cert.sigma;
      if (subspace_dominance) {
        auto fam = subspace_family(g, static_cast<int>(g.rank()));
        auto best = increment_oracle(g, a, fam);
        if (best.density + 1e-9 < dens) {
          why = "oracle dominance violated";
          return false;
        }
      }
    }
  }
  if (sig_prod > tr.sigma_budget * (1.0 + 1e-9)) {
    why = "sigma product exceeds alpha^{-1}";
    return false;
  }
  double j_bound = std::ceil(std::log(tr.sigma_budget) / std::log(min_sigma));
  double increments = 0;
  for (const auto& cert : tr.certs)
    if (cert.kind == IncrementCertificate::Kind::density_increment) increments += 1;
  if (increments > j_bound) {
    why = "more increment steps than the sigma budget allows";
    return false;
  }
  return true;
}

// 10. ff drive over all of F_3^2 and seeded F_3^3 subsets
inline Check ff_drive_suite(std::uint64_t seed, int f33_instances = 200) {
  Check c{"ff-drive", true, ""};
  std::string why;
  GroupSpec g2 = GroupSpec::make({3, 3});
  PipelineConfig cfg;
  cfg.seed = seed;
  int lemma_steps = 0, oracle_steps = 0;
  for (int m = 1; m < 512; ++m) {
    GroupSet a;
    for (int i = 0; i < 9; ++i)
      if (m >> i & 1) a.push_back(i);
    auto tr = drive(g2, a, "ff", cfg);
    for (auto& s : tr.steps) (s.path == "lemma" ? lemma_steps : oracle_steps)++;
    if (!reverify_trace(tr, true, why)) {
      c.pass = false;
      c.detail = "F_3^2 mask " + std::to_string(m) + ": " + why;
      return c;
    }
  }
  GroupSpec g3 = GroupSpec::make({3, 3, 3});
  Rng rng(seed);
  for (int i = 0; i < f33_instances; ++i) {
    GroupSet a = gen::random_subset(g3, rng, 0.05 + 0.9 * rng.unit());
    auto tr = drive(g3, a, "ff", cfg);
    for (auto& s : tr.steps) (s.path == "lemma" ? lemma_steps : oracle_steps)++;
    if (!reverify_trace(tr, true, why)) {
      c.pass = false;
      c.detail = "F_3^3 instance " + std::to_string(i) + ": " + why;
      return c;
    }
  }
  std::ostringstream os;
  os << "511 + " << f33_instances << " drives complete and re-verified (" << lemma_steps
     << " lemma steps, " << oracle_steps << " oracle steps)";
  c.detail = os.str();
  return c;
}

// 11. cyclic drive with trace bookkeeping invariants
inline Check cyclic_drive_suite(std::uint64_t seed, int instances = 50,
                                std::int64_t ncap = 2001) {
  Check c{"cyclic-drive", true, ""};
  std::string why;
  Rng rng(seed);
  for (int i = 0; i < instances; ++i) {
    std::int64_t n = 51 + 2 * rng.below((ncap - 51) / 2 + 1);
    if (n > ncap) n = ncap;
    GroupSpec g = GroupSpec::make({n});
    GroupSet a;
    int flavor = static_cast<int>(rng.below(3));
    if (flavor == 0) {
      a = gen::random_subset(g, rng, 0.05 + 0.6 * rng.unit());
    } else if (flavor == 1) {
      auto gr = greedy_apfree((n - 1) / 2);
      a.assign(gr.begin(), gr.end());
    } else {
      // a chunk plus noise: concentrated autocorrelation
      std::int64_t w = 2 + rng.below(std::max<std::int64_t>(2, n / 8));
      for (Elem x = 0; x < w; ++x) a.push_back(x);
      for (Elem x = w; x < g.size(); ++x)
        if (rng.unit() < 0.02) a.push_back(x);
      a = canonical_set(std::move(a));
    }
    PipelineConfig cfg;
    cfg.seed = seed + static_cast<std::uint64_t>(i);
    if (i % 5 == 4) cfg.c = 0.01;  // exercise non-degenerate Bohr narrowing too
    auto tr = drive(g, a, "cyclic", cfg);
    if (!reverify_trace(tr, false, why)) {
      c.pass = false;
      c.detail = "instance " + std::to_string(i) + " (N=" + std::to_string(n) + "): " + why;
      return c;
    }
    // recorded host bookkeeping: rank and radius present on increments
    for (std::size_t k = 0; k < tr.certs.size(); ++k) {
      if (tr.certs[k].kind != IncrementCertificate::Kind::density_increment) continue;
      const auto& rec = tr.steps[k];
      if (rec.host.rank < 1 || rec.host.radius < 0 || rec.host.size < 1 ||
          rec.host.rank != tr.certs[k].host->rank()) {
        c.pass = false;
        c.detail = "host bookkeeping mismatch at instance " + std::to_string(i);
        return c;
      }
    }
  }
  c.detail = std::to_string(instances) + " cyclic drives complete with verified certificates";
  return c;
}

// 12. extremal oracles: two independent search strategies, Behrend
inline Check extremal_suite(std::uint64_t seed, std::int64_t behrend_cap = 10000) {
  (void)seed;
  Check c{"extremal-oracle", true, ""};
  for (std::int64_t n = 1; n <= 16; ++n) {
    auto bb = max_apfree_interval(n);
    auto en = max_apfree_interval_enum(n);
    if (bb.size != en.size || !is_ap_free_interval(bb.witness)) {
      c.pass = false;
      c.detail = "search strategies disagree at N = " + std::to_string(n);
      return c;
    }
  }
  for (std::int64_t n : std::vector<std::int64_t>{1, 2, 10, 100, 500, 1000, 5000, behrend_cap}) {
    auto beh = behrend_lower(n);
    if (!is_ap_free_interval(beh)) {
      c.pass = false;
      c.detail = "Behrend output not progression-free at N = " + std::to_string(n);
      return c;
    }
  }
  c.detail = "strategies agree for N <= 16; Behrend sets progression-free up to N = " +
             std::to_string(behrend_cap);
  return c;
}

inline std::vector<Check> run_suite(const std::string& suite, std::uint64_t seed,
                                    std::int64_t size_cap) {
  std::vector<Check> out;
  auto want = [&](const char* s) { return suite == "all" || suite == s; };
  if (want("harmonic")) {
    out.push_back(standard_facts_suite(seed, 200, std::min<std::int64_t>(64, size_cap)));
    out.push_back(fourier_suite(seed, 200, std::min<std::int64_t>(256, size_cap)));
  }
  if (want("bohr")) {
    out.push_back(bohr_suite(seed, 100, std::min<std::int64_t>(10007, std::max<std::int64_t>(64, size_cap))));
    out.push_back(compare_suite(seed, 100));
  }
  if (want("sifting")) {
    out.push_back(sift_identity_suite(seed, 500, std::min<std::int64_t>(12, size_cap)));
    out.push_back(weighted_sift_suite(seed, 50));
  }
  if (want("periodicity")) {
    out.push_back(periodicity_suite(seed, 50));
    out.push_back(chang_suite(seed, 50));
  }
  if (want("increment")) {
    out.push_back(ap_count_suite(seed, 300, 49));
    out.push_back(ff_drive_suite(seed, 200));
    out.push_back(cyclic_drive_suite(seed, 50, std::min<std::int64_t>(2001, std::max<std::int64_t>(101, size_cap))));
    out.push_back(extremal_suite(seed, 10000));
  }
  return out;
}

}  // namespace apsift::checks

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "apsift/bohr.hpp"
#include "apsift/group.hpp"
#include "apsift/harmonic.hpp"
#include "apsift/util.hpp"

namespace apsift {

// ---- explicit almost-period sets -------------------------------------------

// X = {t in container : ||F0(.+t) - F0||_inf <= eps/k} with
// F0 = mu_{A1} o mu_{A2} * 1_S.  The k-fold smoothing error of such an X
// is at most eps by the triangle inequality; 0 is always included.
inline GroupSet almost_periods(const GroupSpec& g, const GroupSet& a1, const GroupSet& a2,
                               const GroupSet& s, const GroupSet& container, int k, double eps) {
  if (container.empty()) throw std::invalid_argument("almost_periods: empty container");
  if (a1.empty() || a2.empty()) throw std::invalid_argument("almost_periods: empty A_i");
  if (k < 1) throw std::invalid_argument("almost_periods: k >= 1");
  if (!(eps > 0)) throw std::invalid_argument("almost_periods: eps must be positive");
  GroupFn f0 = convolve(convolve(normalized_indicator(g, a1).fn,
                                 normalized_indicator(g, a2).fn, Conv::circ),
                        indicator(g, s), Conv::star);
  double bound = eps / static_cast<double>(k);
  GroupSet x;
  for (Elem t : container) {
    double worst = 0;
    for (Elem y = 0; y < g.size() && worst <= bound; ++y)
      worst = std::max(worst, std::fabs(f0(g.add(y, t)) - f0(y)));
    if (worst <= bound) x.push_back(t);
  }
  if (!std::binary_search(x.begin(), x.end(), static_cast<Elem>(0))) x.push_back(0);
  return canonical_set(std::move(x));
}

// || mu_X^{(k)} * (mu_{A1} o mu_{A2} * 1_S) - mu_{A1} o mu_{A2} * 1_S ||_inf,
// measured exactly.
inline double verify_smoothing(const GroupSpec& g, const GroupSet& x, int k, const GroupSet& a1,
                               const GroupSet& a2, const GroupSet& s) {
  if (x.empty()) throw std::invalid_argument("verify_smoothing: empty X");
  if (k < 1) throw std::invalid_argument("verify_smoothing: k >= 1");
  GroupFn f0 = convolve(convolve(normalized_indicator(g, a1).fn,
                                 normalized_indicator(g, a2).fn, Conv::circ),
                        indicator(g, s), Conv::star);
  GroupFn smooth = convolve(power_convolve(normalized_indicator(g, x).fn, k), f0, Conv::star);
  return sup_norm(sub_fn(smooth, f0));
}

// ---- large spectrum ----------------------------------------------------------

struct Spectrum {
  double theta = 0.5;
  std::vector<Character> chars;
};

inline Spectrum spectrum(const GroupSpec& g, const GroupSet& x, double theta = 0.5) {
  if (x.empty()) throw std::invalid_argument("spectrum: empty X");
  if (!(theta > 0 && theta <= 1)) throw std::invalid_argument("spectrum: theta in (0,1]");
  FourierFn f = fourier(normalized_indicator(g, x).fn);
  Spectrum out;
  out.theta = theta;
  for (Elem e = 0; e < g.size(); ++e)
    if (std::abs(f(e)) >= theta) out.chars.push_back(character_at(g, e));
  return out;
}

// ---- Chang-type hosts ---------------------------------------------------------

// Subspace of F_q^n orthogonal to the 1/2-spectrum of X, as a radius-0
// Bohr set.  The orthogonality gamma(v) = 1 is exact integer arithmetic.
inline BohrSet chang_subspace(const GroupSpec& g, const GroupSet& x) {
  Spectrum sp = spectrum(g, x, 0.5);
  return annihilator_subspace(g, sp.chars);
}

// Regular Bohr set whose every member t has |1 - gamma(t)| <= nu on the
// whole 1/2-spectrum of X: frequency union, radius capped at nu, then
// regularized (which only shrinks the radius, preserving the guarantee).
inline BohrSet chang_bohr(const GroupSpec& g, const GroupSet& x, const BohrSet& host, double nu) {
  if (!(nu > 0)) throw std::invalid_argument("chang_bohr: nu must be positive");
  Spectrum sp = spectrum(g, x, 0.5);
  std::set<std::vector<std::int64_t>> seen;
  std::vector<Character> freqs;
  for (const auto& c : host.freqs())
    if (seen.insert(c.exps).second) freqs.push_back(c);
  for (const auto& c : sp.chars) {
    bool trivial = std::all_of(c.exps.begin(), c.exps.end(),
                               [](std::int64_t e) { return e == 0; });
    if (trivial) continue;
    if (seen.insert(c.exps).second) freqs.push_back(c);
  }
  double rho0 = std::min(host.radius(), nu);
  BohrSet raw = bohr_build(g, freqs, rho0);
  BohrSet reg = regularize(raw);
  // exact guarantee, by construction and checked outright
  for (const auto& c : sp.chars) {
    Elem e = character_index(g, c);
    for (Elem t : reg.members())
      if (g.bohr_norm_of(e, t) > nu)
        throw internal_error("chang_bohr: |1 - gamma(t)| <= nu violated");
  }
  return reg;
}

// ---- the Cauchy-Schwarz smoothing bound ---------------------------------------

struct SmoothingBound {
  double lhs = 0;  // max over admissible shifts t of ||mu_X^{(k)} * F(.+t) - mu_X^{(k)} * F||_inf
  double rhs = 0;  // (nu + 2^{1-k}) <g,mu_{A1} o mu_{A1}>^{1/2} <g,mu_{A2} o mu_{A2}>^{1/2}
  std::int64_t shift_count = 0;
};

// F = mu_A o mu_A o (mu_{A1} o mu_{A2}).  When nu is absent the shift set
// is the subspace annihilating the spectrum (gamma(t) = 1 exactly); with
// nu it is {t : |1 - gamma(t)| <= nu on the spectrum}.
inline SmoothingBound cs_smoothing_bound(const GroupSpec& g, const GroupSet& a,
                                         const GroupSet& a1, const GroupSet& a2,
                                         const GroupSet& x, int k,
                                         std::optional<double> nu = std::nullopt) {
  if (a.empty() || a1.empty() || a2.empty() || x.empty())
    throw std::invalid_argument("cs_smoothing_bound: empty set");
  GroupFn gg = convolve(normalized_indicator(g, a).fn, normalized_indicator(g, a).fn,
                        Conv::circ);
  GroupFn g12 = convolve(normalized_indicator(g, a1).fn, normalized_indicator(g, a2).fn,
                         Conv::circ);
  GroupFn f = convolve(gg, g12, Conv::circ);
  GroupFn fk = convolve(power_convolve(normalized_indicator(g, x).fn, k), f, Conv::star);

  Spectrum sp = spectrum(g, x, 0.5);
  GroupSet shifts;
  if (nu) {
    for (Elem t = 0; t < g.size(); ++t) {
      bool ok = true;
      for (const auto& c : sp.chars) {
        if (g.bohr_norm_of(character_index(g, c), t) > *nu) {
          ok = false;
          break;
        }
      }
      if (ok) shifts.push_back(t);
    }
  } else {
    shifts = chang_subspace(g, x).members();
  }

  SmoothingBound out;
  out.shift_count = static_cast<std::int64_t>(shifts.size());
  for (Elem t : shifts) {
    double worst = 0;
    for (Elem y = 0; y < g.size(); ++y)
      worst = std::max(worst, std::fabs(fk(g.add(y, t)) - fk(y)));
    out.lhs = std::max(out.lhs, worst);
  }
  double s1 = circ_inner_sets(g, a1, a1, gg);
  double s2 = circ_inner_sets(g, a2, a2, gg);
  double coef = (nu ? *nu : 0.0) + std::pow(2.0, 1 - k);
  out.rhs = coef * std::sqrt(s1) * std::sqrt(s2);
  return out;
}

// sum_gamma |Fhat| <= <g, mu_{A1} o mu_{A1}>^{1/2} <g, mu_{A2} o mu_{A2}>^{1/2}
// for F = mu_A o mu_A o (mu_{A1} o mu_{A2}); the Fourier-side Cauchy-Schwarz.
inline TwoSided fourier_l1_cs_check(const GroupSpec& g, const GroupSet& a, const GroupSet& a1,
                                    const GroupSet& a2) {
  GroupFn gg = convolve(normalized_indicator(g, a).fn, normalized_indicator(g, a).fn,
                        Conv::circ);
  GroupFn g12 = convolve(normalized_indicator(g, a1).fn, normalized_indicator(g, a2).fn,
                         Conv::circ);
  GroupFn f = convolve(gg, g12, Conv::circ);
  FourierFn fh = fourier(f);
  double l1 = 0;
  for (Elem e = 0; e < g.size(); ++e) l1 += std::abs(fh(e));
  double s1 = circ_inner_sets(g, a1, a1, gg);
  double s2 = circ_inner_sets(g, a2, a2, gg);
  TwoSided r;
  r.lhs = std::sqrt(s1) * std::sqrt(s2);  // bound
  r.rhs = l1;                             // measured
  return r;
}

}  // namespace apsift

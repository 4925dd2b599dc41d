#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "apsift/group.hpp"
#include "apsift/util.hpp"

namespace apsift {

// Dense real function on G, indexed in canonical element order.  All
// analytic quantities below use the expectation normalization
// E_x f(x) = |G|^{-1} sum_x f(x).
struct GroupFn {
  GroupSpec g;
  std::vector<double> v;

  GroupFn() = default;
  GroupFn(GroupSpec gs, double fill = 0.0)
      : g(std::move(gs)), v(static_cast<std::size_t>(g.size()), fill) {}
  GroupFn(GroupSpec gs, std::vector<double> vals) : g(std::move(gs)), v(std::move(vals)) {
    if (static_cast<std::int64_t>(v.size()) != g.size())
      throw std::invalid_argument("GroupFn: length != |G|");
  }

  double operator()(Elem x) const { return v[static_cast<std::size_t>(x)]; }
  double& operator[](Elem x) { return v[static_cast<std::size_t>(x)]; }
  double operator[](Elem x) const { return v[static_cast<std::size_t>(x)]; }
  std::int64_t n() const { return g.size(); }
};

inline void require_same_group(const GroupFn& f, const GroupFn& h) {
  if (f.g != h.g) throw std::invalid_argument("group mismatch");
}

inline double expectation(const GroupFn& f) {
  double s = 0;
  for (double x : f.v) s += x;
  return s / static_cast<double>(f.n());
}

// Probability measure: nonnegative with E mu = 1 (within 1e-12).
struct ProbMeasure {
  GroupFn fn;

  ProbMeasure() = default;
  explicit ProbMeasure(GroupFn f, bool validate = true) : fn(std::move(f)) {
    if (validate) {
      for (double x : fn.v)
        if (x < -kAbsTol) throw std::invalid_argument("ProbMeasure: negative value");
      double m = expectation(fn);
      if (std::fabs(m - 1.0) > 1e-12 * std::max(1.0, std::fabs(m)))
        throw std::invalid_argument("ProbMeasure: mean != 1");
    }
  }

  const GroupSpec& g() const { return fn.g; }
  double operator()(Elem x) const { return fn(x); }
};

inline ProbMeasure uniform_measure(const GroupSpec& g) {
  return ProbMeasure(GroupFn(g, 1.0), false);
}

// mu_A = (|G|/|A|) 1_A
inline ProbMeasure normalized_indicator(const GroupSpec& g, const GroupSet& a) {
  if (a.empty()) throw std::invalid_argument("normalized_indicator: empty set");
  GroupFn f(g, 0.0);
  double w = static_cast<double>(g.size()) / static_cast<double>(a.size());
  for (Elem x : a) f[x] = w;
  return ProbMeasure(std::move(f), false);
}

inline GroupFn indicator(const GroupSpec& g, const GroupSet& a) {
  GroupFn f(g, 0.0);
  for (Elem x : a) f[x] = 1.0;
  return f;
}

enum class Conv { star, circ };  // star: E_y f(y)g(x-y); circ: E_y f(y)g(x+y)

namespace detail {
inline std::vector<Elem> support(const GroupFn& f) {
  std::vector<Elem> s;
  for (Elem x = 0; x < f.n(); ++x)
    if (f(x) != 0.0) s.push_back(x);
  return s;
}
}  // namespace detail

// Direct evaluation, summing over the sparser operand's support.  Exact
// (no transform roundoff) and fast for the indicator-heavy measures this
// pipeline lives on; the quadratic double loop and the Fourier route below
// serve as independent cross-checks.
inline GroupFn convolve(const GroupFn& f, const GroupFn& h, Conv mode) {
  require_same_group(f, h);
  const std::int64_t n = f.n();
  auto sf = detail::support(f);
  auto sh = detail::support(h);
  GroupFn out(f.g, 0.0);
  const double inv = 1.0 / static_cast<double>(n);
  if (sf.size() <= sh.size()) {
    for (Elem y : sf) {
      double fy = f(y) * inv;
      if (mode == Conv::star) {
        // out(x) += f(y) h(x-y): x = y + z over supp h
        for (Elem z : sh) out[f.g.add(y, z)] += fy * h(z);
      } else {
        // out(x) += f(y) h(x+y): x = z - y
        for (Elem z : sh) out[f.g.sub(z, y)] += fy * h(z);
      }
    }
  } else {
    for (Elem z : sh) {
      double hz = h(z) * inv;
      if (mode == Conv::star) {
        for (Elem y : sf) out[f.g.add(y, z)] += f(y) * hz;
      } else {
        for (Elem y : sf) out[f.g.sub(z, y)] += f(y) * hz;
      }
    }
  }
  return out;
}

// O(|G|^2) double loop, kept as an oracle.
inline GroupFn convolve_naive(const GroupFn& f, const GroupFn& h, Conv mode) {
  require_same_group(f, h);
  const std::int64_t n = f.n();
  GroupFn out(f.g, 0.0);
  for (Elem x = 0; x < n; ++x) {
    double s = 0;
    for (Elem y = 0; y < n; ++y)
      s += f(y) * h(mode == Conv::star ? f.g.sub(x, y) : f.g.add(x, y));
    out[x] = s / static_cast<double>(n);
  }
  return out;
}

inline GroupFn convolve(const ProbMeasure& f, const ProbMeasure& h, Conv mode) {
  return convolve(f.fn, h.fn, mode);
}

// k-fold convolution f * f * ... * f
inline GroupFn power_convolve(const GroupFn& f, int k) {
  if (k < 1) throw std::invalid_argument("power_convolve: k must be >= 1");
  GroupFn acc = f;
  for (int i = 1; i < k; ++i) acc = convolve(acc, f, Conv::star);
  return acc;
}

// <f,h>_mu = E_x f(x) h(x) mu(x)
inline double inner(const GroupFn& f, const GroupFn& h, const ProbMeasure& mu) {
  require_same_group(f, h);
  require_same_group(f, mu.fn);
  double s = 0;
  for (Elem x = 0; x < f.n(); ++x) s += f(x) * h(x) * mu(x);
  return s / static_cast<double>(f.n());
}

inline double inner(const GroupFn& f, const GroupFn& h) {
  require_same_group(f, h);
  double s = 0;
  for (Elem x = 0; x < f.n(); ++x) s += f(x) * h(x);
  return s / static_cast<double>(f.n());
}

inline constexpr double kPInf = std::numeric_limits<double>::infinity();

// ||f||_{p(mu)} = (E |f|^p mu)^{1/p};  p = inf gives max over supp(mu).
// Large p is evaluated in log space to dodge overflow.
inline double lp_norm(const GroupFn& f, double p, const ProbMeasure& mu) {
  require_same_group(f, mu.fn);
  if (p == kPInf) {
    double m = 0;
    for (Elem x = 0; x < f.n(); ++x)
      if (mu(x) > 0) m = std::max(m, std::fabs(f(x)));
    return m;
  }
  if (p < 1) throw std::invalid_argument("lp_norm: p must be >= 1");
  const double n = static_cast<double>(f.n());
  if (p <= 256) {
    double s = 0;
    for (Elem x = 0; x < f.n(); ++x)
      if (mu(x) > 0) s += std::pow(std::fabs(f(x)), p) * mu(x);
    return std::pow(s / n, 1.0 / p);
  }
  // log-space: ||f||_p = M * (E (|f|/M)^p mu)^{1/p}, M = max |f| on supp(mu)
  double m = 0;
  for (Elem x = 0; x < f.n(); ++x)
    if (mu(x) > 0) m = std::max(m, std::fabs(f(x)));
  if (m == 0) return 0;
  double s = 0;
  for (Elem x = 0; x < f.n(); ++x) {
    if (mu(x) <= 0) continue;
    double r = std::fabs(f(x)) / m;
    if (r > 0) s += std::exp(p * std::log(r)) * mu(x);
  }
  return m * std::exp(std::log(s / n) / p);
}

inline double lp_norm(const GroupFn& f, double p) { return lp_norm(f, p, uniform_measure(f.g)); }

// ---- Fourier transform ---------------------------------------------------
// fhat(gamma) = E_x f(x) conj(gamma(x)); characters indexed like elements.

struct FourierFn {
  GroupSpec g;
  std::vector<cplx> v;

  cplx operator()(Elem e) const { return v[static_cast<std::size_t>(e)]; }
  std::int64_t n() const { return g.size(); }
};

inline FourierFn fourier(const GroupFn& f) {
  const std::int64_t n = f.n();
  FourierFn out{f.g, std::vector<cplx>(static_cast<std::size_t>(n))};
  auto supp = detail::support(f);
  for (Elem e = 0; e < n; ++e) {
    cplx s(0, 0);
    for (Elem x : supp) s += f(x) * std::conj(f.g.char_eval(e, x));
    out.v[static_cast<std::size_t>(e)] = s / static_cast<double>(n);
  }
  return out;
}

// f(x) = sum_gamma fhat(gamma) gamma(x); enforces that the inverse of a
// real image is real, catching conjugate-symmetry bugs upstream.
inline GroupFn fourier_inverse(const FourierFn& F, double imag_tol = 1e-9) {
  const std::int64_t n = F.n();
  GroupFn out(F.g, 0.0);
  double worst = 0;
  for (Elem x = 0; x < n; ++x) {
    cplx s(0, 0);
    for (Elem e = 0; e < n; ++e) s += F(e) * F.g.char_eval(e, x);
    worst = std::max(worst, std::fabs(s.imag()));
    out[x] = s.real();
  }
  if (worst > imag_tol)
    throw internal_error("fourier_inverse: imaginary residue " + std::to_string(worst));
  return out;
}

// Fourier-multiply convolution; degree-2 transform cost, used as the
// independent route against convolve().
inline GroupFn convolve_fourier(const GroupFn& f, const GroupFn& h, Conv mode) {
  require_same_group(f, h);
  FourierFn F = fourier(f), H = fourier(h);
  FourierFn P{f.g, std::vector<cplx>(static_cast<std::size_t>(f.n()))};
  for (Elem e = 0; e < f.n(); ++e)
    P.v[static_cast<std::size_t>(e)] =
        mode == Conv::star ? F(e) * H(e) : std::conj(F(e)) * H(e);
  return fourier_inverse(P, 1e-7);
}

inline GroupFn translate(const GroupFn& f, Elem t) {
  // out(x) = f(x + t)
  GroupFn out(f.g, 0.0);
  for (Elem x = 0; x < f.n(); ++x) out[x] = f(f.g.add(x, t));
  return out;
}

inline double sup_norm(const GroupFn& f) {
  double m = 0;
  for (double x : f.v) m = std::max(m, std::fabs(x));
  return m;
}

inline double l1_distance(const GroupFn& f, const GroupFn& h) {
  require_same_group(f, h);
  double s = 0;
  for (Elem x = 0; x < f.n(); ++x) s += std::fabs(f(x) - h(x));
  return s / static_cast<double>(f.n());
}

// {x : f(x) >= thr}
inline GroupSet super_level_set(const GroupFn& f, double thr) {
  GroupSet s;
  for (Elem x = 0; x < f.n(); ++x)
    if (f(x) >= thr) s.push_back(x);
  return s;
}

inline GroupFn pointwise_pow(const GroupFn& f, int p) {
  GroupFn out(f.g, 0.0);
  for (Elem x = 0; x < f.n(); ++x) out[x] = std::pow(f(x), p);
  return out;
}

inline GroupFn scalar_mul(const GroupFn& f, double c) {
  GroupFn out = f;
  for (double& x : out.v) x *= c;
  return out;
}

inline GroupFn add_fn(const GroupFn& f, const GroupFn& h) {
  require_same_group(f, h);
  GroupFn out = f;
  for (Elem x = 0; x < f.n(); ++x) out[x] += h(x);
  return out;
}

inline GroupFn sub_fn(const GroupFn& f, const GroupFn& h) {
  require_same_group(f, h);
  GroupFn out = f;
  for (Elem x = 0; x < f.n(); ++x) out[x] -= h(x);
  return out;
}

inline GroupFn add_const(const GroupFn& f, double c) {
  GroupFn out = f;
  for (double& x : out.v) x += c;
  return out;
}

// <mu_{A1} o mu_{A2}, f> evaluated by the pair loop; the workhorse for
// sifting verifications (cost |A1||A2|).
inline double circ_inner_sets(const GroupSpec& g, const GroupSet& a1, const GroupSet& a2,
                              const GroupFn& f) {
  if (a1.empty() || a2.empty()) throw std::invalid_argument("circ_inner_sets: empty set");
  double s = 0;
  for (Elem x : a1)
    for (Elem y : a2) s += f(g.sub(y, x));
  return s / (static_cast<double>(a1.size()) * static_cast<double>(a2.size()));
}

}  // namespace apsift

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "apsift/group.hpp"
#include "apsift/harmonic.hpp"
#include "apsift/util.hpp"

namespace apsift {

// Bohr norm m(x) = max_{gamma in Lambda} |1 - gamma(x)| for every x, with
// the sorted distinct values (the breakpoints of kappa -> |B_{1+kappa}|).
// Conjugate-symmetric root tables make m exactly even and m(0) exactly 0.
struct BohrNormTable {
  GroupSpec g;
  std::vector<Character> freqs;
  std::vector<double> norm;      // per element
  std::vector<double> values;    // sorted distinct norms
  std::vector<std::int64_t> cum; // cum[i] = #{x : norm(x) <= values[i]}

  static std::shared_ptr<const BohrNormTable> build(const GroupSpec& g,
                                                    const std::vector<Character>& freqs) {
    auto t = std::make_shared<BohrNormTable>();
    t->g = g;
    t->freqs = freqs;
    std::vector<Elem> fidx;
    fidx.reserve(freqs.size());
    for (const auto& c : freqs) fidx.push_back(character_index(g, c));
    t->norm.assign(static_cast<std::size_t>(g.size()), 0.0);
    for (Elem x = 0; x < g.size(); ++x) {
      double m = 0;
      for (Elem e : fidx) m = std::max(m, g.bohr_norm_of(e, x));
      t->norm[static_cast<std::size_t>(x)] = m;
    }
    std::vector<double> sorted = t->norm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (i == 0 || sorted[i] != sorted[i - 1]) {
        t->values.push_back(sorted[i]);
        t->cum.push_back(static_cast<std::int64_t>(i) + 1);
      } else {
        t->cum.back() = static_cast<std::int64_t>(i) + 1;
      }
    }
    return t;
  }

  std::int64_t count_leq(double thr) const {
    auto it = std::upper_bound(values.begin(), values.end(), thr);
    if (it == values.begin()) return 0;
    return cum[static_cast<std::size_t>(it - values.begin() - 1)];
  }

  std::int64_t count_lt(double thr) const {
    auto it = std::lower_bound(values.begin(), values.end(), thr);
    if (it == values.begin()) return 0;
    return cum[static_cast<std::size_t>(it - values.begin() - 1)];
  }
};

class BohrSet {
 public:
  BohrSet() = default;
  BohrSet(std::shared_ptr<const BohrNormTable> table, double radius)
      : table_(std::move(table)), radius_(radius) {
    if (radius_ < 0) throw std::invalid_argument("BohrSet: radius must be >= 0");
    members_ = compute_members();
    regular_ = compute_regular();
  }

  const GroupSpec& group() const { return table_->g; }
  const std::vector<Character>& freqs() const { return table_->freqs; }
  double radius() const { return radius_; }
  int rank() const { return static_cast<int>(table_->freqs.size()); }
  const GroupSet& members() const { return members_; }
  std::int64_t size() const { return static_cast<std::int64_t>(members_.size()); }
  double density() const {
    return static_cast<double>(size()) / static_cast<double>(group().size());
  }
  bool regular() const { return regular_; }
  std::shared_ptr<const BohrNormTable> table() const { return table_; }

  BohrSet dilate(double delta) const {
    if (delta < 0) throw std::invalid_argument("BohrSet::dilate: delta must be >= 0");
    return BohrSet(table_, radius_ * delta);
  }

  BohrSet with_radius(double r) const { return BohrSet(table_, r); }

  bool contains(Elem x) const {
    return table_->norm[static_cast<std::size_t>(x)] <= radius_;
  }

 private:
  GroupSet compute_members() const {
    GroupSet m;
    for (Elem x = 0; x < table_->g.size(); ++x)
      if (table_->norm[static_cast<std::size_t>(x)] <= radius_) m.push_back(x);
    return m;
  }

  // Exact regularity check at the breakpoints of kappa -> |B_{1+kappa}|.
  // Rank-0 sets and zero-radius sets have constant counts over the window
  // and are regular outright.
  bool compute_regular() const {
    int d = rank();
    if (d == 0) return true;
    if (radius_ == 0) {
      // counts can only change at positive norms; window is {0}
      return true;
    }
    double w = 1.0 / (100.0 * d);
    std::int64_t base = static_cast<std::int64_t>(members_.size());
    double lo = radius_ * (1.0 - w), hi = radius_ * (1.0 + w);
    // upper side: at each breakpoint v in (radius, hi]
    {
      auto it = std::upper_bound(table_->values.begin(), table_->values.end(), radius_);
      for (; it != table_->values.end() && *it <= hi; ++it) {
        double v = *it;
        double allowed = (1.0 + 100.0 * d * (v / radius_ - 1.0)) * static_cast<double>(base);
        if (static_cast<double>(table_->count_leq(v)) > allowed) return false;
      }
    }
    // lower side: just below each breakpoint v in (lo, radius_]
    {
      auto it = std::upper_bound(table_->values.begin(), table_->values.end(), lo);
      for (; it != table_->values.end() && *it <= radius_; ++it) {
        double v = *it;
        double required = (1.0 - 100.0 * d * (1.0 - v / radius_)) * static_cast<double>(base);
        if (static_cast<double>(table_->count_lt(v)) < required) return false;
      }
    }
    return true;
  }

  std::shared_ptr<const BohrNormTable> table_;
  double radius_ = 0;
  GroupSet members_;
  bool regular_ = false;
};

inline BohrSet bohr_build(const GroupSpec& g, const std::vector<Character>& freqs, double rho) {
  if (rho < 0) throw std::invalid_argument("bohr_build: radius must be >= 0");
  return BohrSet(BohrNormTable::build(g, freqs), rho);
}

// Searches [lo, hi] for a regular radius, scanning descending.  Radii
// sitting exactly on an achieved norm are never regular (the count drops
// by the multiplicity at the radius while the regularity envelope is
// continuous), so candidates are interior points of the gaps between
// consecutive breakpoints, refined if the first ladder misses.
inline std::optional<double> find_regular_radius(const std::shared_ptr<const BohrNormTable>& t,
                                                 double lo, double hi) {
  if (!(lo <= hi)) return std::nullopt;
  if (t->freqs.empty()) return hi;  // rank 0: everything is regular
  auto regular_at = [&](double r) {
    if (r < lo || r > hi) return false;
    return BohrSet(t, r).regular();
  };
  if (hi == 0) return regular_at(0.0) ? std::optional<double>(0.0) : std::nullopt;
  // boundary points: lo, hi and every breakpoint strictly inside
  std::vector<double> bounds;
  bounds.push_back(hi);
  for (auto it = std::lower_bound(t->values.begin(), t->values.end(), lo);
       it != t->values.end() && *it <= hi; ++it)
    bounds.push_back(*it);
  bounds.push_back(lo);
  std::sort(bounds.begin(), bounds.end(), std::greater<double>());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  if (regular_at(hi)) return hi;
  static const double ladder1[] = {0.5, 0.75, 0.25, 0.875, 0.625, 0.375, 0.125};
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    double b = bounds[i], a = bounds[i + 1];
    if (!(b > a)) continue;
    for (double frac : ladder1) {
      double r = a + frac * (b - a);
      if (regular_at(r)) return r;
    }
  }
  // fine pass
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    double b = bounds[i], a = bounds[i + 1];
    if (!(b > a)) continue;
    for (int j = 127; j >= 1; --j) {
      double r = a + (b - a) * static_cast<double>(j) / 128.0;
      if (regular_at(r)) return r;
    }
  }
  if (regular_at(lo)) return lo;
  return std::nullopt;
}

// Returns B_{rho'} with rho' in [rho/2, rho] passing the exact regularity
// check.
inline BohrSet regularize(const BohrSet& b) {
  if (b.regular()) return b;
  auto r = find_regular_radius(b.table(), b.radius() / 2.0, b.radius());
  if (!r) throw internal_error("regularize: no regular radius in [rho/2, rho]");
  return b.with_radius(*r);
}

// B' subset_r B: regular dilate B_delta with delta in [r/2, r].
inline BohrSet nested_regular(const BohrSet& b, double r) {
  if (!(r > 0 && r <= 1)) throw std::invalid_argument("nested_regular: r in (0,1] required");
  auto rad = find_regular_radius(b.table(), b.radius() * r / 2.0, b.radius() * r);
  if (!rad) throw internal_error("nested_regular: no regular radius in [r/2, r] window");
  return b.with_radius(*rad);
}

// lambda . B as a Bohr set: frequency exponents are multiplied by the
// inverse of lambda, so members dilate exactly and counts are preserved.
// Requires gcd(lambda, N_j) = 1 for every factor.
inline BohrSet dilate_bohr_set(const BohrSet& b, std::int64_t lambda) {
  const GroupSpec& g = b.group();
  std::vector<Character> freqs;
  for (const auto& c : b.freqs()) {
    Character nc = c;
    for (std::size_t j = 0; j < g.rank(); ++j) {
      std::int64_t n = g.factors()[j];
      std::int64_t lam = ((lambda % n) + n) % n;
      // find inverse of lam mod n
      std::int64_t inv = -1;
      for (std::int64_t t = 0; t < n; ++t)
        if ((lam * t) % n == 1 % n) {
          inv = t;
          break;
        }
      if (inv < 0) throw std::invalid_argument("dilate_bohr_set: lambda not invertible");
      nc.exps[j] = (nc.exps[j] * inv) % n;
    }
    freqs.push_back(nc);
  }
  return bohr_build(g, freqs, b.radius());
}

// ---- modular linear algebra (annihilators, subspaces in F_q^n) ------------

// Row-reduce over Z/q (q prime).  Returns the nonzero rows (a basis of the
// row space) in RREF.
inline std::vector<std::vector<std::int64_t>> mod_rref(std::vector<std::vector<std::int64_t>> m,
                                                       std::int64_t q) {
  if (m.empty()) return m;
  std::size_t cols = m[0].size();
  auto inv_mod = [&](std::int64_t a) {
    a = ((a % q) + q) % q;
    for (std::int64_t t = 1; t < q; ++t)
      if ((a * t) % q == 1) return t;
    throw std::invalid_argument("mod_rref: non-invertible pivot (q not prime?)");
  };
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < m.size(); ++c) {
    std::size_t piv = r;
    while (piv < m.size() && m[piv][c] % q == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[r], m[piv]);
    std::int64_t iv = inv_mod(m[r][c]);
    for (auto& x : m[r]) x = ((x * iv) % q + q) % q;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i == r || m[i][c] % q == 0) continue;
      std::int64_t f = m[i][c] % q;
      for (std::size_t j = 0; j < cols; ++j) m[i][j] = (((m[i][j] - f * m[r][j]) % q) + q) % q;
    }
    ++r;
  }
  m.resize(r);
  return m;
}

// Subspace of F_q^n annihilated by the given characters, as a radius-0
// Bohr set over the RREF basis of their exponent vectors.
inline BohrSet annihilator_subspace(const GroupSpec& g, const std::vector<Character>& chars) {
  if (!g.is_prime_power_vector())
    throw std::invalid_argument("annihilator_subspace: group is not F_q^n");
  std::int64_t q = g.factors()[0];
  std::vector<std::vector<std::int64_t>> rows;
  for (const auto& c : chars) rows.push_back(c.exps);
  auto basis = mod_rref(std::move(rows), q);
  std::vector<Character> freqs;
  for (auto& r : basis) freqs.push_back(Character{std::move(r)});
  return bohr_build(g, freqs, 0.0);
}

// ---- appendix inequalities as checkable quantities -------------------------

struct TwoSided {
  double lhs = 0;
  double rhs = 0;
  bool holds(double rel = kRelTol) const { return approx_ge(lhs, rhs, rel); }
};

// |B_rho| >= (rho/4)^d |B| for rho in (0,1)
inline TwoSided size_bound_check(const BohrSet& b, double rho) {
  if (!(rho > 0 && rho < 1)) throw std::invalid_argument("size_bound_check: rho in (0,1)");
  TwoSided r;
  r.lhs = static_cast<double>(b.dilate(rho).size());
  r.rhs = std::pow(rho / 4.0, b.rank()) * static_cast<double>(b.size());
  return r;
}

// || mu_{B_{1+delta}} * mu - mu_{B_{1+delta}} ||_1 <= 200 (rho + delta) d,
// for mu supported on B_rho and rho + delta < 1/100d.
inline TwoSided narrow_support_check(const BohrSet& b, double rho, double delta,
                                     const ProbMeasure& mu) {
  int d = b.rank();
  if (d < 1) throw std::invalid_argument("narrow_support_check: rank >= 1 required");
  if (!(rho > 0 && delta > 0 && rho + delta < 1.0 / (100.0 * d)))
    throw std::invalid_argument("narrow_support_check: need rho + delta < 1/100d");
  if (!b.regular()) throw precondition_error("narrow_support_check: B not regular");
  BohrSet inner_set = b.dilate(rho);
  for (Elem x = 0; x < b.group().size(); ++x)
    if (mu(x) > 0 && !inner_set.contains(x))
      throw precondition_error("narrow_support_check: mu not supported on B_rho");
  ProbMeasure mb = normalized_indicator(b.group(), b.dilate(1.0 + delta).members());
  GroupFn conv = convolve(mb.fn, mu.fn, Conv::star);
  TwoSided r;
  r.lhs = 200.0 * (rho + delta) * d;  // bound
  r.rhs = l1_distance(conv, mb.fn);   // measured
  return r;  // holds() checks bound >= measured
}

struct RegularApproxCheck {
  double margin_indicator = 0;  // min over x of (1_{B_{1+Lrho}} * nu - 1_B)
  double margin_measure = 0;    // min over x of (2 mu_{B_{1+Lrho}} * nu - mu_B)
  bool holds(double tol = 1e-9) const {
    return margin_indicator >= -tol && margin_measure >= -tol;
  }
};

// 1_B <= 1_{B_{1+L rho}} * nu and mu_B <= 2 mu_{B_{1+L rho}} * nu for nu
// supported on L B_rho with rho <= 1/100Ld.
inline RegularApproxCheck regular_approx_check(const BohrSet& b, int l, double rho,
                                               const ProbMeasure& nu) {
  int d = b.rank();
  if (l < 1) throw std::invalid_argument("regular_approx_check: L >= 1");
  if (d >= 1 && !(rho <= 1.0 / (100.0 * l * d)))
    throw std::invalid_argument("regular_approx_check: need rho <= 1/100Ld");
  if (!b.regular()) throw precondition_error("regular_approx_check: B not regular");
  const GroupSpec& g = b.group();
  // support check: nu on the L-fold sumset of B_rho
  {
    GroupSet small = b.dilate(rho).members();
    GroupSet acc = small;
    for (int i = 1; i < l; ++i) acc = sumset(g, acc, small);
    Bitset ok = to_bitset(g, acc);
    for (Elem x = 0; x < g.size(); ++x)
      if (nu(x) > 0 && !ok.test(x))
        throw precondition_error("regular_approx_check: nu not supported on L B_rho");
  }
  BohrSet big = b.dilate(1.0 + l * rho);
  GroupFn ind_conv = convolve(indicator(g, big.members()), nu.fn, Conv::star);
  ProbMeasure mu_big = normalized_indicator(g, big.members());
  GroupFn mes_conv = convolve(mu_big.fn, nu.fn, Conv::star);
  ProbMeasure mu_b = normalized_indicator(g, b.members());
  GroupFn ind_b = indicator(g, b.members());
  RegularApproxCheck r;
  r.margin_indicator = 1e300;
  r.margin_measure = 1e300;
  for (Elem x = 0; x < g.size(); ++x) {
    r.margin_indicator = std::min(r.margin_indicator, ind_conv(x) - ind_b(x));
    r.margin_measure = std::min(r.margin_measure, 2.0 * mes_conv(x) - mu_b.fn(x));
  }
  return r;
}

struct LpCompare {
  double lhs = 0;       // ||f o f||_{p(nu)}^p
  double rhs_star = 0;  // (1/2) ||f * f||_{p(mu_{B+t})}^p
  double rhs_circ = 0;  // (1/2) ||f o f||_{p(mu_{B+t})}^p
};

// Both displayed inequalities: lhs >= rhs_star and lhs >= rhs_circ.
// Preconditions: p even >= 2; B, B', B'' regular; B', B'' inside
// B_{1/400 rk(B)} as sets.
inline LpCompare lp_compare(const GroupFn& f, const BohrSet& b, const BohrSet& b1,
                            const BohrSet& b2, Elem t, int p) {
  if (p < 2 || p % 2 != 0) throw std::invalid_argument("lp_compare: p must be even and >= 2");
  const GroupSpec& g = b.group();
  if (f.g != g) throw std::invalid_argument("lp_compare: group mismatch");
  int d = std::max(1, b.rank());
  BohrSet cap = b.dilate(1.0 / (400.0 * d));
  for (Elem x : b1.members())
    if (!cap.contains(x)) throw precondition_error("lp_compare: B' not inside B_{1/400d}");
  for (Elem x : b2.members())
    if (!cap.contains(x)) throw precondition_error("lp_compare: B'' not inside B_{1/400d}");
  ProbMeasure m1 = normalized_indicator(g, b1.members());
  ProbMeasure m2 = normalized_indicator(g, b2.members());
  GroupFn nu_fn = convolve(convolve(m1.fn, m1.fn, Conv::circ),
                           convolve(m2.fn, m2.fn, Conv::circ), Conv::star);
  ProbMeasure nu(std::move(nu_fn), false);
  ProbMeasure mu_bt =
      ProbMeasure(translate(normalized_indicator(g, b.members()).fn, g.neg(t)), false);
  GroupFn fof = convolve(f, f, Conv::circ);
  GroupFn fsf = convolve(f, f, Conv::star);
  LpCompare r;
  r.lhs = std::pow(lp_norm(fof, p, nu), p);
  r.rhs_star = 0.5 * std::pow(lp_norm(fsf, p, mu_bt), p);
  r.rhs_circ = 0.5 * std::pow(lp_norm(fof, p, mu_bt), p);
  return r;
}

// ---- narrow-density dichotomy ----------------------------------------------

struct NarrowDensity {
  int which = 0;       // 1 or 2
  Elem witness = 0;    // case 1: common x; case 2: argmax of the violating conv
  int violator = 0;    // case 2: 1 for B', 2 for B''
  double value1 = 0;   // mu_A * mu_{B'} at the witness
  double value2 = 0;   // mu_A * mu_{B''} at the witness
};

// Either a common translate where both convolutions are close to
// mu(B)^{-1}, or a sup-norm witness giving the (1+2eps) density increment.
// delta certifies |B| >= (1-eps)|B_{1+delta}| and is caller-supplied.
inline NarrowDensity narrow_density_dichotomy(const GroupSet& a, const BohrSet& b,
                                              const BohrSet& b1, const BohrSet& b2, double eps,
                                              double delta) {
  const GroupSpec& g = b.group();
  if (a.empty()) throw std::invalid_argument("narrow_density_dichotomy: empty A");
  if (!b.regular()) throw precondition_error("narrow_density_dichotomy: B not regular");
  if (!subset_of(a, b.members()))
    throw precondition_error("narrow_density_dichotomy: A not inside B");
  BohrSet bd = b.dilate(delta);
  for (Elem x : b1.members())
    if (!bd.contains(x)) throw precondition_error("narrow_density_dichotomy: B' not in B_delta");
  for (Elem x : b2.members())
    if (!bd.contains(x)) throw precondition_error("narrow_density_dichotomy: B'' not in B_delta");
  double big = static_cast<double>(b.dilate(1.0 + delta).size());
  if (static_cast<double>(b.size()) < (1.0 - eps) * big - 1e-9)
    throw precondition_error("narrow_density_dichotomy: |B| >= (1-eps)|B_{1+delta}| fails");
  ProbMeasure mu_a = normalized_indicator(g, a);
  GroupFn c1 = convolve(mu_a.fn, normalized_indicator(g, b1.members()).fn, Conv::star);
  GroupFn c2 = convolve(mu_a.fn, normalized_indicator(g, b2.members()).fn, Conv::star);
  double inv_b = static_cast<double>(g.size()) / static_cast<double>(b.size());
  const double slack = 1e-12 * inv_b;
  // case 2 first: it is the branch the increment driver wants
  for (int which = 1; which <= 2; ++which) {
    const GroupFn& c = which == 1 ? c1 : c2;
    Elem arg = 0;
    double mx = -1;
    for (Elem x = 0; x < g.size(); ++x)
      if (c(x) > mx) {
        mx = c(x);
        arg = x;
      }
    if (mx >= (1.0 + 2.0 * eps) * inv_b - slack) {
      NarrowDensity r;
      r.which = 2;
      r.violator = which;
      r.witness = arg;
      r.value1 = c1(arg);
      r.value2 = c2(arg);
      return r;
    }
  }
  double thr = (1.0 - 4.0 * eps) * inv_b - slack;
  for (Elem x = 0; x < g.size(); ++x)
    if (c1(x) >= thr && c2(x) >= thr) {
      NarrowDensity r;
      r.which = 1;
      r.witness = x;
      r.value1 = c1(x);
      r.value2 = c2(x);
      return r;
    }
  throw internal_error("narrow_density_dichotomy: neither case holds");
}

}  // namespace apsift

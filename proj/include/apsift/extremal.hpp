#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apsift/group.hpp"
#include "apsift/harmonic.hpp"
#include "apsift/util.hpp"

namespace apsift {

// ---- exact 3-AP counting -------------------------------------------------

struct APCount {
  std::int64_t total = 0;      // pairs (a,d) with {a, a+d, a+2d} in A
  std::int64_t trivial = 0;    // d = 0, equals |A|
  std::int64_t nontrivial = 0;
};

// (mu_A * mu_A * mu_{-2.A})(0); equals the normalized 3-AP count.  Written
// via <mu_A * mu_A, mu_{2.A}> which is the same number.
inline double ap_functional(const GroupSpec& g, const GroupSet& a) {
  if (a.empty()) throw std::invalid_argument("ap_functional: empty set");
  ProbMeasure mu = normalized_indicator(g, a);
  GroupFn conv = convolve(mu.fn, mu.fn, Conv::star);
  GroupSet a2 = dilate_set(g, a, 2);
  ProbMeasure mu2 = normalized_indicator(g, a2);
  return inner(conv, mu2.fn);
}

inline APCount count_3aps(const GroupSpec& g, const GroupSet& a) {
  if (a.empty()) throw std::invalid_argument("count_3aps: empty set");
  Bitset bits = to_bitset(g, a);
  APCount c;
  for (Elem x : a) {
    for (Elem d = 0; d < g.size(); ++d) {
      Elem y = g.add(x, d);
      if (!bits.test(y)) continue;
      if (bits.test(g.add(y, d))) ++c.total;
    }
  }
  c.trivial = static_cast<std::int64_t>(a.size());
  c.nontrivial = c.total - c.trivial;
  // Fourier cross-check; only valid when doubling is a bijection.
  if (g.all_factors_odd()) {
    double alpha = static_cast<double>(a.size()) / static_cast<double>(g.size());
    double t = ap_functional(g, a);
    double predicted = t * alpha * alpha * alpha * static_cast<double>(g.size()) *
                       static_cast<double>(g.size());
    if (std::llround(predicted) != c.total)
      throw internal_error("count_3aps: Fourier cross-check mismatch (" +
                           std::to_string(predicted) + " vs " + std::to_string(c.total) + ")");
  }
  return c;
}

inline bool is_ap_free(const GroupSpec& g, const GroupSet& a) {
  if (a.empty()) return true;
  Bitset bits = to_bitset(g, a);
  for (Elem x : a)
    for (Elem d = 1; d < g.size(); ++d) {
      Elem y = g.add(x, d);
      if (bits.test(y) && bits.test(g.add(y, d))) return false;
    }
  return true;
}

// Integer-interval variant: A subset of [1,N], progressions in Z.
inline bool is_ap_free_interval(const std::vector<std::int64_t>& a) {
  if (a.size() < 3) return true;
  std::int64_t n = *std::max_element(a.begin(), a.end());
  std::vector<char> in(static_cast<std::size_t>(n) + 1, 0);
  for (auto x : a) in[static_cast<std::size_t>(x)] = 1;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      std::int64_t x = std::min(a[i], a[j]), y = std::max(a[i], a[j]);
      if ((x + y) % 2 == 0 && in[static_cast<std::size_t>((x + y) / 2)] && x != y) return false;
    }
  return true;
}

// ---- extremal search -----------------------------------------------------

struct SearchResult {
  std::int64_t size = 0;
  std::vector<std::int64_t> witness;  // interval mode: integers; group mode: indices
  bool exact = false;
  std::int64_t nodes = 0;
};

namespace detail {

struct IntervalBB {
  std::int64_t n;
  std::int64_t budget;
  std::int64_t nodes = 0;
  std::int64_t best = 0;
  std::uint64_t best_mask = 0;
  bool truncated = false;

  // masks are 1-indexed via bit (x-1)
  void dfs(std::int64_t x, std::uint64_t chosen, std::uint64_t blocked, int size) {
    if (++nodes > budget) {
      truncated = true;
      return;
    }
    if (size > best) {
      best = size;
      best_mask = chosen;
    }
    if (x > n) return;
    std::uint64_t range = (n >= 64) ? ~0ULL : ((1ULL << n) - 1);
    std::uint64_t avail = ~blocked & range & ~((x > 1) ? ((1ULL << (x - 1)) - 1) : 0ULL);
    if (size + __builtin_popcountll(avail) <= best) return;  // bound
    if (truncated) return;
    // include x if allowed
    if (!(blocked >> (x - 1) & 1)) {
      std::uint64_t nb = blocked;
      for (std::int64_t a = 1; a < x; ++a)
        if (chosen >> (a - 1) & 1) {
          std::int64_t c = 2 * x - a;  // completes (a, x, c)
          if (c <= n) nb |= 1ULL << (c - 1);
        }
      dfs(x + 1, chosen | (1ULL << (x - 1)), nb, size + 1);
    }
    if (truncated) return;
    dfs(x + 1, chosen, blocked, size);
  }
};

}  // namespace detail

// Branch-and-bound over [1,N]; exact when the search completes within the
// node budget.  N <= 63 assumed (masks are 64-bit).
inline SearchResult max_apfree_interval(std::int64_t n, std::int64_t budget = 50'000'000,
                                        bool require_exact = true) {
  if (n < 1) throw std::invalid_argument("max_apfree_interval: N >= 1 required");
  if (n > 63) throw std::invalid_argument("max_apfree_interval: N too large for exact search");
  detail::IntervalBB bb{n, budget};
  bb.dfs(1, 0, 0, 0);
  SearchResult r;
  r.size = bb.best;
  r.exact = !bb.truncated;
  r.nodes = bb.nodes;
  for (std::int64_t x = 1; x <= n; ++x)
    if (bb.best_mask >> (x - 1) & 1) r.witness.push_back(x);
  if (!r.exact && require_exact)
    throw resource_limit_error("max_apfree_interval: node budget exceeded, best=" +
                               std::to_string(r.size));
  return r;
}

// Independent strategy: enumerate all subsets (N <= 20).  Used to
// cross-validate the branch-and-bound.
inline SearchResult max_apfree_interval_enum(std::int64_t n) {
  if (n < 1 || n > 20) throw std::invalid_argument("max_apfree_interval_enum: need 1 <= N <= 20");
  std::vector<std::uint32_t> triples;
  for (std::int64_t a = 1; a <= n; ++a)
    for (std::int64_t d = 1; a + 2 * d <= n; ++d)
      triples.push_back((1u << (a - 1)) | (1u << (a + d - 1)) | (1u << (a + 2 * d - 1)));
  SearchResult r;
  std::uint32_t lim = static_cast<std::uint32_t>(1u << n);
  std::uint32_t best_mask = 0;
  for (std::uint32_t m = 0; m < lim; ++m) {
    int pc = __builtin_popcount(m);
    if (pc <= r.size) continue;
    bool ok = true;
    for (auto t : triples)
      if ((m & t) == t) {
        ok = false;
        break;
      }
    if (ok) {
      r.size = pc;
      best_mask = m;
    }
  }
  for (std::int64_t x = 1; x <= n; ++x)
    if (best_mask >> (x - 1) & 1) r.witness.push_back(x);
  r.exact = true;
  return r;
}

namespace detail {

struct GroupBB {
  const GroupSpec& g;
  std::int64_t budget;
  std::int64_t nodes = 0;
  std::int64_t best = 0;
  std::vector<Elem> best_set;
  bool truncated = false;
  std::vector<Elem> chosen;
  std::vector<char> blocked;  // counts would need undo; store marks per level

  GroupBB(const GroupSpec& gs, std::int64_t b)
      : g(gs), budget(b), blocked(static_cast<std::size_t>(gs.size()), 0) {}

  // all x completing an AP with a and b in some order
  void completions(Elem a, Elem b, std::vector<Elem>& out) const {
    out.clear();
    out.push_back(g.sub(g.scale(b, 2), a));  // (a, b, x)
    out.push_back(g.sub(g.scale(a, 2), b));  // (x, a, b)
    // (a, x, b): 2x = a + b, solve per factor
    Elem target = g.add(a, b);
    std::vector<std::vector<std::int64_t>> per(g.rank());
    auto tr = g.residues(target);
    for (std::size_t j = 0; j < g.rank(); ++j) {
      std::int64_t n = g.factors()[j];
      for (std::int64_t v = 0; v < n; ++v)
        if ((2 * v) % n == tr[j]) per[j].push_back(v);
      if (per[j].empty()) return;  // no midpoint solutions at all
    }
    std::vector<std::size_t> idx(g.rank(), 0);
    while (true) {
      std::vector<std::int64_t> r(g.rank());
      for (std::size_t j = 0; j < g.rank(); ++j) r[j] = per[j][idx[j]];
      out.push_back(g.index(r));
      std::size_t j = 0;
      while (j < g.rank() && ++idx[j] == per[j].size()) idx[j++] = 0;
      if (j == g.rank()) break;
    }
  }

  void dfs(Elem x) {
    if (++nodes > budget) {
      truncated = true;
      return;
    }
    if (static_cast<std::int64_t>(chosen.size()) > best) {
      best = static_cast<std::int64_t>(chosen.size());
      best_set = chosen;
    }
    if (x >= g.size() || truncated) return;
    std::int64_t avail = 0;
    for (Elem y = x; y < g.size(); ++y)
      if (!blocked[static_cast<std::size_t>(y)]) ++avail;
    if (static_cast<std::int64_t>(chosen.size()) + avail <= best) return;
    if (!blocked[static_cast<std::size_t>(x)]) {
      std::vector<Elem> marks, comp;
      for (Elem a : chosen) {
        completions(a, x, comp);
        for (Elem cpt : comp)
          if (cpt != x && !blocked[static_cast<std::size_t>(cpt)]) {
            blocked[static_cast<std::size_t>(cpt)] = 1;
            marks.push_back(cpt);
          }
      }
      chosen.push_back(x);
      dfs(x + 1);
      chosen.pop_back();
      for (Elem mpt : marks) blocked[static_cast<std::size_t>(mpt)] = 0;
    }
    if (truncated) return;
    dfs(x + 1);
  }
};

}  // namespace detail

inline SearchResult max_apfree_group(const GroupSpec& g, std::int64_t budget = 50'000'000,
                                     bool require_exact = true) {
  detail::GroupBB bb(g, budget);
  bb.dfs(0);
  SearchResult r;
  r.size = bb.best;
  r.witness = bb.best_set;
  r.exact = !bb.truncated;
  r.nodes = bb.nodes;
  if (!r.exact && require_exact)
    throw resource_limit_error("max_apfree_group: node budget exceeded, best=" +
                               std::to_string(r.size));
  if (!is_ap_free(g, canonical_set(r.witness)))
    throw internal_error("max_apfree_group: witness not AP-free");
  return r;
}

// ---- subspace enumeration over F_q^n (annihilator RREF matrices) ---------

// Enumerates subspaces of codimension r as row spaces of RREF matrices
// over Z/q; returns the member sets.  Includes r = 0 (the whole group).
inline std::vector<GroupSet> subspaces_of_codim(const GroupSpec& g, int codim) {
  if (!g.is_prime_power_vector())
    throw std::invalid_argument("subspaces_of_codim: group is not F_q^n");
  std::int64_t q = g.factors()[0];
  int n = static_cast<int>(g.rank());
  if (codim < 0 || codim > n) throw std::invalid_argument("subspaces_of_codim: bad codim");
  std::vector<GroupSet> out;
  if (codim == 0) {
    GroupSet all(static_cast<std::size_t>(g.size()));
    for (Elem x = 0; x < g.size(); ++x) all[static_cast<std::size_t>(x)] = x;
    out.push_back(std::move(all));
    return out;
  }
  // choose pivot columns
  std::vector<int> piv(codim);
  std::vector<std::vector<std::int64_t>> rows(codim, std::vector<std::int64_t>(n, 0));
  std::function<void(int, int)> choose = [&](int idx, int start) {
    if (idx == codim) {
      // fill free entries: positions (i, j) with j not a pivot and j > piv[i]
      std::vector<std::pair<int, int>> free_pos;
      for (int i = 0; i < codim; ++i)
        for (int j = piv[i] + 1; j < n; ++j)
          if (std::find(piv.begin(), piv.end(), j) == piv.end()) free_pos.emplace_back(i, j);
      std::vector<std::int64_t> vals(free_pos.size(), 0);
      while (true) {
        for (auto& r : rows) std::fill(r.begin(), r.end(), 0);
        for (int i = 0; i < codim; ++i) rows[i][piv[i]] = 1;
        for (std::size_t t = 0; t < free_pos.size(); ++t)
          rows[free_pos[t].first][free_pos[t].second] = vals[t];
        // collect members: x with rows . x == 0 (mod q)
        GroupSet v;
        for (Elem x = 0; x < g.size(); ++x) {
          auto rx = g.residues(x);
          bool ok = true;
          for (int i = 0; i < codim && ok; ++i) {
            std::int64_t s = 0;
            for (int j = 0; j < n; ++j) s += rows[i][j] * rx[j];
            if (s % q != 0) ok = false;
          }
          if (ok) v.push_back(x);
        }
        out.push_back(std::move(v));
        std::size_t t = 0;
        while (t < vals.size() && ++vals[t] == q) vals[t++] = 0;
        if (t == vals.size() && !vals.empty()) break;
        if (vals.empty()) break;
      }
      return;
    }
    for (int j = start; j < n; ++j) {
      piv[idx] = j;
      choose(idx + 1, j + 1);
    }
  };
  choose(0, 0);
  return out;
}

// ---- brute-force density-increment oracle --------------------------------

struct OracleIncrement {
  std::size_t host_index = 0;
  GroupSet host;
  Elem translate = 0;  // density of (A + translate) on host
  double density = 0;
};

// Exact maximizer of |(A + x) cap H| / |H| over hosts H in the family and
// translates x; ties broken by (host order, smallest translate).
inline OracleIncrement increment_oracle(const GroupSpec& g, const GroupSet& a,
                                        const std::vector<GroupSet>& family) {
  if (family.empty()) throw std::invalid_argument("increment_oracle: empty family");
  OracleIncrement best;
  bool first = true;
  Bitset abits = to_bitset(g, a);
  for (std::size_t h = 0; h < family.size(); ++h) {
    const GroupSet& host = family[h];
    if (host.empty()) continue;
    for (Elem x = 0; x < g.size(); ++x) {
      std::int64_t cnt = 0;
      for (Elem v : host)
        if (abits.test(g.sub(v, x))) ++cnt;  // (A + x) cap host
      double d = static_cast<double>(cnt) / static_cast<double>(host.size());
      if (first || d > best.density + 1e-15) {
        best = {h, host, x, d};
        first = false;
      }
    }
  }
  return best;
}

// family helper for F_q^n: all subspaces with codim <= m
inline std::vector<GroupSet> subspace_family(const GroupSpec& g, int max_codim) {
  std::vector<GroupSet> fam;
  for (int r = 0; r <= max_codim && r <= static_cast<int>(g.rank()); ++r) {
    auto part = subspaces_of_codim(g, r);
    for (auto& v : part) fam.push_back(std::move(v));
  }
  return fam;
}

// ---- Behrend-style construction ------------------------------------------

// Sphere-layer digit construction: digits in {0..m-1} base 2m-1, best
// layer of constant squared norm.  Parameters grid-searched.  Subsets of a
// layer stay progression-free, so values above N are simply dropped.
inline std::vector<std::int64_t> behrend_lower(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("behrend_lower: N >= 1");
  std::vector<std::int64_t> best = {1};
  for (std::int64_t m = 2; m <= 40; ++m) {
    std::int64_t b = 2 * m - 1;
    double enumeration = 1;
    for (std::int64_t k = 1; k <= 24; ++k) {
      enumeration *= static_cast<double>(m);
      if (enumeration > 2e6) break;
      // smallest value 1, largest 1 + (m-1) * (b^k - 1) / (b - 1)
      double bk = std::pow(static_cast<double>(b), static_cast<double>(k));
      if (bk / static_cast<double>(b) > static_cast<double>(n)) break;  // even 1 digit overflows
      std::map<std::int64_t, std::vector<std::int64_t>> layers;
      std::vector<std::int64_t> digit(static_cast<std::size_t>(k), 0);
      while (true) {
        std::int64_t val = 1, pw = 1, r = 0;
        bool fits = true;
        for (std::int64_t j = 0; j < k; ++j) {
          val += digit[static_cast<std::size_t>(j)] * pw;
          r += digit[static_cast<std::size_t>(j)] * digit[static_cast<std::size_t>(j)];
          if (j + 1 < k) {
            if (pw > n) {
              fits = false;
              break;
            }
            pw *= b;
          }
        }
        if (fits && val <= n) layers[r].push_back(val);
        std::size_t j = 0;
        while (j < digit.size() && ++digit[j] == m) digit[j++] = 0;
        if (j == digit.size()) break;
      }
      for (auto& [r, layer] : layers)
        if (static_cast<std::int64_t>(layer.size()) > static_cast<std::int64_t>(best.size()))
          best = layer;
    }
  }
  std::sort(best.begin(), best.end());
  return best;
}

// Ascending greedy baseline; reported alongside behrend_lower.
inline std::vector<std::int64_t> greedy_apfree(std::int64_t n) {
  std::vector<char> blocked(static_cast<std::size_t>(n) + 1, 0);
  std::vector<std::int64_t> out;
  for (std::int64_t x = 1; x <= n; ++x) {
    if (blocked[static_cast<std::size_t>(x)]) continue;
    for (std::int64_t a : out) {
      std::int64_t c = 2 * x - a;
      if (c <= n) blocked[static_cast<std::size_t>(c)] = 1;
    }
    out.push_back(x);
  }
  return out;
}

// ---- headline bound curves (reporting only) -------------------------------

struct BoundCurves {
  double main = 0;  // exp(-c (log N)^{1/6} (log log N)^{-1/6}) N
  double ff = 0;    // exp(-c (log N)^{1/5}) N
};

inline BoundCurves bound_curves(double n, double c) {
  if (!(n >= 16)) throw std::invalid_argument("bound_curves: N >= 16 required");
  if (c < 0) throw std::invalid_argument("bound_curves: c >= 0 required");
  double ln = std::log(n), lln = std::log(ln);
  BoundCurves b;
  b.main = std::exp(-c * std::pow(ln, 1.0 / 6.0) * std::pow(lln, -1.0 / 6.0)) * n;
  b.ff = std::exp(-c * std::pow(ln, 1.0 / 5.0)) * n;
  return b;
}

}  // namespace apsift

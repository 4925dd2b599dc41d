#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "apsift/util.hpp"

namespace apsift {

using Elem = std::int64_t;  // canonical element index, mixed-radix lexicographic
using cplx = std::complex<double>;

// Finite abelian group presented as Z_{N1} x ... x Z_{Nk}.  Immutable; the
// shared impl carries per-factor unit-root tables so character evaluation
// is a table product.  Tables are built conjugate-symmetric (root[N-m] is
// exactly conj(root[m])) which makes Bohr norms exactly even.
class GroupSpec {
 public:
  GroupSpec() = default;

  static GroupSpec make(const std::vector<std::int64_t>& factors) {
    if (factors.empty()) throw std::invalid_argument("GroupSpec: factor list empty");
    for (auto f : factors)
      if (f < 1) throw std::invalid_argument("GroupSpec: factors must be positive");
    auto impl = std::make_shared<Impl>();
    impl->factors = factors;
    impl->strides.assign(factors.size(), 1);
    impl->size = 1;
    for (std::size_t j = factors.size(); j-- > 0;) {
      impl->strides[j] = impl->size;
      impl->size *= factors[j];
    }
    impl->roots.resize(factors.size());
    for (std::size_t j = 0; j < factors.size(); ++j) {
      std::int64_t n = factors[j];
      auto& tab = impl->roots[j];
      tab.resize(static_cast<std::size_t>(n));
      for (std::int64_t m = 0; m <= n / 2; ++m) {
        double th = 2.0 * M_PI * static_cast<double>(m) / static_cast<double>(n);
        tab[static_cast<std::size_t>(m)] = cplx(std::cos(th), std::sin(th));
      }
      tab[0] = cplx(1.0, 0.0);
      for (std::int64_t m = n / 2 + 1; m < n; ++m)
        tab[static_cast<std::size_t>(m)] = std::conj(tab[static_cast<std::size_t>(n - m)]);
    }
    GroupSpec g;
    g.impl_ = std::move(impl);
    return g;
  }

  std::int64_t size() const { return impl_->size; }
  std::size_t rank() const { return impl_->factors.size(); }
  const std::vector<std::int64_t>& factors() const { return impl_->factors; }

  bool operator==(const GroupSpec& o) const {
    return impl_ == o.impl_ || impl_->factors == o.impl_->factors;
  }
  bool operator!=(const GroupSpec& o) const { return !(*this == o); }

  std::vector<std::int64_t> residues(Elem x) const {
    std::vector<std::int64_t> r(rank());
    for (std::size_t j = 0; j < rank(); ++j) {
      r[j] = x / impl_->strides[j];
      x %= impl_->strides[j];
    }
    return r;
  }

  Elem index(const std::vector<std::int64_t>& r) const {
    if (r.size() != rank()) throw std::invalid_argument("GroupSpec::index: wrong arity");
    Elem x = 0;
    for (std::size_t j = 0; j < rank(); ++j) {
      std::int64_t n = impl_->factors[j];
      std::int64_t v = ((r[j] % n) + n) % n;
      x += v * impl_->strides[j];
    }
    return x;
  }

  Elem add(Elem a, Elem b) const {
    Elem out = 0;
    for (std::size_t j = 0; j < rank(); ++j) {
      std::int64_t n = impl_->factors[j], s = impl_->strides[j];
      std::int64_t ra = a / s % n, rb = b / s % n;
      out += ((ra + rb) % n) * s;
    }
    return out;
  }

  Elem neg(Elem a) const {
    Elem out = 0;
    for (std::size_t j = 0; j < rank(); ++j) {
      std::int64_t n = impl_->factors[j], s = impl_->strides[j];
      std::int64_t ra = a / s % n;
      out += ((n - ra) % n) * s;
    }
    return out;
  }

  Elem sub(Elem a, Elem b) const { return add(a, neg(b)); }

  Elem scale(Elem a, std::int64_t lambda) const {
    Elem out = 0;
    for (std::size_t j = 0; j < rank(); ++j) {
      std::int64_t n = impl_->factors[j], s = impl_->strides[j];
      std::int64_t ra = a / s % n;
      std::int64_t v = ((ra % n) * (((lambda % n) + n) % n)) % n;
      out += v * s;
    }
    return out;
  }

  // gamma(x) for the character with exponent index e (same mixed-radix
  // encoding as elements): prod_j roots[j][(e_j x_j) mod N_j].
  cplx char_eval(Elem e, Elem x) const {
    cplx out(1.0, 0.0);
    for (std::size_t j = 0; j < rank(); ++j) {
      std::int64_t n = impl_->factors[j], s = impl_->strides[j];
      std::int64_t ej = e / s % n, xj = x / s % n;
      std::int64_t m = (ej * xj) % n;
      out *= impl_->roots[j][static_cast<std::size_t>(m)];
    }
    return out;
  }

  // |1 - gamma(x)|; exactly 0 iff the total integer phase vanishes.  The
  // phase is sum_j e_j x_j / N_j mod 1, tested over the common denominator
  // |G| so that cross-factor cancellation is caught exactly.
  double bohr_norm_of(Elem e, Elem x) const {
    std::int64_t total = 0;
    for (std::size_t j = 0; j < rank(); ++j) {
      std::int64_t n = impl_->factors[j], s = impl_->strides[j];
      std::int64_t m = (e / s % n) * (x / s % n) % n;
      total = (total + m * (impl_->size / n)) % impl_->size;
    }
    if (total == 0) return 0.0;
    return std::abs(cplx(1.0, 0.0) - char_eval(e, x));
  }

  std::string descriptor() const {
    std::ostringstream os;
    for (std::size_t j = 0; j < rank(); ++j) {
      if (j) os << 'x';
      os << impl_->factors[j];
    }
    return os.str();
  }

  bool all_factors_odd() const {
    for (auto f : impl_->factors)
      if (f % 2 == 0) return false;
    return true;
  }

  // true when the group is F_q^n for prime q (all factors equal and prime)
  bool is_prime_power_vector() const {
    std::int64_t q = impl_->factors[0];
    for (auto f : impl_->factors)
      if (f != q) return false;
    if (q < 2) return false;
    for (std::int64_t d = 2; d * d <= q; ++d)
      if (q % d == 0) return false;
    return true;
  }

 private:
  struct Impl {
    std::vector<std::int64_t> factors;
    std::vector<std::int64_t> strides;
    std::int64_t size = 1;
    std::vector<std::vector<cplx>> roots;
  };
  std::shared_ptr<const Impl> impl_;
};

// Character stored by exponent vector; index form is used internally.
struct Character {
  std::vector<std::int64_t> exps;
};

inline Elem character_index(const GroupSpec& g, const Character& c) { return g.index(c.exps); }
inline Character character_at(const GroupSpec& g, Elem e) { return Character{g.residues(e)}; }

inline cplx char_eval(const GroupSpec& g, const Character& c, Elem x) {
  return g.char_eval(character_index(g, c), x);
}

// ---- sets of group elements -------------------------------------------

// A set is stored as a sorted vector of canonical indices.
using GroupSet = std::vector<Elem>;

inline GroupSet canonical_set(std::vector<Elem> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline Bitset to_bitset(const GroupSpec& g, const GroupSet& a) {
  Bitset b(g.size());
  for (Elem x : a) b.set(x);
  return b;
}

inline GroupSet dilate_set(const GroupSpec& g, const GroupSet& a, std::int64_t lambda) {
  std::vector<Elem> out;
  out.reserve(a.size());
  for (Elem x : a) out.push_back(g.scale(x, lambda));
  return canonical_set(std::move(out));
}

inline GroupSet translate_set(const GroupSpec& g, const GroupSet& a, Elem t) {
  std::vector<Elem> out;
  out.reserve(a.size());
  for (Elem x : a) out.push_back(g.add(x, t));
  return canonical_set(std::move(out));
}

inline GroupSet negate_set(const GroupSpec& g, const GroupSet& a) {
  std::vector<Elem> out;
  out.reserve(a.size());
  for (Elem x : a) out.push_back(g.neg(x));
  return canonical_set(std::move(out));
}

inline GroupSet intersect_sets(const GroupSet& a, const GroupSet& b) {
  GroupSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline GroupSet sumset(const GroupSpec& g, const GroupSet& a, const GroupSet& b) {
  Bitset bits(g.size());
  for (Elem x : a)
    for (Elem y : b) bits.set(g.add(x, y));
  return bits.members();
}

inline bool subset_of(const GroupSet& a, const GroupSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Embeds A in [1,N] into Z/(2N+1); arithmetic progressions cannot wrap,
// so the nontrivial 3-AP counts agree exactly.
inline std::pair<GroupSpec, GroupSet> embed_interval(const std::vector<std::int64_t>& a,
                                                     std::int64_t n) {
  if (n < 1) throw std::invalid_argument("embed_interval: N must be >= 1");
  GroupSpec g = GroupSpec::make({2 * n + 1});
  GroupSet img;
  img.reserve(a.size());
  for (auto x : a) {
    if (x < 1 || x > n) throw std::invalid_argument("embed_interval: element out of [1,N]");
    img.push_back(x);
  }
  return {g, canonical_set(std::move(img))};
}

// ---- set file format ----------------------------------------------------
// First line "group: N1xN2x...xNk", then one element per line as
// comma-separated residues.  Canonical and whitespace-free.

inline std::string format_set(const GroupSpec& g, const GroupSet& a) {
  std::ostringstream os;
  os << "group: " << g.descriptor() << '\n';
  for (Elem x : a) {
    auto r = g.residues(x);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) os << ',';
      os << r[j];
    }
    os << '\n';
  }
  return os.str();
}

inline std::pair<GroupSpec, GroupSet> parse_set(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("set file: empty");
  const std::string prefix = "group: ";
  if (line.rfind(prefix, 0) != 0) throw std::invalid_argument("set file: missing group header");
  std::vector<std::int64_t> factors;
  {
    std::stringstream ss(line.substr(prefix.size()));
    std::string tok;
    while (std::getline(ss, tok, 'x')) {
      if (tok.empty()) throw std::invalid_argument("set file: bad group descriptor");
      factors.push_back(std::stoll(tok));
    }
  }
  GroupSpec g = GroupSpec::make(factors);
  std::vector<Elem> elems;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::int64_t> r;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) r.push_back(std::stoll(tok));
    if (r.size() != g.rank()) throw std::invalid_argument("set file: wrong residue arity");
    for (std::size_t j = 0; j < r.size(); ++j)
      if (r[j] < 0 || r[j] >= g.factors()[j])
        throw std::invalid_argument("set file: residue out of range");
    elems.push_back(g.index(r));
  }
  return {g, canonical_set(std::move(elems))};
}

inline std::pair<GroupSpec, GroupSet> read_set_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open set file: " + path);
  return parse_set(in);
}

inline void write_set_file(const std::string& path, const GroupSpec& g, const GroupSet& a) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write set file: " + path);
  out << format_set(g, a);
}

}  // namespace apsift

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace apsift {

// Error taxonomy used across the library.  invalid-argument maps onto
// std::invalid_argument; the rest get their own types so callers can
// distinguish "the instance violates a stated hypothesis" from "the math
// said this cannot happen".
struct precondition_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct internal_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct not_found_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct resource_limit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kRelTol = 1e-9;
inline constexpr double kAbsTol = 1e-12;

inline bool approx_eq(double a, double b, double rel = kRelTol, double abs = kAbsTol) {
  double d = std::fabs(a - b);
  return d <= abs || d <= rel * std::max(std::fabs(a), std::fabs(b));
}

// a >= b up to relative slack; keeps inequality checks one-sided but
// tolerant of roundoff at the boundary.
inline bool approx_ge(double a, double b, double rel = kRelTol, double abs = kAbsTol) {
  return a >= b - (abs + rel * std::max(std::fabs(a), std::fabs(b)));
}

inline bool approx_le(double a, double b, double rel = kRelTol, double abs = kAbsTol) {
  return approx_ge(b, a, rel, abs);
}

// Deterministic RNG.  All draws go through hand-rolled reductions so that
// traces are byte-identical for a fixed seed regardless of the standard
// library in use.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, n), rejection sampled
  std::int64_t below(std::int64_t n) {
    if (n <= 0) throw std::invalid_argument("Rng::below: n must be positive");
    std::uint64_t un = static_cast<std::uint64_t>(n);
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % un;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<std::int64_t>(x % un);
  }

  double unit() {  // [0,1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  Rng fork(std::uint64_t stream) {
    return Rng(next_u64() ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
  }

 private:
  std::uint64_t state_;
};

// Fixed-size bitset over group elements; enough set algebra for the
// shift-tuple intersections in the sifting engine.
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::int64_t n) : n_(n), w_((n + 63) / 64, 0) {}

  std::int64_t universe() const { return n_; }

  void set(std::int64_t i) { w_[i >> 6] |= (1ULL << (i & 63)); }
  void reset(std::int64_t i) { w_[i >> 6] &= ~(1ULL << (i & 63)); }
  bool test(std::int64_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }

  void intersect_with(const Bitset& o) {
    for (std::size_t j = 0; j < w_.size(); ++j) w_[j] &= o.w_[j];
  }

  std::int64_t count() const {
    std::int64_t c = 0;
    for (std::uint64_t x : w_) c += __builtin_popcountll(x);
    return c;
  }

  std::vector<std::int64_t> members() const {
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(count()));
    for (std::size_t j = 0; j < w_.size(); ++j) {
      std::uint64_t x = w_[j];
      while (x) {
        int b = __builtin_ctzll(x);
        out.push_back(static_cast<std::int64_t>(j) * 64 + b);
        x &= x - 1;
      }
    }
    return out;
  }

 private:
  std::int64_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

// log-sum-exp over a vector of log-weights; used when sampling shift
// tuples whose weights overflow doubles at large exponents.
inline double log_sum_exp(const std::vector<double>& logw) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : logw) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double x : logw) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace apsift

#include <catch2/catch_amalgamated.hpp>

#include "apsift/harmonic.hpp"
#include "apsift/util.hpp"

using namespace apsift;

namespace {

GroupFn random_fn(const GroupSpec& g, Rng& rng) {
  GroupFn f(g, 0.0);
  for (Elem x = 0; x < g.size(); ++x) f[x] = 2.0 * rng.unit() - 1.0;
  return f;
}

GroupSet random_set(const GroupSpec& g, Rng& rng, double p = 0.5) {
  GroupSet a;
  for (Elem x = 0; x < g.size(); ++x)
    if (rng.unit() < p) a.push_back(x);
  if (a.empty()) a.push_back(rng.below(g.size()));
  return a;
}

}  // namespace

TEST_CASE("normalized indicator") {
  GroupSpec g = GroupSpec::make({5});
  GroupSet all = {0, 1, 2, 3, 4};
  ProbMeasure mu = normalized_indicator(g, all);
  for (Elem x = 0; x < 5; ++x) CHECK(mu(x) == 1.0);
  ProbMeasure point = normalized_indicator(g, {0});
  CHECK(point(0) == 5.0);
  CHECK(point(1) == 0.0);
  CHECK_THROWS_AS(normalized_indicator(g, {}), std::invalid_argument);

  Rng rng(5);
  GroupSpec g2 = GroupSpec::make({4, 7});
  for (int i = 0; i < 20; ++i) {
    auto a = random_set(g2, rng);
    CHECK(std::fabs(expectation(normalized_indicator(g2, a).fn) - 1.0) < 1e-12);
  }
}

TEST_CASE("convolution agrees with the quadratic loop and the Fourier route") {
  GroupSpec g3 = GroupSpec::make({3});
  GroupFn point = indicator(g3, {0});
  GroupFn conv = convolve(point, point, Conv::star);
  CHECK(std::fabs(conv(0) - 1.0 / 3.0) < 1e-15);
  CHECK(conv(1) == 0.0);

  Rng rng(7);
  for (auto factors : {std::vector<std::int64_t>{12}, {4, 5}, {3, 3, 3}}) {
    GroupSpec g = GroupSpec::make(factors);
    for (int i = 0; i < 10; ++i) {
      GroupFn f = random_fn(g, rng), h = random_fn(g, rng);
      for (Conv mode : {Conv::star, Conv::circ}) {
        GroupFn fast = convolve(f, h, mode);
        GroupFn slow = convolve_naive(f, h, mode);
        GroupFn four = convolve_fourier(f, h, mode);
        for (Elem x = 0; x < g.size(); ++x) {
          CHECK(std::fabs(fast(x) - slow(x)) < 1e-10);
          CHECK(std::fabs(fast(x) - four(x)) < 1e-10);
        }
      }
    }
  }
  GroupSpec ga = GroupSpec::make({4}), gb = GroupSpec::make({5});
  CHECK_THROWS_AS(convolve(GroupFn(ga, 1.0), GroupFn(gb, 1.0), Conv::star),
                  std::invalid_argument);
}

TEST_CASE("autocorrelation of a normalized indicator peaks at alpha^{-1}") {
  Rng rng(9);
  GroupSpec g = GroupSpec::make({31});
  for (int i = 0; i < 20; ++i) {
    GroupSet a = random_set(g, rng, 0.4);
    double alpha = static_cast<double>(a.size()) / 31.0;
    ProbMeasure mu = normalized_indicator(g, a);
    GroupFn gg = convolve(mu.fn, mu.fn, Conv::circ);
    CHECK(std::fabs(gg(0) - 1.0 / alpha) < 1e-9);
    CHECK(sup_norm(gg) <= 1.0 / alpha + 1e-9);
  }
}

TEST_CASE("k-fold convolution") {
  GroupSpec g = GroupSpec::make({8});
  Rng rng(13);
  GroupFn f = random_fn(g, rng);
  CHECK_THROWS_AS(power_convolve(f, 0), std::invalid_argument);
  GroupFn same = power_convolve(f, 1);
  for (Elem x = 0; x < 8; ++x) CHECK(same(x) == f(x));
  GroupFn one(g, 1.0);
  GroupFn p3 = power_convolve(one, 3);
  for (Elem x = 0; x < 8; ++x) CHECK(std::fabs(p3(x) - 1.0) < 1e-12);
  // transform of the k-fold convolution is the k-th power
  int k = 4;
  FourierFn lhs = fourier(power_convolve(f, k));
  FourierFn fh = fourier(f);
  for (Elem e = 0; e < 8; ++e)
    CHECK(std::abs(lhs(e) - std::pow(fh(e), k)) < 1e-10);
}

TEST_CASE("weighted norms") {
  GroupSpec g = GroupSpec::make({6, 3});
  Rng rng(21);
  ProbMeasure mu = uniform_measure(g);
  GroupFn c(g, -2.5);
  for (double p : {1.0, 2.0, 3.5, kPInf}) CHECK(std::fabs(lp_norm(c, p, mu) - 2.5) < 1e-12);
  CHECK_THROWS_AS(lp_norm(c, 0.5, mu), std::invalid_argument);

  for (int i = 0; i < 200; ++i) {
    GroupFn f = random_fn(g, rng);
    double p = 1.0 + 3.0 * rng.unit();
    double q = p + 2.0 * rng.unit();
    CHECK(lp_norm(f, p) <= lp_norm(f, q) + 1e-12);
  }
  // direct p = 3 evaluation
  GroupFn f = random_fn(g, rng);
  double direct = 0;
  for (Elem x = 0; x < g.size(); ++x) direct += std::pow(std::fabs(f(x)), 3);
  direct = std::pow(direct / static_cast<double>(g.size()), 1.0 / 3.0);
  CHECK(std::fabs(lp_norm(f, 3.0) - direct) < 1e-10);
  // large p goes through the log path and still matches the sup
  GroupFn spike(g, 0.0);
  spike[3] = 7.5;
  CHECK(std::fabs(lp_norm(spike, 4000.0) -
                  7.5 * std::exp(std::log(1.0 / static_cast<double>(g.size())) / 4000.0)) <
        1e-9);
}

TEST_CASE("inner products and the adjoint identity") {
  GroupSpec g = GroupSpec::make({7, 3});
  Rng rng(23);
  GroupFn one(g, 1.0);
  CHECK(std::fabs(inner(one, one) - 1.0) < 1e-15);
  for (int i = 0; i < 200; ++i) {
    GroupFn f = random_fn(g, rng), h = random_fn(g, rng), k = random_fn(g, rng);
    double lhs = inner(convolve(f, h, Conv::star), k);
    double rhs = inner(f, convolve(h, k, Conv::circ));
    CHECK(std::fabs(lhs - rhs) < 1e-10);
  }
  // direct-sum oracle
  GroupFn f = random_fn(g, rng), h = random_fn(g, rng);
  ProbMeasure mu = uniform_measure(g);
  double direct = 0;
  for (Elem x = 0; x < g.size(); ++x) direct += f(x) * h(x);
  CHECK(std::fabs(inner(f, h, mu) - direct / static_cast<double>(g.size())) < 1e-12);
}

TEST_CASE("fourier transform basics") {
  GroupSpec g = GroupSpec::make({9});
  GroupFn one(g, 1.0);
  FourierFn oh = fourier(one);
  CHECK(std::abs(oh(0) - cplx(1, 0)) < 1e-12);
  for (Elem e = 1; e < 9; ++e) CHECK(std::abs(oh(e)) < 1e-12);
  FourierFn dh = fourier(indicator(g, {0}));
  for (Elem e = 0; e < 9; ++e) CHECK(std::abs(dh(e) - cplx(1.0 / 9.0, 0)) < 1e-12);

  Rng rng(31);
  GroupSpec g2 = GroupSpec::make({5, 4});
  for (int i = 0; i < 50; ++i) {
    GroupFn f = random_fn(g2, rng), h = random_fn(g2, rng);
    FourierFn fh = fourier(f), hh = fourier(h);
    cplx sum(0, 0);
    for (Elem e = 0; e < g2.size(); ++e) sum += fh(e) * std::conj(hh(e));
    CHECK(std::abs(sum - cplx(inner(f, h), 0)) < 1e-10);
    GroupFn back = fourier_inverse(fh);
    for (Elem x = 0; x < g2.size(); ++x) CHECK(std::fabs(back(x) - f(x)) < 1e-10);
    // difference-convolution transform carries the conjugate on the left
    FourierFn ch = fourier(convolve(f, h, Conv::circ));
    for (Elem e = 0; e < g2.size(); ++e)
      CHECK(std::abs(ch(e) - std::conj(fh(e)) * hh(e)) < 1e-10);
  }
}

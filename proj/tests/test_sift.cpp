#include <catch2/catch_amalgamated.hpp>

#include "apsift/sift.hpp"
#include "apsift/util.hpp"

using namespace apsift;

namespace {

GroupSet whole(const GroupSpec& g) {
  GroupSet s(static_cast<std::size_t>(g.size()));
  for (Elem x = 0; x < g.size(); ++x) s[static_cast<std::size_t>(x)] = x;
  return s;
}

GroupSet random_set(const GroupSpec& g, Rng& rng, double p = 0.5) {
  GroupSet a;
  for (Elem x = 0; x < g.size(); ++x)
    if (rng.unit() < p) a.push_back(x);
  if (a.empty()) a.push_back(rng.below(g.size()));
  return a;
}

GroupSet interval_set(Elem lo, Elem hi) {
  GroupSet s;
  for (Elem x = lo; x <= hi; ++x) s.push_back(x);
  return s;
}

}  // namespace

TEST_CASE("sifting identity") {
  GroupSpec g = GroupSpec::make({8});
  Rng rng(2);
  GroupFn f(g, 0.0);
  for (Elem x = 0; x < 8; ++x) f[x] = 2.0 * rng.unit() - 1.0;
  // trivial instance: everything the full group, p = 1
  auto r = sift_identity(g, whole(g), whole(g), whole(g), 1, f);
  CHECK(approx_eq(r.lhs, expectation(f), 1e-12, 1e-12));
  CHECK(approx_eq(r.rhs, expectation(f), 1e-9, 1e-12));

  for (int i = 0; i < 60; ++i) {
    GroupSpec gg = rng.below(2) == 0 ? GroupSpec::make({2 + rng.below(10)})
                                     : GroupSpec::make({2 + rng.below(3), 2 + rng.below(3)});
    GroupSet a = random_set(gg, rng, 0.4), c1 = random_set(gg, rng), c2 = random_set(gg, rng);
    GroupFn h(gg, 0.0);
    for (Elem x = 0; x < gg.size(); ++x) h[x] = 2.0 * rng.unit() - 1.0;
    int p = 1 + static_cast<int>(rng.below(2));
    auto rr = sift_identity(gg, a, c1, c2, p, h);
    CHECK(std::fabs(rr.lhs - rr.rhs) <= 1e-9 * std::max(1.0, std::fabs(rr.lhs)));
    if (rr.prob_defined) CHECK(std::fabs(rr.prob_total - 1.0) < 1e-9);
  }
  CHECK_THROWS_AS(sift_identity(g, {0}, {0}, {0}, 9, f), resource_limit_error);
}

TEST_CASE("weighted sift on the full group") {
  GroupSpec g = GroupSpec::make({9});
  SiftConfig cfg;
  Rng rng(5);
  auto all = whole(g);
  auto r = weighted_sift(g, all, 1.0, 1.0, all, all, 1, 0.5, cfg, rng);
  CHECK(r.dens1 == 1.0);
  CHECK(r.dens2 == 1.0);
  CHECK(r.corr_high == 1.0);
}

TEST_CASE("weighted sift on a subgroup instance") {
  GroupSpec g = GroupSpec::make({3, 3});
  // the line x2 = 0
  GroupSet sub = {g.index({0, 0}), g.index({1, 0}), g.index({2, 0})};
  SiftConfig cfg;
  Rng rng(5);
  auto all = whole(g);
  double alpha = 3.0 / 9.0;
  auto r = weighted_sift(g, sub, alpha, 1.0, all, all, 2, 0.5, cfg, rng);
  CHECK(!r.sampled);
  // re-verify both inequalities from scratch
  ProbMeasure mu = normalized_indicator(g, sub);
  GroupFn gg = convolve(mu.fn, mu.fn, Conv::circ);
  GroupFn high(g, 0.0);
  for (Elem x = 0; x < 9; ++x)
    if (gg(x) > r.level) high[x] = 1.0;
  CHECK(approx_ge(circ_inner_sets(g, r.a1, r.a2, high), r.corr_bound));
  CHECK(approx_ge(r.dens1, 0.25 * alpha * alpha));
  CHECK(approx_ge(r.dens2, 0.25 * alpha * alpha));
}

TEST_CASE("weighted sift rejects a failed hypothesis") {
  GroupSpec g = GroupSpec::make({12});
  SiftConfig cfg;
  Rng rng(5);
  GroupSet a = {0, 1};       // differences in {-1, 0, 1}
  GroupSet c1 = {5}, c2 = {11};  // the difference 6 misses supp(mu_A o mu_A)
  CHECK_THROWS_AS(weighted_sift(g, a, 2.0 / 12.0, 1.0, c1, c2, 1, 0.5, cfg, rng),
                  precondition_error);
}

TEST_CASE("weighted sift sampling mode matches its acceptance conditions") {
  GroupSpec g = GroupSpec::make({2001});
  SiftConfig cfg;
  cfg.seed = 9;
  Rng rng(9);
  GroupSet a = interval_set(0, 9);
  auto all = whole(g);
  double alpha = 10.0 / 2001.0;
  auto r = weighted_sift(g, a, alpha, 1.0, all, all, 9, 0.5, cfg, rng);
  CHECK(r.sampled);
  CHECK(r.draws >= 1);
  ProbMeasure mu = normalized_indicator(g, a);
  GroupFn gg = convolve(mu.fn, mu.fn, Conv::circ);
  GroupFn high(g, 0.0);
  for (Elem x = 0; x < g.size(); ++x)
    if (gg(x) > r.level) high[x] = 1.0;
  CHECK(approx_ge(circ_inner_sets(g, r.a1, r.a2, high), r.corr_bound));
}

TEST_CASE("finite-field iterated sift") {
  SiftConfig cfg;
  {
    GroupSpec g = GroupSpec::make({3, 3});
    CHECK_THROWS_AS(ff_iterated_sift(g, whole(g), 2, cfg), precondition_error);
  }
  {
    // an affine plane of density 1/9 in F_3^4
    GroupSpec g = GroupSpec::make({3, 3, 3, 3});
    GroupSet a;
    for (Elem x = 0; x < g.size(); ++x) {
      auto r = g.residues(x);
      if (r[0] == 1 && r[1] == 2) a.push_back(x);
    }
    CHECK(a.size() == 9);
    auto out = ff_iterated_sift(g, a, 2, cfg);
    CHECK(out.sigma >= 1.125);
    CHECK(out.sigma <= 9.0 + 1e-9);
    CHECK(out.corr_s >= out.corr_s_bound - 1e-12);
    CHECK(out.self1 <= out.self_bound + 1e-9);
    CHECK(out.self2 <= out.self_bound + 1e-9);
  }
  {
    GroupSpec g = GroupSpec::make({3, 3, 3});
    Rng rng(31);
    int done = 0;
    for (int i = 0; i < 40 && done < 10; ++i) {
      GroupSet a = random_set(g, rng, 0.25);
      ProbMeasure mu = normalized_indicator(g, a);
      GroupFn gg = convolve(mu.fn, mu.fn, Conv::circ);
      if (lp_norm(gg, 2) < 1.125) continue;
      auto out = ff_iterated_sift(g, a, 2, cfg);
      double alpha = static_cast<double>(a.size()) / 27.0;
      // doubling chain bookkeeping
      for (std::size_t k = 1; k < out.chain.size(); ++k) CHECK(out.chain[k].ratio >= 2.0);
      CHECK(static_cast<double>(out.chain.size()) <=
            std::ceil(std::log2(1.0 / alpha)) + 2.0);
      ++done;
    }
    CHECK(done == 10);
  }
}

TEST_CASE("localized sift, concentrated instance") {
  GroupSpec g = GroupSpec::make({2001});
  BohrSet b = bohr_build(g, {Character{{0}}}, 1.0);  // trivial frequency: all of G
  GroupSet a = interval_set(0, 9);
  SiftConfig cfg;
  cfg.c = 0.01;
  cfg.seed = 4;
  Rng rng(4);

  ProbMeasure mu = normalized_indicator(g, a);
  GroupFn gg = convolve(mu.fn, mu.fn, Conv::circ);
  double hyp = circ_inner_sets(g, a, a, gg);
  double sigma = hyp / 130.0;
  REQUIRE(sigma >= 1.0);

  auto out = localized_sift(g, a, b, b, a, sigma, cfg, rng);
  CHECK(out.which_case == 2);  // concentrated peaks force the sift branch
  CHECK(approx_ge(out.corr, sigma));
  CHECK(subset_of(out.a1, out.bprime.members()));
  GroupSet a2back = translate_set(g, out.a2, g.neg(out.translate));
  CHECK(subset_of(a2back, out.bdprime.members()));

  // hypothesis failure surfaces as a precondition error
  CHECK_THROWS_AS(localized_sift(g, a, b, b, a, hyp, cfg, rng), precondition_error);
}

TEST_CASE("bohr-set iterated sift with a doubling chain") {
  GroupSpec g = GroupSpec::make({2001});
  BohrSet b = bohr_build(g, {Character{{0}}}, 1.0);
  SiftConfig cfg;
  cfg.c = 0.01;
  cfg.seed = 11;
  int d = std::max(1, b.rank());
  BohrSet b1 = nested_regular(b, cfg.c / d);
  BohrSet b2 = nested_regular(b1, cfg.c / d);

  GroupSet a = interval_set(0, 6);
  auto out = bohr_iterated_sift(g, a, b, b1, b2, 3, cfg);
  double beta = b.density();
  double alpha = 7.0 / 2001.0;
  CHECK(out.sigma >= 1.0 + std::pow(2.0, -7) - 1e-12);
  CHECK(out.sigma <= 1.0 / alpha + 1e-9);
  CHECK(out.corr_s >= out.corr_s_bound - 1e-12);
  CHECK(out.self1 <= out.self_bound + 1e-9);
  CHECK(out.self2 <= out.self_bound + 1e-9);
  // at this scale the first sift already concentrates on the top level
  // set, so the maximal chain stops at once; extensions, when recorded,
  // must double
  CHECK(out.chain.size() >= 1);
  for (std::size_t k = 1; k < out.chain.size(); ++k) CHECK(out.chain[k].ratio >= 2.0 - 1e-9);
  // sigma matches the chain bookkeeping: sigma = mu(B) <g, mu_{Z1} o mu_{Z2}>
  CHECK(approx_eq(out.sigma, out.chain.back().corr * beta, 1e-9));
  // hosts: A1 inside B', A2 inside B'' + t
  REQUIRE(out.has_hosts);
  CHECK(subset_of(out.a1, out.bprime->members()));
  CHECK(subset_of(translate_set(g, out.a2, g.neg(out.translate)), out.bdprime->members()));

  // hypothesis failure: a flat set has no L^p mass
  CHECK_THROWS_AS(bohr_iterated_sift(g, whole(g), b, b1, b2, 3, cfg), precondition_error);
}

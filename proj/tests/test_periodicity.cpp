#include <catch2/catch_amalgamated.hpp>

#include "apsift/periodicity.hpp"
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

}  // namespace

TEST_CASE("almost periods") {
  GroupSpec g = GroupSpec::make({21});
  Rng rng(3);
  GroupSet a1 = random_set(g, rng, 0.4), a2 = random_set(g, rng, 0.4);
  GroupSet s = random_set(g, rng, 0.5);
  auto all = whole(g);

  CHECK_THROWS_AS(almost_periods(g, a1, a2, s, {}, 2, 0.1), std::invalid_argument);

  // a bound wider than the whole range admits every shift
  GroupFn f0 = convolve(convolve(normalized_indicator(g, a1).fn,
                                 normalized_indicator(g, a2).fn, Conv::circ),
                        indicator(g, s), Conv::star);
  int k = 3;
  {
    GroupSet x = almost_periods(g, a1, a2, s, all, k, 2.0 * sup_norm(f0) * k);
    CHECK(x.size() == all.size());
  }

  for (int i = 0; i < 25; ++i) {
    GroupSet b1 = random_set(g, rng, 0.3), b2 = random_set(g, rng, 0.3);
    GroupSet ss = random_set(g, rng, 0.5);
    int kk = 2 + static_cast<int>(rng.below(5));
    double eps = rng.below(2) == 0 ? 0.125 : 0.0625;
    GroupSet x = almost_periods(g, b1, b2, ss, all, kk, eps);
    CHECK(std::binary_search(x.begin(), x.end(), static_cast<Elem>(0)));
    CHECK(verify_smoothing(g, x, kk, b1, b2, ss) <= eps + 1e-12);
  }
}

TEST_CASE("smoothing measurement edge cases") {
  GroupSpec g = GroupSpec::make({15});
  auto all = whole(g);
  CHECK(verify_smoothing(g, all, 2, {1, 2}, {3}, all) < 1e-12);
  CHECK(verify_smoothing(g, {0}, 1, {1, 2}, {3, 7}, {2, 4}) < 1e-12);
  CHECK_THROWS_AS(verify_smoothing(g, {}, 1, {1}, {2}, {3}), std::invalid_argument);
}

TEST_CASE("spectrum") {
  GroupSpec g = GroupSpec::make({3, 3});
  auto all = whole(g);
  {
    auto sp = spectrum(g, all, 0.5);
    REQUIRE(sp.chars.size() == 1);
    CHECK(sp.chars[0].exps == std::vector<std::int64_t>{0, 0});
  }
  {
    auto sp = spectrum(g, {0}, 0.5);
    CHECK(sp.chars.size() == 9);  // point mass: every coefficient is 1
  }
  {
    // subgroup: spectrum = annihilator, exactly
    GroupSet line = {g.index({0, 0}), g.index({1, 0}), g.index({2, 0})};
    auto sp = spectrum(g, line, 0.5);
    REQUIRE(sp.chars.size() == 3);
    for (const auto& c : sp.chars) CHECK(c.exps[0] == 0);  // annihilator of the line
  }
}

TEST_CASE("chang subspace") {
  GroupSpec g = GroupSpec::make({3, 3, 3, 3});
  auto all = whole(g);
  {
    BohrSet v = chang_subspace(g, all);
    CHECK(v.size() == g.size());
    CHECK(v.rank() == 0);  // codimension 0
  }
  {
    // X a subspace: the orthogonal subspace is X itself
    GroupSet w;
    for (Elem x = 0; x < g.size(); ++x) {
      auto r = g.residues(x);
      if (r[2] == 0 && r[3] == 0) w.push_back(x);
    }
    BohrSet v = chang_subspace(g, w);
    CHECK(v.members() == w);
  }
  Rng rng(7);
  for (int i = 0; i < 25; ++i) {
    GroupSet x = random_set(g, rng, 0.1 + 0.5 * rng.unit());
    BohrSet v = chang_subspace(g, x);
    auto sp = spectrum(g, x, 0.5);
    for (const auto& ch : sp.chars)
      for (Elem vm : v.members()) CHECK(g.bohr_norm_of(character_index(g, ch), vm) == 0.0);
  }
}

TEST_CASE("chang bohr host") {
  GroupSpec g = GroupSpec::make({1009});
  BohrSet host = regularize(bohr_build(g, {Character{{5}}}, 0.8));
  {
    // X = host: the spectrum contains the trivial character; the
    // condition is vacuous and the host comes back regularized
    BohrSet bp = chang_bohr(g, host.members(), host, 2.0);
    CHECK(bp.regular());
    CHECK(bp.radius() <= host.radius() + 1e-12);
  }
  Rng rng(11);
  for (int i = 0; i < 10; ++i) {
    GroupSet x;
    for (Elem m : host.members())
      if (rng.unit() < 0.4) x.push_back(m);
    if (x.empty()) x.push_back(host.members()[0]);
    double nu = 0.1 + 0.8 * rng.unit();
    BohrSet bp = chang_bohr(g, x, host, nu);
    CHECK(bp.regular());
    auto sp = spectrum(g, x, 0.5);
    for (const auto& ch : sp.chars) {
      Elem e = character_index(g, ch);
      for (Elem t : bp.members()) CHECK(g.bohr_norm_of(e, t) <= nu);
    }
  }
}

TEST_CASE("smoothing bound via Cauchy-Schwarz") {
  {
    GroupSpec g = GroupSpec::make({3, 3});
    auto all = whole(g);
    auto sb = cs_smoothing_bound(g, all, all, all, all, 3);
    CHECK(sb.lhs < 1e-12);  // F is constant
  }
  {
    GroupSpec g = GroupSpec::make({3, 3, 3});
    Rng rng(13);
    for (int i = 0; i < 15; ++i) {
      GroupSet a = random_set(g, rng, 0.4), a1 = random_set(g, rng, 0.3),
               a2 = random_set(g, rng, 0.3), x = random_set(g, rng, 0.3);
      int k = 2 + static_cast<int>(rng.below(5));
      auto sb = cs_smoothing_bound(g, a, a1, a2, x, k);
      CHECK(approx_le(sb.lhs, sb.rhs));
      auto sb2 = cs_smoothing_bound(g, a, a1, a2, x, k, 0.2 + 0.5 * rng.unit());
      CHECK(approx_le(sb2.lhs, sb2.rhs));
      // Fourier-side Cauchy-Schwarz
      auto cs = fourier_l1_cs_check(g, a, a1, a2);
      CHECK(approx_ge(cs.lhs, cs.rhs));
    }
  }
  {
    // large k: the tail vanishes and the shift error at exact-orthogonality
    // translates is essentially zero
    GroupSpec g = GroupSpec::make({3, 3});
    Rng rng(17);
    GroupSet a = random_set(g, rng, 0.5), a1 = random_set(g, rng, 0.4),
             a2 = random_set(g, rng, 0.4), x = random_set(g, rng, 0.4);
    auto sb = cs_smoothing_bound(g, a, a1, a2, x, 60);
    CHECK(sb.lhs <= sb.rhs + 1e-12);
    CHECK(sb.lhs < 1e-6);
  }
}

TEST_CASE("cauchy-schwarz correlation inequality") {
  // <g, mu_{A1} o mu_{A2}> <= <g, mu_{A1} o mu_{A1}>^{1/2} <g, mu_{A2} o mu_{A2}>^{1/2}
  GroupSpec g = GroupSpec::make({31});
  Rng rng(19);
  for (int i = 0; i < 50; ++i) {
    GroupSet a = random_set(g, rng, 0.4), a1 = random_set(g, rng, 0.4),
             a2 = random_set(g, rng, 0.4);
    ProbMeasure mu = normalized_indicator(g, a);
    GroupFn gg = convolve(mu.fn, mu.fn, Conv::circ);
    double cross = circ_inner_sets(g, a1, a2, gg);
    double s1 = circ_inner_sets(g, a1, a1, gg);
    double s2 = circ_inner_sets(g, a2, a2, gg);
    CHECK(approx_le(cross, std::sqrt(s1) * std::sqrt(s2)));
  }
}

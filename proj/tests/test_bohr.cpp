#include <catch2/catch_amalgamated.hpp>

#include "apsift/bohr.hpp"
#include "apsift/util.hpp"

using namespace apsift;

namespace {

// grid decision for the regularity condition, sampling the kappa window at
// breakpoints (and just below them) plus a uniform mesh
bool regular_by_grid(const BohrSet& b) {
  int d = b.rank();
  if (d == 0 || b.radius() == 0) return true;
  double rho = b.radius();
  double w = 1.0 / (100.0 * d);
  auto count_at = [&](double kappa) { return b.table()->count_leq((1.0 + kappa) * rho); };
  double base = static_cast<double>(b.size());
  std::vector<double> kappas;
  for (int i = -200; i <= 200; ++i) kappas.push_back(w * i / 200.0);
  for (double v : b.table()->values) {
    double kappa = v / rho - 1.0;
    if (std::fabs(kappa) <= w) {
      kappas.push_back(kappa);
      kappas.push_back(kappa - 1e-12);
    }
  }
  for (double kappa : kappas) {
    if (std::fabs(kappa) > w) continue;
    double cnt = static_cast<double>(count_at(kappa));
    if (cnt > (1.0 + 100.0 * d * std::fabs(kappa)) * base + 1e-9) return false;
    if (cnt < (1.0 - 100.0 * d * std::fabs(kappa)) * base - 1e-9) return false;
  }
  return true;
}

BohrSet random_bohr(Rng& rng, std::int64_t nmax, int rank_max = 3) {
  std::int64_t n = 31 + rng.below(nmax - 30);
  GroupSpec g = GroupSpec::make({n});
  std::vector<Character> freqs;
  int rank = 1 + static_cast<int>(rng.below(rank_max));
  for (int i = 0; i < rank; ++i) freqs.push_back(Character{{1 + rng.below(n - 1)}});
  return bohr_build(g, freqs, 0.1 + 1.2 * rng.unit());
}

}  // namespace

TEST_CASE("bohr set membership") {
  GroupSpec g = GroupSpec::make({12});
  BohrSet all = bohr_build(g, {}, 0.5);
  CHECK(all.size() == 12);  // empty frequency set
  BohrSet all2 = bohr_build(g, {Character{{5}}}, 2.0);
  CHECK(all2.size() == 12);  // |1 - gamma| <= 2 always

  GroupSpec g7 = GroupSpec::make({7});
  BohrSet b = bohr_build(g7, {Character{{1}}}, 1.0);
  CHECK(b.members() == GroupSet{0, 1, 6});
  CHECK(b.contains(0));
  // members symmetric under negation, 0 always in
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    BohrSet r = random_bohr(rng, 301);
    CHECK(r.contains(0));
    for (Elem x : r.members()) CHECK(r.contains(r.group().neg(x)));
  }
}

TEST_CASE("regularization lands in [rho/2, rho] and is exact") {
  GroupSpec g = GroupSpec::make({12});
  BohrSet rank0 = bohr_build(g, {}, 0.7);
  CHECK(regularize(rank0).radius() == 0.7);

  GroupSpec g101 = GroupSpec::make({101});
  BohrSet b = bohr_build(g101, {Character{{1}}}, 0.9);
  BohrSet reg = regularize(b);
  CHECK(reg.regular());
  CHECK(reg.radius() >= 0.45);
  CHECK(reg.radius() <= 0.9);

  Rng rng(19);
  for (int i = 0; i < 40; ++i) {
    BohrSet raw = random_bohr(rng, 2001);
    BohrSet r = regularize(raw);
    CHECK(r.regular());
    CHECK(r.radius() >= raw.radius() / 2 - 1e-12);
    CHECK(r.radius() <= raw.radius() + 1e-12);
  }
}

TEST_CASE("exact regularity decision agrees with dense grid sampling") {
  Rng rng(29);
  int checked = 0;
  for (int i = 0; i < 50; ++i) {
    BohrSet b = random_bohr(rng, 1201);
    CHECK(b.regular() == regular_by_grid(b));
    ++checked;
    BohrSet r = regularize(b);
    CHECK(regular_by_grid(r));
  }
  CHECK(checked == 50);
  // product groups too
  for (int i = 0; i < 20; ++i) {
    std::int64_t n1 = 5 + rng.below(40), n2 = 5 + rng.below(40);
    GroupSpec g = GroupSpec::make({n1, n2});
    std::vector<Character> freqs;
    int rank = 1 + static_cast<int>(rng.below(2));
    for (int r = 0; r < rank; ++r) freqs.push_back(Character{{rng.below(n1), rng.below(n2)}});
    BohrSet b = bohr_build(g, freqs, 0.1 + 1.2 * rng.unit());
    CHECK(b.regular() == regular_by_grid(b));
    BohrSet reg = regularize(b);
    CHECK(reg.regular());
    CHECK(regular_by_grid(reg));
  }
}

TEST_CASE("zero-radius bohr sets are regular") {
  GroupSpec g = GroupSpec::make({3, 3});
  BohrSet sub = bohr_build(g, {Character{{1, 1}}}, 0.0);
  CHECK(sub.size() == 3);  // kernel of x1 + x2
  CHECK(sub.regular());
}

TEST_CASE("size bound") {
  Rng rng(37);
  for (int i = 0; i < 30; ++i) {
    BohrSet b = random_bohr(rng, 1009);
    for (int s = 0; s < 10; ++s) {
      auto r = size_bound_check(b, 0.02 + 0.96 * rng.unit());
      CHECK(r.holds());
    }
  }
}

TEST_CASE("narrow support bound") {
  Rng rng(41);
  for (int i = 0; i < 25; ++i) {
    BohrSet b = regularize(random_bohr(rng, 2001, 2));
    int d = b.rank();
    double rho = (0.2 + 0.3 * rng.unit()) / (100.0 * d);
    double delta = (0.2 + 0.25 * rng.unit()) / (100.0 * d);
    GroupSet supp = b.dilate(rho).members();
    GroupFn w(b.group(), 0.0);
    double tot = 0;
    for (Elem x : supp) {
      w[x] = 0.1 + rng.unit();
      tot += w[x];
    }
    for (Elem x : supp) w[x] *= static_cast<double>(b.group().size()) / tot;
    auto r = narrow_support_check(b, rho, delta, ProbMeasure(std::move(w), false));
    CHECK(r.holds());
  }
  GroupSpec g = GroupSpec::make({101});
  BohrSet b = regularize(bohr_build(g, {Character{{1}}}, 0.9));
  CHECK_THROWS_AS(narrow_support_check(b, 0.009, 0.009, uniform_measure(g)),
                  std::invalid_argument);
}

TEST_CASE("regular approximation") {
  Rng rng(43);
  for (int i = 0; i < 25; ++i) {
    BohrSet b = regularize(random_bohr(rng, 2001, 2));
    int d = b.rank();
    int l = 1 + static_cast<int>(rng.below(2));
    double rho = (0.3 + 0.6 * rng.unit()) / (100.0 * l * d);
    GroupSet small = b.dilate(rho).members();
    GroupSet supp = small;
    for (int t = 1; t < l; ++t) supp = sumset(b.group(), supp, small);
    GroupFn w(b.group(), 0.0);
    double tot = 0;
    for (Elem x : supp) {
      w[x] = 0.1 + rng.unit();
      tot += w[x];
    }
    for (Elem x : supp) w[x] *= static_cast<double>(b.group().size()) / tot;
    auto r = regular_approx_check(b, l, rho, ProbMeasure(std::move(w), false));
    CHECK(r.holds());
  }
}

TEST_CASE("even-moment comparison") {
  GroupSpec g = GroupSpec::make({3001});
  BohrSet b = regularize(bohr_build(g, {Character{{1}}}, 0.9));
  BohrSet b1 = nested_regular(b, 1.0 / 400.0);
  BohrSet b2 = nested_regular(b1, 0.8);

  {
    GroupFn zero(g, 0.0);
    auto r = lp_compare(zero, b, b1, b2, 17, 2);
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs_star == 0.0);
    CHECK(r.rhs_circ == 0.0);
  }
  {
    GroupFn f = normalized_indicator(g, b.members()).fn;
    auto r = lp_compare(f, b, b1, b2, 0, 2);
    CHECK(approx_ge(r.lhs, r.rhs_star));
    CHECK(approx_ge(r.lhs, r.rhs_circ));
  }
  Rng rng(47);
  for (int i = 0; i < 20; ++i) {
    GroupFn f(g, 0.0);
    for (int t = 0; t < 120; ++t) f[rng.below(3001)] = 2.0 * rng.unit() - 1.0;
    int p = rng.below(2) == 0 ? 2 : 4;
    auto r = lp_compare(f, b, b1, b2, rng.below(3001), p);
    CHECK(approx_ge(r.lhs, r.rhs_star));
    CHECK(approx_ge(r.lhs, r.rhs_circ));
  }
  CHECK_THROWS_AS(lp_compare(GroupFn(g, 1.0), b, b1, b2, 0, 3), std::invalid_argument);
}

TEST_CASE("nested regular dilates") {
  GroupSpec g = GroupSpec::make({1009});
  BohrSet b = regularize(bohr_build(g, {Character{{1}}}, 1.0));
  BohrSet n1 = nested_regular(b, 1.0);
  CHECK(n1.regular());
  CHECK(n1.radius() >= b.radius() / 2 - 1e-12);
  CHECK(subset_of(n1.members(), b.members()));

  // the paper's narrowing constant: the chain exists even when it
  // collapses to tiny sets
  double c = 1.0 / (8192.0 * 100.0);
  int d = b.rank();
  BohrSet c1 = nested_regular(b, c / d);
  BohrSet c2 = nested_regular(c1, c / (2.0 * d));
  CHECK(c1.regular());
  CHECK(c2.regular());
  CHECK(subset_of(c2.members(), c1.members()));
  CHECK(subset_of(c1.members(), b.members()));
  CHECK(c1.size() >= 1);
}

TEST_CASE("unit dilation of a bohr set") {
  GroupSpec g = GroupSpec::make({101});
  BohrSet b = regularize(bohr_build(g, {Character{{3}}}, 0.8));
  BohrSet d2 = dilate_bohr_set(b, 2);
  CHECK(d2.rank() == b.rank());
  CHECK(d2.radius() == b.radius());
  CHECK(d2.regular() == b.regular());
  CHECK(d2.members() == dilate_set(g, b.members(), 2));
  CHECK_THROWS_AS(dilate_bohr_set(bohr_build(GroupSpec::make({6}), {Character{{1}}}, 0.5), 2),
                  std::invalid_argument);
}

TEST_CASE("narrow density dichotomy") {
  GroupSpec g = GroupSpec::make({101});
  BohrSet b = regularize(bohr_build(g, {Character{{1}}}, 0.9));
  // pick delta inside the empty gap just above the radius so that
  // |B_{1+delta}| = |B| exactly
  double next_up = 2.0;
  for (double v : b.table()->values)
    if (v > b.radius()) {
      next_up = v;
      break;
    }
  double delta = 0.5 * (next_up / b.radius() - 1.0);
  BohrSet b1 = b.dilate(delta * 0.9);
  BohrSet b2 = b.dilate(delta * 0.5);

  {
    auto r = narrow_density_dichotomy(b.members(), b, b1, b2, 1.0 / 8192.0, delta);
    CHECK(r.which == 1);
    CHECK(r.witness == 0);
  }
  {
    // half of B concentrated near 0: a sup-norm witness appears
    GroupSet a;
    for (Elem x : b.members())
      if (b.table()->norm[static_cast<std::size_t>(x)] <= b.radius() / 2) a.push_back(x);
    auto r = narrow_density_dichotomy(a, b, b1, b2, 1.0 / 8192.0, delta);
    CHECK(r.which == 2);
  }
  Rng rng(53);
  for (int i = 0; i < 50; ++i) {
    GroupSet a;
    for (Elem x : b.members())
      if (rng.unit() < 0.5) a.push_back(x);
    if (a.empty()) a.push_back(0);
    auto r = narrow_density_dichotomy(a, b, b1, b2, 1.0 / 8192.0, delta);
    CHECK((r.which == 1 || r.which == 2));
  }
}

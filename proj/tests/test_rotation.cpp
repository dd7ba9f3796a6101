#include "cocycle/continued_fraction.hpp"
#include "cocycle/piecewise_poly.hpp"
#include "cocycle/rotation.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace cocycle;
using namespace cocycle::rotation;

namespace {

// ||q alpha|| for alpha = P/Q, in grid units.
std::uint64_t grid_norm(std::uint64_t q, std::uint64_t P, std::uint64_t Q) {
  const std::uint64_t r = mulmod(q, P, Q);
  return std::min(r, Q - r);
}

// Scan all tower intervals for the one containing the oriented grid point g.
std::optional<std::uint64_t> brute_interval(const TowerDecomposition& t, std::uint64_t g) {
  const std::uint64_t Po = t.column_start(1);
  for (std::uint64_t i = 0; i < t.q_n(); ++i) {
    const std::uint64_t s = mulmod(i, Po, t.Q());
    if (g >= s && g - s < t.D()) return i;
  }
  return std::nullopt;
}

RotationConstruction small_build(std::size_t p = 1) {
  RotationParams params;
  params.quotients = {1, 1, 1, 200, 1, 1, 1, 500};
  params.level_indices = {4, 8};
  params.p = p;
  return build_rotation_cocycle(params);
}

}  // namespace

TEST_CASE("continued fraction convergents") {
  const ContinuedFraction golden({1, 1, 1, 1, 1});
  CHECK(golden.q(1) == 1);
  CHECK(golden.q(2) == 2);
  CHECK(golden.q(3) == 3);
  CHECK(golden.q(4) == 5);
  CHECK(golden.q(5) == 8);
  CHECK(golden.alpha() == Rational(5, 8));
  CHECK(ContinuedFraction::from_rational(Rational(1, 3)).quotients() == std::vector<std::uint64_t>{3});
  // the terminal 1 is folded: 5/8 = [0; 1, 1, 1, 2]
  CHECK(ContinuedFraction::from_rational(Rational(5, 8)).quotients() == std::vector<std::uint64_t>{1, 1, 1, 2});
  CHECK(ContinuedFraction::from_rational(Rational(5, 8)).alpha() == golden.alpha());
  CHECK_THROWS_AS(ContinuedFraction({1}), std::invalid_argument);
  CHECK_THROWS_AS(ContinuedFraction({2, 0}), std::invalid_argument);
  CHECK_THROWS_AS(ContinuedFraction::from_rational(Rational(0)), std::invalid_argument);
  CHECK_THROWS_AS(ContinuedFraction::from_rational(Rational(1)), std::invalid_argument);
}

TEST_CASE("convergents are the best approximations") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::uint64_t> pick(1, 12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint64_t> a(6);
    for (auto& v : a) v = pick(rng);
    const ContinuedFraction cf(a);
    const auto P = to_u64(cf.p(6), "P"), Q = to_u64(cf.q(6), "Q");
    CHECK(cf.norm(0) * Rational(cf.q(1)) < 1);
    // p_n is the nearest integer to q_n alpha from n = 1 on (n = 0 fails when a_1 = 1)
    for (long n = 1; n + 1 < 6; ++n) {
      const auto qn = to_u64(cf.q(n), "q"), qn1 = to_u64(cf.q(n + 1), "q");
      // ||q_n alpha|| < 1/q_{n+1}, exactly
      CHECK(cf.norm(n) * Rational(BigInt(qn1)) < 1);
      // the last two norms tie when a_N = 1
      if (n + 1 < 5 || a.back() > 1) CHECK(cf.norm(n + 1) < cf.norm(n));
      CHECK(cf.norm_numerator(n) == grid_norm(qn, P, Q));
      // no smaller denominator does better
      for (std::uint64_t q = 1; q < qn1; ++q) CHECK(grid_norm(q, P, Q) >= grid_norm(qn, P, Q));
    }
  }
}

TEST_CASE("towers tile the circle exactly") {
  for (const auto& pq : {std::vector<std::uint64_t>{1, 1, 1, 1, 1}, std::vector<std::uint64_t>{2, 3, 1, 4, 7, 2},
                         std::vector<std::uint64_t>{1, 1, 1, 200, 1, 1, 1, 500, 1, 1}}) {
    const ContinuedFraction cf(pq);
    for (std::size_t n = 1; n + 1 <= cf.depth(); ++n) {
      const TowerDecomposition t(cf, n);
      const auto e = t.verify();
      INFO("n = " << n);
      CHECK(e.ok());
      CHECK(e.columns_checked);
      CHECK(e.total == 1);
      CHECK(t.base_length() == cf.norm(static_cast<long>(n) - 1));
    }
  }
  const ContinuedFraction golden({1, 1, 1, 1, 1});
  const TowerDecomposition t(golden, 3);
  CHECK(t.q_n() == 3);
  CHECK(t.base_length() == golden.norm(2));
  CHECK_THROWS_AS(TowerDecomposition(golden, 5), std::out_of_range);
  CHECK_THROWS_AS(TowerDecomposition(golden, 0), std::out_of_range);
}

TEST_CASE("tower location agrees with interval scanning") {
  const ContinuedFraction cf({2, 3, 1, 4, 7, 2});
  std::mt19937_64 rng(4);
  for (std::size_t n = 2; n <= 5; ++n) {
    const TowerDecomposition t(cf, n);
    std::uniform_int_distribution<std::uint64_t> pick(0, t.Q() - 1);
    for (int s = 0; s < 300; ++s) {
      const std::uint64_t g = pick(rng);
      const auto loc = t.locate({g, 0.5});
      const auto brute = brute_interval(t, g);
      REQUIRE(loc.has_value() == brute.has_value());
      if (loc) {
        CHECK(loc->u + loc->w * t.q_prev() == *brute);
        CHECK(loc->offset == g - t.column_start(loc->u) - loc->w * t.D());
      }
    }
  }
}

TEST_CASE("reflection is an involution and conjugates the rotation") {
  const ContinuedFraction cf({1, 2, 3, 4});
  const TowerDecomposition even(cf, 2);
  REQUIRE(even.orientation() == -1);
  const RotationSystem rot(to_u64(cf.p(4), "P"), to_u64(cf.q(4), "Q"));
  std::mt19937_64 rng(8);
  for (int s = 0; s < 100; ++s) {
    const auto x = rot.random_point(rng);
    const auto y = even.orient(x);
    const auto back = even.orient(y);
    CHECK(back.g == x.g);
    CHECK(back.f == Catch::Approx(x.f).margin(1e-15));
    // T in x coordinates is +(Q-P) in y coordinates
    const auto ty = even.orient(rot.advance(x, 1));
    CHECK(ty.g == (y.g + rot.Q() - rot.P()) % rot.Q());
  }
}

TEST_CASE("ramp profiles are C^p with flat ends") {
  for (std::size_t p = 1; p <= 4; ++p) {
    const auto R = ramp_profile(p);
    CHECK(R.pieces().front()(Rational(0)) == 0);
    CHECK(R.pieces().back()(Rational(1)) == 1);
    CHECK(R.continuity_defect(p) == 0);
    CHECK(R.max_degree() == p + 1);
    PiecewisePoly d = R;
    for (std::size_t i = 1; i <= p; ++i) {
      d = d.derivative();
      CHECK(d.pieces().front()(Rational(0)) == 0);
      CHECK(d.pieces().back()(Rational(1)) == 0);
    }
    // monotone: the density is nonnegative on a fine grid
    const auto psi = bump_density(p);
    for (int i = 0; i <= 1000; ++i) CHECK(psi.eval(i / 1000.0) >= -1e-12);
  }
  // p = 1 density is the tent of height 2
  CHECK(bump_density(1).eval(0.5) == Catch::Approx(2.0));
  CHECK_THROWS_AS(bump_density(0), std::invalid_argument);
}

TEST_CASE("rotation level parameters") {
  const auto con = small_build();
  REQUIRE(con.levels.size() == 2);
  CHECK(con.padded == 2);
  const auto& L1 = con.levels[0];
  CHECK(L1.c == 4);
  CHECK(L1.r == 4);
  CHECK(L1.ell == 48);
  CHECK(L1.ell_half == 24);
  CHECK(L1.q() == 3);
  CHECK(L1.d == Catch::Approx(1.0 / 602));
  const auto& L2 = con.levels[1];
  CHECK(L2.c == 8);
  CHECK(L2.r == 16);
  CHECK(L2.ell == 30);
  CHECK(L2.q() == 1812);
  CHECK(L2.tower.orientation() == -1);

  RotationParams bad;
  bad.quotients = {1, 1, 1, 10, 1};
  bad.level_indices = {4};
  CHECK_THROWS_AS(build_rotation_cocycle(bad), std::invalid_argument);
  bad.level_indices = {};
  CHECK_THROWS_AS(build_rotation_cocycle(bad), std::invalid_argument);
  bad.level_indices = {6};
  CHECK_THROWS_AS(build_rotation_cocycle(bad), std::out_of_range);
  CHECK(huge_indices({1, 1, 1, 200, 1, 1, 1, 500}, 100) == std::vector<std::size_t>{4, 8});

  RotationParams full;
  full.quotients = {1, 1, 1, 1000, 1, 1, 1, 2000};
  full.level_indices = {4, 8};
  full.profile = Profile::asymptotic;
  const auto pc = build_rotation_cocycle(full);
  CHECK(pc.levels[0].c == 3);
  CHECK(pc.levels[0].r == 3);
  CHECK(pc.levels[1].c == 60);
  CHECK(pc.levels[1].r == 119);
}

TEST_CASE("bump plateau, support and C^p norm") {
  for (std::size_t p = 1; p <= 3; ++p) {
    const auto con = small_build(p);
    for (const auto& L : con.levels) {
      const auto& b = L.bump;
      const long double W = b.width_grid() / 4;
      CHECK(b.value(0) == 0);
      CHECK(b.value(b.width_grid()) == 0);
      CHECK(b.value(2 * W) == L.d);
      CHECK(b.value(W) == Catch::Approx(L.d));
      CHECK(b.value(3 * W) == Catch::Approx(L.d));
      CHECK(b.value(W / 2) < L.d);
      const auto rep = bump_report(L);
      CHECK(rep.cp_ok);
      CHECK(rep.continuity_defect == 0);
      CHECK(rep.edge_derivatives == 0);
      CHECK(rep.ratio > 0);
      // derivative by central differences
      const long double h = W * 1e-4L;
      const long double y = W * 0.37L;
      const double fd = (b.value(y + h) - b.value(y - h)) / static_cast<double>(2 * h / L.tower.Q());
      CHECK(b.derivative(1, y) == Catch::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("F_k has sup d_k (1+1/c_k)^{r_k-1}, mean zero and no flip on j = 0") {
  const auto con = small_build();
  for (const auto& L : con.levels) {
    CHECK(L.sup_F() <= L.d * std::exp(static_cast<double>(L.k)));
    // midpoint quadrature over the grid
    long double total = 0, mass = 0;
    double maxabs = 0;
    const std::uint64_t Q = con.rot.Q();
    const std::uint64_t stride = std::max<std::uint64_t>(1, Q / 2'000'000);
    for (std::uint64_t g = 0; g < Q; g += stride) {
      const double v = L.F({g, 0.5});
      total += v;
      mass += std::abs(v);
      maxabs = std::max(maxabs, std::abs(v));
    }
    CHECK(maxabs <= L.sup_F() * (1 + 1e-12));
    CHECK(std::abs(total) <= 1e-6 * mass);
    // j = 0 cell: F = F~ at the oriented position
    const auto& t = L.tower;
    for (std::uint64_t u : {std::uint64_t{0}, L.q() - 1}) {
      const std::uint64_t g = t.column_start(u) + 3 * t.D() + t.D() / 2;
      const auto x = t.orient({g, 0.25});
      CHECK(L.F(x) == Catch::Approx(L.F_tilde(3.0L * t.D() + t.D() / 2 + 0.25L)));
    }
  }
}

TEST_CASE("transfer function identity and telescoping") {
  const auto con = small_build();
  std::mt19937_64 rng(12);
  for (const auto& L : con.levels) {
    const double tol = 1e-10 * static_cast<double>(L.ell * L.q());
    for (int s = 0; s < 2000; ++s) {
      const auto x = con.rot.random_point(rng);
      CHECK(std::abs(L.F(x) - (L.G(x) - L.G(con.rot.advance(x, 1)))) <= tol);
    }
    std::uniform_int_distribution<std::uint64_t> pick_n(1, L.tower.q_n());
    for (int s = 0; s < 20; ++s) {
      const auto x = con.rot.random_point(rng);
      const auto n = pick_n(rng);
      long double sum = 0;
      auto z = x;
      for (std::uint64_t i = 0; i < n; ++i, z = con.rot.advance(z, 1)) sum += L.F(z);
      CHECK(std::abs(static_cast<double>(sum) - (L.G(x) - L.G(z))) <= tol);
    }
  }
}

TEST_CASE("block sums from the base vanish") {
  const auto con = small_build();
  std::mt19937_64 rng(13);
  for (const auto& L : con.levels) {
    std::uniform_int_distribution<std::uint64_t> pick_j(0, L.r - 2), pick_g(0, L.tower.D() - 1);
    const std::uint64_t block = L.ell * L.q();
    for (int s = 0; s < 20; ++s) {
      const auto j = pick_j(rng);
      const auto x0 = L.tower.orient({pick_g(rng), 0.5});  // a point of I_0
      auto z = con.rot.advance(x0, static_cast<std::int64_t>(j * block));
      long double sum = 0;
      for (std::uint64_t i = 0; i < block; ++i, z = con.rot.advance(z, 1)) sum += L.F(z);
      CHECK(std::abs(static_cast<double>(sum)) <= static_cast<double>(block) * 1e-14);
    }
  }
}

TEST_CASE("sup G bound") {
  const auto con = small_build();
  std::mt19937_64 rng(14);
  for (const auto& L : con.levels) {
    const auto sg = sup_G(L);
    CHECK(sg.pass);
    CHECK(sg.upper >= sg.grid_max);
    double sampled = 0;
    for (int s = 0; s < 20000; ++s) sampled = std::max(sampled, std::abs(L.G(con.rot.random_point(rng))));
    CHECK(sampled <= sg.upper);
    CHECK(sampled >= 0.5 * sg.grid_max);
  }
}

TEST_CASE("rigid times") {
  RotationParams params;
  params.quotients = {1, 1, 1, 260, 1100};
  params.level_indices = {4, 5};
  const auto con = build_rotation_cocycle(params);
  std::mt19937_64 rng(15);
  for (std::size_t k = 1; k <= 2; ++k) {
    const auto rep = rigid_time_report(con, k, 30, rng);
    CHECK(rep.i_max == 1);
    CHECK(rep.overlap_ok);
    CHECK(rep.sums_ok);
    REQUIRE(rep.times.size() == 1);
    CHECK(rep.times[0].overlap_ratio == 1 - Rational(3, static_cast<long>(con.levels[k - 1].ell_half)));
    CHECK(rep.times[0].samples == 30);
  }
  const auto none = rigid_time_report(small_build(), 1, 5, rng);
  CHECK(none.i_max == 0);
  CHECK(none.times.empty());
}

TEST_CASE("support of the squash defect") {
  const auto con = small_build();
  std::mt19937_64 rng(16);
  for (const auto& L : con.levels) {
    for (std::uint64_t j : {std::uint64_t{1}, std::uint64_t{2}}) {
      const double lambda = L.s[j];
      const auto bound = to_double(structural_support_bound(L, j));
      const std::uint64_t shift = j * L.ell * L.q();
      int hits = 0;
      const int samples = 20000;
      const double scale = sup_G(L).upper;
      for (int s = 0; s < samples; ++s) {
        const auto x = con.rot.random_point(rng);
        const double v = L.G(con.rot.advance(x, static_cast<std::int64_t>(shift))) - lambda * L.G(x);
        if (std::abs(v) > 1e-12 * scale) ++hits;
      }
      const double freq = static_cast<double>(hits) / samples;
      CHECK(freq <= bound + 4 * std::sqrt(bound / samples) + 1e-3);
    }
  }
}

TEST_CASE("squash search") {
  RotationParams params;
  params.quotients = {1, 1, 1, 2000, 1, 1, 1, 20000, 1, 1, 1, 200000, 1, 1};
  params.level_indices = {4, 8, 12};
  const auto con = build_rotation_cocycle(params);
  CHECK_FALSE(con.levels[2].tower.locatable());
  for (double c : {2.0, -3.0}) {
    const auto rep = squash_rotation_search(con, c);
    INFO("c = " << c);
    CHECK_FALSE(rep.stalled);
    CHECK(rep.selected.size() == 3);
    CHECK(rep.gaps_ok);
    CHECK(rep.supports_ok);
    for (const auto& s : rep.levels) {
      CHECK(s.selected);
      CHECK((s.j % 2 == 1) == (c < 0));
      CHECK(std::abs(s.lambda) < std::abs(c));
      CHECK((s.lambda < 0) == (c < 0));
    }
    CHECK(rep.levels.back().term_transfer == 0);
  }
  const auto c2 = squash_rotation_search(con, 2.0);
  CHECK(c2.levels[0].j == 2);
  CHECK(c2.levels[1].j == 4);
  CHECK(c2.levels[2].j == 8);
  CHECK(c2.levels[0].v == 0);
  // (1 + 1/4)^2 > 1.5: no even j for c = 1.5 at level 1
  const auto low = squash_rotation_search(con, 1.5);
  CHECK_FALSE(low.levels[0].admissible);
  CHECK_FALSE(low.levels[0].selected);
  CHECK_THROWS_AS(squash_rotation_search(con, 1.0), std::domain_error);
}

#include "cocycle/odometer.hpp"
#include "cocycle/squashable_odometer.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace cocycle;
using namespace cocycle::odometer;

namespace {

// Orbit-by-orbit summation of phi, independent of the closed form.
double direct_sum(const ProductCocycle& c, const OdometerSpec& spec, OdometerPoint x, std::int64_t n) {
  double s = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    OdometerPoint y = x;
    // +1 with carry, written out by hand
    for (std::size_t k = 0; k < spec.depth(); ++k) {
      if (++y.coords[k] < spec.digits()[k]) break;
      y.coords[k] = 0;
    }
    for (std::size_t k = 0; k < spec.depth(); ++k) s += c.betas[k][y.coords[k]] - c.betas[k][x.coords[k]];
    x = y;
  }
  return s;
}

ProductCocycle random_cocycle(const OdometerSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ProductCocycle c;
  for (auto a : spec.digits()) {
    std::vector<double> b(a);
    for (auto& v : b) v = g(rng);
    c.betas.push_back(std::move(b));
  }
  return c;
}

}  // namespace

TEST_CASE("odometer arithmetic") {
  const OdometerSpec bin({2, 2, 2});
  CHECK(step(bin, OdometerPoint{{1, 1, 0}}, std::int64_t{1}) == OdometerPoint{{0, 0, 1}});
  const OdometerSpec s({2, 3, 4});
  CHECK(s.q(1) == 1);
  CHECK(s.q(2) == 2);
  CHECK(s.q(3) == 6);
  CHECK(s.q(4) == 24);
  const OdometerPoint x{{1, 2, 3}};
  CHECK(step(s, x, std::int64_t{24}) == x);
  CHECK(step(s, x, std::int64_t{-1}) == OdometerPoint{{0, 2, 3}});
  // T^{q_3} leaves the first two coordinates alone
  const auto y = step(s, x, std::int64_t{6});
  CHECK(y.coords[0] == 1);
  CHECK(y.coords[1] == 2);
  CHECK_THROWS_AS(OdometerSpec({2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(s.encode(OdometerPoint{{2, 0, 0}}), std::invalid_argument);
}

TEST_CASE("group addition agrees with stepping") {
  const OdometerSpec s({3, 5, 7});
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const auto x = random_point(s, rng);
    const auto y = random_point(s, rng);
    CHECK(add(s, x, y) == step(s, x, s.encode(y)));
  }
}

TEST_CASE("cylinder measure is preserved by every power") {
  const OdometerSpec s({3, 4, 5});
  const Cylinder cyl{{1}, std::pair<std::uint64_t, std::uint64_t>{1, 3}};
  CHECK(cyl.measure(s) == Rational(1, 3) * Rational(2, 4));
  for (std::int64_t n : {1, 5, 17, 59, -7}) {
    std::uint64_t count = 0;
    for (std::uint64_t i = 0; i < s.period(); ++i) {
      if (cyl.contains(step(s, s.decode(i), n))) ++count;
    }
    CHECK(count_measure(count, s.period()) == cyl.measure(s));
  }
}

TEST_CASE("cocycle values") {
  const OdometerSpec s({4});
  ProductCocycle c{{{0, 1, 3, 0}}};
  CHECK(cocycle_value(c, s, OdometerPoint{{0}}) == 1);
  CHECK(cocycle_value(c, s, OdometerPoint{{1}}) == 2);
  CHECK(cocycle_value(c, s, OdometerPoint{{2}}) == -3);
  CHECK(birkhoff_sum(c, s, OdometerPoint{{0}}, std::int64_t{2}) == 3);
  CHECK(birkhoff_sum(c, s, OdometerPoint{{3}}, std::int64_t{0}) == 0);
  ProductCocycle zero{{std::vector<double>(4, 0.0)}};
  CHECK(cocycle_value(zero, s, OdometerPoint{{3}}) == 0);
}

TEST_CASE("closed-form Birkhoff sums match orbit summation") {
  std::mt19937_64 rng(5);
  for (const auto& digits : {std::vector<std::uint64_t>{2, 3, 5, 7}, std::vector<std::uint64_t>{10, 10, 10, 10},
                             std::vector<std::uint64_t>{32, 192}}) {
    const OdometerSpec s(digits);
    const auto c = random_cocycle(s, rng);
    const OdometerSystem sys(s, c);
    std::uniform_int_distribution<std::int64_t> pick_n(0, 10000);
    for (int t = 0; t < 100; ++t) {
      const auto x = random_point(s, rng);
      const auto n = pick_n(rng);
      const double direct = direct_sum(c, s, x, n);
      CHECK(std::abs(birkhoff_sum(c, s, x, n) - direct) <= 1e-12 * std::max(1.0, std::abs(direct)) + 1e-9);
      const auto idx = s.encode(x).convert_to<Point>();
      CHECK(sys.cocycle_sum(idx, n) == Catch::Approx(birkhoff_sum(c, s, x, n)).margin(1e-12));
    }
  }
}

TEST_CASE("odometer desk build") {
  const auto con = build_squashable_odometer({{1, 1}, {2, 3}});
  CHECK(con.spec.digits() == std::vector<std::uint64_t>{32, 192});
  REQUIRE(con.levels.size() == 2);
  CHECK(con.levels[0].g == Catch::Approx(1 / std::sqrt(2.0)));
  CHECK(con.levels[1].g == 1.0);
  for (const auto& lvl : con.levels) {
    REQUIRE(lvl.witness.size() == lvl.m);
    for (std::size_t j = 0; j < lvl.m; ++j) {
      CHECK(lvl.witness[j] == std::uint64_t{1} << j);
      CHECK(2 * lvl.window_matches[j] >= lvl.block_len);
      // gamma_k(j+1) = g_k e^{-j/nu_k}
      CHECK(lvl.gamma[j] == Catch::Approx(lvl.g * std::exp(-double(j) / double(lvl.nu))));
    }
  }
  CHECK_THROWS_AS(build_squashable_odometer({{1}, {81}}), std::overflow_error);
  CHECK_THROWS_AS(build_squashable_odometer({{1, 2}, {1}}), std::invalid_argument);
  const auto sym = symbolic_reference_levels(2);
  CHECK(sym[0].m == 81);
  CHECK(sym[1].nu == 4 * boost::multiprecision::pow(BigInt(3), 16));
}

TEST_CASE("squash translation") {
  const auto con = build_squashable_odometer({{1, 1}, {2, 3}});
  const auto s = squash_translation(con, 2.0);
  CHECK(s.r == std::vector<std::uint64_t>{1, 2});
  CHECK(s.shift.coords == std::vector<std::uint64_t>{16, 128});
  const auto near_one = squash_translation(con, 1.0 + 1e-9);
  CHECK(near_one.shift.coords == std::vector<std::uint64_t>{0, 0});
  CHECK_THROWS_AS(squash_translation(con, 3.0), std::domain_error);
  CHECK_THROWS_AS(squash_translation(con, 1.0), std::domain_error);
}

TEST_CASE("coboundary defect on carry-free levels is (c - e^{r/nu}) |beta|") {
  const auto con = build_squashable_odometer({{1, 1}, {2, 3}});
  const double c = 2.0;
  const auto s = squash_translation(con, c);
  std::mt19937_64 rng(9);
  int checked = 0;
  for (int t = 0; t < 500; ++t) {
    const auto x = random_point(con.spec, rng);
    const auto d = coboundary_defect(con, s, x);
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!d[i].carry_free) continue;
      const auto& lvl = con.levels[i];
      const double beta = con.cocycle.betas[i][x.coords[i]];
      const double factor = c - std::exp(double(s.r[i]) / double(lvl.nu));
      CHECK(d[i].term == Catch::Approx(factor * std::abs(beta)).margin(1e-12));
      if (d[i].regular()) CHECK(d[i].term <= d[i].bound);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("exceptional masses") {
  const auto con = build_squashable_odometer({{1, 1, 2}, {2, 3, 2}});
  for (std::size_t k = 1; k <= 3; ++k) {
    const auto e = exceptional_mass(con, k);
    CHECK(e.pass);
    std::uint64_t brute = 0;
    const double thr = std::pow(double(con.levels[k - 1].m), 0.75);
    for (double b : con.cocycle.betas[k - 1]) brute += std::abs(b) >= thr;
    CHECK(e.count == brute);
  }
}

TEST_CASE("level partition cells") {
  const auto con = build_squashable_odometer({{1, 1}, {2, 3}});
  const auto p1 = level_partition(con, 1);
  CHECK(p1.cell_count() == 1);
  CHECK(p1.covered_measure() == Rational(1, 2));
  const auto p2 = level_partition(con, 2);
  CHECK(p2.cell_count() == 32 * 2);
  CHECK(p2.covered_measure() == Rational(2, 3));
  CHECK(p2.cell_measure(0) == Rational(1, 32) * Rational(64, 192));
  CHECK(level_rigid_time(con, 2, 1) == 2 * 32);
}

#include "cocycle/blocks.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>
#include <vector>

using namespace cocycle::blocks;

namespace {

// Direct evaluation of the defining sum over bit vectors.
double oracle_canonical(const std::vector<double>& gamma, std::size_t index) {
  double s = 0;
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    if (index >> k & 1U) s += gamma[k];
  }
  return s;
}

double oracle_balanced(const std::vector<double>& gamma, std::size_t index) {
  const std::size_t m = gamma.size();
  double s = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const int eps = static_cast<int>(index >> k & 1U);
    const int del = static_cast<int>(index >> (m + k) & 1U);
    s += (eps - del) * gamma[k];
  }
  return s;
}

std::size_t swap_halves(std::size_t index, std::size_t m) {
  const std::size_t mask = (std::size_t{1} << m) - 1;
  return (index & mask) << m | (index >> m & mask);
}

}  // namespace

TEST_CASE("canonical block small cases") {
  CHECK(canonical_block(std::vector{0.5}).values == std::vector{0.0, 0.5});
  CHECK(canonical_block(std::vector{1.0, 2.0}).values == std::vector{0.0, 1.0, 2.0, 3.0});
  const auto b = canonical_block(std::vector{1.0, 2.0, 4.0});
  CHECK(b[7] == 7.0);
  CHECK(b[5] == 5.0);
  for (std::size_t i = 0; i < 8; ++i) CHECK(b[i] == oracle_canonical({1, 2, 4}, i));
}

TEST_CASE("balanced block small cases") {
  CHECK(balanced_block(std::vector{1.0}).values == std::vector{0.0, 1.0, -1.0, 0.0});
  CHECK(balanced_block(std::vector{1.0}).values == canonical_block(std::vector{1.0, -1.0}).values);
  const auto b = balanced_block(std::vector{1.0, 2.0});
  CHECK(b[3] == 3.0);
  CHECK(b[12] == -3.0);
  CHECK(b[15] == 0.0);
}

TEST_CASE("empty or non-finite gamma is rejected") {
  CHECK_THROWS_AS(canonical_block(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(balanced_block(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(balanced_block(std::vector{std::nan("")}), std::invalid_argument);
}

TEST_CASE("shift match counts") {
  CHECK(shift_match_count(balanced_block(std::vector{1.0}), 1, 1.0) == 2);
  // (0,1,2,3): the pairs (0,1), (1,2), (2,3) all differ by 1
  CHECK(shift_match_count(canonical_block(std::vector{1.0, 2.0}), 1, 1.0) == 3);
  const auto b = balanced_block(std::vector{1.0});
  CHECK_THROWS_AS(shift_match_count(b, 0, 0.0), std::out_of_range);
  CHECK_THROWS_AS(shift_match_count(b, 4, 0.0), std::out_of_range);
}

TEST_CASE("witness shifts") {
  CHECK(find_witness_shift(balanced_block(std::vector{1.0}), 1.0) == std::optional<std::size_t>{1});
  DifferenceBlock zeros;
  zeros.values.assign(8, 0.0);
  CHECK_FALSE(find_witness_shift(zeros, 5.0).has_value());
}

TEST_CASE("tail mass") {
  const auto t1 = tail_mass_check(balanced_block(std::vector{1.0}));
  CHECK(t1.count == 2);
  CHECK(t1.bound == 4.0);
  CHECK(t1.pass);
  const auto t0 = tail_mass_check(balanced_block(std::vector{0.0, 0.0, 0.0}));
  CHECK(t0.count == 0);
  CHECK(t0.pass);
  const auto t4 = tail_mass_check(balanced_block(std::vector{1.0, 1.0, 1.0, 1.0}));
  CHECK(t4.count <= 128);
  CHECK(t4.pass);
  CHECK_THROWS_AS(tail_mass_check(canonical_block(std::vector{1.0})), std::invalid_argument);
}

TEST_CASE("balanced blocks against the enumeration oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (std::size_t m = 1; m <= 6; ++m) {
    std::vector<double> gamma(m);
    for (auto& g : gamma) g = u(rng);
    const auto b = balanced_block(gamma);
    REQUIRE(b.size() == std::size_t{1} << (2 * m));
    double total = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      CHECK(b[i] == Catch::Approx(oracle_balanced(gamma, i)).margin(1e-12));
      // swapping the eps and delta halves negates the value
      CHECK(b[swap_halves(i, m)] == Catch::Approx(-b[i]).margin(1e-12));
      total += b[i];
    }
    CHECK(std::abs(total) <= 1e-9);
    std::vector<double> doubled(gamma);
    for (double g : gamma) doubled.push_back(-g);
    CHECK(canonical_block(doubled).values == b.values);
  }
}

TEST_CASE("witness for gamma_j sits at 2^{j-1} with exact integer gamma") {
  for (std::size_t m = 1; m <= 8; ++m) {
    std::vector<double> gamma(m);
    // distinct powers of three keep every subset sum exact and distinct differences
    double v = 1;
    for (auto& g : gamma) {
      g = v;
      v *= 3;
    }
    const auto b = balanced_block(gamma);
    for (std::size_t j = 1; j <= m; ++j) {
      const auto n = find_witness_shift(b, gamma[j - 1]);
      REQUIRE(n.has_value());
      CHECK(*n == std::size_t{1} << (j - 1));
      CHECK(2 * shift_match_count(b, *n, gamma[j - 1]) >= b.size());
    }
  }
}

TEST_CASE("tail bound holds for random gamma") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_int_distribution<std::size_t> pick(1, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> gamma(pick(rng));
    for (auto& g : gamma) g = u(rng);
    CHECK(tail_mass_check(balanced_block(gamma)).pass);
  }
}

TEST_CASE("csv output") {
  std::ostringstream os;
  write_csv(os, canonical_block(std::vector{1.0}));
  CHECK(os.str() == "index,value\n0,0\n1,1\n");
}

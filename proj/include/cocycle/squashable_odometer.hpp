#pragma once

// Completely squashable product cocycle over an odometer.
//
// Level k uses m_k = mu_k nu_k, digits a_k = m_k 4^{m_k} and the balanced block b_k of
// gamma_k(j) = g_k exp(-(j-1)/nu_k), j = 1..m_k.  The partial transfer function is
// beta_k(j 4^{m_k} + nu) = exp(j/nu_k) b_k(nu).  Translating by S = (r_k 4^{m_k})_k with
// r_k = floor(nu_k log c) multiplies the cocycle by c up to a coboundary.

#include "cocycle/blocks.hpp"
#include "cocycle/finite_system.hpp"
#include "cocycle/odometer.hpp"
#include "cocycle/rational.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cocycle::odometer {

/// Largest block order that is materialized (a_k = m 4^m points per digit).
inline constexpr std::uint64_t max_materialized_order = 10;

/// Comparison tolerance for block differences, which are sums of irrational reals.
inline constexpr double block_value_tolerance = 1e-12;

struct SquashableOdometerParams {
  std::vector<std::uint64_t> mu;
  std::vector<std::uint64_t> nu;

  std::size_t levels() const { return mu.size(); }
};

/// Symbolic level data for parameters too large to materialize.
struct SymbolicLevel {
  BigInt mu, nu, m, a;
};

/// The large-parameter example mu_k = k^2, nu_k = k^2 3^{4k^2}, kept symbolic.
inline std::vector<SymbolicLevel> symbolic_reference_levels(std::size_t levels) {
  std::vector<SymbolicLevel> out;
  for (std::size_t k = 1; k <= levels; ++k) {
    SymbolicLevel l;
    l.mu = BigInt(k * k);
    l.nu = BigInt(k * k) * boost::multiprecision::pow(BigInt(3), static_cast<unsigned>(4 * k * k));
    l.m = l.mu * l.nu;
    if (l.m > 4096) {
      l.a = -1;  // 4^m is beyond any representable size; left unevaluated
    } else {
      l.a = l.m * boost::multiprecision::pow(BigInt(4), l.m.convert_to<unsigned>());
    }
    out.push_back(l);
  }
  return out;
}

/// g_k: 1 at even k, 1/sqrt(2) at odd k.
inline double level_target(std::size_t k) { return k % 2 == 0 ? 1.0 : 1.0 / std::numbers::sqrt2; }

struct OdometerLevel {
  std::size_t k = 0;  // 1-based
  std::uint64_t mu = 0, nu = 0, m = 0, a = 0, block_len = 0;  // block_len = 4^m
  double g = 0;
  std::vector<double> gamma;             // gamma_k(1..m)
  blocks::DifferenceBlock block;         // balanced block b_k
  std::vector<std::uint64_t> witness;    // n(j,k), j = 0..m-1
  std::vector<std::uint64_t> window_matches;  // matches of g_k inside window j at shift n(j,k)
};

struct SquashableOdometer {
  OdometerSpec spec;
  ProductCocycle cocycle;
  std::vector<OdometerLevel> levels;
};

inline SquashableOdometer build_squashable_odometer(const SquashableOdometerParams& params) {
  if (params.mu.empty() || params.mu.size() != params.nu.size()) {
    throw std::invalid_argument("mu and nu lists must be non-empty and of equal length");
  }
  SquashableOdometer out;
  std::vector<std::uint64_t> digits;
  for (std::size_t i = 0; i < params.levels(); ++i) {
    const std::uint64_t mu = params.mu[i], nu = params.nu[i];
    if (mu == 0 || nu == 0) throw std::invalid_argument("mu_k and nu_k must be positive integers");
    if (nu > max_materialized_order || mu > max_materialized_order / nu) {
      throw std::overflow_error("level " + std::to_string(i + 1) + ": m_k = mu_k nu_k exceeds " +
                                std::to_string(max_materialized_order) + "; a_k = m_k 4^m_k cannot be materialized");
    }
    OdometerLevel level;
    level.k = i + 1;
    level.mu = mu;
    level.nu = nu;
    level.m = mu * nu;
    level.block_len = std::uint64_t{1} << (2 * level.m);
    level.a = level.m * level.block_len;
    level.g = level_target(level.k);
    for (std::uint64_t j = 1; j <= level.m; ++j) {
      level.gamma.push_back(level.g * std::exp(-static_cast<double>(j - 1) / static_cast<double>(nu)));
    }
    level.block = blocks::balanced_block(level.gamma);

    std::vector<double> beta(level.a);
    for (std::uint64_t j = 0; j < level.m; ++j) {
      const double scale = std::exp(static_cast<double>(j) / static_cast<double>(nu));
      for (std::uint64_t v = 0; v < level.block_len; ++v) beta[j * level.block_len + v] = scale * level.block[v];
    }

    for (std::uint64_t j = 0; j < level.m; ++j) {
      const auto n = blocks::find_witness_shift(level.block, level.gamma[j], block_value_tolerance);
      if (!n) throw std::logic_error("balanced block without witness shift");
      level.witness.push_back(*n);
      std::uint64_t matches = 0;
      const std::uint64_t lo = j * level.block_len, hi = lo + level.block_len;
      for (std::uint64_t v = lo; v + *n < hi; ++v) {
        if (std::abs(beta[v + *n] - beta[v] - level.g) <= block_value_tolerance) ++matches;
      }
      level.window_matches.push_back(matches);
    }
    digits.push_back(level.a);
    out.cocycle.betas.push_back(std::move(beta));
    out.levels.push_back(std::move(level));
  }
  out.spec = OdometerSpec(std::move(digits));
  return out;
}

/// Cells A(u, j) of the level-k partition: x_1..x_{k-1} fixed, x_k in window j <= m_k - 2.
struct LevelCell {
  std::uint64_t prefix_index = 0;  // sum_{v<k} u_v q_v
  std::uint64_t window = 0;        // j
};

/// Labels every point of the truncated odometer by its level-k cell (uncovered: last window).
inline Partition level_partition(const SquashableOdometer& c, std::size_t k) {
  if (k < 1 || k > c.levels.size()) throw std::out_of_range("level out of range");
  const auto& lvl = c.levels[k - 1];
  const std::uint64_t period = c.spec.period();
  const std::uint64_t qk = to_u64(c.spec.q(k), "q_k");
  const std::uint64_t windows = lvl.m - 1;
  const std::uint64_t cells = qk * windows;
  if (cells >= Partition::none) throw std::overflow_error("too many partition cells");
  std::vector<std::uint32_t> labels(period);
  for (Point x = 0; x < period; ++x) {
    const std::uint64_t prefix = x % qk;
    const std::uint64_t xk = (x / qk) % lvl.a;
    const std::uint64_t j = xk / lvl.block_len;
    labels[x] = j < windows ? static_cast<std::uint32_t>(prefix * windows + j) : Partition::none;
  }
  return Partition(std::move(labels), static_cast<std::uint32_t>(cells));
}

/// Rigid return time n(j,k) q_k for the level-k cell with label `cell`.
inline std::int64_t level_rigid_time(const SquashableOdometer& c, std::size_t k, std::uint32_t cell) {
  const auto& lvl = c.levels[k - 1];
  const std::uint64_t j = cell % (lvl.m - 1);
  return static_cast<std::int64_t>(lvl.witness[j] * to_u64(c.spec.q(k), "q_k"));
}

struct SquashTranslation {
  double c = 0;
  std::vector<std::uint64_t> r;                // r_k = floor(nu_k log c)
  OdometerPoint shift;                          // S
  std::vector<std::size_t> overflow_levels;     // levels where r_k 4^{m_k} >= a_k before reduction
};

inline SquashTranslation squash_translation(const SquashableOdometer& con, double c) {
  if (!(c > 1.0 && c < std::numbers::e)) throw std::domain_error("squash factor c must lie in (1, e)");
  SquashTranslation out;
  out.c = c;
  out.shift.coords.resize(con.levels.size());
  for (std::size_t i = 0; i < con.levels.size(); ++i) {
    const auto& lvl = con.levels[i];
    const auto r = static_cast<std::uint64_t>(std::floor(static_cast<double>(lvl.nu) * std::log(c)));
    out.r.push_back(r);
    const std::uint64_t raw = r * lvl.block_len;
    if (raw >= lvl.a) out.overflow_levels.push_back(lvl.k);
    out.shift.coords[i] = raw % lvl.a;
  }
  return out;
}

struct LevelDefect {
  std::size_t k = 0;
  double term = 0;        // |beta_k((Sx)_k) - c beta_k(x_k)|
  double bound = 0;       // c m_k^{3/4} / nu_k
  bool carry_free = false;   // (Sx)_k = x_k + r_k 4^{m_k}
  bool small_value = false;  // |beta_k(x_k)| < m_k^{3/4}
  bool regular() const { return carry_free && small_value; }
};

inline std::vector<LevelDefect> coboundary_defect(const SquashableOdometer& con, const SquashTranslation& s,
                                                  const OdometerPoint& x) {
  con.spec.require_valid(x);
  const OdometerPoint sx = add(con.spec, x, s.shift);
  std::vector<LevelDefect> out;
  std::uint64_t carry = 0;
  for (std::size_t i = 0; i < con.levels.size(); ++i) {
    const auto& lvl = con.levels[i];
    const auto& beta = con.cocycle.betas[i];
    LevelDefect d;
    d.k = lvl.k;
    d.term = std::abs(beta[sx.coords[i]] - s.c * beta[x.coords[i]]);
    const double m34 = std::pow(static_cast<double>(lvl.m), 0.75);
    d.bound = s.c * m34 / static_cast<double>(lvl.nu);
    const std::uint64_t sum = x.coords[i] + s.shift.coords[i] + carry;
    d.carry_free = carry == 0 && sum < lvl.a;
    d.small_value = std::abs(beta[x.coords[i]]) < m34;
    carry = sum >= lvl.a ? 1 : 0;
    out.push_back(d);
  }
  return out;
}

struct ExceptionalMass {
  std::size_t k = 0;
  std::uint64_t count = 0;  // #{nu < a_k : |beta_k(nu)| >= m_k^{3/4}}
  std::uint64_t a = 0;
  double bound_count = 0;   // e^{2 mu_k} a_k / sqrt(m_k)
  bool pass = false;
  Rational mass() const { return count_measure(count, a); }
};

inline ExceptionalMass exceptional_mass(const SquashableOdometer& con, std::size_t k) {
  const auto& lvl = con.levels.at(k - 1);
  const auto& beta = con.cocycle.betas[k - 1];
  ExceptionalMass e;
  e.k = k;
  e.a = lvl.a;
  const double m34 = std::pow(static_cast<double>(lvl.m), 0.75);
  for (double b : beta) {
    if (std::abs(b) >= m34) ++e.count;
  }
  e.bound_count = std::exp(2.0 * static_cast<double>(lvl.mu)) * static_cast<double>(lvl.a) /
                  std::sqrt(static_cast<double>(lvl.m));
  e.pass = static_cast<double>(e.count) <= e.bound_count;
  return e;
}

/// Uniform point of the truncated odometer.
template <class Rng>
OdometerPoint random_point(const OdometerSpec& spec, Rng& rng) {
  OdometerPoint x;
  for (auto a : spec.digits()) x.coords.push_back(std::uniform_int_distribution<std::uint64_t>(0, a - 1)(rng));
  return x;
}

}  // namespace cocycle::odometer

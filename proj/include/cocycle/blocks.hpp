#pragma once

// Canonical and balanced difference blocks.
//
// A canonical block of order m over gamma = (g_1..g_m) has length 2^m and stores at
// index sum_k e_k 2^{k-1} the value sum_k e_k g_k.  The balanced block has length 4^m
// and is the canonical block of (g_1..g_m, -g_1..-g_m).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

namespace cocycle::blocks {

enum class BlockKind { canonical, balanced };

struct DifferenceBlock {
  std::vector<double> values;
  BlockKind kind = BlockKind::canonical;
  std::size_t order = 0;  // m
  std::vector<double> gamma;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

namespace detail {

inline void require_gamma(std::span<const double> gamma) {
  if (gamma.empty()) throw std::invalid_argument("gamma vector must be non-empty");
  for (double g : gamma) {
    if (!std::isfinite(g)) throw std::invalid_argument("gamma entries must be finite");
  }
}

// b(nu) = b(nu - 2^h) + gamma_{h+1}, h = highest set bit of nu.
inline std::vector<double> subset_sums(std::span<const double> gamma) {
  if (gamma.size() >= 8 * sizeof(std::size_t) - 2) throw std::length_error("block order too large");
  const std::size_t len = std::size_t{1} << gamma.size();
  std::vector<double> b(len, 0.0);
  for (std::size_t h = 0; h < gamma.size(); ++h) {
    const std::size_t base = std::size_t{1} << h;
    for (std::size_t nu = 0; nu < base; ++nu) b[base + nu] = b[nu] + gamma[h];
  }
  return b;
}

}  // namespace detail

inline DifferenceBlock canonical_block(std::span<const double> gamma) {
  detail::require_gamma(gamma);
  DifferenceBlock block;
  block.values = detail::subset_sums(gamma);
  block.kind = BlockKind::canonical;
  block.order = gamma.size();
  block.gamma.assign(gamma.begin(), gamma.end());
  return block;
}

inline DifferenceBlock balanced_block(std::span<const double> gamma) {
  detail::require_gamma(gamma);
  std::vector<double> doubled(gamma.begin(), gamma.end());
  for (double g : gamma) doubled.push_back(-g);
  DifferenceBlock block;
  block.values = detail::subset_sums(doubled);
  block.kind = BlockKind::balanced;
  block.order = gamma.size();
  block.gamma.assign(gamma.begin(), gamma.end());
  return block;
}

/// Number of nu with nu + n < L and |b(nu+n) - b(nu) - target| <= tol.
inline std::size_t shift_match_count(const DifferenceBlock& block, std::size_t n, double target,
                                     double tol = 0.0) {
  const std::size_t len = block.size();
  if (n < 1 || n >= len) throw std::out_of_range("shift must satisfy 1 <= n < block length");
  if (tol < 0) throw std::invalid_argument("tolerance must be non-negative");
  std::size_t count = 0;
  for (std::size_t nu = 0; nu + n < len; ++nu) {
    if (std::abs(block.values[nu + n] - block.values[nu] - target) <= tol) ++count;
  }
  return count;
}

/// Smallest shift n whose match count reaches half the block length.
inline std::optional<std::size_t> find_witness_shift(const DifferenceBlock& block, double target,
                                                     double tol = 0.0) {
  const std::size_t len = block.size();
  if (len == 0) throw std::invalid_argument("empty block");
  for (std::size_t n = 1; n < len; ++n) {
    if (2 * shift_match_count(block, n, target, tol) >= len) return n;
  }
  return std::nullopt;
}

struct TailMass {
  std::size_t count = 0;
  double threshold = 0;
  double bound = 0;
  bool pass = false;
};

inline double default_tail_threshold(std::size_t order) {
  return std::pow(static_cast<double>(order), 0.75);
}

/// Counts |b(nu)| >= threshold against max|g_j|^2 4^m / sqrt(m).
inline TailMass tail_mass_check(const DifferenceBlock& block, std::optional<double> threshold = {}) {
  if (block.kind != BlockKind::balanced) {
    throw std::invalid_argument("tail mass bound applies to balanced blocks only");
  }
  TailMass out;
  out.threshold = threshold.value_or(default_tail_threshold(block.order));
  for (double v : block.values) {
    if (std::abs(v) >= out.threshold) ++out.count;
  }
  double max_sq = 0;
  for (double g : block.gamma) max_sq = std::max(max_sq, g * g);
  out.bound = max_sq * static_cast<double>(block.size()) / std::sqrt(static_cast<double>(block.order));
  out.pass = static_cast<double>(out.count) <= out.bound;
  return out;
}

inline void write_csv(std::ostream& os, const DifferenceBlock& block) {
  os << "index,value\n";
  os.precision(17);
  for (std::size_t i = 0; i < block.size(); ++i) os << i << ',' << block.values[i] << '\n';
}

}  // namespace cocycle::blocks

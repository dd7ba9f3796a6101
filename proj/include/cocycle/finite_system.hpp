#pragma once

// Finite cyclic approximations of ergodic transformations.
//
// Every finite system used here is a single cycle: points are labelled 0..size()-1 so
// that T advances the label by one modulo size().  Measures are uniform counting
// measures, so every measure statement reduces to exact integer counts.

#include "cocycle/rational.hpp"

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace cocycle {

using Point = std::uint64_t;

template <class S>
concept FiniteSystem = requires(const S& s, Point x, std::int64_t n) {
  { s.size() } -> std::convertible_to<std::uint64_t>;
  { s.advance(x, n) } -> std::convertible_to<Point>;
  { s.cocycle_sum(x, n) } -> std::convertible_to<double>;
};

/// (x + n) mod size for signed n.
inline Point cyclic_advance(Point x, std::int64_t n, std::uint64_t size) {
  const auto period = static_cast<unsigned __int128>(size);
  __int128 shift = static_cast<__int128>(n) % static_cast<__int128>(size);
  if (shift < 0) shift += static_cast<__int128>(size);
  return static_cast<Point>((static_cast<unsigned __int128>(x) + static_cast<unsigned __int128>(shift)) %
                            period);
}

/// Cycle of length size() carrying an arbitrary real cocycle given pointwise in orbit order.
class CyclicSystem {
 public:
  explicit CyclicSystem(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("cyclic system needs at least one point");
    prefix_.resize(values_.size() + 1, 0.0L);
    for (std::size_t i = 0; i < values_.size(); ++i) prefix_[i + 1] = prefix_[i] + values_[i];
  }

  std::uint64_t size() const { return values_.size(); }
  Point advance(Point x, std::int64_t n) const { return cyclic_advance(x, n, size()); }
  double value(Point x) const { return values_[x]; }
  std::span<const double> values() const { return values_; }

  /// phi_n(x) = sum_{i<n} phi(T^i x); negative n follows the cocycle identity.
  double cocycle_sum(Point x, std::int64_t n) const {
    if (n < 0) return -cocycle_sum(advance(x, n), -n);
    const auto len = static_cast<std::uint64_t>(values_.size());
    const auto un = static_cast<std::uint64_t>(n);
    const long double full = static_cast<long double>(un / len) * prefix_[len];
    const std::uint64_t rest = un % len;
    long double partial;
    if (x + rest <= len) {
      partial = prefix_[x + rest] - prefix_[x];
    } else {
      partial = (prefix_[len] - prefix_[x]) + prefix_[x + rest - len];
    }
    return static_cast<double>(full + partial);
  }

 private:
  std::vector<double> values_;
  std::vector<long double> prefix_;
};

/// Open interval window (lo, hi) in the group R.
struct Window {
  double lo = 0;
  double hi = 0;

  static Window ball(double center, double radius) { return {center - radius, center + radius}; }
  double center() const { return 0.5 * (lo + hi); }
  double radius() const { return 0.5 * (hi - lo); }

  /// Membership after shrinking both ends by `margin`; verdicts built on it never flatter.
  bool contains(double v, double margin = 1e-9) const { return v > lo + margin && v < hi - margin; }

  /// Minkowski sum of two windows.
  Window operator+(const Window& other) const { return {lo + other.lo, hi + other.hi}; }
  bool contains_window(const Window& other) const { return lo <= other.lo && hi >= other.hi; }
};

/// A finite collection of disjoint cells; points outside every cell carry no label.
class Partition {
 public:
  static constexpr std::uint32_t none = std::numeric_limits<std::uint32_t>::max();

  Partition() = default;

  /// Builds the partition from a label per point (`none` = uncovered).
  Partition(std::vector<std::uint32_t> labels, std::uint32_t cell_count)
      : labels_(std::move(labels)), offsets_(static_cast<std::size_t>(cell_count) + 1, 0) {
    for (auto l : labels_) {
      if (l == none) continue;
      if (l >= cell_count) throw std::out_of_range("partition label out of range");
      ++offsets_[l + 1];
    }
    for (std::size_t c = 0; c < cell_count; ++c) offsets_[c + 1] += offsets_[c];
    members_.resize(offsets_.back());
    std::vector<std::uint64_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (Point x = 0; x < labels_.size(); ++x) {
      const auto l = labels_[x];
      if (l != none) members_[fill[l]++] = x;
    }
  }

  /// Partition of a cycle of `size` points into consecutive arcs of length `arc` (last may be shorter).
  static Partition arcs(std::uint64_t size, std::uint64_t arc) {
    if (arc == 0) throw std::invalid_argument("arc length must be positive");
    std::vector<std::uint32_t> labels(size);
    for (Point x = 0; x < size; ++x) labels[x] = static_cast<std::uint32_t>(x / arc);
    return Partition(std::move(labels), static_cast<std::uint32_t>((size + arc - 1) / arc));
  }

  std::uint64_t space_size() const { return labels_.size(); }
  std::uint32_t cell_count() const { return static_cast<std::uint32_t>(offsets_.size() - 1); }
  std::uint32_t label(Point x) const { return labels_[x]; }
  std::span<const Point> cell(std::uint32_t c) const {
    return {members_.data() + offsets_[c], members_.data() + offsets_[c + 1]};
  }
  std::uint64_t cell_size(std::uint32_t c) const { return offsets_[c + 1] - offsets_[c]; }
  Rational cell_measure(std::uint32_t c) const { return count_measure(cell_size(c), space_size()); }
  Rational covered_measure() const { return count_measure(members_.size(), space_size()); }

 private:
  std::vector<std::uint32_t> labels_;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<Point> members_;
};

}  // namespace cocycle

#pragma once

// Odometers (adding machines), product-type cocycles and the squashable
// construction built from balanced difference blocks.
//
// The infinite product of digit spaces is truncated at depth K: the odometer becomes the
// +1 map on a cycle of order q_{K+1} = a_1 * ... * a_K.  Points are encoded in mixed
// radix, index = sum_k x_k q_k, so T acts on indices as +1 modulo the period.

#include "cocycle/blocks.hpp"
#include "cocycle/finite_system.hpp"
#include "cocycle/rational.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cocycle::odometer {

struct OdometerPoint {
  std::vector<std::uint64_t> coords;
  bool operator==(const OdometerPoint&) const = default;
};

class OdometerSpec {
 public:
  OdometerSpec() = default;
  explicit OdometerSpec(std::vector<std::uint64_t> digits) : digits_(std::move(digits)) {
    if (digits_.empty()) throw std::invalid_argument("odometer needs at least one digit");
    BigInt q = 1;
    q_.push_back(q);
    for (auto a : digits_) {
      if (a < 2) throw std::invalid_argument("odometer digits must be >= 2");
      q *= a;
      q_.push_back(q);
    }
  }

  std::size_t depth() const { return digits_.size(); }
  const std::vector<std::uint64_t>& digits() const { return digits_; }
  std::uint64_t digit(std::size_t k) const { return digits_.at(k - 1); }  // a_k, 1-based

  /// q_n for 1 <= n <= K+1 (q_1 = 1, q_{n+1} = a_1...a_n).
  const BigInt& q(std::size_t n) const { return q_.at(n - 1); }
  const BigInt& period_big() const { return q_.back(); }
  std::uint64_t period() const { return to_u64(q_.back(), "odometer period"); }

  bool valid(const OdometerPoint& x) const {
    if (x.coords.size() != depth()) return false;
    for (std::size_t k = 0; k < depth(); ++k) {
      if (x.coords[k] >= digits_[k]) return false;
    }
    return true;
  }

  void require_valid(const OdometerPoint& x) const {
    if (!valid(x)) throw std::invalid_argument("point coordinates out of digit bounds");
  }

  BigInt encode(const OdometerPoint& x) const {
    require_valid(x);
    BigInt idx = 0;
    for (std::size_t k = depth(); k-- > 0;) idx = idx * digits_[k] + x.coords[k];
    return idx;
  }

  OdometerPoint decode(BigInt idx) const {
    idx %= period_big();
    if (idx < 0) idx += period_big();
    OdometerPoint x;
    x.coords.resize(depth());
    for (std::size_t k = 0; k < depth(); ++k) {
      x.coords[k] = static_cast<std::uint64_t>(idx % digits_[k]);
      idx /= digits_[k];
    }
    return x;
  }

  /// Fast path for periods that fit in 64 bits.
  void decode_into(std::uint64_t idx, std::uint64_t* coords) const {
    for (std::size_t k = 0; k < depth(); ++k) {
      coords[k] = idx % digits_[k];
      idx /= digits_[k];
    }
  }

 private:
  std::vector<std::uint64_t> digits_;
  std::vector<BigInt> q_;
};

/// x + n*tau with carries; at truncation depth the top carry is dropped.
inline OdometerPoint step(const OdometerSpec& spec, const OdometerPoint& x, const BigInt& n) {
  return spec.decode(spec.encode(x) + n);
}

inline OdometerPoint step(const OdometerSpec& spec, const OdometerPoint& x, std::int64_t n) {
  return step(spec, x, BigInt(n));
}

/// Group addition (x + y)_n = x_n + y_n + carry mod a_n.
inline OdometerPoint add(const OdometerSpec& spec, const OdometerPoint& x, const OdometerPoint& y) {
  spec.require_valid(x);
  spec.require_valid(y);
  OdometerPoint out;
  out.coords.resize(spec.depth());
  std::uint64_t carry = 0;
  for (std::size_t k = 0; k < spec.depth(); ++k) {
    const std::uint64_t a = spec.digits()[k];
    const std::uint64_t s = x.coords[k] + y.coords[k] + carry;
    out.coords[k] = s % a;
    carry = s >= a ? 1 : 0;
  }
  return out;
}

/// Cylinder fixing x_1..x_{k-1} and optionally restricting x_k to [lo, hi).
struct Cylinder {
  std::vector<std::uint64_t> prefix;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> window;

  Rational measure(const OdometerSpec& spec) const {
    if (prefix.size() > spec.depth()) throw std::invalid_argument("cylinder prefix deeper than odometer");
    Rational m = 1;
    for (std::size_t k = 0; k < prefix.size(); ++k) {
      if (prefix[k] >= spec.digits()[k]) throw std::invalid_argument("cylinder prefix out of bounds");
      m /= spec.digits()[k];
    }
    if (window) {
      const std::size_t k = prefix.size();
      if (k >= spec.depth()) throw std::invalid_argument("cylinder window beyond depth");
      const auto [lo, hi] = *window;
      if (lo > hi || hi > spec.digits()[k]) throw std::invalid_argument("cylinder window out of bounds");
      m *= make_rational(BigInt(hi - lo), BigInt(spec.digits()[k]));
    }
    return m;
  }

  bool contains(const OdometerPoint& x) const {
    for (std::size_t k = 0; k < prefix.size(); ++k) {
      if (x.coords[k] != prefix[k]) return false;
    }
    if (window) {
      const auto v = x.coords[prefix.size()];
      if (v < window->first || v >= window->second) return false;
    }
    return true;
  }
};

/// Product-type cocycle phi(x) = sum_k [beta_k((Tx)_k) - beta_k(x_k)].
struct ProductCocycle {
  std::vector<std::vector<double>> betas;

  void require_compatible(const OdometerSpec& spec) const {
    if (betas.size() != spec.depth()) throw std::invalid_argument("one partial transfer function per digit required");
    for (std::size_t k = 0; k < betas.size(); ++k) {
      if (betas[k].size() != spec.digits()[k]) {
        throw std::invalid_argument("partial transfer function " + std::to_string(k + 1) +
                                    " must be defined on exactly a_k points");
      }
    }
  }

  double transfer(const OdometerPoint& x) const {
    double s = 0;
    for (std::size_t k = 0; k < betas.size(); ++k) s += betas[k][x.coords[k]];
    return s;
  }
};

inline double cocycle_value(const ProductCocycle& c, const OdometerSpec& spec, const OdometerPoint& x) {
  c.require_compatible(spec);
  const OdometerPoint tx = step(spec, x, std::int64_t{1});
  double s = 0;
  // Only coordinates touched by the carry chain differ.
  for (std::size_t k = 0; k < spec.depth(); ++k) {
    if (tx.coords[k] == x.coords[k]) break;
    s += c.betas[k][tx.coords[k]] - c.betas[k][x.coords[k]];
  }
  return s;
}

/// phi_n(x) in closed form, sum_k [beta_k((T^n x)_k) - beta_k(x_k)]; O(K) independent of n.
inline double birkhoff_sum(const ProductCocycle& c, const OdometerSpec& spec, const OdometerPoint& x,
                           const BigInt& n) {
  c.require_compatible(spec);
  if (n < 0) throw std::invalid_argument("birkhoff_sum expects n >= 0");
  const OdometerPoint y = step(spec, x, n);
  double s = 0;
  for (std::size_t k = 0; k < spec.depth(); ++k) s += c.betas[k][y.coords[k]] - c.betas[k][x.coords[k]];
  return s;
}

inline double birkhoff_sum(const ProductCocycle& c, const OdometerSpec& spec, const OdometerPoint& x,
                           std::int64_t n) {
  return birkhoff_sum(c, spec, x, BigInt(n));
}

/// The truncated odometer with a product cocycle, viewed as a finite cyclic system.
class OdometerSystem {
 public:
  OdometerSystem(OdometerSpec spec, ProductCocycle cocycle)
      : spec_(std::move(spec)), cocycle_(std::move(cocycle)), period_(spec_.period()) {
    cocycle_.require_compatible(spec_);
  }

  std::uint64_t size() const { return period_; }
  Point advance(Point x, std::int64_t n) const { return cyclic_advance(x, n, period_); }

  double transfer(Point x) const {
    double s = 0;
    for (std::size_t k = 0; k < spec_.depth(); ++k) {
      const auto a = spec_.digits()[k];
      s += cocycle_.betas[k][x % a];
      x /= a;
    }
    return s;
  }

  double cocycle_sum(Point x, std::int64_t n) const {
    Point y = advance(x, n);
    double s = 0;
    for (std::size_t k = 0; k < spec_.depth(); ++k) {
      const auto a = spec_.digits()[k];
      s += cocycle_.betas[k][y % a] - cocycle_.betas[k][x % a];
      x /= a;
      y /= a;
    }
    return s;
  }

  const OdometerSpec& spec() const { return spec_; }
  const ProductCocycle& cocycle() const { return cocycle_; }

 private:
  OdometerSpec spec_;
  ProductCocycle cocycle_;
  std::uint64_t period_;
};

}  // namespace cocycle::odometer

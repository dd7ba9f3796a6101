#pragma once

// Continued fractions alpha = [0; a_1, a_2, ..., a_N] with exact convergents.
//
// Index conventions: p_{-1} = 1, q_{-1} = 0, p_0 = 0, q_0 = 1 and
// q_{n+1} = a_{n+1} q_n + q_{n-1}.  The sign of q_n alpha - p_n is (-1)^n.

#include "cocycle/rational.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cocycle::rotation {

class ContinuedFraction {
 public:
  /// Partial quotients a_1..a_N of alpha; alpha itself is the last convergent p_N/q_N.
  explicit ContinuedFraction(std::vector<std::uint64_t> quotients) : a_(std::move(quotients)) {
    if (a_.empty()) throw std::invalid_argument("need at least one partial quotient");
    for (auto v : a_) {
      if (v == 0) throw std::invalid_argument("partial quotients must be positive");
    }
    if (a_.size() == 1 && a_[0] == 1) throw std::invalid_argument("alpha = 1 is not an irrational approximant");
    p_ = {BigInt(0)};
    q_ = {BigInt(1)};
    BigInt pm = 1, qm = 0;
    for (auto v : a_) {
      BigInt pn = BigInt(v) * p_.back() + pm;
      BigInt qn = BigInt(v) * q_.back() + qm;
      pm = p_.back();
      qm = q_.back();
      p_.push_back(pn);
      q_.push_back(qn);
    }
  }

  /// Expansion of a rational alpha in (0, 1).
  static ContinuedFraction from_rational(const Rational& alpha) {
    if (alpha <= 0 || alpha >= 1) throw std::invalid_argument("alpha must lie strictly between 0 and 1");
    std::vector<std::uint64_t> a;
    BigInt num = boost::multiprecision::numerator(alpha);
    BigInt den = boost::multiprecision::denominator(alpha);
    // alpha = num/den; 1/alpha = den/num = a_1 + ...
    while (num != 0) {
      BigInt quot = den / num;
      BigInt rem = den % num;
      a.push_back(to_u64(quot, "partial quotient"));
      den = num;
      num = rem;
    }
    // a terminal quotient 1 is folded into its predecessor to keep the expansion canonical
    if (a.size() > 1 && a.back() == 1) {
      a.pop_back();
      ++a.back();
    }
    return ContinuedFraction(std::move(a));
  }

  std::size_t depth() const { return a_.size(); }
  std::uint64_t a(std::size_t n) const { return a_.at(n - 1); }  // a_n, 1-based
  const std::vector<std::uint64_t>& quotients() const { return a_; }

  /// p_n, q_n for 0 <= n <= N; n = -1 is accepted as (1, 0).
  BigInt p(long n) const { return n < 0 ? BigInt(1) : p_.at(static_cast<std::size_t>(n)); }
  BigInt q(long n) const { return n < 0 ? BigInt(0) : q_.at(static_cast<std::size_t>(n)); }

  Rational alpha() const { return Rational(p_.back(), q_.back()); }

  /// ||q_n alpha|| = |q_n alpha - p_n| as an exact rational (alpha = p_N / q_N).
  Rational norm(long n) const {
    BigInt num = q(n) * p_.back() - p(n) * q_.back();
    if (num < 0) num = -num;
    return Rational(num, q_.back());
  }

  /// Numerator of ||q_n alpha|| over the common denominator q_N.
  BigInt norm_numerator(long n) const {
    BigInt num = q(n) * p_.back() - p(n) * q_.back();
    return num < 0 ? BigInt(-num) : num;
  }

 private:
  std::vector<std::uint64_t> a_;
  std::vector<BigInt> p_, q_;
};

}  // namespace cocycle::rotation

#pragma once

// Piecewise polynomials on [0, 1] with exact rational coefficients and breakpoints.

#include "cocycle/rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cocycle {

/// Polynomial with ascending rational coefficients in the global variable.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Rational> c) : c_(std::move(c)) { trim(); }

  std::size_t degree() const { return c_.empty() ? 0 : c_.size() - 1; }
  const std::vector<Rational>& coeffs() const { return c_; }

  Rational operator()(const Rational& x) const {
    Rational v = 0;
    for (std::size_t i = c_.size(); i-- > 0;) v = v * x + c_[i];
    return v;
  }

  double eval(double x) const {
    double v = 0;
    for (std::size_t i = cd_.size(); i-- > 0;) v = v * x + cd_[i];
    return v;
  }

  Polynomial derivative() const {
    std::vector<Rational> d;
    for (std::size_t i = 1; i < c_.size(); ++i) d.push_back(c_[i] * static_cast<long>(i));
    return Polynomial(std::move(d));
  }

  /// Antiderivative vanishing at 0.
  Polynomial integral() const {
    std::vector<Rational> d{Rational(0)};
    for (std::size_t i = 0; i < c_.size(); ++i) d.push_back(c_[i] / static_cast<long>(i + 1));
    return Polynomial(std::move(d));
  }

  /// x -> P(a x + b).
  Polynomial compose_affine(const Rational& a, const Rational& b) const {
    std::vector<Rational> out(c_.size(), Rational(0));
    std::vector<Rational> power{Rational(1)};  // coefficients of (a x + b)^i
    for (std::size_t i = 0; i < c_.size(); ++i) {
      for (std::size_t j = 0; j < power.size(); ++j) out[j] += c_[i] * power[j];
      std::vector<Rational> next(power.size() + 1, Rational(0));
      for (std::size_t j = 0; j < power.size(); ++j) {
        next[j] += power[j] * b;
        next[j + 1] += power[j] * a;
      }
      power = std::move(next);
    }
    return Polynomial(std::move(out));
  }

  Polynomial operator*(const Rational& s) const {
    std::vector<Rational> d(c_);
    for (auto& v : d) v *= s;
    return Polynomial(std::move(d));
  }

  Polynomial operator+(const Rational& s) const {
    std::vector<Rational> d(c_);
    if (d.empty()) d.push_back(0);
    d[0] += s;
    return Polynomial(std::move(d));
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
    cd_.clear();
    for (const auto& v : c_) cd_.push_back(to_double(v));
  }

  std::vector<Rational> c_;
  std::vector<double> cd_;
};

/// Pieces P_i on [b_i, b_{i+1}], breakpoints sorted.
class PiecewisePoly {
 public:
  PiecewisePoly() = default;
  PiecewisePoly(std::vector<Rational> breaks, std::vector<Polynomial> pieces)
      : breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
    if (breaks_.size() != pieces_.size() + 1 || pieces_.empty()) {
      throw std::invalid_argument("piecewise polynomial needs n pieces and n+1 breakpoints");
    }
    for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
      if (!(breaks_[i] < breaks_[i + 1])) throw std::invalid_argument("breakpoints must increase strictly");
    }
    for (const auto& b : breaks_) breaks_d_.push_back(to_double(b));
  }

  const std::vector<Rational>& breaks() const { return breaks_; }
  const std::vector<Polynomial>& pieces() const { return pieces_; }
  std::size_t max_degree() const {
    std::size_t d = 0;
    for (const auto& p : pieces_) d = std::max(d, p.degree());
    return d;
  }

  std::size_t piece_index(double x) const {
    const auto it = std::upper_bound(breaks_d_.begin() + 1, breaks_d_.end() - 1, x);
    return static_cast<std::size_t>(it - (breaks_d_.begin() + 1));
  }

  /// Evaluation clamps to the end pieces outside [b_0, b_n].
  double eval(double x) const { return pieces_[piece_index(x)].eval(x); }

  PiecewisePoly derivative() const {
    std::vector<Polynomial> d;
    for (const auto& p : pieces_) d.push_back(p.derivative());
    return PiecewisePoly(breaks_, std::move(d));
  }

  /// Continuous antiderivative vanishing at b_0.
  PiecewisePoly integral() const {
    std::vector<Polynomial> out;
    Rational acc = 0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      Polynomial P = pieces_[i].integral();
      P = P + (acc - P(breaks_[i]));
      acc = P(breaks_[i + 1]);
      out.push_back(std::move(P));
    }
    return PiecewisePoly(breaks_, std::move(out));
  }

  Rational definite_integral() const {
    const auto I = integral();
    return I.pieces_.back()(breaks_.back());
  }

  PiecewisePoly scaled(const Rational& s) const {
    std::vector<Polynomial> d;
    for (const auto& p : pieces_) d.push_back(p * s);
    return PiecewisePoly(breaks_, std::move(d));
  }

  /// max over interior breakpoints and orders 0..order of |left^{(i)} - right^{(i)}|, exact.
  Rational continuity_defect(std::size_t order) const {
    Rational worst = 0;
    PiecewisePoly cur = *this;
    for (std::size_t i = 0; i <= order; ++i) {
      for (std::size_t b = 1; b + 1 < breaks_.size(); ++b) {
        Rational diff = cur.pieces_[b - 1](breaks_[b]) - cur.pieces_[b](breaks_[b]);
        if (diff < 0) diff = -diff;
        worst = std::max(worst, diff);
      }
      cur = cur.derivative();
    }
    return worst;
  }

  /// Sampled sup |f| over every piece (endpoints plus `per_piece` interior points).
  double sup_abs(std::size_t per_piece = 256) const {
    double s = 0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const double lo = breaks_d_[i], hi = breaks_d_[i + 1];
      for (std::size_t t = 0; t <= per_piece; ++t) {
        const double x = lo + (hi - lo) * static_cast<double>(t) / static_cast<double>(per_piece);
        s = std::max(s, std::abs(pieces_[i].eval(x)));
      }
    }
    return s;
  }

 private:
  std::vector<Rational> breaks_;
  std::vector<double> breaks_d_;
  std::vector<Polynomial> pieces_;
};

/// Density psi_p on [0, 1]: psi_1 is the tent 4u / 4(1-u); psi_p is the normalized integral of
/// psi_{p-1}(2u) on [0, 1/2] followed by -psi_{p-1}(2u - 1) on [1/2, 1].  psi_p integrates to 1
/// and its derivatives of order 0..p-1 vanish at both ends.
inline PiecewisePoly bump_density(std::size_t p) {
  if (p == 0) throw std::invalid_argument("smoothness order p must be >= 1");
  PiecewisePoly psi({Rational(0), Rational(1, 2), Rational(1)},
                    {Polynomial({Rational(0), Rational(4)}), Polynomial({Rational(4), Rational(-4)})});
  for (std::size_t level = 2; level <= p; ++level) {
    std::vector<Rational> br;
    std::vector<Polynomial> pcs;
    const auto& ob = psi.breaks();
    for (std::size_t i = 0; i + 1 < ob.size(); ++i) {
      br.push_back(ob[i] / 2);
      pcs.push_back(psi.pieces()[i].compose_affine(2, 0));
    }
    for (std::size_t i = 0; i + 1 < ob.size(); ++i) {
      br.push_back(ob[i] / 2 + Rational(1, 2));
      pcs.push_back(psi.pieces()[i].compose_affine(2, -1) * Rational(-1));
    }
    br.push_back(1);
    const auto g = PiecewisePoly(std::move(br), std::move(pcs)).integral();
    psi = g.scaled(1 / g.definite_integral());
  }
  return psi;
}

/// Ramp R_p = integral of psi_p: R_p(0) = 0, R_p(1) = 1, derivatives 1..p vanish at both ends.
inline PiecewisePoly ramp_profile(std::size_t p) { return bump_density(p).integral(); }

}  // namespace cocycle

#pragma once

// Maharam skew products of finite nonsingular systems.
//
// T(w, y) = (R w, y - log(p(R w) / p(w))) preserves dm = dp(w) e^y dy, and the vertical flow
// Q_t(w, y) = (w, y + t) commutes with T and multiplies m by e^t.  Fiber maps are translations
// y -> y + t - log(ratio) with t and ratio kept as exact rationals, so composition and
// commutation are compared exactly.

#include "cocycle/rational.hpp"

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cocycle::maharam {

/// Finite state space with strictly positive probabilities and a bijection R.
struct NonsingularSystem {
  std::vector<Rational> p;
  std::vector<std::size_t> R;

  std::size_t size() const { return p.size(); }

  void validate() const {
    if (p.empty()) throw std::invalid_argument("state space must be non-empty");
    if (R.size() != p.size()) throw std::invalid_argument("permutation and masses differ in length");
    Rational total = 0;
    for (const auto& v : p) {
      if (v <= 0) throw std::invalid_argument("zero-mass states are not allowed");
      total += v;
    }
    if (total != 1) throw std::invalid_argument("masses must sum to 1, got " + to_fraction_string(total));
    std::vector<bool> seen(p.size(), false);
    for (auto r : R) {
      if (r >= p.size() || seen[r]) throw std::invalid_argument("R is not a bijection");
      seen[r] = true;
    }
  }

  /// dp∘R/dp at w.
  Rational derivative(std::size_t w) const { return p[R[w]] / p[w]; }

  bool measure_preserving() const {
    for (std::size_t w = 0; w < size(); ++w) {
      if (derivative(w) != 1) return false;
    }
    return true;
  }
};

/// y -> y + t - log(ratio).
struct FiberShift {
  Rational t = 0;
  Rational ratio = 1;

  double apply(double y) const { return y + to_double(t) - std::log(to_double(ratio)); }
  double amount() const { return to_double(t) - std::log(to_double(ratio)); }
  /// (this ∘ other)
  FiberShift after(const FiberShift& other) const { return {t + other.t, ratio * other.ratio}; }
  bool operator==(const FiberShift&) const = default;
};

/// {w} x [a, b].
struct Box {
  std::size_t w = 0;
  double a = 0, b = 0;
};

/// p(w) (e^b - e^a), evaluated as p e^a expm1(b - a) to keep relative accuracy on thin boxes.
inline double box_mass(const NonsingularSystem& sys, const Box& B) {
  return to_double(sys.p[B.w]) * std::exp(B.a) * std::expm1(B.b - B.a);
}

class MaharamProduct {
 public:
  explicit MaharamProduct(NonsingularSystem sys) : sys_(std::move(sys)) { sys_.validate(); }

  const NonsingularSystem& system() const { return sys_; }

  FiberShift fiber(std::size_t w) const { return {0, sys_.derivative(w)}; }

  Box image(const Box& B) const {
    const double s = fiber(B.w).amount();
    return {sys_.R[B.w], B.a + s, B.b + s};
  }

  std::pair<std::size_t, double> map(std::size_t w, double y) const { return {sys_.R[w], fiber(w).apply(y)}; }

 private:
  NonsingularSystem sys_;
};

inline FiberShift flow(const Rational& t) { return {t, 1}; }

inline Box flow_image(const Box& B, double t) { return {B.w, B.a + t, B.b + t}; }

template <class Rng>
Box random_box(const NonsingularSystem& sys, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, sys.size() - 1);
  std::uniform_real_distribution<double> lo(-5.0, 5.0), width(1e-3, 3.0);
  Box B;
  B.w = pick(rng);
  B.a = lo(rng);
  B.b = B.a + width(rng);
  return B;
}

inline double relative_error(double got, double want) { return std::abs(got - want) / std::abs(want); }

struct PreservationReport {
  std::size_t boxes = 0;
  double max_rel_error = 0;
  double tolerance = 0;
  bool pass = false;
};

template <class Rng>
PreservationReport measure_preservation(const MaharamProduct& prod, std::size_t boxes, Rng& rng,
                                        double tol = 1e-12) {
  PreservationReport rep;
  rep.boxes = boxes;
  rep.tolerance = tol;
  for (std::size_t i = 0; i < boxes; ++i) {
    const Box B = random_box(prod.system(), rng);
    rep.max_rel_error = std::max(rep.max_rel_error,
                                 relative_error(box_mass(prod.system(), prod.image(B)), box_mass(prod.system(), B)));
  }
  rep.pass = rep.max_rel_error <= tol;
  return rep;
}

struct DilationReport {
  Rational t = 0;
  Rational s = 0;                   // second time for the flow law
  bool commutes = false;            // Q_t∘T = T∘Q_t on every fiber, exact
  bool flow_law = false;            // Q_{t+s} = Q_t∘Q_s, exact
  bool zero_is_identity = false;    // Q_0 = id, exact
  double max_rel_error = 0;         // m(Q_t B) against e^t m(B)
  double inverse_error = 0;         // |D(Q_t) D(Q_{-t}) - 1|
  double tolerance = 0;
  bool pass = false;
};

template <class Rng>
DilationReport dilation_flow_check(const MaharamProduct& prod, const Rational& t, const Rational& s,
                                   std::size_t boxes, Rng& rng, double tol = 1e-12) {
  DilationReport rep;
  rep.t = t;
  rep.s = s;
  rep.tolerance = tol;
  const auto& sys = prod.system();
  rep.commutes = true;
  for (std::size_t w = 0; w < sys.size(); ++w) {
    // both sides send fiber w to fiber R w; compare the y-maps
    if (!(flow(t).after(prod.fiber(w)) == prod.fiber(w).after(flow(t)))) rep.commutes = false;
  }
  rep.flow_law = flow(t + s) == flow(t).after(flow(s));
  rep.zero_is_identity = flow(0) == FiberShift{};
  const double td = to_double(t);
  const double et = std::exp(td);
  for (std::size_t i = 0; i < boxes; ++i) {
    const Box B = random_box(sys, rng);
    const double m = box_mass(sys, B);
    const double fwd = box_mass(sys, flow_image(B, td)) / m;
    const double back = box_mass(sys, flow_image(B, -td)) / m;
    rep.max_rel_error = std::max(rep.max_rel_error, relative_error(fwd, et));
    rep.inverse_error = std::max(rep.inverse_error, std::abs(fwd * back - 1));
  }
  rep.pass = rep.commutes && rep.flow_law && rep.zero_is_identity && rep.max_rel_error <= tol &&
             rep.inverse_error <= tol;
  return rep;
}

/// Converse direction: a skew product (w, y) -> (R w, y + shift(w)) that commutes with the
/// vertical flow preserves m exactly when shift(w) = -log(dp∘R/dp)(w).
struct ConverseReport {
  std::vector<double> defect;  // |shift(w) + log(dp∘R/dp)(w)|
  double max_defect = 0;
  double tolerance = 0;
  bool maharam_form = false;
};

inline ConverseReport converse_check(const NonsingularSystem& sys, const std::vector<double>& shift,
                                     double tol = 1e-12) {
  sys.validate();
  if (shift.size() != sys.size()) throw std::invalid_argument("one shift per state expected");
  ConverseReport rep;
  rep.tolerance = tol;
  for (std::size_t w = 0; w < sys.size(); ++w) {
    const double d = std::abs(shift[w] + std::log(to_double(sys.derivative(w))));
    rep.defect.push_back(d);
    rep.max_defect = std::max(rep.max_defect, d);
  }
  rep.maharam_form = rep.max_defect <= tol;
  return rep;
}

}  // namespace cocycle::maharam

#pragma once

// Smooth completely squashable cocycles over a circle rotation.
//
// alpha is a deep convergent P/Q, so every point is (g + f)/Q with an integer grid part g and a
// fractional part f in [0, 1); the rotation adds P to g.  All interval endpoints of the
// continued-fraction towers are grid points, so every measure is an exact rational.
//
// For n even the rotation moves the tower the other way; positions are then taken in the
// reflected coordinate y = -x, in which T adds Q - P and the odd-n picture applies verbatim.

#include "cocycle/continued_fraction.hpp"
#include "cocycle/piecewise_poly.hpp"
#include "cocycle/rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cocycle::rotation {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

/// The point (g + f) / Q of the circle.
struct CirclePoint {
  std::uint64_t g = 0;
  double f = 0;
};

/// x -> x + P/Q on the grid of order Q.
class RotationSystem {
 public:
  RotationSystem() = default;
  RotationSystem(std::uint64_t P, std::uint64_t Q) : P_(P % Q), Q_(Q) {
    if (Q == 0) throw std::invalid_argument("rotation grid must be non-empty");
  }
  std::uint64_t P() const { return P_; }
  std::uint64_t Q() const { return Q_; }

  CirclePoint advance(CirclePoint x, std::int64_t n) const {
    __int128 shift = static_cast<__int128>(n) % static_cast<__int128>(Q_);
    if (shift < 0) shift += Q_;
    const auto step = mulmod(static_cast<std::uint64_t>(shift), P_, Q_);
    x.g = static_cast<std::uint64_t>((static_cast<unsigned __int128>(x.g) + step) % Q_);
    return x;
  }

  /// Rotation by the grid amount s (x -> x + s/Q).
  CirclePoint translate(CirclePoint x, std::uint64_t s) const {
    x.g = static_cast<std::uint64_t>((static_cast<unsigned __int128>(x.g) + s) % Q_);
    return x;
  }

  /// Grid position of {n alpha}.
  std::uint64_t orbit_grid(std::uint64_t n) const { return mulmod(n % Q_, P_, Q_); }

  template <class Rng>
  CirclePoint random_point(Rng& rng) const {
    return {std::uniform_int_distribution<std::uint64_t>(0, Q_ - 1)(rng),
            std::uniform_real_distribution<double>(0.0, 1.0)(rng)};
  }

 private:
  std::uint64_t P_ = 0, Q_ = 1;
};

/// Circular distance between grid points, in grid units.
inline std::uint64_t circle_distance(std::uint64_t a, std::uint64_t b, std::uint64_t Q) {
  const std::uint64_t d = a > b ? a - b : b - a;
  return std::min(d, Q - d);
}

/// The two Rokhlin towers at level n (1 <= n, n + 1 <= depth).
///
/// First tower: I_i = [{i alpha}, {i alpha} + ||q_{n-1} alpha||), 0 <= i < q_n, grouped into
/// columns u < q_{n-1} whose rows w are I_{u + w q_{n-1}}; column u has a_n + 1 rows when
/// u < q_{n-2} and a_n rows otherwise.  Second tower: q_{n-1} intervals of length ||q_n alpha||.
class TowerDecomposition {
 public:
  struct Location {
    std::uint64_t u = 0;       // column
    std::uint64_t w = 0;       // row
    std::uint64_t offset = 0;  // grid offset inside I_{u + w q_{n-1}}, < D
    double f = 0;
  };

  struct Exactness {
    bool shift_ok = false;       // T^{q_{n-1}} adds ||q_{n-1} alpha||
    bool identity_ok = false;    // q_n D + q_{n-1} D2 = Q
    bool columns_checked = false;
    bool contiguous = false;     // columns and second tower tile the circle
    bool adjacency = false;      // rows of every column are adjacent intervals
    Rational total = 0;
    bool ok() const { return shift_ok && identity_ok && (!columns_checked || (contiguous && adjacency)); }
  };

  static constexpr std::uint64_t default_locate_limit = std::uint64_t{1} << 22;

  TowerDecomposition() = default;
  TowerDecomposition(const ContinuedFraction& cf, std::size_t n, std::uint64_t locate_limit = default_locate_limit) {
    if (n < 1 || n + 1 > cf.depth()) throw std::out_of_range("tower level n must satisfy 1 <= n < depth");
    n_ = n;
    orientation_ = n % 2 == 1 ? 1 : -1;
    Q_ = to_u64(cf.q(static_cast<long>(cf.depth())), "rotation denominator");
    const auto P = to_u64(cf.p(static_cast<long>(cf.depth())), "rotation numerator");
    P_ = P;
    Po_ = orientation_ > 0 ? P : (Q_ - P) % Q_;
    qn_ = to_u64(cf.q(static_cast<long>(n)), "q_n");
    qn1_ = to_u64(cf.q(static_cast<long>(n) - 1), "q_{n-1}");
    qn2_ = to_u64(cf.q(static_cast<long>(n) - 2), "q_{n-2}");
    an_ = cf.a(n);
    D_ = to_u64(cf.norm_numerator(static_cast<long>(n) - 1), "||q_{n-1} alpha||");
    D2_ = to_u64(cf.norm_numerator(static_cast<long>(n)), "||q_n alpha||");
    if (qn1_ <= locate_limit) {
      starts_.reserve(qn1_);
      for (std::uint64_t u = 0; u < qn1_; ++u) starts_.push_back({mulmod(u, Po_, Q_), u});
      std::sort(starts_.begin(), starts_.end());
    }
  }

  std::size_t n() const { return n_; }
  int orientation() const { return orientation_; }
  std::uint64_t Q() const { return Q_; }
  std::uint64_t q_n() const { return qn_; }
  std::uint64_t q_prev() const { return qn1_; }
  std::uint64_t a_n() const { return an_; }
  std::uint64_t D() const { return D_; }    // ||q_{n-1} alpha|| Q
  std::uint64_t D2() const { return D2_; }  // ||q_n alpha|| Q
  Rational base_length() const { return make_rational(BigInt(D_), BigInt(Q_)); }
  std::uint64_t column_height(std::uint64_t u) const { return u < qn2_ ? an_ + 1 : an_; }
  std::uint64_t column_start(std::uint64_t u) const { return mulmod(u, Po_, Q_); }
  /// Number of columns of height a_n + 1.
  std::uint64_t tall_columns() const { return qn2_; }
  bool locatable() const { return !starts_.empty(); }

  /// Oriented coordinate y (identity for odd n, y = -x for even n).
  CirclePoint orient(CirclePoint x) const {
    if (orientation_ > 0) return x;
    if (x.f == 0) return {(Q_ - x.g) % Q_, 0.0};
    return {Q_ - 1 - x.g, 1.0 - x.f};
  }

  /// Grid shift in oriented coordinates corresponding to an x-shift s.
  std::uint64_t oriented_shift(std::uint64_t s) const { return orientation_ > 0 ? s : (Q_ - s % Q_) % Q_; }

  /// Column, row and offset of an oriented point; none on the second tower.
  std::optional<Location> locate(CirclePoint y) const {
    if (!locatable()) throw std::logic_error("tower too large for pointwise location");
    auto it = std::upper_bound(starts_.begin(), starts_.end(), std::pair{y.g, std::numeric_limits<std::uint64_t>::max()});
    const auto& col = it == starts_.begin() ? starts_.back() : *(it - 1);
    const std::uint64_t off = (y.g + Q_ - col.first) % Q_;
    const std::uint64_t h = column_height(col.second);
    if (off / D_ >= h) return std::nullopt;
    return Location{col.second, off / D_, off % D_, y.f};
  }

  Exactness verify() const {
    Exactness e;
    e.shift_ok = mulmod(qn1_, Po_, Q_) == D_ % Q_;
    const BigInt total = BigInt(qn_) * D_ + BigInt(qn1_) * D2_;
    e.identity_ok = total == Q_;
    e.total = make_rational(total, BigInt(Q_));
    if (!locatable()) return e;
    e.columns_checked = true;
    // tiles [start, end) of both towers, sorted by start
    std::vector<std::pair<std::uint64_t, std::uint64_t>> tiles;
    tiles.reserve(2 * qn1_);
    e.adjacency = true;
    for (std::uint64_t u = 0; u < qn1_; ++u) {
      const std::uint64_t s = column_start(u), h = column_height(u);
      if (s + h * D_ > Q_) e.adjacency = false;
      for (std::uint64_t w = 1; w < h && e.adjacency; ++w) {
        if (mulmod(u + w * qn1_, Po_, Q_) != s + w * D_) e.adjacency = false;
      }
      tiles.emplace_back(s, s + h * D_);
      const std::uint64_t t = (s + Q_ - D2_) % Q_;  // second tower piece ending at {u alpha}
      tiles.emplace_back(t, t + D2_);
    }
    std::sort(tiles.begin(), tiles.end());
    e.contiguous = tiles.front().first == 0;
    for (std::size_t i = 0; i + 1 < tiles.size() && e.contiguous; ++i) {
      if (tiles[i].second != tiles[i + 1].first) e.contiguous = false;
    }
    if (e.contiguous && tiles.back().second != Q_) e.contiguous = false;
    return e;
  }

 private:
  std::size_t n_ = 0;
  int orientation_ = 1;
  std::uint64_t Q_ = 1, P_ = 0, Po_ = 0, qn_ = 0, qn1_ = 0, qn2_ = 0, an_ = 0, D_ = 0, D2_ = 0;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> starts_;  // (grid start, column)
};

/// Rising ramp, plateau, falling ramp: 0 at both ends of [0, 4W], d on [W, 3W].
class Bump {
 public:
  Bump() = default;
  Bump(std::size_t p, double d, long double W_grid, double Q) : p_(p), d_(d), W_(W_grid), Q_(Q) {
    ramp_ = ramp_profile(p);
    PiecewisePoly cur = ramp_;
    for (std::size_t i = 1; i <= p; ++i) {
      cur = cur.derivative();
      sup_deriv_.push_back(cur.sup_abs());
      derivs_.push_back(cur);
    }
  }

  std::size_t p() const { return p_; }
  double plateau() const { return d_; }
  long double width_grid() const { return 4 * W_; }  // L in grid units
  const PiecewisePoly& ramp() const { return ramp_; }

  /// Value at grid position pos (pos measured from the left end of J'_{0,0}).
  double value(long double pos) const {
    if (pos <= 0 || pos >= 4 * W_) return 0.0;
    const long double u = pos / W_;
    if (u < 1) return d_ * ramp_.eval(static_cast<double>(u));
    if (u <= 3) return d_;
    return d_ * ramp_.eval(static_cast<double>(4 - u));
  }

  /// i-th derivative (1 <= i <= p) with respect to the real coordinate.
  double derivative(std::size_t i, long double pos) const {
    if (pos <= 0 || pos >= 4 * W_) return 0.0;
    const long double u = pos / W_;
    const double scale = d_ * std::pow(static_cast<double>(Q_ / W_), static_cast<double>(i));
    if (u < 1) return scale * derivs_[i - 1].eval(static_cast<double>(u));
    if (u <= 3) return 0.0;
    const double sign = i % 2 == 0 ? 1.0 : -1.0;
    return sign * scale * derivs_[i - 1].eval(static_cast<double>(4 - u));
  }

  /// sup |F^{(i)}| in real units, i = 0..p.
  double sup_derivative(std::size_t i) const {
    if (i == 0) return d_;
    return d_ * std::pow(static_cast<double>(Q_ / W_), static_cast<double>(i)) * sup_deriv_[i - 1];
  }

  double cp_norm() const {
    double s = 0;
    for (std::size_t i = 0; i <= p_; ++i) s = std::max(s, sup_derivative(i));
    return s;
  }

 private:
  std::size_t p_ = 1;
  double d_ = 0;
  long double W_ = 1;
  long double Q_ = 1;
  PiecewisePoly ramp_;
  std::vector<PiecewisePoly> derivs_;
  std::vector<double> sup_deriv_;
};

enum class Profile { toy, asymptotic };

struct RotationParams {
  std::vector<std::uint64_t> quotients;    // partial quotients a_1..a_N
  std::vector<std::size_t> level_indices;  // designated n_1 < n_2 < ... with huge a_{n_k}
  Profile profile = Profile::toy;
  std::size_t p = 1;
  std::uint64_t locate_limit = TowerDecomposition::default_locate_limit;
};

/// Indices n with a_n >= threshold, as designated huge quotients.
inline std::vector<std::size_t> huge_indices(const std::vector<std::uint64_t>& quotients, std::uint64_t threshold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < quotients.size(); ++i) {
    if (quotients[i] >= threshold) out.push_back(i + 1);
  }
  return out;
}

struct RotationLevel {
  std::size_t k = 0;  // 1-based level
  std::size_t n = 0;  // n_k
  std::uint64_t c = 0, r = 0, ell = 0, ell_half = 0;
  double c_exact = 0, r_exact = 0;  // before rounding (asymptotic profile)
  double d = 0;
  double d_bar = 0;
  TowerDecomposition tower;
  Bump bump;
  std::vector<double> s;  // s_j = (-1)^j (1 + 1/c)^j, j < r
  double lambda_max = 0;  // max_j |s_j|

  std::uint64_t q() const { return tower.q_prev(); }
  double delta() const { return static_cast<double>(tower.D()) / static_cast<double>(tower.Q()); }
  double sup_F() const { return d * lambda_max; }
  long double L_grid() const { return static_cast<long double>(ell_half) * tower.D(); }

  /// F~ = F-bar on [0, L), -F-bar(. - L) on [L, 2L).
  double F_tilde(long double pos) const {
    const long double L = L_grid();
    return pos < L ? bump.value(pos) : -bump.value(pos - L);
  }

  double F_at(const TowerDecomposition::Location& loc) const {
    if (loc.w >= r * ell) return 0.0;
    const std::uint64_t j = loc.w / ell, p = loc.w % ell;
    return s[j] * F_tilde(static_cast<long double>(p) * tower.D() + loc.offset + loc.f);
  }

  /// G on column u, row w = j ell + p, in-interval offset pos0 (grid units).
  double G_param(std::uint64_t u, std::uint64_t w, long double pos0) const {
    if (w >= r * ell) return 0.0;
    const std::uint64_t j = w / ell, p = w % ell;
    long double acc = 0;
    for (std::uint64_t pp = 0; pp < p; ++pp) acc += F_tilde(static_cast<long double>(pp) * tower.D() + pos0);
    const long double cur = F_tilde(static_cast<long double>(p) * tower.D() + pos0);
    return static_cast<double>(-s[j] * (static_cast<long double>(q()) * acc + static_cast<long double>(u) * cur));
  }

  double G_at(const TowerDecomposition::Location& loc) const {
    return G_param(loc.u, loc.w, static_cast<long double>(loc.offset) + loc.f);
  }

  double F(CirclePoint x) const {
    const auto loc = tower.locate(tower.orient(x));
    return loc ? F_at(*loc) : 0.0;
  }

  double G(CirclePoint x) const {
    const auto loc = tower.locate(tower.orient(x));
    return loc ? G_at(*loc) : 0.0;
  }

  /// Lipschitz constant of G in the real coordinate.
  double lipschitz_G() const {
    const double M1 = bump.sup_derivative(1);
    const double qd = static_cast<double>(q());
    const double hits = static_cast<double>(std::min<std::uint64_t>(ell, ell_half + 4));
    return lambda_max * (qd * hits * M1 + qd * M1);
  }
};

struct RotationConstruction {
  ContinuedFraction cf{std::vector<std::uint64_t>{2}};
  RotationSystem rot;
  std::size_t p = 1;
  Profile profile = Profile::toy;
  std::vector<RotationLevel> levels;
  std::size_t padded = 0;  // quotients appended so that n_k + 2 <= N
};

inline RotationConstruction build_rotation_cocycle(const RotationParams& params) {
  if (params.p < 1) throw std::invalid_argument("smoothness order p must be >= 1");
  if (params.level_indices.empty()) throw std::invalid_argument("no designated level indices");
  for (std::size_t i = 0; i < params.level_indices.size(); ++i) {
    if (params.level_indices[i] < 2) throw std::invalid_argument("level indices must be >= 2");
    if (i > 0 && params.level_indices[i] <= params.level_indices[i - 1]) {
      throw std::invalid_argument("level indices must increase");
    }
    if (params.level_indices[i] > params.quotients.size()) throw std::out_of_range("level index beyond the quotient list");
  }
  std::vector<std::uint64_t> pq = params.quotients;
  RotationConstruction out;
  while (pq.size() < params.level_indices.back() + 2) {
    pq.push_back(1);
    ++out.padded;
  }
  out.cf = ContinuedFraction(pq);
  out.rot = RotationSystem(to_u64(out.cf.p(static_cast<long>(pq.size())), "rotation numerator"),
                           to_u64(out.cf.q(static_cast<long>(pq.size())), "rotation denominator"));
  out.p = params.p;
  out.profile = params.profile;
  for (std::size_t i = 0; i < params.level_indices.size(); ++i) {
    RotationLevel L;
    L.k = i + 1;
    L.n = params.level_indices[i];
    const double k = static_cast<double>(L.k);
    if (params.profile == Profile::toy) {
      L.c = 4 * L.k;
      L.r = L.k * L.c;
      L.c_exact = static_cast<double>(L.c);
      L.r_exact = static_cast<double>(L.r);
    } else {
      L.c_exact = k * k * k * std::exp(k);
      L.r_exact = k * k * k * k * std::exp(k);
      L.c = static_cast<std::uint64_t>(std::ceil(L.c_exact));
      L.r = static_cast<std::uint64_t>(std::ceil(L.r_exact));
    }
    const std::uint64_t a = out.cf.a(L.n);
    L.ell = 2 * ((a - 1) / (2 * L.r));
    if (L.ell < 4) {
      throw std::invalid_argument("level " + std::to_string(L.k) + ": a_{n_k} = " + std::to_string(a) +
                                  " gives l_k = " + std::to_string(L.ell) + " < 4; designate a larger quotient");
    }
    L.ell_half = L.ell / 2;
    L.tower = TowerDecomposition(out.cf, L.n, params.locate_limit);
    const double qn = static_cast<double>(L.tower.q_n());
    L.d = params.profile == Profile::toy ? 1.0 / (k * qn) : std::exp(k) * std::pow(k, 6) / qn;
    L.d_bar = L.d * std::pow(static_cast<double>(L.r) * static_cast<double>(L.q()), static_cast<double>(params.p));
    L.s.resize(L.r);
    const double base = 1.0 + 1.0 / static_cast<double>(L.c);
    for (std::uint64_t j = 0; j < L.r; ++j) L.s[j] = (j % 2 == 0 ? 1.0 : -1.0) * std::pow(base, static_cast<double>(j));
    L.lambda_max = std::pow(base, static_cast<double>(L.r - 1));
    L.bump = Bump(params.p, L.d, L.L_grid() / 4, static_cast<double>(L.tower.Q()));
    out.levels.push_back(std::move(L));
  }
  return out;
}

/// Rigorous upper bound on sup |G_k| from a t-grid plus the Lipschitz slack between grid points.
struct SupG {
  double grid_max = 0;
  double upper = 0;
  double bound5 = 0;  // l_k q_{n_k - 1} sup |F_k|
  bool pass = false;
};

inline SupG sup_G(const RotationLevel& L, std::size_t t_samples = 64) {
  SupG out;
  const long double D = L.tower.D();
  const long double qd = static_cast<long double>(L.q());
  for (std::size_t ti = 0; ti <= t_samples; ++ti) {
    const long double t = D * static_cast<long double>(ti) / static_cast<long double>(t_samples);
    long double acc = 0;
    for (std::uint64_t p = 0; p < L.ell; ++p) {
      const long double cur = L.F_tilde(static_cast<long double>(p) * D + t);
      const long double a0 = std::abs(qd * acc);
      const long double a1 = std::abs(qd * acc + (qd - 1) * cur);
      out.grid_max = std::max(out.grid_max, static_cast<double>(std::max(a0, a1)));
      acc += cur;
    }
  }
  out.grid_max *= L.lambda_max;
  // derivative of q A_p(t) + u B_p(t) in t is at most (q (l'+4) + q) sup |F-bar'|
  const double h = L.delta() / static_cast<double>(t_samples);
  out.upper = out.grid_max + L.lipschitz_G() * h / 2;
  out.bound5 = static_cast<double>(L.ell) * static_cast<double>(L.q()) * L.sup_F();
  out.pass = out.upper <= out.bound5;
  return out;
}

struct BumpReport {
  double plateau = 0;
  double cp_norm = 0;
  double ratio = 0;  // ||F-bar||_{C^p} / d-bar
  Rational continuity_defect = 0;   // ramp, orders 0..p, exact
  Rational edge_derivatives = 0;    // max |R^{(i)}(0)|, |R^{(i)}(1)|, i = 1..p, exact
  double scaled_defect = 0;         // continuity_defect * (scale of the i-th derivative) / ||F-bar||_{C^p}
  bool cp_ok = false;
};

inline BumpReport bump_report(const RotationLevel& L) {
  BumpReport rep;
  rep.plateau = L.bump.plateau();
  rep.cp_norm = L.bump.cp_norm();
  rep.ratio = rep.cp_norm / L.d_bar;
  const auto& R = L.bump.ramp();
  rep.continuity_defect = R.continuity_defect(L.bump.p());
  PiecewisePoly cur = R;
  for (std::size_t i = 1; i <= L.bump.p(); ++i) {
    cur = cur.derivative();
    for (const Rational& v : {cur.pieces().front()(Rational(0)), cur.pieces().back()(Rational(1))}) {
      rep.edge_derivatives = std::max(rep.edge_derivatives, v < 0 ? Rational(-v) : v);
    }
  }
  rep.scaled_defect = to_double(rep.continuity_defect) * rep.cp_norm / std::max(rep.plateau, 1e-300);
  rep.cp_ok = rep.continuity_defect == 0 && rep.edge_derivatives == 0 && rep.scaled_defect <= 1e-9;
  return rep;
}

struct RigidTime {
  std::uint64_t i = 0;
  Rational overlap_ratio = 0;  // lambda(E ∩ T^{-i q} E) / lambda(E)
  double closed_form_abs = 0;  // i q (1 + 1/c)^j d (sign applied per cell)
  double max_error = 0;        // over sampled cells and points
  std::size_t samples = 0;
};

struct RigidReport {
  std::size_t k = 0;
  std::uint64_t i_max = 0;
  std::vector<RigidTime> times;
  bool overlap_ok = true;
  bool sums_ok = true;
};

/// Largest i with 30 i < l'_k and k i <= l'_k (overlap ratio 1 - 3i/l' stays above 0.9).
inline std::uint64_t rigid_time_count(const RotationLevel& L) {
  std::uint64_t i = 0;
  while (30 * (i + 1) < L.ell_half && L.k * (i + 1) <= L.ell_half) ++i;
  return i;
}

/// S_{i q}(F_k) on the middle third E of random J'_{u,j} by orbit summation, against the
/// closed form i q (-1)^j (1 + 1/c_k)^j d_k; overlap of E with T^{-iq}E by interval arithmetic.
template <class Rng>
RigidReport rigid_time_report(const RotationConstruction& con, std::size_t k, std::size_t samples, Rng& rng,
                              double tol = 1e-9) {
  const auto& L = con.levels.at(k - 1);
  RigidReport rep;
  rep.k = k;
  rep.i_max = rigid_time_count(L);
  const Rational D(BigInt(L.tower.D()));
  const Rational third = Rational(BigInt(L.ell_half)) * D / 3;
  for (std::uint64_t i = 1; i <= rep.i_max; ++i) {
    RigidTime rt;
    rt.i = i;
    // E = [third, 2 third) relative to the left end of J'_{u,j}; T^{-iq} E = E - iD in the same column
    const Rational lo = third;
    const Rational hi = Rational(2 * third - Rational(BigInt(i)) * D);
    rt.overlap_ratio = hi > lo ? (hi - lo) / third : Rational(0);
    if (!(rt.overlap_ratio * 10 > 9)) rep.overlap_ok = false;
    rt.closed_form_abs = static_cast<double>(i) * static_cast<double>(L.q()) * L.d;
    if (L.tower.locatable()) {
      std::uniform_int_distribution<std::uint64_t> pick_u(0, L.q() - 1), pick_j(0, L.r - 1);
      std::uniform_real_distribution<long double> pick_pos(0.0L, 1.0L);
      for (std::size_t s = 0; s < samples; ++s) {
        const std::uint64_t u = pick_u(rng), j = pick_j(rng);
        // oriented grid position inside E
        const long double rel = to_double(third) * (1 + pick_pos(rng));
        const long double y = static_cast<long double>(L.tower.column_start(u)) +
                              static_cast<long double>(j * L.ell) * L.tower.D() + rel;
        const auto yg = static_cast<std::uint64_t>(std::floor(y));
        CirclePoint yo{yg % L.tower.Q(), static_cast<double>(y - std::floor(y))};
        const CirclePoint x = L.tower.orient(yo);  // reflection is an involution
        long double sum = 0;
        CirclePoint z = x;
        const std::uint64_t steps = i * L.q();
        for (std::uint64_t t = 0; t < steps; ++t) {
          sum += L.F(z);
          z = con.rot.advance(z, 1);
        }
        const double expected = rt.closed_form_abs * L.s[j];
        rt.max_error = std::max(rt.max_error, std::abs(static_cast<double>(sum) - expected));
        ++rt.samples;
      }
      if (rt.max_error > tol) rep.sums_ok = false;
    }
    rep.times.push_back(rt);
  }
  return rep;
}

/// Exact upper bound on lambda(G~^{(0)} != 0) for G~^{(0)} = G∘T^{j l q} - lambda G: rows
/// [(r - j) l, r l) of every column, rows of every column whose image leaves the column, and
/// the second tower.
inline Rational structural_support_bound(const RotationLevel& L, std::uint64_t j) {
  const std::uint64_t shift_rows = j * L.ell;
  const std::uint64_t active = L.r * L.ell;
  auto rows_for_height = [&](std::uint64_t h) {
    const std::uint64_t low = std::min(shift_rows, active);        // rows whose image crosses r l
    const std::uint64_t top_begin = h > shift_rows ? h - shift_rows : 0;
    const std::uint64_t top = h > std::max(active, top_begin) ? h - std::max(active, top_begin) : 0;
    return low + top;
  };
  const std::uint64_t tall = L.tower.tall_columns();
  const std::uint64_t shortc = L.q() - tall;
  const BigInt rows = BigInt(tall) * rows_for_height(L.tower.a_n() + 1) + BigInt(shortc) * rows_for_height(L.tower.a_n());
  const BigInt grid = rows * L.tower.D() + BigInt(L.q()) * L.tower.D2();
  return make_rational(grid, BigInt(L.tower.Q()));
}

struct SquashLevel {
  std::size_t k = 0;
  bool admissible = false;       // some positive j of the required parity has (1+1/c_k)^j < |c|
  std::uint64_t j = 0;           // j(k)
  double lambda = 0;             // (-1)^j (1 + 1/c_k)^j
  double gap = 0;                // |c| - |lambda|
  double gap_bound = 0;          // 2 |c| / c_k
  bool gap_ok = false;
  bool selected = false;
  std::string note;
  std::uint64_t v = 0;
  std::uint64_t sigma = 0;       // grid position of sigma(k) in x coordinates
  std::uint64_t searched = 0;    // candidates v examined
  double sup_G = 0;
  double lip_G = 0;
  double term_transfer = 0;      // (i)  bound on ||G_k∘S - G_k∘sigma(k)||
  Rational support_bound = 0;    // (ii) lambda(G~^{(0)} != 0) upper bound
  double support_limit = 0;      //      (3 + log|c|)/k
  bool support_ok = false;
  double error_bound = 0;        //      ||G~ - G~^{(0)}∘T^v|| <= v sup|F_k|
  double term_scale = 0;         // (iii) |lambda - c| sup |G_k|
};

struct SquashReport {
  double c = 0;
  std::vector<SquashLevel> levels;
  std::vector<std::size_t> selected;  // K'
  std::uint64_t sigma = 0;            // grid position of the limit rotation (last sigma(k_m))
  double sigma_value = 0;
  bool stalled = false;
  std::string stall_reason;
  bool gaps_ok = true;
  bool supports_ok = true;
  bool monotone_transfer = true;
  bool monotone_support = true;
  bool monotone_scale = true;
};

/// Greedy recursion over the materialized levels: j(k), v(k), sigma(k) and the three-term
/// decomposition of F∘S - cF.
inline SquashReport squash_rotation_search(const RotationConstruction& con, double c,
                                           std::uint64_t budget = 200'000'000) {
  if (!(std::abs(c) > 1)) throw std::domain_error("squash factor must satisfy |c| > 1");
  SquashReport rep;
  rep.c = c;
  const std::uint64_t Q = con.rot.Q();
  const double ac = std::abs(c);
  const bool odd = c < 0;
  std::vector<double> sup_g, lip;
  for (const auto& L : con.levels) {
    SquashLevel s;
    s.k = L.k;
    const double base = 1.0 + 1.0 / static_cast<double>(L.c);
    // greatest j of the right parity with base^j < |c|
    const auto jmax = static_cast<std::uint64_t>(std::floor(std::log(ac) / std::log(base)));
    std::uint64_t j = jmax;
    while (j > 0 && !(std::pow(base, static_cast<double>(j)) < ac)) --j;
    if (j > 0 && (j % 2 == 1) != odd) --j;
    s.admissible = j > 0;
    s.j = j;
    s.lambda = (j % 2 == 0 ? 1.0 : -1.0) * std::pow(base, static_cast<double>(j));
    s.gap = ac - std::abs(s.lambda);
    s.gap_bound = 2 * ac / static_cast<double>(L.c);
    s.gap_ok = s.admissible && s.gap <= s.gap_bound;
    s.support_limit = (3 + std::log(ac)) / static_cast<double>(L.k);
    const auto sg = sup_G(L);
    s.sup_G = sg.upper;
    s.lip_G = L.lipschitz_G();
    if (!s.admissible) s.note = "no positive j of the required parity with (1+1/c_k)^j < |c|";
    else if (s.j >= L.r) s.note = "j(k) >= r_k: shifted blocks leave the tower";
    rep.levels.push_back(s);
  }

  auto base_shift = [&](const RotationLevel& L, std::uint64_t j) {
    const auto steps = static_cast<unsigned __int128>(j) * L.ell * L.q();
    return mulmod(static_cast<std::uint64_t>(steps % Q), con.rot.P(), Q);
  };

  std::optional<std::uint64_t> prev_sigma;
  std::vector<std::size_t> chosen;  // indices into levels
  for (std::size_t i = 0; i < con.levels.size(); ++i) {
    auto& s = rep.levels[i];
    const auto& L = con.levels[i];
    if (!s.admissible || s.j >= L.r) continue;
    const std::uint64_t base = base_shift(L, s.j);
    if (!prev_sigma) {
      s.selected = true;
      s.v = 0;
      s.sigma = base;
      prev_sigma = base;
      chosen.push_back(i);
      continue;
    }
    const std::size_t m = chosen.size() - 1;  // selecting k_{m+1}
    const double tol = std::ldexp(1.0, -static_cast<int>(m));
    // largest admissible circular distance: |Δσ| < 2^{-m} and min(Lip_j |Δσ|, 2 sup|G_j|) < 2^{-m}
    long double max_dist = tol;
    for (std::size_t ci : chosen) {
      const auto& cs = rep.levels[ci];
      if (2 * cs.sup_G < tol) continue;
      max_dist = std::min(max_dist, static_cast<long double>(tol) / cs.lip_G);
    }
    const long double max_grid = max_dist * static_cast<long double>(Q);
    const std::uint64_t vmax = (L.q() + L.k - 1) / L.k;  // v < q_{n_k-1}/k
    std::uint64_t g = base;
    bool found = false;
    for (std::uint64_t v = 0; v < vmax && s.searched < budget; ++v) {
      ++s.searched;
      if (static_cast<long double>(circle_distance(g, *prev_sigma, Q)) < max_grid) {
        s.v = v;
        s.sigma = g;
        found = true;
        break;
      }
      g += con.rot.P();
      if (g >= Q) g -= Q;
    }
    if (!found) {
      s.note = s.searched >= budget ? "search budget exhausted" : "no v < q_{n_k-1}/k meets the recursion tolerances";
      if (s.searched >= budget && !rep.stalled) {
        rep.stalled = true;
        rep.stall_reason = "level " + std::to_string(L.k) + ": " + s.note;
      }
      continue;
    }
    s.selected = true;
    prev_sigma = s.sigma;
    chosen.push_back(i);
  }
  if (chosen.empty()) {
    rep.stalled = true;
    rep.stall_reason = "no admissible level";
    return rep;
  }
  rep.sigma = *prev_sigma;
  rep.sigma_value = static_cast<double>(rep.sigma) / static_cast<double>(Q);

  for (std::size_t idx = 0; idx < chosen.size(); ++idx) {
    auto& s = rep.levels[chosen[idx]];
    const auto& L = con.levels[chosen[idx]];
    rep.selected.push_back(s.k);
    // (i): sum over later recursion steps of sup|G_k∘σ(k_i) - G_k∘σ(k_{i+1})|
    double t = 0;
    for (std::size_t later = idx; later + 1 < chosen.size(); ++later) {
      const auto a = rep.levels[chosen[later]].sigma, b = rep.levels[chosen[later + 1]].sigma;
      const double dist = static_cast<double>(circle_distance(a, b, Q)) / static_cast<double>(Q);
      t += std::min(s.lip_G * dist, 2 * s.sup_G);
    }
    s.term_transfer = t;
    s.support_bound = structural_support_bound(L, s.j);
    s.support_ok = to_double(s.support_bound) < s.support_limit;
    s.error_bound = static_cast<double>(s.v) * L.sup_F();
    s.term_scale = std::abs(s.lambda - c) * s.sup_G;
    if (!s.gap_ok) rep.gaps_ok = false;
    if (!s.support_ok) rep.supports_ok = false;
    if (idx > 0) {
      const auto& prev = rep.levels[chosen[idx - 1]];
      if (s.term_transfer > prev.term_transfer) rep.monotone_transfer = false;
      if (s.support_bound > prev.support_bound) rep.monotone_support = false;
      if (s.term_scale > prev.term_scale) rep.monotone_scale = false;
    }
  }
  return rep;
}

}  // namespace cocycle::rotation

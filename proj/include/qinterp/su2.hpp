#pragma once

// Exact algebra of two-level (SU(2)) rotations: axis-angle composition,
// powers, overlap traces, and a dense 2x2 complex matrix form that serves
// as an independent cross-check of the axis-angle arithmetic.
//
// A rotation is stored as (theta, axis, phase) with
//     U = exp(i*phase) * exp(-i * theta * (sigma . axis) / 2),
// theta canonical in [0, 2*pi), |axis| = 1.  The global phase takes no part
// in any physical comparison; it is carried only so that the matrix image
// of every operation is exact (e.g. power(r,n).matrix() == r.matrix()^n).

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace qinterp {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Axis norms below this are treated as degenerate (identity rotation).
inline constexpr double kDegenerateAxisNorm = 1e-12;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
inline Vec3 operator-(const Vec3& v) { return {-v.x, -v.y, -v.z}; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 unit_x() { return {1.0, 0.0, 0.0}; }
inline Vec3 unit_y() { return {0.0, 1.0, 0.0}; }
inline Vec3 unit_z() { return {0.0, 0.0, 1.0}; }

/// 2x2 complex matrix, row-major.  Unitary within 1e-10 whenever it is the
/// image of a Rotation.
struct Matrix2c {
  std::complex<double> a{}, b{}, c{}, d{};

  static Matrix2c identity() { return {1.0, 0.0, 0.0, 1.0}; }

  Matrix2c operator*(const Matrix2c& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d,
            c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Matrix2c dagger() const {
    return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)};
  }
  std::complex<double> trace() const { return a + d; }
};

inline double max_abs_diff(const Matrix2c& m, const Matrix2c& n) {
  return std::max(std::max(std::abs(m.a - n.a), std::abs(m.b - n.b)),
                  std::max(std::abs(m.c - n.c), std::abs(m.d - n.d)));
}

class Rotation {
 public:
  Rotation() = default;

  /// Construct from flip angle (radians), axis (renormalized; must not be
  /// the zero vector unless the angle is degenerate) and global phase.
  /// Angles outside [0, 2pi) are wrapped; each 2pi winding contributes pi
  /// to the phase, so the matrix image is unchanged by wrapping.
  Rotation(double theta, const Vec3& axis, double phase = 0.0) {
    const double n = norm(axis);
    const double wraps = std::floor(theta / kTwoPi);
    const double t = theta - kTwoPi * wraps;
    phase_ = phase + wraps * kPi;
    if (n < kDegenerateAxisNorm) {
      // Degenerate axis: only meaningful for (near-)identity rotations.
      theta_ = 0.0;
      axis_ = unit_z();
      if (std::cos(t / 2.0) < 0.0) phase_ += kPi;
      return;
    }
    theta_ = t;
    axis_ = (1.0 / n) * axis;
  }

  static Rotation identity() { return Rotation(); }

  double theta() const { return theta_; }
  const Vec3& axis() const { return axis_; }
  double phase() const { return phase_; }

  /// Rotation distance from the identity in [0, pi]; (theta, n) and
  /// (2pi - theta, -n) give the same value.
  double geodesic_angle() const { return std::min(theta_, kTwoPi - theta_); }

  /// Scalar part of the corresponding unit quaternion, cos(theta/2).
  double quat_w() const { return std::cos(theta_ / 2.0); }
  /// Vector part, sin(theta/2) * axis.
  Vec3 quat_v() const { return std::sin(theta_ / 2.0) * axis_; }

  /// Canonical form for reporting: ties at theta == pi are broken toward a
  /// lexicographically positive axis.
  Rotation canonicalized() const {
    if (std::abs(theta_ - kPi) < 1e-12 && !lex_positive(axis_)) {
      return Rotation(kPi, -axis_, phase_ + kPi);
    }
    return *this;
  }

  Matrix2c matrix() const;

 private:
  static bool lex_positive(const Vec3& v) {
    if (v.x != 0.0) return v.x > 0.0;
    if (v.y != 0.0) return v.y > 0.0;
    return v.z >= 0.0;
  }

  double theta_ = 0.0;
  Vec3 axis_ = unit_z();
  double phase_ = 0.0;
};

namespace detail {

/// Rebuild a Rotation from an (unnormalized) quaternion (w, v) plus phase.
/// Zero vector part collapses to the identity (axis z by convention), with
/// the sign of w absorbed into the phase so the matrix image is unchanged.
inline Rotation rotation_from_quaternion(double w, const Vec3& v, double phase) {
  const double vn = norm(v);
  const double qn = std::sqrt(w * w + vn * vn);
  if (qn < kDegenerateAxisNorm) throw std::invalid_argument("null quaternion");
  const double wn = w / qn;
  if (vn / qn < kDegenerateAxisNorm) {
    return Rotation(0.0, unit_z(), wn < 0.0 ? phase + kPi : phase);
  }
  const double theta = 2.0 * std::atan2(vn / qn, wn);
  return Rotation(theta, (1.0 / vn) * v, phase);
}

}  // namespace detail

inline Matrix2c Rotation::matrix() const {
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> ph = std::exp(i * phase_);
  const double w = quat_w();
  const Vec3 v = quat_v();
  // U = w*I - i*(v . sigma)
  return {ph * (w - i * v.z), ph * (-i * v.x - v.y),
          ph * (-i * v.x + v.y), ph * (w + i * v.z)};
}

/// Inverse of Rotation::matrix(): recover (theta, axis, phase) from a 2x2
/// unitary.  The phase is reduced to (-pi/2, pi/2].
inline Rotation rotation_from_matrix(const Matrix2c& m) {
  const std::complex<double> det = m.a * m.d - m.b * m.c;
  double phase = 0.5 * std::arg(det);
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> ph = std::exp(-i * phase);
  // Strip the phase; what remains is w*I - i*(v . sigma) with w, v real.
  const std::complex<double> a = ph * m.a;
  const std::complex<double> b = ph * m.b;
  const std::complex<double> d = ph * m.d;
  const double w = 0.5 * (a.real() + d.real());
  const Vec3 v{-0.5 * (b.imag() + (ph * m.c).imag()), 0.5 * ((ph * m.c).real() - b.real()),
               0.5 * (d.imag() - a.imag())};
  return detail::rotation_from_quaternion(w, v, phase);
}

/// Composition r = a * b (a applied after b as matrices multiply).  Exact:
/// r.matrix() equals a.matrix() * b.matrix() to roundoff, phase included.
inline Rotation compose(const Rotation& a, const Rotation& b) {
  const double wa = a.quat_w(), wb = b.quat_w();
  const Vec3 va = a.quat_v(), vb = b.quat_v();
  const double w = wa * wb - dot(va, vb);
  const Vec3 v = wa * vb + wb * va + cross(va, vb);
  return detail::rotation_from_quaternion(w, v, a.phase() + b.phase());
}

/// Sandwich composition R(theta_a, n_a) R(theta_b, n_b) R(theta_a, n_a)
/// through its closed form: with half-angle shorthands ca = cos(theta_a/2)
/// etc. and m = cos of the angle between the axes,
///     b     = ca*cb - m*sa*sb
///     w     = 2*b*ca - cb
///     n_tot = 2*b*sa * n_a + sb * n_b      (unnormalized)
/// The resulting axis always lies in span(n_a, n_b).  A degenerate n_tot
/// (norm < 1e-12) collapses to the identity with axis z.
inline Rotation compose3(double theta_a, const Vec3& n_a, double theta_b, const Vec3& n_b) {
  const double na_n = norm(n_a), nb_n = norm(n_b);
  if (na_n < kDegenerateAxisNorm || nb_n < kDegenerateAxisNorm) {
    throw std::invalid_argument("compose3: zero axis");
  }
  const Vec3 ea = (1.0 / na_n) * n_a, eb = (1.0 / nb_n) * n_b;
  const double ca = std::cos(theta_a / 2.0), sa = std::sin(theta_a / 2.0);
  const double cb = std::cos(theta_b / 2.0), sb = std::sin(theta_b / 2.0);
  const double bfac = ca * cb - dot(ea, eb) * sa * sb;
  const double w = 2.0 * bfac * ca - cb;
  const Vec3 v = (2.0 * bfac * sa) * ea + sb * eb;
  if (norm(v) < kDegenerateAxisNorm) {
    return Rotation(0.0, unit_z(), w < 0.0 ? kPi : 0.0);
  }
  return detail::rotation_from_quaternion(w, v, 0.0);
}

/// n-fold application: angles amplify by n, the axis is unchanged.  The
/// 2pi winding count feeds the phase so the matrix image stays exact.
inline Rotation power(const Rotation& r, long n) {
  if (n < 1) throw std::invalid_argument("power: n must be >= 1");
  const double total = static_cast<double>(n) * r.theta();
  const double wraps = std::floor(total / kTwoPi);
  return Rotation(total - kTwoPi * wraps, r.axis(),
                  static_cast<double>(n) * r.phase() + wraps * kPi);
}

/// Interferometric overlap signal S = [1 + Tr(U0 U1^dag)/2] / 2, phase
/// blind, 1 for identical rotations.  The trace of any SU(2) product of
/// this form is real, so S lies in [0, 1].
inline double overlap_signal(const Rotation& u0, const Rotation& u1) {
  const double t = u0.quat_w() * u1.quat_w() + dot(u0.quat_v(), u1.quat_v());
  return 0.5 * (1.0 + t);
}

/// Normalized real trace Tr(U0 U1^dag)/2 in [-1, 1]; the overlap signal
/// before shifting to the [0, 1] convention.
inline double overlap_trace(const Rotation& u0, const Rotation& u1) {
  return u0.quat_w() * u1.quat_w() + dot(u0.quat_v(), u1.quat_v());
}

/// True when a and b are the same rotation up to global phase:
/// |<q_a, q_b>| = 1 within tol.
inline bool equivalent(const Rotation& a, const Rotation& b, double tol = 1e-9) {
  return std::abs(std::abs(overlap_trace(a, b)) - 1.0) < tol;
}

}  // namespace qinterp

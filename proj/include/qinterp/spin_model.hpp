#pragma once

// NV-conditioned nuclear-spin dynamics: CPMG/XY8 block propagators, exact
// and analytic sensing signals, lineshape, linewidth, and the builtin 14N
// example model.
//
// Conventions.  The nuclear spin sees axis n0 = z in the |0> manifold and
// n1 = cos(alpha) z + sin(alpha) x in the |-1> manifold; the coordinate
// frame is chosen so the transverse coupling has zero azimuth.  A "block"
// is one CPMG unit (free - pi - free - free - pi - free, two pi pulses,
// duration 4*tau); XY-family cycles are 4 or 8 such blocks and differ only
// in pulse phases, which do not enter the ideal signal.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "su2.hpp"

namespace qinterp {

/// Raised when a requested quantity does not exist for the given model
/// (singular 14N detuning, linewidth without a zero, undefined Q, ...).
struct model_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Secular hyperfine parameters of one nuclear spin, all in rad/s.
struct SpinCoupling {
  double omega_L = 0.0;  ///< Larmor angular frequency, > 0
  double A = 0.0;        ///< parallel hyperfine A_zz
  double B = 0.0;        ///< transverse hyperfine A_zx
  double C = 0.0;        ///< transverse hyperfine A_zy

  SpinCoupling(double omega_l, double a, double b, double c = 0.0)
      : omega_L(omega_l), A(a), B(b), C(c) {
    if (!(omega_L > 0.0)) throw std::invalid_argument("SpinCoupling: omega_L must be > 0");
  }

  /// Tilt angle between the conditional rotation axes, in [0, pi).
  double tilt_alpha() const { return std::atan2(std::hypot(B, C), omega_L + A); }

  /// Ratio of the |-1>-manifold Hamiltonian norm to omega_L.
  double eta() const { return std::hypot(1.0 + A / omega_L, std::hypot(B, C) / omega_L); }

  Vec3 axis0() const { return unit_z(); }
  Vec3 axis1() const {
    const double a = tilt_alpha();
    return {std::sin(a), 0.0, std::cos(a)};
  }

  /// Synthetic coupling with the given tilt and equal Hamiltonian norms in
  /// both manifolds (eta == 1 exactly).  Handy when comparing against the
  /// equal-norm analytic formulas.
  static SpinCoupling from_tilt(double omega_l, double alpha) {
    return SpinCoupling(omega_l, omega_l * (std::cos(alpha) - 1.0), omega_l * std::sin(alpha));
  }
};

enum class SequenceFamily { CPMG, XY8, XY16 };

inline int pulses_per_cycle(SequenceFamily f) {
  switch (f) {
    case SequenceFamily::CPMG: return 2;
    case SequenceFamily::XY8: return 8;
    case SequenceFamily::XY16: return 16;
  }
  throw std::invalid_argument("unknown sequence family");
}

inline const char* family_name(SequenceFamily f) {
  switch (f) {
    case SequenceFamily::CPMG: return "CPMG";
    case SequenceFamily::XY8: return "XY8";
    case SequenceFamily::XY16: return "XY16";
  }
  return "?";
}

/// A pi-pulse train: n_cycles repetitions of the family cycle with
/// half-interval tau (pulse spacing 2*tau).
struct SequenceSpec {
  int n_cycles = 1;
  double tau = 0.0;  ///< seconds, > 0
  SequenceFamily family = SequenceFamily::CPMG;

  SequenceSpec(int n, double tau_s, SequenceFamily f) : n_cycles(n), tau(tau_s), family(f) {
    if (n_cycles < 1) throw std::invalid_argument("SequenceSpec: n_cycles must be >= 1");
    if (!(tau > 0.0)) throw std::invalid_argument("SequenceSpec: tau must be > 0");
  }

  int pi_pulse_count() const { return n_cycles * pulses_per_cycle(family); }
  int block_count() const { return pi_pulse_count() / 2; }
  double total_time() const { return 2.0 * pi_pulse_count() * tau; }
};

/// Conditional block propagators at flip angle theta = 2*tau*omega_L:
///   u0 = R(theta/2, n0) R(eta*theta, n1) R(theta/2, n0)
///   u1 = R(eta*theta/2, n1) R(theta, n0) R(eta*theta/2, n1)
inline std::pair<Rotation, Rotation> block_propagators(const SpinCoupling& c, double theta) {
  const double eta = c.eta();
  const Vec3 n0 = c.axis0(), n1 = c.axis1();
  return {compose3(theta / 2.0, n0, eta * theta, n1),
          compose3(eta * theta / 2.0, n1, theta, n0)};
}

/// Overlap signal of the two conditional evolutions after `blocks` blocks
/// at flip angle theta, in [0, 1].
inline double sensing_signal_blocks(const SpinCoupling& c, long blocks, double theta) {
  const auto [u0, u1] = block_propagators(c, theta);
  return overlap_signal(power(u0, blocks), power(u1, blocks));
}

/// Interferometric sensing signal for a full sequence; the sweep variable
/// enters through spec.tau.
inline double sensing_signal(const SpinCoupling& c, const SequenceSpec& spec) {
  return sensing_signal_blocks(c, spec.block_count(), 2.0 * spec.tau * c.omega_L);
}

/// Equal-norm peak signal after n blocks at theta = pi:
/// S = 1 - sin^2(n*alpha) cos^2(alpha/2).
inline double peak_signal_small_coupling(double alpha, long n_blocks) {
  const double s = std::sin(static_cast<double>(n_blocks) * alpha);
  const double ch = std::cos(alpha / 2.0);
  return 1.0 - s * s * ch * ch;
}

/// Closed-form dip signal at theta = pi keeping the full norm mismatch eta.
/// Derived from the quaternion form of the two blocks: with
/// k = cos(alpha), c2 = cos(eta*pi/2), s2 = sin(eta*pi/2), both blocks have
/// scalar part -k*s2 and vector parts
///   v0 = (c2 - k*s2) n0 + s2 n1,     v1 = n0 - k*(1 - c2) n1,
/// so after n blocks
///   S = [1 + cos^2(n*ab) + sin^2(n*ab) * (v0.v1)/sin^2(ab)] / 2,
/// with cos(ab) = k*s2.  Reduces to the equal-norm peak formula at eta = 1.
inline double exact_dip_signal(const SpinCoupling& c, long n_blocks) {
  const double alpha = c.tilt_alpha();
  const double k = std::cos(alpha);
  const double c2 = std::cos(c.eta() * kPi / 2.0);
  const double s2 = std::sin(c.eta() * kPi / 2.0);
  const double sin2_ab = 1.0 - k * k * s2 * s2;
  if (sin2_ab < 1e-300) return 1.0;  // coaxial: no dip
  const double v0v1 = (c2 - k * s2) * (1.0 - k * k * (1.0 - c2)) + k * s2 * c2;
  const double ab = std::acos(std::clamp(k * s2, -1.0, 1.0));
  const double cn = std::cos(static_cast<double>(n_blocks) * ab);
  const double sn = std::sin(static_cast<double>(n_blocks) * ab);
  return 0.5 * (1.0 + cn * cn + sn * sn * v0v1 / sin2_ab);
}

struct LineshapeValue {
  double value = 1.0;
  bool extrapolated = false;  ///< true outside |delta| <= 2 * w_angle
};

struct LinewidthResult {
  double w_angle = 0.0;  ///< radians
  double w_time = 0.0;   ///< seconds
};

/// Dip linewidth.  w_angle follows the angular form
///   w^2 = [sin^2(pi/N) - sin^2(alpha)] / [2 cos^2(alpha/2)],
/// defined only while sin(pi/N) > sin(alpha); w_time follows the 1/N law
///   w_time = sin(pi/N) / (sqrt(2) omega_L cos(alpha/2)).
inline LinewidthResult linewidth(const SpinCoupling& c, long n_blocks) {
  const double alpha = c.tilt_alpha();
  const double spn = std::sin(kPi / static_cast<double>(n_blocks));
  const double sa = std::sin(alpha);
  if (!(spn > sa)) throw model_error("linewidth undefined at this N");
  const double ch = std::cos(alpha / 2.0);
  LinewidthResult r;
  r.w_angle = std::sqrt((spn * spn - sa * sa) / (2.0 * ch * ch));
  r.w_time = spn / (std::sqrt(2.0) * c.omega_L * ch);
  return r;
}

/// First zero of the first-order dip contrast (the delta at which
/// sin(N * alpha'(delta)) first vanishes); the lineshape validity radius
/// is tied to this scale.
inline double lineshape_first_zero(const SpinCoupling& c, long n_blocks) {
  const double alpha = c.tilt_alpha();
  const double spn = std::sin(kPi / static_cast<double>(n_blocks));
  const double sa = std::sin(alpha);
  if (!(spn > sa)) throw model_error("lineshape zero undefined at this N");
  return std::sqrt(spn * spn - sa * sa) / (1.0 + std::cos(alpha));
}

/// First-order lineshape about the sensing peak, normalized like
/// sensing_signal (peak value matches the theta = pi dip formula at
/// delta = 0).  The linear-in-delta term makes the sidelobes asymmetric.
///
/// delta is the phase deviation per half-interval, omega_L*(tau - tau_0);
/// the matching exact sweep point is the block evaluated at flip-angle
/// argument theta = pi + 2*delta.
inline LineshapeValue lineshape_first_order(const SpinCoupling& c, long n_blocks, double delta) {
  const double alpha = c.tilt_alpha();
  const double n = static_cast<double>(n_blocks);
  const double sa2 = std::sin(alpha) * std::sin(alpha);
  const double opc = 1.0 + std::cos(alpha);
  const double sap2 = sa2 + delta * delta * opc * opc;  // sin^2(alpha')
  LineshapeValue out;
  double radius = 0.0;
  try {
    radius = 2.0 * linewidth(c, n_blocks).w_angle;
  } catch (const model_error&) {
    radius = 0.0;
  }
  out.extrapolated = std::abs(delta) > radius;
  if (sap2 < 1e-300) {
    out.value = 1.0;
    return out;
  }
  const double ap = std::asin(std::sqrt(std::min(1.0, sap2)));
  const double cnp = std::cos(n * ap), snp = std::sin(n * ap);
  const double ca = std::cos(alpha);
  const double bracket =
      -sa2 * ca + delta * delta * ca * opc * opc - 2.0 * delta * sa2 * opc;
  const double tr = cnp * cnp + snp * snp * bracket / sap2;
  out.value = 0.5 * (1.0 + tr);
  return out;
}

// ---------------------------------------------------------------------------
// 14N example model
// ---------------------------------------------------------------------------

/// Effective model of the intrinsic 14N nuclear spin near the NV ground
/// state anti-crossing: a weak transverse field B_perp plus the transverse
/// hyperfine coupling produce an effective tilt
///   alpha = atan[ gamma_e * B_perp * A_xx / (Delta * omega) ],
/// with Delta = Delta_0 - gamma_e Bz and omega = P - A_par/2 - gamma_n Bz.
struct Nitrogen14Model {
  double Bz_gauss = 0.0;
  double Bperp_gauss = 0.0;

  static constexpr double kQuadrupoleMHz = -4.95;
  static constexpr double kAParallelMHz = -2.16;
  static constexpr double kAxxMHz = -2.62;
  static constexpr double kZeroFieldMHz = 2870.0;
  static constexpr double kGammaEMHzPerG = 2.8;
  static constexpr double kGammaNMHzPerG = 0.31e-3;

  /// NV detuning Delta = Delta_0 - gamma_e Bz, in MHz.
  double detuning_mhz() const { return kZeroFieldMHz - kGammaEMHzPerG * Bz_gauss; }

  /// 14N transition frequency omega = P - A_par/2 - gamma_n Bz, in MHz.
  double nuclear_freq_mhz() const {
    return kQuadrupoleMHz - kAParallelMHz / 2.0 - kGammaNMHzPerG * Bz_gauss;
  }

  double tilt_alpha() const {
    const double delta = detuning_mhz();
    const double omega = nuclear_freq_mhz();
    if (std::abs(delta) < 1e-9 || std::abs(omega) < 1e-12) {
      throw model_error("14N model singular: zero detuning");
    }
    return std::atan(kGammaEMHzPerG * Bperp_gauss * kAxxMHz / (delta * omega));
  }

  /// Equal-norm coupling carrying the effective tilt, angular units.
  SpinCoupling effective_coupling() const {
    const double omega_rad = kTwoPi * std::abs(nuclear_freq_mhz()) * 1e6;
    return SpinCoupling::from_tilt(omega_rad, std::abs(tilt_alpha()));
  }
};

/// XY8-N signal of the 14N model at deviation delta from the peak (same
/// half-interval phase convention as lineshape_first_order), in the trace
/// normalization Tr(U0 U1^dag)/2: peak value cos(8 N alpha) for small
/// tilt, full dips reach -1.
inline double nitrogen14_signal(const Nitrogen14Model& m, int n_cycles, double delta) {
  if (n_cycles < 1) throw std::invalid_argument("nitrogen14_signal: n_cycles >= 1");
  const SpinCoupling c = m.effective_coupling();
  const long blocks = 4L * n_cycles;  // XY8 cycle = 4 CPMG blocks
  const auto [u0, u1] = block_propagators(c, kPi + 2.0 * delta);
  return overlap_trace(power(u0, blocks), power(u1, blocks));
}

}  // namespace qinterp

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qinterp/spin_model.hpp"
#include "test_helpers.hpp"

using namespace qinterp;
using test::Rng;

TEST_CASE("coupling derived quantities", "[spin]") {
  const SpinCoupling c(2.0 * kPi * 1e6, 2.0 * kPi * 1e5, 2.0 * kPi * 3e4, 2.0 * kPi * 4e4);
  CHECK(c.tilt_alpha() == Catch::Approx(std::atan2(2.0 * kPi * 5e4, 2.0 * kPi * 1.1e6)));
  CHECK(c.eta() == Catch::Approx(std::sqrt(1.1 * 1.1 + 0.05 * 0.05)));
  CHECK_THROWS_AS(SpinCoupling(-1.0, 0.0, 0.0), std::invalid_argument);

  const SpinCoupling t = SpinCoupling::from_tilt(1e7, 0.2);
  CHECK(t.tilt_alpha() == Catch::Approx(0.2).margin(1e-14));
  CHECK(t.eta() == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("sequence bookkeeping", "[spin]") {
  const SequenceSpec xy8(6, 100e-9, SequenceFamily::XY8);
  CHECK(xy8.pi_pulse_count() == 48);
  CHECK(xy8.block_count() == 24);
  CHECK(xy8.total_time() == Catch::Approx(2.0 * 48 * 100e-9));
  CHECK(pulses_per_cycle(SequenceFamily::CPMG) == 2);
  CHECK(pulses_per_cycle(SequenceFamily::XY16) == 16);
  CHECK_THROWS_AS(SequenceSpec(0, 1e-9, SequenceFamily::CPMG), std::invalid_argument);
}

TEST_CASE("coaxial coupling gives no dip", "[spin]") {
  const SpinCoupling c(1e7, 2e5, 0.0, 0.0);  // B = C = 0 -> alpha = 0
  CHECK(c.tilt_alpha() == 0.0);
  for (double theta : {0.4, kPi, 2.0}) {
    for (long n : {1L, 5L, 40L}) {
      CHECK(sensing_signal_blocks(c, n, theta) == Catch::Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("block propagators at the peak have flip angle 2 alpha", "[spin]") {
  const double alpha = 0.08;
  const SpinCoupling c = SpinCoupling::from_tilt(1.0, alpha);
  const auto [u0, u1] = block_propagators(c, kPi);
  CHECK(u0.geodesic_angle() == Catch::Approx(2.0 * alpha).margin(1e-12));
  CHECK(u1.geodesic_angle() == Catch::Approx(2.0 * alpha).margin(1e-12));
  // the two effective axes stay separated by alpha in magnitude:
  // |m0 . m1| = cos(alpha), and each is perpendicular to its source axis
  // within O(alpha)
  Vec3 m0 = u0.axis(), m1 = u1.axis();
  if (u0.theta() > kPi) m0 = -m0;
  if (u1.theta() > kPi) m1 = -m1;
  CHECK(std::abs(dot(m0, m1)) == Catch::Approx(std::cos(alpha)).margin(1e-12));
  CHECK(std::abs(dot(m0, c.axis1())) < 1.05 * alpha);
  CHECK(std::abs(dot(m1, c.axis0())) < 1.05 * alpha);
}

TEST_CASE("block propagators match the dense matrix product", "[spin]") {
  Rng rng(31u);
  for (int i = 0; i < 100; ++i) {
    const SpinCoupling c(1.0, rng.uniform(-0.3, 0.3), rng.uniform(0.0, 0.3),
                         rng.uniform(0.0, 0.2));
    const double theta = rng.uniform(0.1, kTwoPi);
    const auto [u0, u1] = block_propagators(c, theta);
    const double eta = c.eta();
    const Matrix2c m0 = Rotation(theta / 2.0, c.axis0()).matrix() *
                        Rotation(eta * theta, c.axis1()).matrix() *
                        Rotation(theta / 2.0, c.axis0()).matrix();
    const Matrix2c m1 = Rotation(eta * theta / 2.0, c.axis1()).matrix() *
                        Rotation(theta, c.axis0()).matrix() *
                        Rotation(eta * theta / 2.0, c.axis1()).matrix();
    CHECK(max_abs_diff(u0.matrix(), m0) < 1e-10);
    CHECK(max_abs_diff(u1.matrix(), m1) < 1e-10);
  }
}

TEST_CASE("peak signal reproduces the equal-norm formula", "[spin]") {
  // frozen value: alpha = 0.1, N = 10 -> 1 - sin^2(1) cos^2(0.05)
  const SpinCoupling ideal = SpinCoupling::from_tilt(1.0, 0.1);
  CHECK(sensing_signal_blocks(ideal, 10, kPi) == Catch::Approx(0.2936952849).margin(1e-9));

  // a realistic weak coupling (A, B <= 1e-3 omega) agrees to 1e-3
  const SpinCoupling weak(1.0, 5e-4, 8e-4, 0.0);
  CHECK(sensing_signal_blocks(weak, 10, kPi) ==
        Catch::Approx(peak_signal_small_coupling(weak.tilt_alpha(), 10)).margin(1e-3));
}

TEST_CASE("sensing signal via SequenceSpec sweeps tau", "[spin]") {
  const SpinCoupling c = SpinCoupling::from_tilt(2.0 * kPi * 2e6, 0.05);
  const double tau_peak = kPi / (2.0 * c.omega_L);
  const SequenceSpec spec(3, tau_peak, SequenceFamily::XY8);
  // 3 XY8 cycles = 12 blocks
  CHECK(sensing_signal(c, spec) ==
        Catch::Approx(peak_signal_small_coupling(0.05, 12)).margin(1e-12));
}

TEST_CASE("exact dip formula matches the propagator oracle", "[spin]") {
  Rng rng(32u);
  for (int i = 0; i < 200; ++i) {
    const SpinCoupling c(1.0, rng.uniform(-0.3, 0.3), rng.uniform(0.0, 0.4),
                         rng.uniform(0.0, 0.3));
    const long n = rng.uniform_int(1, 30);
    CHECK(exact_dip_signal(c, n) ==
          Catch::Approx(sensing_signal_blocks(c, n, kPi)).margin(1e-9));
  }
}

TEST_CASE("signal depends on the transverse coupling only through its norm", "[spin]") {
  Rng rng(33u);
  for (int i = 0; i < 50; ++i) {
    const double b = rng.uniform(0.0, 0.3), cc = rng.uniform(0.0, 0.3);
    const double a = rng.uniform(-0.2, 0.2);
    const double theta = rng.uniform(0.2, kTwoPi);
    const long n = rng.uniform_int(1, 20);
    const SpinCoupling c1(1.0, a, b, cc);
    const SpinCoupling c2(1.0, a, std::hypot(b, cc), 0.0);
    CHECK(sensing_signal_blocks(c1, n, theta) ==
          Catch::Approx(sensing_signal_blocks(c2, n, theta)).margin(1e-12));
  }
}

TEST_CASE("peak contrast grows as N^2", "[spin]") {
  const double alpha = 0.03;
  const SpinCoupling c = SpinCoupling::from_tilt(1.0, alpha);
  const double c1 = 1.0 - sensing_signal_blocks(c, 1, kPi);
  for (long n = 2; n <= 10; ++n) {  // N * alpha <= 0.3
    const double cn = 1.0 - sensing_signal_blocks(c, n, kPi);
    CHECK(cn / (static_cast<double>(n) * n * c1) == Catch::Approx(1.0).margin(0.05));
  }
}

TEST_CASE("first-order lineshape anchors at the peak and is asymmetric", "[spin]") {
  const SpinCoupling c = SpinCoupling::from_tilt(1.0, 0.1);
  const long n = 10;
  CHECK(lineshape_first_order(c, n, 0.0).value ==
        Catch::Approx(peak_signal_small_coupling(0.1, n)).margin(1e-12));

  // sidelobe asymmetry, sign fixed by the -2*delta*sin^2(a)*(1+cos a) term
  const double sp = lineshape_first_order(c, n, 0.05).value;
  const double sm = lineshape_first_order(c, n, -0.05).value;
  CHECK(sp != sm);
  CHECK(sp < sm);
  // the exact propagator sweep shows the same sign
  CHECK(sensing_signal_blocks(c, n, kPi + 2.0 * 0.05) <
        sensing_signal_blocks(c, n, kPi - 2.0 * 0.05));
}

TEST_CASE("first-order lineshape tracks the exact sweep near the peak", "[spin]") {
  for (double alpha : {0.05, 0.1, 0.15}) {
    for (long n : {5L, 10L, 20L}) {
      const SpinCoupling c = SpinCoupling::from_tilt(1.0, alpha);
      if (std::sin(kPi / static_cast<double>(n)) <= std::sin(alpha)) continue;
      const double w = linewidth(c, n).w_angle;
      for (int i = -40; i <= 40; ++i) {
        const double d = 0.5 * w * i / 40.0;
        const double exact = sensing_signal_blocks(c, n, kPi + 2.0 * d);
        CHECK(lineshape_first_order(c, n, d).value == Catch::Approx(exact).margin(0.02));
      }
    }
  }
}

TEST_CASE("lineshape flags extrapolation outside 2w", "[spin]") {
  const SpinCoupling c = SpinCoupling::from_tilt(1.0, 0.1);
  const double w = linewidth(c, 10).w_angle;
  CHECK_FALSE(lineshape_first_order(c, 10, 1.9 * w).extrapolated);
  CHECK(lineshape_first_order(c, 10, 2.1 * w).extrapolated);
}

TEST_CASE("linewidth closed forms and the bisection oracle", "[spin]") {
  const double alpha = 0.1;
  const long n = 10;
  const SpinCoupling c = SpinCoupling::from_tilt(1.0, alpha);
  const auto lw = linewidth(c, n);

  // alpha -> 0 limit of the time linewidth
  const SpinCoupling tiny = SpinCoupling::from_tilt(1.0, 1e-8);
  CHECK(linewidth(tiny, n).w_time ==
        Catch::Approx(std::sin(kPi / n) / std::sqrt(2.0)).epsilon(1e-9));

  // doubling N at small alpha halves the time linewidth within 2%
  const SpinCoupling small = SpinCoupling::from_tilt(1.0, 0.005);
  CHECK(linewidth(small, 64).w_time / linewidth(small, 32).w_time ==
        Catch::Approx(0.5).margin(0.01));

  // oracle: bisect the first zero of sin(N * alpha'(delta)) of the
  // first-order lineshape and compare with the closed form; the angular
  // linewidth relates to that zero by exactly sqrt(2) cos(alpha/2)
  const double opc = 1.0 + std::cos(alpha);
  const double sa2 = std::sin(alpha) * std::sin(alpha);
  auto g = [&](double d) {
    return std::sin(static_cast<double>(n) * std::asin(std::sqrt(sa2 + d * d * opc * opc)));
  };
  double lo = 0.0, hi = 0.25;
  REQUIRE(g(lo) > 0.0);
  REQUIRE(g(hi) < 0.0);
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  const double zero = 0.5 * (lo + hi);
  CHECK(zero == Catch::Approx(lineshape_first_zero(c, n)).margin(1e-6));
  CHECK(lw.w_angle == Catch::Approx(std::sqrt(2.0) * std::cos(alpha / 2.0) * zero).margin(1e-6));
  // the first-order contrast really vanishes there
  CHECK(1.0 - lineshape_first_order(c, n, zero).value == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("linewidth undefined when the zero does not exist", "[spin]") {
  const SpinCoupling c = SpinCoupling::from_tilt(1.0, 0.1);
  CHECK_THROWS_AS(linewidth(c, 40), model_error);  // sin(pi/40) < sin(0.1)
}

TEST_CASE("time linewidth follows the 1/N law", "[spin]") {
  const SpinCoupling c = SpinCoupling::from_tilt(1.0, 0.02);
  double lo = 1e300, hi = 0.0;
  for (long n : {8L, 16L, 32L, 64L}) {
    const double x = static_cast<double>(n) * linewidth(c, n).w_time;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(hi / lo - 1.0 < 0.03);
}

TEST_CASE("nitrogen model constants and tilt", "[spin][nitrogen]") {
  Nitrogen14Model m;
  m.Bz_gauss = 954.71;
  m.Bperp_gauss = 1.14;
  CHECK(m.detuning_mhz() == Catch::Approx(2870.0 - 2.8 * 954.71));
  CHECK(m.nuclear_freq_mhz() == Catch::Approx(-4.95 + 1.08 - 0.31e-3 * 954.71));
  const double alpha = m.tilt_alpha();
  CHECK(alpha == Catch::Approx(std::atan(2.8 * 1.14 * -2.62 /
                                         (m.detuning_mhz() * m.nuclear_freq_mhz()))));
  CHECK(alpha > 0.0);
  CHECK(alpha < 0.02);
}

TEST_CASE("nitrogen signal is flat without a transverse field", "[spin][nitrogen]") {
  Nitrogen14Model m;
  m.Bz_gauss = 954.71;
  m.Bperp_gauss = 0.0;
  for (double d : {-0.1, 0.0, 0.07}) {
    CHECK(nitrogen14_signal(m, 8, d) == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("nitrogen peak signal follows cos(8 N alpha)", "[spin][nitrogen]") {
  Nitrogen14Model m;
  m.Bz_gauss = 954.71;
  m.Bperp_gauss = 1.14;
  const double alpha = m.tilt_alpha();
  for (int n : {4, 6, 12}) {
    CHECK(nitrogen14_signal(m, n, 0.0) ==
          Catch::Approx(std::cos(8.0 * n * alpha)).margin(1e-4));
  }
}

TEST_CASE("nitrogen sweep shows the split dip with asymmetric sidelobes", "[spin][nitrogen]") {
  Nitrogen14Model m;
  m.Bz_gauss = 954.71;
  m.Bperp_gauss = 1.14;
  const int n = 12;
  const int pts = 801;
  std::vector<double> y(pts);
  int minima = 0;
  for (int i = 0; i < pts; ++i) {
    const double d = -0.12 + 0.24 * i / (pts - 1);
    y[i] = nitrogen14_signal(m, n, d);
  }
  bool has_separating_max = false;
  int first_min = -1, last_min = -1;
  for (int i = 1; i + 1 < pts; ++i) {
    if (y[i] < y[i - 1] && y[i] < y[i + 1]) {
      ++minima;
      if (first_min < 0) first_min = i;
      last_min = i;
    }
  }
  REQUIRE(minima >= 2);
  for (int i = first_min + 1; i < last_min; ++i) {
    if (y[i] > y[i - 1] && y[i] > y[i + 1]) has_separating_max = true;
  }
  CHECK(has_separating_max);
  // sidelobe asymmetry
  CHECK(nitrogen14_signal(m, n, 0.06) != nitrogen14_signal(m, n, -0.06));
}

TEST_CASE("nitrogen model is singular at the level anti-crossing", "[spin][nitrogen]") {
  Nitrogen14Model m;
  m.Bz_gauss = 2870.0 / 2.8;  // Delta = 0
  m.Bperp_gauss = 1.0;
  CHECK_THROWS_AS(nitrogen14_signal(m, 4, 0.0), model_error);
}

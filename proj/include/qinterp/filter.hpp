#pragma once

// Semiclassical filter-function machinery for AC magnetometry: piecewise
// +-1 time-domain filters, their exact (segment-wise analytic) Fourier
// transforms, coherence decay under classical noise spectra, Q-value
// figures of merit and finite-sampling limit formulas.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "planner.hpp"
#include "spin_model.hpp"

namespace qinterp {

/// Piecewise +-1 modulation f(t) on [0, T], flipping sign at each switch
/// time (the pi-pulse centers).
struct TimeFilter {
  std::vector<double> switch_times;  ///< strictly increasing, inside (0, T)
  double total_time = 0.0;
  int initial_sign = +1;

  TimeFilter(std::vector<double> switches, double total, int sign0 = +1)
      : switch_times(std::move(switches)), total_time(total), initial_sign(sign0) {
    if (!(total_time > 0.0)) throw std::invalid_argument("TimeFilter: total_time must be > 0");
    if (initial_sign != 1 && initial_sign != -1) {
      throw std::invalid_argument("TimeFilter: initial_sign must be +-1");
    }
    double prev = 0.0;
    for (double t : switch_times) {
      if (!(t > prev) || !(t < total_time)) {
        throw std::invalid_argument("TimeFilter: switch times must be ascending in (0, T)");
      }
      prev = t;
    }
  }

  int sign_at(double t) const {
    const auto it = std::upper_bound(switch_times.begin(), switch_times.end(), t);
    const auto flips = static_cast<std::size_t>(it - switch_times.begin());
    return (flips % 2 == 0) ? initial_sign : -initial_sign;
  }
};

/// Uniform train of n pulses with spacing t_s (half-spacing at the ends),
/// total time n * t_s.
inline TimeFilter uniform_filter(int n_pulses, double spacing) {
  if (n_pulses < 1) throw std::invalid_argument("uniform_filter: n_pulses >= 1");
  if (!(spacing > 0.0)) throw std::invalid_argument("uniform_filter: spacing > 0");
  std::vector<double> sw(n_pulses);
  for (int j = 0; j < n_pulses; ++j) sw[j] = (j + 0.5) * spacing;
  return TimeFilter(std::move(sw), n_pulses * spacing);
}

/// Switch times of the concatenated plan blocks, each block contributing
/// two pulses at tau and 3*tau of its 4*tau span with tau = tau_k or
/// tau_{k+1} per word symbol.  The total time equals the ideal target
/// filter's total time exactly (the word realizes the fraction).  The
/// sequence family fixes pulse phases only, which do not enter the +-1
/// modulation; it is accepted for interface symmetry with the pulse-table
/// export.
inline TimeFilter filter_from_plan(const InterpolationPlan& plan, const HardwareGrid& grid,
                                   SequenceFamily /*family*/ = SequenceFamily::CPMG) {
  std::vector<double> sw;
  sw.reserve(2 * plan.word.size());
  double t = 0.0;
  for (Block b : plan.word) {
    const double tau = (static_cast<double>(grid.k) + (b == Block::U1 ? 1.0 : 0.0)) *
                       grid.delta_tau;
    sw.push_back(t + tau);
    sw.push_back(t + 3.0 * tau);
    t += 4.0 * tau;
  }
  return TimeFilter(std::move(sw), t);
}

/// Exact Fourier transform F(w) = integral_0^T f(t) exp(-i w t) dt,
/// evaluated segment by segment (no FFT gridding).
inline std::complex<double> filter_fourier(const TimeFilter& tf, double omega) {
  const std::complex<double> i(0.0, 1.0);
  std::complex<double> acc(0.0, 0.0);
  double a = 0.0;
  int sign = tf.initial_sign;
  const double small = std::abs(omega) * tf.total_time;
  for (std::size_t j = 0; j <= tf.switch_times.size(); ++j) {
    const double b = (j < tf.switch_times.size()) ? tf.switch_times[j] : tf.total_time;
    if (small < 1e-8) {
      // series in w: (b - a) - i w (b^2 - a^2)/2
      acc += static_cast<double>(sign) *
             std::complex<double>(b - a, -0.5 * omega * (b * b - a * a));
    } else {
      acc += static_cast<double>(sign) * (std::exp(-i * omega * a) - std::exp(-i * omega * b)) /
             (i * omega);
    }
    a = b;
    sign = -sign;
  }
  return acc;
}

inline std::vector<std::complex<double>> frequency_response(const TimeFilter& tf,
                                                            const std::vector<double>& omega_grid) {
  std::vector<std::complex<double>> out;
  out.reserve(omega_grid.size());
  for (double w : omega_grid) out.push_back(filter_fourier(tf, w));
  return out;
}

/// Closed form of integral |F(w)|^2 dw / (2 pi) from the segment geometry
/// (equals integral f(t)^2 dt = T; a Parseval identity check that never
/// touches the Fourier path).
inline double filter_l2_norm_over_2pi(const TimeFilter& tf) {
  std::vector<double> edges;
  edges.reserve(tf.switch_times.size() + 2);
  edges.push_back(0.0);
  edges.insert(edges.end(), tf.switch_times.begin(), tf.switch_times.end());
  edges.push_back(tf.total_time);
  const std::size_t n = edges.size() - 1;
  std::vector<int> sgn(n);
  for (std::size_t j = 0; j < n; ++j) sgn[j] = (j % 2 == 0) ? tf.initial_sign : -tf.initial_sign;
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const double a = std::abs(edges[k] - edges[j]);
      const double b = std::abs(edges[k + 1] - edges[j]);
      const double c = std::abs(edges[k] - edges[j + 1]);
      const double d = std::abs(edges[k + 1] - edges[j + 1]);
      total += -0.5 * sgn[j] * sgn[k] * (a - b - c + d);
    }
  }
  return total;
}

/// One spectral component: a tone at `frequency_hz` with squared-amplitude
/// weight amplitude^2, optionally Gaussian-broadened by linewidth_hz (RMS).
struct Tone {
  double frequency_hz = 0.0;
  double amplitude = 1.0;
  double linewidth_hz = 0.0;
};

/// Noise spectral density: either a sum of (broadened) tones or a
/// tabulated nonnegative S(omega).
class NoiseSpectrum {
 public:
  static NoiseSpectrum from_tones(std::vector<Tone> tones) {
    NoiseSpectrum s;
    for (const auto& t : tones) {
      if (!(t.frequency_hz >= 0.0) || !(t.amplitude >= 0.0) || !(t.linewidth_hz >= 0.0)) {
        throw std::invalid_argument("NoiseSpectrum: tone parameters must be >= 0");
      }
    }
    s.tones_ = std::move(tones);
    return s;
  }

  /// Samples of (omega in rad/s, S(omega) >= 0), ascending in omega.
  static NoiseSpectrum tabulated(std::vector<std::pair<double, double>> samples) {
    if (samples.size() < 2) throw std::invalid_argument("NoiseSpectrum: need >= 2 samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!std::isfinite(samples[i].first) || !std::isfinite(samples[i].second) ||
          samples[i].second < 0.0) {
        throw std::invalid_argument("NoiseSpectrum: samples must be finite with S >= 0");
      }
      if (i > 0 && !(samples[i].first > samples[i - 1].first)) {
        throw std::invalid_argument("NoiseSpectrum: omega samples must be ascending");
      }
    }
    NoiseSpectrum s;
    s.table_ = std::move(samples);
    return s;
  }

  /// Two-column whitespace-delimited text (omega rad/s, S), '#' comments.
  static NoiseSpectrum from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("NoiseSpectrum: cannot open " + path);
    std::vector<std::pair<double, double>> samples;
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      double w = 0.0, s = 0.0;
      if (ls >> w >> s) samples.emplace_back(w, s);
    }
    return tabulated(std::move(samples));
  }

  bool is_tabulated() const { return !table_.empty(); }
  const std::vector<Tone>& tones() const { return tones_; }
  const std::vector<std::pair<double, double>>& table() const { return table_; }

 private:
  NoiseSpectrum() = default;
  std::vector<Tone> tones_;
  std::vector<std::pair<double, double>> table_;
};

/// Overlap integral chi = sqrt(2 pi) |b|^2 / 2 * integral |F(w)|^2 S(w) dw.
/// The NV coherence is exp(-chi).  Delta tones evaluate |F|^2 in place;
/// broadened tones use Simpson quadrature over +-8 sigma; tabulated
/// spectra use the trapezoid rule on the given grid.
inline double coherence_decay(const TimeFilter& tf, const NoiseSpectrum& ns, double b) {
  double integral = 0.0;
  const auto f2 = [&tf](double w) { return std::norm(filter_fourier(tf, w)); };
  if (ns.is_tabulated()) {
    const auto& tab = ns.table();
    double prev_w = tab.front().first;
    double prev_v = f2(prev_w) * tab.front().second;
    for (std::size_t i = 1; i < tab.size(); ++i) {
      const double w = tab[i].first;
      const double v = f2(w) * tab[i].second;
      integral += 0.5 * (prev_v + v) * (w - prev_w);
      prev_w = w;
      prev_v = v;
    }
  } else {
    for (const auto& tone : ns.tones()) {
      const double w0 = kTwoPi * tone.frequency_hz;
      const double weight = tone.amplitude * tone.amplitude;
      if (tone.linewidth_hz <= 0.0) {
        // S = weight/2 [delta(w - w0) + delta(w + w0)]; |F(-w)| = |F(w)|.
        integral += weight * f2(w0);
      } else {
        const double sigma = kTwoPi * tone.linewidth_hz;
        const int n = 120;  // Simpson panels over +-8 sigma
        const double lo = w0 - 8.0 * sigma, hi = w0 + 8.0 * sigma;
        const double h = (hi - lo) / n;
        double s = 0.0;
        for (int i = 0; i <= n; ++i) {
          const double w = lo + h * i;
          const double g = std::exp(-0.5 * (w - w0) * (w - w0) / (sigma * sigma)) /
                           (sigma * std::sqrt(kTwoPi));
          const double coeff = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
          s += coeff * g * f2(w);
        }
        integral += weight * s * h / 3.0;
      }
    }
  }
  if (!std::isfinite(integral)) throw model_error("coherence_decay: integration failure");
  return std::sqrt(kTwoPi) * b * b / 2.0 * integral;
}

// ---------------------------------------------------------------------------
// Q-value figures of merit and sampling limits
// ---------------------------------------------------------------------------

struct QReport {
  double f = 0.0;             ///< sensing peak frequency, Hz
  double delta_f = 0.0;       ///< resolvable width f / q_supersample, Hz
  double q_bare = 0.0;        ///< 1 / (2 f delta_tau)
  double q_supersample = 0.0; ///< sqrt(2) cos(alpha/2) / sin(2 pi^2 / (T2 omega_L))
  double q_boost = 0.0;       ///< q_supersample / q_bare
};

inline QReport q_metrics(double f_hz, double delta_tau, double t2, double omega_L,
                         double alpha) {
  if (!(f_hz > 0.0) || !(delta_tau > 0.0) || !(t2 > 0.0) || !(omega_L > 0.0)) {
    throw std::invalid_argument("q_metrics: inputs must be > 0");
  }
  const double arg = 2.0 * kPi * kPi / (t2 * omega_L);
  if (arg >= kPi) throw model_error("q_metrics: undefined Q (T2 too short)");
  QReport r;
  r.f = f_hz;
  r.q_bare = 1.0 / (f_hz * 2.0 * delta_tau);
  r.q_supersample = std::sqrt(2.0) * std::cos(alpha / 2.0) / std::sin(arg);
  r.q_boost = r.q_supersample / r.q_bare;
  r.delta_f = f_hz / r.q_supersample;
  return r;
}

struct SamplingLimits {
  long n_max = 0;                ///< nearest-integer cycle bound
  double n_max_real = 0.0;       ///< pi / sqrt[(w dt)^2 (1+cos a)^2 + sin^2 a]
  double delta_tau_required = 0.0;  ///< seconds
};

/// Finite-sampling bounds.  The timing-resolution requirement follows the
/// ordinary-frequency evaluation
///   delta_tau <= sin(2 pi^2 / (T2 f_L)) / (2 sqrt(2) f_L cos(alpha/2)),
/// f_L = omega_L / 2 pi, which is the convention behind the published
/// picosecond-scale reference values.
inline SamplingLimits sampling_limits(const SpinCoupling& c, double delta_tau, double t2) {
  if (!(delta_tau > 0.0) || !(t2 > 0.0)) {
    throw std::invalid_argument("sampling_limits: delta_tau and t2 must be > 0");
  }
  const double alpha = c.tilt_alpha();
  const double opc = 1.0 + std::cos(alpha);
  const double x = c.omega_L * delta_tau;
  SamplingLimits out;
  out.n_max_real = kPi / std::sqrt(x * x * opc * opc + std::sin(alpha) * std::sin(alpha));
  out.n_max = std::lround(out.n_max_real);
  const double f_l = c.omega_L / kTwoPi;
  out.delta_tau_required =
      std::sin(2.0 * kPi * kPi / (t2 * f_l)) / (2.0 * std::sqrt(2.0) * f_l * std::cos(alpha / 2.0));
  return out;
}

/// Contrast lost to a sampling offset delta0 from the exact peak:
/// eps = (N alpha)^2 delta0^2 (2 - alpha^2/2)^2 / 4.
inline double sampling_contrast_loss(const SpinCoupling& c, long n_blocks, double delta0) {
  const double na = static_cast<double>(n_blocks) * c.tilt_alpha();
  const double k = 2.0 - c.tilt_alpha() * c.tilt_alpha() / 2.0;
  return 0.25 * na * na * delta0 * delta0 * k * k;
}

// ---------------------------------------------------------------------------
// Reference data: common pulse instruments
// ---------------------------------------------------------------------------

struct InstrumentRecord {
  const char* instrument;
  const char* manufacturer;
  double delta_tau_s;
  double jitter_s;
};

inline constexpr std::array<InstrumentRecord, 4> kInstrumentTable = {{
    {"AWG70001A", "Tektronix", 20e-12, 250e-15},
    {"AWG5002C", "Tektronix", 1.76e-9, 5.0e-12},
    {"WX1284C", "Tabor", 1e-9, 2.0e-12},
    {"PulseBlaster ESR-PRO", "SpinCore", 2.0e-9, 100e-15},
}};

/// 1H Larmor frequency at 0.5 T (gamma_p / 2 pi = 42.5774785 MHz/T).
inline constexpr double kProtonLarmorHzAtHalfTesla = 42.577478461e6 * 0.5;

inline double instrument_bare_q(const InstrumentRecord& rec,
                                double f_hz = kProtonLarmorHzAtHalfTesla) {
  return 1.0 / (f_hz * 2.0 * rec.delta_tau_s);
}

// ---------------------------------------------------------------------------
// Sweep helpers
// ---------------------------------------------------------------------------

/// Count the distinct dips of a sweep: strict interior minima, with two
/// neighbouring minima counted apart only when some point between them
/// exceeds both by at least 3x the numerical noise floor.
inline int resolved_minima_count(const std::vector<double>& y, double noise_floor) {
  std::vector<std::size_t> minima;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] < y[i - 1] && y[i] < y[i + 1]) minima.push_back(i);
  }
  if (minima.empty()) return 0;
  int count = 1;
  for (std::size_t m = 1; m < minima.size(); ++m) {
    double peak = -1e300;
    for (std::size_t i = minima[m - 1]; i <= minima[m]; ++i) peak = std::max(peak, y[i]);
    if (peak >= std::max(y[minima[m - 1]], y[minima[m]]) + 3.0 * noise_floor) ++count;
  }
  return count;
}

/// Default numerical noise floor of a deterministic sweep.
inline double sweep_noise_floor(const std::vector<double>& y) {
  double lo = y.front(), hi = y.front();
  for (double v : y) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return 64.0 * 2.220446049250313e-16 * std::max(hi - lo, 1e-30);
}

}  // namespace qinterp

#pragma once

// Quantum-interpolation planning: orderings of the two hardware-timed
// blocks U0 (interval tau_k) and U1 (interval tau_{k+1}) that realize a
// supersample fraction q/(p+q) of the timing interval, the trapezium
// filter-error metric used to score them, trace-norm plan fidelities, and
// a brute-force optimality certifier for small block counts.
//
// All fraction arithmetic is exact (integer accumulator in units of
// 1/(p+q)), so the construction loop terminates by equality, never by
// tolerance.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spin_model.hpp"

namespace qinterp {

/// Raised when a brute-force enumeration is refused (too many words).
struct enumeration_refused : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Exact rational in [0, 1], stored reduced with den > 0.
struct Fraction {
  long long num = 0;
  long long den = 1;

  Fraction() = default;
  Fraction(long long n, long long d) {
    if (d <= 0) throw std::invalid_argument("Fraction: denominator must be > 0");
    if (n < 0 || n > d) throw std::invalid_argument("Fraction: value must lie in [0, 1]");
    const long long g = std::gcd(n, d);
    num = n / g;
    den = d / g;
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Fraction& o) const { return num == o.num && den == o.den; }

  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

  /// Parse "q/d" (or a bare integer 0 or 1).
  static Fraction parse(const std::string& s) {
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return Fraction(std::stoll(s), 1);
      return Fraction(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("Fraction: cannot parse '" + s + "'");
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("Fraction: out of range '" + s + "'");
    }
  }
};

enum class Block : std::uint8_t { U0 = 0, U1 = 1 };

using Word = std::vector<Block>;

inline std::string word_to_string(const Word& w) {
  std::string s;
  s.reserve(w.size());
  for (Block b : w) s.push_back(b == Block::U0 ? '0' : '1');
  return s;
}

inline Word word_from_string(const std::string& s) {
  Word w;
  w.reserve(s.size());
  for (char c : s) {
    if (c == '0') w.push_back(Block::U0);
    else if (c == '1') w.push_back(Block::U1);
    else throw std::invalid_argument("word string must be over {0,1}");
  }
  return w;
}

/// Ordered word over {U0, U1} realizing `fraction` with n_blocks blocks.
struct InterpolationPlan {
  Word word;
  Fraction fraction;

  int n_blocks() const { return static_cast<int>(word.size()); }
  long long u1_count() const {
    return std::count(word.begin(), word.end(), Block::U1);
  }
  long long u0_count() const { return n_blocks() - u1_count(); }

  /// Header "p q N" plus the 0/1 word, e.g. "5 3 8 01001010".
  std::string serialize() const {
    return std::to_string(u0_count()) + " " + std::to_string(u1_count()) + " " +
           std::to_string(n_blocks()) + " " + word_to_string(word);
  }

  static InterpolationPlan deserialize(const std::string& line) {
    long long p = 0, q = 0, n = 0;
    char buf[4096];
    if (std::sscanf(line.c_str(), "%lld %lld %lld %4095s", &p, &q, &n, buf) != 4) {
      throw std::invalid_argument("plan: cannot parse '" + line + "'");
    }
    InterpolationPlan plan;
    plan.word = word_from_string(buf);
    if (n != static_cast<long long>(plan.word.size()) || p + q != n ||
        q != std::count(plan.word.begin(), plan.word.end(), Block::U1)) {
      throw std::invalid_argument("plan: inconsistent header");
    }
    plan.fraction = Fraction(q, n);
    return plan;
  }
};

namespace detail {

inline void check_plan_args(const Fraction& f, int n_blocks) {
  if (n_blocks < 1) throw std::invalid_argument("plan: n_blocks must be >= 1");
  if (n_blocks % f.den != 0) {
    throw std::invalid_argument("plan: fraction " + f.str() + " times N = " +
                                std::to_string(n_blocks) + " is not integral");
  }
}

}  // namespace detail

/// Error-compensating construction: propagate an accumulator by the
/// fraction each step, emit U0 while |m| <= 1/2, otherwise emit U1 and
/// reflect (m -> m - 1); ties at |m| = 1/2 resolve to U0.  The base word
/// closes after exactly p+q steps (m returns to 0) and is cycled to
/// n_blocks.  The accumulator (equivalently the running deviation of the
/// realized total period from the ideal one) never leaves [-1/2, 1/2].
inline InterpolationPlan optimal_plan(const Fraction& f, int n_blocks) {
  detail::check_plan_args(f, n_blocks);
  Word base;
  long long acc = 0;  // accumulator in units of 1/den
  do {
    acc += f.num;
    if (2 * std::abs(acc) <= f.den) {
      base.push_back(Block::U0);
    } else {
      base.push_back(Block::U1);
      acc -= f.den;
    }
  } while (acc != 0);
  InterpolationPlan plan;
  plan.fraction = f;
  plan.word.reserve(n_blocks);
  for (int i = 0; i < n_blocks; ++i) plan.word.push_back(base[i % base.size()]);
  return plan;
}

/// Uncompensated grouping (U0^p U1^q) repeated N/(p+q) times.
inline InterpolationPlan naive_plan(const Fraction& f, int n_blocks) {
  detail::check_plan_args(f, n_blocks);
  InterpolationPlan plan;
  plan.fraction = f;
  plan.word.reserve(n_blocks);
  const long long p = f.den - f.num;
  for (int r = 0; r < n_blocks / f.den; ++r) {
    for (long long i = 0; i < p; ++i) plan.word.push_back(Block::U0);
    for (long long i = 0; i < f.num; ++i) plan.word.push_back(Block::U1);
  }
  return plan;
}

/// Hardware timing grid: resolution delta_tau, base index k (tau_k =
/// k * delta_tau), and offset delta0 of the base point from the sensing
/// peak in half-interval phase units (the convention shared with the
/// lineshape operations: a peak offset delta0 moves the block flip-angle
/// argument by 2*delta0).  Block angles are peak-anchored:
///   theta(tau_k) = pi + 2*delta0,  theta(tau_{k+1}) = pi + 2*delta0 + dtheta,
/// with dtheta = omega_L * delta_tau; k fixes absolute times only.
struct HardwareGrid {
  double delta_tau = 0.0;  ///< seconds, > 0
  long long k = 1;         ///< base grid index, >= 1
  double delta0 = 0.0;     ///< radians, half-interval phase

  HardwareGrid(double dt, long long k_idx, double d0 = 0.0)
      : delta_tau(dt), k(k_idx), delta0(d0) {
    if (!(delta_tau > 0.0)) throw std::invalid_argument("HardwareGrid: delta_tau must be > 0");
    if (k < 1) throw std::invalid_argument("HardwareGrid: k must be >= 1");
  }
};

/// Time-domain filter deviation of the plan from the ideal equal-length
/// filter, summed block by block.  With D_m the cumulative signed period
/// deviation after m blocks (D_0 = 0), each block contributes
///   |(-3 D_{m-1} + D_m)| / 4 + |(-D_{m-1} + 3 D_m)| / 4.
/// The inner sums are exact integers in units of delta_tau / den, so plans
/// with equal error compare equal to roundoff.  Result in seconds.
inline double trapezium_error(const InterpolationPlan& plan, const HardwareGrid& grid) {
  const long long den = plan.fraction.den;
  const long long num = plan.fraction.num;
  long long acc = 0;       // ideal-minus-realized, units of 4*delta_tau/den
  long long sum_units = 0; // block errors, units of delta_tau/den
  long long prev = 0;
  for (Block b : plan.word) {
    acc += num;
    if (b == Block::U1) acc -= den;
    const long long d = -acc;  // realized-minus-ideal
    sum_units += std::llabs(-3 * prev + d) + std::llabs(-prev + 3 * d);
    prev = d;
  }
  return static_cast<double>(sum_units) * grid.delta_tau / static_cast<double>(den);
}

/// Left-to-right composition of the word's blocks.
inline Rotation supersampled_propagator(const InterpolationPlan& plan, const Rotation& u0,
                                        const Rotation& u1) {
  Rotation r = plan.word.front() == Block::U0 ? u0 : u1;
  for (std::size_t i = 1; i < plan.word.size(); ++i) {
    r = compose(r, plan.word[i] == Block::U0 ? u0 : u1);
  }
  return r;
}

namespace detail {

/// Trace-norm fidelity of a word against the ideal propagator, minimized
/// over the two NV manifolds, at peak offset delta0 (half-interval phase).
inline double word_fidelity(const Word& word, const SpinCoupling& c, double dtheta,
                            double delta0, double target_fraction) {
  const double theta0 = kPi + 2.0 * delta0;
  const auto blk0 = block_propagators(c, theta0);
  const auto blk1 = block_propagators(c, theta0 + dtheta);
  const auto ideal_blk = block_propagators(c, theta0 + target_fraction * dtheta);
  const long n = static_cast<long>(word.size());
  double fmin = 1.0;
  for (int manifold = 0; manifold < 2; ++manifold) {
    const Rotation& a = manifold == 0 ? blk0.first : blk0.second;
    const Rotation& b = manifold == 0 ? blk1.first : blk1.second;
    Rotation w = word.front() == Block::U0 ? a : b;
    for (std::size_t i = 1; i < word.size(); ++i) {
      w = compose(w, word[i] == Block::U0 ? a : b);
    }
    const Rotation ideal = power(manifold == 0 ? ideal_blk.first : ideal_blk.second, n);
    fmin = std::min(fmin, std::abs(overlap_trace(w, ideal)));
  }
  return fmin;
}

}  // namespace detail

/// min over the two manifolds of |Tr(U_word U_ideal^dag)| / 2 with the
/// target at theta* = pi + 2*delta0 + fraction * dtheta.
inline double plan_fidelity(const InterpolationPlan& plan, const HardwareGrid& grid,
                            const SpinCoupling& c) {
  const double dtheta = c.omega_L * grid.delta_tau;
  return detail::word_fidelity(plan.word, c, dtheta, grid.delta0, plan.fraction.value());
}

struct BruteForceEntry {
  std::string word;
  double mean_infidelity = 0.0;
};

struct BruteForceResult {
  std::vector<std::string> best_words;  ///< minimal-infidelity set
  double best_infidelity = 0.0;
  std::vector<BruteForceEntry> table;   ///< every word, enumeration order

  bool contains_best(const std::string& w) const {
    return std::find(best_words.begin(), best_words.end(), w) != best_words.end();
  }
};

inline constexpr int kBruteForceMaxBlocks = 12;

/// Score every word with the given (p, q) by its mean infidelity over a
/// symmetric 9-point delta0 grid spanning [-2*dtheta, 2*dtheta] and return
/// the argmin set (ties within 1e-12 + 1e-9 relative).
inline BruteForceResult brute_force_best_plan(const Fraction& f, int n_blocks,
                                              const HardwareGrid& grid, const SpinCoupling& c,
                                              int delta0_points = 9) {
  detail::check_plan_args(f, n_blocks);
  if (n_blocks > kBruteForceMaxBlocks) {
    throw enumeration_refused("brute force refused for N > " +
                              std::to_string(kBruteForceMaxBlocks));
  }
  if (delta0_points < 9) delta0_points = 9;
  const double dtheta = c.omega_L * grid.delta_tau;
  std::vector<double> offsets(delta0_points);
  for (int i = 0; i < delta0_points; ++i) {
    offsets[i] = -2.0 * dtheta + 4.0 * dtheta * i / (delta0_points - 1);
  }

  const long long q = f.num * (n_blocks / f.den);
  Word word(n_blocks, Block::U0);
  for (int i = 0; i < q; ++i) word[n_blocks - 1 - i] = Block::U1;
  std::sort(word.begin(), word.end());  // lexicographically first arrangement

  BruteForceResult out;
  out.best_infidelity = 2.0;
  do {
    double mean = 0.0;
    for (double d0 : offsets) {
      mean += 1.0 - detail::word_fidelity(word, c, dtheta, d0 + grid.delta0, f.value());
    }
    mean /= offsets.size();
    out.table.push_back({word_to_string(word), mean});
    out.best_infidelity = std::min(out.best_infidelity, mean);
  } while (std::next_permutation(word.begin(), word.end()));

  const double tol = 1e-12 + 1e-9 * out.best_infidelity;
  for (const auto& e : out.table) {
    if (e.mean_infidelity <= out.best_infidelity + tol) out.best_words.push_back(e.word);
  }
  return out;
}

/// Zeroth-order product estimate: add the minimal rotation vectors of the
/// two factors and re-exponentiate, ignoring all commutators.
inline Rotation bch_zeroth_order(const Rotation& a, const Rotation& b) {
  const auto log_map = [](const Rotation& r) -> Vec3 {
    const double g = r.geodesic_angle();
    return (r.theta() <= kPi ? g : -g) * r.axis();
  };
  const Vec3 v = log_map(a) + log_map(b);
  const double n = norm(v);
  if (n < kDegenerateAxisNorm) return Rotation::identity();
  return Rotation(n, (1.0 / n) * v);
}

}  // namespace qinterp

#pragma once

// Configuration input, instrument-ready pulse tables and deterministic
// CSV/JSON result files for the command-line front end.
//
// Config files are flat "key = value" text (INI-style; '#' and ';' start
// comments, [section] lines are ignored).  All outputs embed a hash of the
// config so identical configs can be recognized from the artifacts; no
// timestamps or other run-varying data are ever written.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "filter.hpp"
#include "planner.hpp"
#include "spin_model.hpp"

namespace qinterp {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

class Config {
 public:
  static Config from_text(const std::string& text) {
    Config cfg;
    cfg.raw_ = text;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto comment = line.find_first_of("#;");
      if (comment != std::string::npos) line.erase(comment);
      const std::string trimmed = trim(line);
      if (trimmed.empty() || trimmed.front() == '[') continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw config_error("config: expected key = value, got '" + trimmed + "'");
      }
      const std::string key = trim(trimmed.substr(0, eq));
      std::string value = trim(trimmed.substr(eq + 1));
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        value = value.substr(1, value.size() - 2);
      }
      if (key.empty()) throw config_error("config: empty key");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static Config from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw config_error("config: missing key '" + key + "'");
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key) const { return parse_double(key, get_string(key)); }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  long get_int(const std::string& key) const {
    const std::string v = get_string(key);
    try {
      std::size_t pos = 0;
      const long out = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw config_error("config: key '" + key + "' is not an integer: '" + v + "'");
    }
  }

  long get_int(const std::string& key, long fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  const std::string& raw_text() const { return raw_; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  double parse_double(const std::string& key, const std::string& v) const {
    try {
      std::size_t pos = 0;
      const double out = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw config_error("config: key '" + key + "' is not a number: '" + v + "'");
    }
  }

  std::string raw_;
  std::map<std::string, std::string> values_;
};

/// FNV-1a 64-bit over the config text (plus the output format so that a
/// format switch is visible in the artifact), rendered as 16 hex digits.
inline std::string config_hash(const std::string& config_text, const std::string& format) {
  std::uint64_t h = 1469598103934665603ull;
  const auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  mix(config_text);
  mix("|");
  mix(format);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Units and model assembly from config keys
// ---------------------------------------------------------------------------

/// Timing resolution from `delta_tau_ns` or `delta_tau_ps`, in seconds.
inline double config_delta_tau(const Config& cfg) {
  if (cfg.has("delta_tau_ps")) return cfg.get_double("delta_tau_ps") * 1e-12;
  return cfg.get_double("delta_tau_ns") * 1e-9;
}

/// Spin coupling from config: `larmor_hz` plus either `alpha_rad`
/// (equal-norm synthetic coupling) or hyperfine components `a_hz`, `b_hz`
/// and optional `c_hz`.
inline SpinCoupling config_coupling(const Config& cfg) {
  const double omega = kTwoPi * cfg.get_double("larmor_hz");
  try {
    if (cfg.has("alpha_rad")) return SpinCoupling::from_tilt(omega, cfg.get_double("alpha_rad"));
    return SpinCoupling(omega, kTwoPi * cfg.get_double("a_hz", 0.0),
                        kTwoPi * cfg.get_double("b_hz", 0.0), kTwoPi * cfg.get_double("c_hz", 0.0));
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("config: ") + e.what());
  }
}

inline SequenceFamily config_family(const Config& cfg, const std::string& fallback = "CPMG") {
  const std::string name = cfg.get_string("family", fallback);
  if (name == "CPMG" || name == "cpmg") return SequenceFamily::CPMG;
  if (name == "XY8" || name == "xy8") return SequenceFamily::XY8;
  if (name == "XY16" || name == "xy16") return SequenceFamily::XY16;
  throw config_error("config: unknown family '" + name + "'");
}

// ---------------------------------------------------------------------------
// Pulse tables
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& family_phase_cycle(SequenceFamily f) {
  static const std::vector<std::string> cpmg = {"Y", "Y"};
  static const std::vector<std::string> xy8 = {"X", "Y", "X", "Y", "Y", "X", "Y", "X"};
  // XY16 extends XY8 by the same pattern with inverted phases.
  static const std::vector<std::string> xy16 = {"X",  "Y",  "X",  "Y",  "Y",  "X",  "Y",  "X",
                                                "-X", "-Y", "-X", "-Y", "-Y", "-X", "-Y", "-X"};
  switch (f) {
    case SequenceFamily::CPMG: return cpmg;
    case SequenceFamily::XY8: return xy8;
    case SequenceFamily::XY16: return xy16;
  }
  throw std::invalid_argument("unknown sequence family");
}

struct PulseRow {
  int index = 0;
  double center_time_ns = 0.0;
  std::string phase;
};

/// Instrument-ready pulse listing for an interpolation plan: two pulses
/// per block at tau and 3*tau of each 4*tau block, phases cycling through
/// the family pattern by global pulse index.
struct PulseTable {
  SequenceFamily family = SequenceFamily::CPMG;
  InterpolationPlan plan;
  double delta_tau_s = 0.0;
  long long k = 1;
  double total_time_ns = 0.0;
  std::vector<PulseRow> rows;

  static PulseTable build(const InterpolationPlan& plan, const HardwareGrid& grid,
                          SequenceFamily family) {
    PulseTable out;
    out.family = family;
    out.plan = plan;
    out.delta_tau_s = grid.delta_tau;
    out.k = grid.k;
    const auto& phases = family_phase_cycle(family);
    double t = 0.0;
    int idx = 0;
    for (Block b : plan.word) {
      const double tau = (static_cast<double>(grid.k) + (b == Block::U1 ? 1.0 : 0.0)) *
                         grid.delta_tau;
      for (double off : {tau, 3.0 * tau}) {
        out.rows.push_back({idx, (t + off) * 1e9, phases[idx % phases.size()]});
        ++idx;
      }
      t += 4.0 * tau;
    }
    out.total_time_ns = t * 1e9;
    return out;
  }
};

inline void write_pulse_table_csv(const PulseTable& tbl, const std::string& hash,
                                  std::ostream& os, double trapezium_err_s,
                                  double fidelity) {
  char buf[128];
  os << "# schema: 1\n";
  os << "# command: plan\n";
  os << "# config_hash: " << hash << "\n";
  os << "# family: " << family_name(tbl.family) << "\n";
  os << "# fraction: " << tbl.plan.fraction.str() << "\n";
  os << "# plan: " << tbl.plan.serialize() << "\n";
  std::snprintf(buf, sizeof(buf), "%.6f", tbl.delta_tau_s * 1e9);
  os << "# delta_tau_ns: " << buf << "\n";
  os << "# k: " << tbl.k << "\n";
  std::snprintf(buf, sizeof(buf), "%.3f", tbl.total_time_ns);
  os << "# total_time_ns: " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.6f", trapezium_err_s * 1e9);
  os << "# trapezium_error_ns: " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.12g", fidelity);
  os << "# plan_fidelity: " << buf << "\n";
  os << "pulse_index,center_time_ns,phase\n";
  for (const auto& r : tbl.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.3f,%s", r.index, r.center_time_ns, r.phase.c_str());
    os << buf << "\n";
  }
}

/// Re-ingest the header of a pulse-table CSV ("# key: value" lines).
inline std::map<std::string, std::string> read_table_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '#') break;
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = line.substr(1, colon - 1);
    std::string value = line.substr(colon + 1);
    const auto strip = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      s = (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
    };
    strip(key);
    strip(value);
    out[key] = value;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweep results
// ---------------------------------------------------------------------------

struct SweepResult {
  std::string x_label;
  std::vector<double> x;
  std::vector<double> signal;
  std::vector<std::pair<std::string, std::string>> meta;  ///< ordered key/value
};

inline void write_sweep_csv(const SweepResult& r, const std::string& command,
                            const std::string& hash, std::ostream& os) {
  os << "# schema: 1\n";
  os << "# command: " << command << "\n";
  os << "# config_hash: " << hash << "\n";
  for (const auto& [k, v] : r.meta) os << "# " << k << ": " << v << "\n";
  os << r.x_label << ",signal\n";
  char buf[80];
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g", r.x[i], r.signal[i]);
    os << buf << "\n";
  }
}

inline void write_sweep_json(const SweepResult& r, const std::string& command,
                             const std::string& hash, std::ostream& os) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["command"] = command;
  j["config_hash"] = hash;
  for (const auto& [k, v] : r.meta) j["meta"][k] = v;
  j["x_label"] = r.x_label;
  j["x"] = r.x;
  j["signal"] = r.signal;
  os << j.dump(2) << "\n";
}

}  // namespace qinterp

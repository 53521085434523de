// Command-line front end: plan supersampling sequences, run sensing and
// magnetometry sweeps, certify plan optimality by brute force, and report
// Q-value figures of merit.
//
// Exit codes: 0 success, 2 configuration error, 3 model error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qinterp/filter.hpp"
#include "qinterp/io.hpp"
#include "qinterp/planner.hpp"
#include "qinterp/spin_model.hpp"

namespace {

using namespace qinterp;

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  std::string format;  // csv | json
  long seed = 0;       // reserved; all computation is deterministic
};

void add_common(CLI::App* cmd, CommonArgs& args, const std::string& default_format) {
  cmd->add_option("--config", args.config_path, "config file (key = value)")->required();
  cmd->add_option("--out", args.out_path, "output path");
  args.format = default_format;
  cmd->add_option("--format", args.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", args.seed, "reserved, unused");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw config_error("cannot write " + path);
  return os;
}

std::vector<double> linspace(double lo, double hi, long n) {
  if (n < 2) throw config_error("sweep needs at least 2 points");
  std::vector<double> x(n);
  for (long i = 0; i < n; ++i) x[i] = lo + (hi - lo) * i / static_cast<double>(n - 1);
  return x;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

HardwareGrid config_grid(const Config& cfg) {
  return HardwareGrid(config_delta_tau(cfg), cfg.get_int("k", 1),
                      cfg.get_double("delta0_rad", 0.0));
}

// --- plan ------------------------------------------------------------------

int cmd_plan(const CommonArgs& args) {
  const Config cfg = Config::from_file(args.config_path);
  const std::string hash = config_hash(cfg.raw_text(), args.format);
  const Fraction f = Fraction::parse(cfg.get_string("fraction"));
  const int n_blocks = static_cast<int>(cfg.get_int("n_blocks"));
  InterpolationPlan plan;
  try {
    plan = optimal_plan(f, n_blocks);
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  const HardwareGrid grid = config_grid(cfg);
  const SpinCoupling coupling = config_coupling(cfg);
  const double err = trapezium_error(plan, grid);
  const double fid = plan_fidelity(plan, grid, coupling);
  const PulseTable table = PulseTable::build(plan, grid, config_family(cfg, "XY8"));

  const std::string out = args.out_path.empty() ? "plan_out." + args.format : args.out_path;
  auto os = open_out(out);
  if (args.format == "csv") {
    write_pulse_table_csv(table, hash, os, err, fid);
  } else {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["command"] = "plan";
    j["config_hash"] = hash;
    j["family"] = family_name(table.family);
    j["fraction"] = plan.fraction.str();
    j["plan"] = plan.serialize();
    j["delta_tau_ns"] = grid.delta_tau * 1e9;
    j["k"] = grid.k;
    j["total_time_ns"] = table.total_time_ns;
    j["trapezium_error_ns"] = err * 1e9;
    j["plan_fidelity"] = fid;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : table.rows) {
      rows.push_back({{"pulse_index", r.index},
                      {"center_time_ns", r.center_time_ns},
                      {"phase", r.phase}});
    }
    j["pulses"] = rows;
    os << j.dump(2) << "\n";
  }
  std::cout << "trapezium_error_ns=" << fmt(err * 1e9) << " plan_fidelity=" << fmt(fid)
            << " out=" << out << "\n";
  return 0;
}

// --- simulate ---------------------------------------------------------------

SweepResult simulate_spin(const Config& cfg) {
  const SpinCoupling c = config_coupling(cfg);
  const SequenceFamily family = config_family(cfg);
  const int n_cycles = static_cast<int>(cfg.get_int("n_cycles"));
  SweepResult r;
  r.meta.emplace_back("family", family_name(family));
  r.meta.emplace_back("n_cycles", std::to_string(n_cycles));
  r.meta.emplace_back("larmor_hz", fmt(c.omega_L / kTwoPi));
  r.meta.emplace_back("tilt_alpha_rad", fmt(c.tilt_alpha()));
  if (cfg.has("tau_min_ns")) {
    r.x_label = "tau_ns";
    r.x = linspace(cfg.get_double("tau_min_ns"), cfg.get_double("tau_max_ns"),
                   cfg.get_int("points"));
    for (double tau_ns : r.x) {
      r.signal.push_back(sensing_signal(c, SequenceSpec(n_cycles, tau_ns * 1e-9, family)));
    }
  } else {
    // delta sweep: half-interval phase deviation from the sensing peak
    r.x_label = "delta_rad";
    r.x = linspace(cfg.get_double("delta_min_rad"), cfg.get_double("delta_max_rad"),
                   cfg.get_int("points"));
    const long blocks = SequenceSpec(n_cycles, 1e-9, family).block_count();
    for (double d : r.x) r.signal.push_back(sensing_signal_blocks(c, blocks, kPi + 2.0 * d));
  }
  return r;
}

SweepResult simulate_nitrogen(const Config& cfg) {
  Nitrogen14Model m;
  m.Bz_gauss = cfg.get_double("bz_gauss");
  m.Bperp_gauss = cfg.get_double("bperp_gauss");
  const int n_cycles = static_cast<int>(cfg.get_int("n_cycles"));
  SweepResult r;
  r.x_label = "delta_rad";
  r.meta.emplace_back("family", "XY8");
  r.meta.emplace_back("n_cycles", std::to_string(n_cycles));
  r.meta.emplace_back("bz_gauss", fmt(m.Bz_gauss));
  r.meta.emplace_back("bperp_gauss", fmt(m.Bperp_gauss));
  r.meta.emplace_back("tilt_alpha_rad", fmt(m.tilt_alpha()));
  r.x = linspace(cfg.get_double("delta_min_rad"), cfg.get_double("delta_max_rad"),
                 cfg.get_int("points"));
  for (double d : r.x) r.signal.push_back(nitrogen14_signal(m, n_cycles, d));
  return r;
}

std::vector<Tone> parse_tones(const std::string& spec) {
  std::vector<Tone> tones;
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    Tone t;
    const int got = std::sscanf(item.c_str(), "%lf:%lf:%lf", &t.frequency_hz, &t.amplitude,
                                &t.linewidth_hz);
    if (got < 2) throw config_error("tones: expected f_hz:amplitude[:linewidth_hz]");
    if (got < 3) t.linewidth_hz = 0.0;
    tones.push_back(t);
  }
  if (tones.empty()) throw config_error("tones: empty list");
  return tones;
}

SweepResult simulate_ac(const Config& cfg) {
  const int n_pulses = static_cast<int>(cfg.get_int("n_pulses"));
  const double b = cfg.get_double("b", 1.0);
  const auto tones = parse_tones(cfg.get_string("tones"));
  const NoiseSpectrum ns = cfg.has("spectrum_file")
                               ? NoiseSpectrum::from_file(cfg.get_string("spectrum_file"))
                               : NoiseSpectrum::from_tones(tones);
  SweepResult r;
  r.x_label = "spacing_ns";
  r.meta.emplace_back("n_pulses", std::to_string(n_pulses));
  r.meta.emplace_back("b", fmt(b));
  r.meta.emplace_back("tones", cfg.get_string("tones"));
  r.x = linspace(cfg.get_double("spacing_min_ns"), cfg.get_double("spacing_max_ns"),
                 cfg.get_int("points"));
  for (double s_ns : r.x) {
    const TimeFilter tf = uniform_filter(n_pulses, s_ns * 1e-9);
    r.signal.push_back(std::exp(-coherence_decay(tf, ns, b)));
  }
  return r;
}

SweepResult simulate_interp(const Config& cfg) {
  const SpinCoupling c = config_coupling(cfg);
  const HardwareGrid base_grid = config_grid(cfg);
  InterpolationPlan plan;
  if (cfg.has("plan_file")) {
    const auto header = read_table_header(cfg.get_string("plan_file"));
    const auto it = header.find("plan");
    if (it == header.end()) throw config_error("plan_file: missing '# plan:' header");
    plan = InterpolationPlan::deserialize(it->second);
  } else {
    try {
      plan = optimal_plan(Fraction::parse(cfg.get_string("fraction")),
                          static_cast<int>(cfg.get_int("n_blocks")));
    } catch (const std::invalid_argument& e) {
      throw config_error(e.what());
    }
  }
  const double dtheta = c.omega_L * base_grid.delta_tau;
  SweepResult r;
  r.x_label = "delta0_rad";
  r.meta.emplace_back("fraction", plan.fraction.str());
  r.meta.emplace_back("plan", plan.serialize());
  r.meta.emplace_back("delta_tau_ns", fmt(base_grid.delta_tau * 1e9));
  r.meta.emplace_back("larmor_hz", fmt(c.omega_L / kTwoPi));
  r.meta.emplace_back("tilt_alpha_rad", fmt(c.tilt_alpha()));
  r.x = linspace(cfg.get_double("delta0_min_rad", -2.0 * dtheta),
                 cfg.get_double("delta0_max_rad", 2.0 * dtheta), cfg.get_int("points"));
  for (double d0 : r.x) {
    const auto blk0 = block_propagators(c, kPi + 2.0 * d0);
    const auto blk1 = block_propagators(c, kPi + 2.0 * d0 + dtheta);
    const Rotation w0 = supersampled_propagator(plan, blk0.first, blk1.first);
    const Rotation w1 = supersampled_propagator(plan, blk0.second, blk1.second);
    r.signal.push_back(overlap_signal(w0, w1));
  }
  return r;
}

int cmd_simulate(const CommonArgs& args) {
  const Config cfg = Config::from_file(args.config_path);
  const std::string hash = config_hash(cfg.raw_text(), args.format);
  const std::string mode = cfg.get_string("mode");
  SweepResult r;
  if (mode == "spin") r = simulate_spin(cfg);
  else if (mode == "nitrogen") r = simulate_nitrogen(cfg);
  else if (mode == "ac") r = simulate_ac(cfg);
  else if (mode == "interp") r = simulate_interp(cfg);
  else throw config_error("simulate: unknown mode '" + mode + "'");

  const std::string out = args.out_path.empty() ? "simulate_out." + args.format : args.out_path;
  auto os = open_out(out);
  if (args.format == "csv") write_sweep_csv(r, "simulate", hash, os);
  else write_sweep_json(r, "simulate", hash, os);
  std::cout << "points=" << r.x.size() << " out=" << out << "\n";
  return 0;
}

// --- certify -----------------------------------------------------------------

int cmd_certify(const CommonArgs& args) {
  const Config cfg = Config::from_file(args.config_path);
  const std::string hash = config_hash(cfg.raw_text(), args.format);
  const int n_blocks = static_cast<int>(cfg.get_int("n_blocks"));
  const bool detail = cfg.get_int("detail", 0) != 0;
  const SpinCoupling c = config_coupling(cfg);
  const HardwareGrid grid = config_grid(cfg);

  struct Row {
    std::string fraction;
    std::string verdict;
    std::string optimal_word;
    double optimal_infidelity;
    double best_infidelity;
    std::size_t words_scored;
  };
  std::vector<Row> rows;
  std::vector<std::pair<std::string, BruteForceResult>> tables;
  for (int j = 0; j <= n_blocks; ++j) {
    const Fraction f(j, n_blocks);
    InterpolationPlan plan;
    BruteForceResult bf;
    try {
      plan = optimal_plan(f, n_blocks);
      bf = brute_force_best_plan(f, n_blocks, grid, c);
    } catch (const enumeration_refused& e) {
      throw config_error(e.what());
    }
    const std::string w = word_to_string(plan.word);
    double plan_inf = 0.0;
    for (const auto& e : bf.table) {
      if (e.word == w) plan_inf = e.mean_infidelity;
    }
    std::string verdict = "mismatched";
    if (bf.contains_best(w)) verdict = bf.best_words.size() == 1 ? "matched" : "tied";
    rows.push_back({f.str(), verdict, w, plan_inf, bf.best_infidelity, bf.table.size()});
    if (detail) tables.emplace_back(f.str(), std::move(bf));
  }

  const std::string out = args.out_path.empty() ? "certify_out." + args.format : args.out_path;
  auto os = open_out(out);
  char buf[160];
  if (args.format == "csv") {
    os << "# schema: 1\n# command: certify\n# config_hash: " << hash << "\n";
    os << "# n_blocks: " << n_blocks << "\n";
    os << "fraction,verdict,optimal_word,optimal_infidelity,best_infidelity,words_scored\n";
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.12g,%.12g,%zu", r.fraction.c_str(),
                    r.verdict.c_str(), r.optimal_word.c_str(), r.optimal_infidelity,
                    r.best_infidelity, r.words_scored);
      os << buf << "\n";
    }
    if (detail) {
      for (const auto& [frac, bf] : tables) {
        os << "# table: " << frac << "\n";
        for (const auto& e : bf.table) {
          std::snprintf(buf, sizeof(buf), "%s,%s,%.12g", frac.c_str(), e.word.c_str(),
                        e.mean_infidelity);
          os << buf << "\n";
        }
      }
    }
  } else {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["command"] = "certify";
    j["config_hash"] = hash;
    j["n_blocks"] = n_blocks;
    nlohmann::ordered_json verdicts = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      verdicts.push_back({{"fraction", r.fraction},
                          {"verdict", r.verdict},
                          {"optimal_word", r.optimal_word},
                          {"optimal_infidelity", r.optimal_infidelity},
                          {"best_infidelity", r.best_infidelity},
                          {"words_scored", r.words_scored}});
    }
    j["fractions"] = verdicts;
    if (detail) {
      nlohmann::ordered_json tb;
      for (const auto& [frac, bf] : tables) {
        nlohmann::ordered_json entries = nlohmann::ordered_json::array();
        for (const auto& e : bf.table) entries.push_back({{"word", e.word},
                                                          {"infidelity", e.mean_infidelity}});
        tb[frac] = entries;
      }
      j["tables"] = tb;
    }
    os << j.dump(2) << "\n";
  }
  int mismatched = 0;
  for (const auto& r : rows) mismatched += r.verdict == "mismatched" ? 1 : 0;
  std::cout << "fractions=" << rows.size() << " mismatched=" << mismatched << " out=" << out
            << "\n";
  return 0;
}

// --- qvalue ------------------------------------------------------------------

int cmd_qvalue(const CommonArgs& args) {
  const Config cfg = Config::from_file(args.config_path);
  const std::string hash = config_hash(cfg.raw_text(), args.format);
  const QReport rep =
      q_metrics(cfg.get_double("f_hz"), config_delta_tau(cfg), cfg.get_double("t2_s"),
                kTwoPi * cfg.get_double("larmor_hz"), cfg.get_double("alpha_rad", 0.0));

  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["command"] = "qvalue";
  j["config_hash"] = hash;
  j["f_hz"] = rep.f;
  j["delta_f_hz"] = rep.delta_f;
  j["q_bare"] = rep.q_bare;
  j["q_supersample"] = rep.q_supersample;
  j["q_boost"] = rep.q_boost;
  if (cfg.get_int("include_reference", 0) != 0) {
    nlohmann::ordered_json tbl = nlohmann::ordered_json::array();
    for (const auto& rec : kInstrumentTable) {
      tbl.push_back({{"instrument", rec.instrument},
                     {"manufacturer", rec.manufacturer},
                     {"delta_tau_ns", rec.delta_tau_s * 1e9},
                     {"jitter_ps", rec.jitter_s * 1e12},
                     {"bare_q_1h_0p5t", instrument_bare_q(rec)}});
    }
    j["reference_instruments"] = tbl;
  }
  const std::string out = args.out_path.empty() ? "qvalue_out.json" : args.out_path;
  auto os = open_out(out);
  os << j.dump(2) << "\n";
  std::cout << "q_bare=" << fmt(rep.q_bare) << " q_supersample=" << fmt(rep.q_supersample)
            << " q_boost=" << fmt(rep.q_boost) << " out=" << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"supersampled dynamical-decoupling planner and sensing simulator"};
  app.require_subcommand(1);

  CommonArgs plan_args, sim_args, cert_args, q_args;
  CLI::App* plan = app.add_subcommand("plan", "export an optimal-plan pulse table");
  add_common(plan, plan_args, "csv");
  CLI::App* sim = app.add_subcommand("simulate", "run a sensing or magnetometry sweep");
  add_common(sim, sim_args, "csv");
  CLI::App* cert = app.add_subcommand("certify", "brute-force certification of plan optimality");
  add_common(cert, cert_args, "csv");
  CLI::App* qv = app.add_subcommand("qvalue", "Q-value figures of merit");
  add_common(qv, q_args, "json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help/--version exit 0; anything else is a configuration error
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (plan->parsed()) return cmd_plan(plan_args);
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (cert->parsed()) return cmd_certify(cert_args);
    if (qv->parsed()) return cmd_qvalue(q_args);
  } catch (const qinterp::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qinterp::model_error& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

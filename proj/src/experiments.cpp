#include "rydthz/experiments.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "rydthz/detector.hpp"
#include "rydthz/photon_stats.hpp"

namespace rydthz {

namespace {

using nlohmann::json;
using constants::kTwoPi;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CsvTable {
  std::vector<std::string> comments;  // without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot open output file " + path.string());
  }
  out << text;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ostringstream out;
  for (const auto& line : table.comments) out << "# " << line << "\n";
  for (size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << format_double(row[i]);
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

std::vector<double> sweep_grid(const SweepConfig& sweep) {
  std::vector<double> grid(sweep.points);
  if (sweep.scale == "log") {
    if (!(sweep.start > 0.0)) {
      throw ConfigError("sweep.start: log scale requires positive bounds");
    }
    const double lo = std::log10(sweep.start);
    const double hi = std::log10(sweep.stop);
    for (int i = 0; i < sweep.points; ++i) {
      grid[i] = std::pow(10.0, lo + (hi - lo) * i / (sweep.points - 1));
    }
  } else {
    for (int i = 0; i < sweep.points; ++i) {
      grid[i] = sweep.start +
                (sweep.stop - sweep.start) * i / (sweep.points - 1);
    }
  }
  return grid;
}

SweepOptions sweep_options(const ExperimentConfig& cfg, int threads) {
  SweepOptions opts;
  opts.averaging = cfg.averaging_options();
  opts.propagate.rtol = cfg.propagation.ode_rtol;
  opts.propagate.atol = cfg.propagation.ode_atol;
  opts.threads = threads;
  return opts;
}

json bandwidth_json(const BandwidthResult& bw) {
  return json{{"fwhm_over_2pi_hz", bw.fwhm / kTwoPi},
              {"shape", shape_name(bw.shape)},
              {"peak_detuning_over_2pi_hz", bw.peak_x / kTwoPi},
              {"peak_value", bw.peak_y}};
}

json run_spectrum(const ExperimentConfig& cfg, int threads, CsvTable& csv) {
  DetuningSweep sweep;
  sweep.variable = cfg.sweep.variable == "delta_1" ? FieldLabel::kA1
                                                   : FieldLabel::kT;
  for (double f : sweep_grid(cfg.sweep)) {
    sweep.detunings.push_back(kTwoPi * f);
  }
  const auto trace = signal_spectrum(cfg.build_scheme(), cfg.build_mixing(),
                                     sweep, sweep_options(cfg, threads));
  csv.comments = {"conversion efficiency vs " + cfg.sweep.variable,
                  "columns: detuning/2pi [Hz], eta_qe [dimensionless]"};
  csv.columns = {"detuning_over_2pi_hz", "eta_qe"};
  for (size_t i = 0; i < trace.x.size(); ++i) {
    csv.rows.push_back({trace.x[i] / kTwoPi, trace.y[i]});
  }
  const auto bw = extract_bandwidth(trace);
  json summary = bandwidth_json(bw);
  summary["sweep_variable"] = cfg.sweep.variable;
  return summary;
}

json run_transmission(const ExperimentConfig& cfg, int threads,
                      CsvTable& csv) {
  std::vector<double> grid;
  for (double f : sweep_grid(cfg.sweep)) grid.push_back(kTwoPi * f);
  const auto trace =
      transmission_spectrum(cfg.build_scheme(), cfg.build_mixing(), grid,
                            sweep_options(cfg, threads));
  csv.comments = {"probe transmission vs delta_1",
                  "columns: detuning/2pi [Hz], transmission [dimensionless]"};
  csv.columns = {"detuning_over_2pi_hz", "transmission"};
  double t_min = 1.0, t_max = 0.0;
  for (size_t i = 0; i < trace.x.size(); ++i) {
    csv.rows.push_back({trace.x[i] / kTwoPi, trace.y[i]});
    t_min = std::min(t_min, trace.y[i]);
    t_max = std::max(t_max, trace.y[i]);
  }
  return json{{"min_transmission", t_min}, {"max_transmission", t_max}};
}

json run_efficiency(const ExperimentConfig& cfg, int threads, CsvTable& csv) {
  const auto scheme = cfg.build_scheme();
  const auto mixing = cfg.build_mixing();
  const Mat2c beta = linear_response_coefficients(
      scheme, mixing.fields, cfg.vapor, cfg.averaging_options());
  PropagateOptions popts;
  popts.rtol = cfg.propagation.ode_rtol;
  popts.atol = cfg.propagation.ode_atol;
  popts.profile_points = 101;
  const double a_in = std::sqrt(cfg.propagation.input_flux_per_s);
  const auto conv = coupled_mode_propagate(beta, mixing, a_in, popts);
  (void)threads;

  csv.comments = {"two-mode amplitude profile along the cell",
                  "columns: z [m], |a_S| [sqrt(counts/s)], |a_T| "
                  "[sqrt(counts/s)]"};
  csv.columns = {"z_m", "abs_a_s", "abs_a_t"};
  for (size_t i = 0; i < conv.z.size(); ++i) {
    csv.rows.push_back(
        {conv.z[i], std::abs(conv.a_s[i]), std::abs(conv.a_t[i])});
  }

  json summary;
  summary["eta_qe_numeric"] = conv.eta_qe;
  summary["eta_qe_analytic"] = eta_qe_analytic(mixing);
  summary["alpha_bar_per_m"] =
      alpha_bar(mixing.g_s, mixing.big_g_s, mixing.big_g_t, mixing.gamma_th);
  summary["g_s_per_s"] = mixing.g_s;
  summary["g_t_per_s"] = mixing.g_t;
  summary["big_g_s"] = mixing.big_g_s;
  summary["big_g_t"] = mixing.big_g_t;
  summary["gamma_th_over_2pi_hz"] = mixing.gamma_th / kTwoPi;
  summary["delta_k_per_m"] = mixing.delta_k;
  summary["eta_total"] =
      total_efficiency(std::min(conv.eta_qe, 1.0), cfg.detector.eta_loss);
  return summary;
}

json run_response(const ExperimentConfig& cfg, int threads, CsvTable& csv) {
  // Log-spaced THz Rabi ladder from the response_sweep section.
  const auto& rs = cfg.response_sweep;
  std::vector<double> rabi;
  const double lo = std::log10(rs.rabi_t_start_over_2pi_hz);
  const double hi = std::log10(rs.rabi_t_stop_over_2pi_hz);
  for (int i = 0; i < rs.points; ++i) {
    rabi.push_back(kTwoPi *
                   std::pow(10.0, lo + (hi - lo) * i / (rs.points - 1)));
  }
  const auto scheme = cfg.build_scheme();
  const auto mixing = cfg.build_mixing();
  const auto trace = nonlinear_response_curve(scheme, mixing, rabi,
                                              sweep_options(cfg, threads));
  const auto det = cfg.build_detector();

  csv.comments = {"signal count rate vs input THz intensity",
                  "columns: I_T [W/m^2], R_S converter output [counts/s], "
                  "R detected [counts/s], eta_inst [dimensionless]"};
  csv.columns = {"i_t_w_m2", "r_s_counts_s", "r_detected_counts_s",
                 "eta_instantaneous"};
  for (size_t i = 0; i < trace.x.size(); ++i) {
    const double r_t = thz_count_rate(trace.x[i], det);
    csv.rows.push_back({trace.x[i], trace.y[i],
                        trace.y[i] * det.eta_loss,
                        r_t > 0.0 ? trace.y[i] / r_t : 0.0});
  }

  json summary;
  SpectrumTrace detected = trace;
  for (double& y : detected.y) y *= det.eta_loss;
  const auto dr = dynamic_range(detected, det, 1.0);
  summary["dynamic_range_db"] = dr.db;
  summary["i_min_w_m2"] = dr.i_min;
  summary["i_max_w_m2"] = dr.i_max;
  summary["plateau_efficiency_detected"] = dr.plateau_efficiency;
  summary["compression_found"] = dr.compression_found;
  return summary;
}

json run_metrics(const ExperimentConfig& cfg, int threads, CsvTable& csv) {
  (void)threads;
  const auto det = cfg.build_detector();
  const double eta = total_efficiency(det.eta_qe, det.eta_loss);
  const double noise_power = nep(det, eta);

  csv.comments = {"detector figures of merit",
                  "columns: nu_T [Hz], eta_qe, eta_loss, eta_total, "
                  "dark rate [1/s], dead time [s], NEP [W/sqrt(Hz)]"};
  csv.columns = {"nu_t_hz",      "eta_qe",      "eta_loss", "eta_total",
                 "dark_rate_hz", "dead_time_s", "nep_w_per_sqrt_hz"};
  csv.rows.push_back({det.nu_thz, det.eta_qe, det.eta_loss, eta,
                      det.dark_rate, det.dead_time, noise_power});

  return json{{"nep_w_per_sqrt_hz", noise_power},
              {"eta_total", eta},
              {"eta_qe", det.eta_qe},
              {"eta_loss", det.eta_loss},
              {"dark_rate_hz", det.dark_rate}};
}

json run_g2(const ExperimentConfig& cfg, int threads, CsvTable& csv) {
  (void)threads;
  const auto& mc = cfg.monte_carlo;
  PhotonStream source =
      mc.source == "thermal"
          ? gen_thermal(mc.rate_hz, mc.coherence_time_s, mc.duration_s,
                        cfg.seed)
          : gen_coherent(mc.rate_hz, mc.duration_s, cfg.seed);
  PhotonStream measured = source;
  if (mc.apply_detector) {
    const auto det = cfg.build_detector();
    measured = detect(source, mc.efficiency, det.dark_rate, det.dead_time,
                      cfg.seed + 1);
  }
  const auto [arm_a, arm_b] = hbt_split(measured, cfg.seed + 2);
  const auto hist = g2_cross(arm_a, arm_b, mc.bin_width_s, mc.tau_max_s);

  csv.comments = {"HBT cross-correlation histogram",
                  "columns: tau bin center [s], g2 [dimensionless], raw "
                  "pair count"};
  csv.columns = {"tau_s", "g2", "pair_count"};
  for (size_t i = 0; i < hist.g2.size(); ++i) {
    csv.rows.push_back({0.5 * (hist.edges[i] + hist.edges[i + 1]),
                        hist.g2[i],
                        static_cast<double>(hist.counts[i])});
  }

  json summary;
  summary["source"] = mc.source;
  summary["counts_total"] = measured.times.size();
  summary["counts_arm_a"] = hist.counts_a;
  summary["counts_arm_b"] = hist.counts_b;
  summary["g2_zero_cross"] = hist.g2_zero();
  const double dead_time =
      mc.apply_detector ? cfg.detector.dead_time_s : 0.0;
  const auto single =
      g2_single_autocorr(measured, mc.resolution_s, dead_time);
  summary["g2_zero_single_raw"] = single.g2_raw;
  summary["g2_zero_single_corrected"] = single.g2_dead_time_corrected;
  summary["occupied_bins"] = single.occupied_bins;
  return summary;
}

json run_bandwidth_sweep(const ExperimentConfig& cfg, int threads,
                         CsvTable& csv) {
  if (cfg.sweep.outer_values.empty()) {
    throw ConfigError("sweep.outer_values: bandwidth-sweep needs A1 Rabi "
                      "values");
  }
  DetuningSweep sweep;
  sweep.variable = cfg.sweep.variable == "delta_1" ? FieldLabel::kA1
                                                   : FieldLabel::kT;
  for (double f : sweep_grid(cfg.sweep)) {
    sweep.detunings.push_back(kTwoPi * f);
  }
  const auto scheme = cfg.build_scheme();

  csv.comments = {"conversion bandwidth vs A1 drive strength",
                  "columns: A1 Rabi/2pi [Hz], FWHM/2pi [Hz], shape "
                  "(0 single, 1 split, 2 split-beyond-half), peak eta_qe"};
  csv.columns = {"a1_rabi_over_2pi_hz", "fwhm_over_2pi_hz", "shape_flag",
                 "peak_eta_qe"};

  json powers = json::array();
  for (double a1_rabi : cfg.sweep.outer_values) {
    ExperimentConfig point = cfg;
    point.fields[field_index(FieldLabel::kA1)].rabi_over_2pi_hz = a1_rabi;
    const auto trace = signal_spectrum(scheme, point.build_mixing(), sweep,
                                       sweep_options(point, threads));
    const auto bw = extract_bandwidth(trace);
    csv.rows.push_back({a1_rabi, bw.fwhm / kTwoPi,
                        static_cast<double>(static_cast<int>(bw.shape)),
                        bw.peak_y});
    json entry = bandwidth_json(bw);
    entry["a1_rabi_over_2pi_hz"] = a1_rabi;
    powers.push_back(entry);
  }
  return json{{"points", powers}};
}

}  // namespace

std::string run_experiment(const ExperimentConfig& config,
                           const std::string& command,
                           const std::filesystem::path& out_dir,
                           int threads) {
  if (std::find(kCommands.begin(), kCommands.end(), command) ==
      kCommands.end()) {
    throw ConfigError("unknown command: " + command);
  }
  if (threads < 1) threads = 1;
  std::filesystem::create_directories(out_dir);

  CsvTable csv;
  json summary;
  if (command == "spectrum") {
    summary = run_spectrum(config, threads, csv);
  } else if (command == "transmission") {
    summary = run_transmission(config, threads, csv);
  } else if (command == "efficiency") {
    summary = run_efficiency(config, threads, csv);
  } else if (command == "response") {
    summary = run_response(config, threads, csv);
  } else if (command == "metrics") {
    summary = run_metrics(config, threads, csv);
  } else if (command == "g2") {
    summary = run_g2(config, threads, csv);
  } else {
    summary = run_bandwidth_sweep(config, threads, csv);
  }

  summary["command"] = command;
  summary["seed"] = config.seed;

  write_csv(out_dir / (command + ".csv"), csv);
  const std::string summary_text = summary.dump(2) + "\n";
  write_text_file(out_dir / (command + "_summary.json"), summary_text);

  json manifest;
  manifest["command"] = command;
  manifest["seed"] = config.seed;
  manifest["config"] = json::parse(canonical_json(config));
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return summary_text;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Rydberg six-wave-mixing THz-to-optical converter simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;

  for (const auto& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config or run manifest");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--threads", threads, "max worker threads (0 = auto)");
  }

  std::vector<const char*> argv;
  argv.push_back("rydthz");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig config;
    if (config_path.empty()) {
      config = default_config();
    } else {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) throw ConfigError("cannot read config file " + config_path);
      std::ostringstream text;
      text << in.rdbuf();
      config = parse_config(text.str());
    }
    if (seed_set) config.seed = seed;
    if (threads <= 0) {
      threads = static_cast<int>(std::thread::hardware_concurrency());
      if (threads <= 0) threads = 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    const std::string summary =
        run_experiment(config, command, out_dir, threads);
    std::fputs(summary.c_str(), stdout);
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const InsufficientDataError& e) {
    std::fprintf(stderr, "insufficient data: %s\n", e.what());
    return 4;
  } catch (const PhysicsError& e) {
    std::fprintf(stderr, "physics error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

}  // namespace rydthz

#include "kvstring/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "kvstring/acceptance.hpp"
#include "kvstring/analysis.hpp"
#include "kvstring/evolution.hpp"
#include "kvstring/io.hpp"
#include "kvstring/oracles.hpp"
#include "kvstring/resolvent.hpp"
#include "kvstring/spectral.hpp"

namespace kvstring {

namespace {

void load_config_file(const std::string& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw UsageError("malformed config JSON in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "alpha")
        config.alpha = value.get<double>();
      else if (key == "n_elements")
        config.n_elements = value.get<int>();
      else if (key == "grading")
        config.grading = value.get<double>();
      else if (key == "dt")
        config.dt = value.get<double>();
      else if (key == "t_final")
        config.t_final = value.get<double>();
      else if (key == "omega_min")
        config.omega_min = value.get<double>();
      else if (key == "omega_max")
        config.omega_max = value.get<double>();
      else if (key == "omega_points")
        config.omega_points = value.get<int>();
      else if (key == "seed")
        config.seed = value.get<long long>();
      else if (key == "output_dir")
        config.output_dir = value.get<std::string>();
      else
        throw UsageError("unknown config key: " + key);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("bad value for config key '" + key + "': " + e.what());
    }
  }
}

void add_common_options(CLI::App* cmd, Command& command) {
  cmd->add_option("--alpha", command.config.alpha, "damping exponent in [0,1)");
  cmd->add_option("--n,--n-elements", command.config.n_elements, "number of mesh elements (even)");
  cmd->add_option("--grading", command.config.grading, "mesh grading toward x=0 (>= 1)");
  cmd->add_option("--dt", command.config.dt, "time step");
  cmd->add_option("--t-final", command.config.t_final, "final time");
  cmd->add_option("--omega-min", command.config.omega_min, "scan window lower edge");
  cmd->add_option("--omega-max", command.config.omega_max, "scan window upper edge");
  cmd->add_option("--points,--omega-points", command.config.omega_points, "scan grid size");
  cmd->add_option("--seed", command.config.seed, "random seed");
  cmd->add_option("--output-dir,-o", command.config.output_dir, "artifact directory");
  cmd->add_option("--threads", command.threads, "worker thread cap (0 = hardware)");
}

std::filesystem::path out_path(const Command& command, const char* name) {
  return std::filesystem::path(command.config.output_dir) / name;
}

void dump_system(const Command& command, const SystemMatrices& sys) {
  write_file_atomic(out_path(command, "M.txt"), matrix_dump(sys.mass));
  write_file_atomic(out_path(command, "K.txt"), matrix_dump(sys.stiffness));
  write_file_atomic(out_path(command, "D.txt"), matrix_dump(sys.damping));
}

int run_simulate(const Command& command) {
  const RunConfig& cfg = command.config;
  const Mesh mesh = build_mesh(cfg.n_elements, cfg.grading);
  const SystemMatrices sys = assemble(mesh, DampingProfile(cfg.alpha));
  if (command.dump_matrices) dump_system(command, sys);
  const State u0 = make_initial_data(mesh, sys, parse_initial_data_kind(command.initial_kind));
  int sample_every = command.sample_every;
  if (sample_every <= 0)
    sample_every = std::max(1, static_cast<int>(cfg.t_final / cfg.dt / 2000.0));
  const EnergyTrace trace = simulate(sys, u0, cfg.t_final, cfg.dt, sample_every);
  write_file_atomic(out_path(command, "energy.csv"), energy_csv(trace));
  std::cout << "simulate: " << trace.times.size() << " samples to t=" << cfg.t_final
            << ", E(0)=" << format_double(trace.energies.front())
            << ", E(end)=" << format_double(trace.energies.back()) << "\n";
  return 0;
}

int run_spectrum(const Command& command) {
  const RunConfig& cfg = command.config;
  const Mesh mesh = build_mesh(cfg.n_elements, cfg.grading);
  const SystemMatrices sys = assemble(mesh, DampingProfile(cfg.alpha));
  if (command.dump_matrices) dump_system(command, sys);
  SpectrumOptions opts;
  if (!command.shifts.empty()) {
    opts.use_shift_invert = true;
    for (double im : command.shifts) opts.shifts.emplace_back(0.0, im);
  }
  const SpectrumResult spec = compute_spectrum(sys, opts);
  write_file_atomic(out_path(command, "spectrum.csv"), spectrum_csv(spec));
  std::cout << "spectrum: " << spec.eigenvalues.size() << " eigenvalues, abscissa "
            << format_double(spec.abscissa) << ", axis gap " << format_double(spec.axis_gap)
            << "\n";
  if (!command.alphas.empty()) {
    const auto table =
        trace_branches(command.alphas, cfg.n_elements, command.k_max, cfg.grading, command.threads);
    write_file_atomic(out_path(command, "branches.csv"), branches_csv(table));
    std::cout << "branches: " << table.size() << " rows across " << command.alphas.size()
              << " exponents\n";
  }
  return 0;
}

int run_resolvent(const Command& command) {
  const RunConfig& cfg = command.config;
  const Mesh mesh = build_mesh(cfg.n_elements, cfg.grading);
  const SystemMatrices sys = assemble(mesh, DampingProfile(cfg.alpha));
  if (command.dump_matrices) dump_system(command, sys);
  const ScanSpacing spacing =
      command.spacing == "linear" ? ScanSpacing::linear : ScanSpacing::log_spaced;
  SigmaMinOptions opts;
  opts.seed = static_cast<std::uint64_t>(cfg.seed);
  const ResolventScan grid = scan_resolvent(sys, cfg.omega_min, cfg.omega_max, cfg.omega_points,
                                            spacing, command.threads, command.cap_divisor, opts);
  write_file_atomic(out_path(command, "resolvent.csv"), resolvent_csv(grid));

  // The exponent is fitted on the resonance-dip envelope; a uniform grid
  // underestimates the growth badly (see README). Narrow windows with too few
  // dips fall back to the raw grid.
  const ResolventScan dips = scan_resolvent_dips(sys, cfg.omega_min, cfg.omega_max,
                                                 command.threads, command.cap_divisor, opts);
  const bool enough_dips = dips.omegas.size() >= 10;
  const RateFit fit = fit_theta(enough_dips ? dips : grid, cfg.omega_min, cfg.omega_max);
  const double predicted = predict_rates(cfg.alpha).theta;
  write_file_atomic(out_path(command, "fit.json"), fit_json(cfg.alpha, cfg.n_elements, fit, predicted));
  std::cout << "resolvent: " << grid.omegas.size() << " grid points, " << dips.omegas.size()
            << " dips (fit on " << (enough_dips ? "dip envelope" : "raw grid")
            << "), theta_fit " << format_double(fit.slope) << " (predicted "
            << format_double(predicted) << ")\n";
  return 0;
}

int run_hardy(const Command& command) {
  const std::vector<double> alphas{-1.0, 0.0, 0.5, 0.9};
  const std::vector<double> betas{-0.5, 0.0, 1.0, 2.0};
  const auto cases = hardy_sweep(alphas, betas, 200, static_cast<std::uint64_t>(command.config.seed),
                                 command.threads);
  write_file_atomic(out_path(command, "hardy.csv"), hardy_csv(cases));
  std::cout << "hardy: " << cases.size() << " (alpha,beta) pairs swept\n";
  return 0;
}

int run_table(const Command& command) {
  std::vector<double> alphas = command.alphas;
  if (alphas.empty()) alphas = {0.0, 0.25, 0.5, 0.75};
  for (double a : alphas)
    if (!(a >= 0.0 && a < 1.0)) throw UsageError("alpha out of [0,1)");
  const auto rows = build_comparison_table(alphas);
  write_file_atomic(out_path(command, "table.csv"), table_csv(rows));
  write_file_atomic(out_path(command, "table.txt"), table_txt(rows));
  std::cout << "table: " << rows.size() << " rows\n";
  return 0;
}

int run_verify(const Command& command) {
  AcceptanceOptions opts;
  opts.quick = command.quick;
  opts.criterion = command.criterion;
  opts.threads = command.threads;
  const auto results = run_acceptance(opts, std::cout);
  return all_passed(results) ? 0 : 3;
}

}  // namespace

Command parse_args(const std::vector<std::string>& args) {
  Command command;
  std::string config_path;

  // The config file fills defaults before flags are applied.
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file path");
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (!config_path.empty()) load_config_file(config_path, command.config);

  CLI::App app{"numerical laboratory for a string with degenerate Kelvin-Voigt damping"};
  app.require_subcommand(1);
  std::string ignored;

  auto* simulate_cmd = app.add_subcommand("simulate", "time-step the system, write energy.csv");
  add_common_options(simulate_cmd, command);
  simulate_cmd->add_option("--config", ignored, "JSON config file");
  simulate_cmd
      ->add_option("--kind", command.initial_kind,
                   "initial data: sine_displacement | bump_velocity | graph_normalized")
      ->check(CLI::IsMember({"sine_displacement", "sine", "bump_velocity", "bump",
                             "graph_normalized", "graph"}));
  simulate_cmd->add_option("--sample-every", command.sample_every, "record every k-th step");
  simulate_cmd->add_flag("--dump-matrices", command.dump_matrices, "dump M/K/D as text");

  auto* spectrum_cmd = app.add_subcommand("spectrum", "pencil eigenvalues, write spectrum.csv");
  add_common_options(spectrum_cmd, command);
  spectrum_cmd->add_option("--config", ignored, "JSON config file");
  spectrum_cmd->add_option("--alphas", command.alphas,
                           "trace eigenvalue branches across these exponents")
      ->delimiter(',');
  spectrum_cmd->add_option("--k-max", command.k_max, "number of branches to trace");
  spectrum_cmd
      ->add_option("--shifts", command.shifts,
                   "shift-invert mode: imaginary parts of the Arnoldi shifts")
      ->delimiter(',');
  spectrum_cmd->add_flag("--dump-matrices", command.dump_matrices, "dump M/K/D as text");

  auto* resolvent_cmd =
      app.add_subcommand("resolvent", "scan sigma_min along the axis, write resolvent.csv + fit.json");
  add_common_options(resolvent_cmd, command);
  resolvent_cmd->add_option("--config", ignored, "JSON config file");
  resolvent_cmd->add_option("--spacing", command.spacing, "grid spacing: log | linear")
      ->check(CLI::IsMember({"log", "linear"}));
  resolvent_cmd->add_option("--cap-divisor", command.cap_divisor,
                            "resolution cap policy: omega_cap = n_elements / divisor");
  resolvent_cmd->add_flag("--dump-matrices", command.dump_matrices, "dump M/K/D as text");

  auto* hardy_cmd = app.add_subcommand("hardy", "weighted Hardy sweep, write hardy.csv");
  add_common_options(hardy_cmd, command);
  hardy_cmd->add_option("--config", ignored, "JSON config file");

  auto* table_cmd = app.add_subcommand("table", "decay-rate comparison table");
  add_common_options(table_cmd, command);
  table_cmd->add_option("--config", ignored, "JSON config file");
  table_cmd->add_option("--alphas", command.alphas, "exponents, comma separated")->delimiter(',');

  auto* verify_cmd = app.add_subcommand("verify", "run the verification criteria");
  add_common_options(verify_cmd, command);
  verify_cmd->add_option("--config", ignored, "JSON config file");
  verify_cmd->add_flag("--quick", command.quick, "small-n oracle checks only");
  verify_cmd->add_option("--criterion", command.criterion, "run a single criterion (1-8)")
      ->check(CLI::Range(1, 8));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help() << std::flush;
    throw UsageError("");
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (simulate_cmd->parsed()) command.kind = CommandKind::simulate;
  else if (spectrum_cmd->parsed()) command.kind = CommandKind::spectrum;
  else if (resolvent_cmd->parsed()) command.kind = CommandKind::resolvent;
  else if (hardy_cmd->parsed()) command.kind = CommandKind::hardy;
  else if (table_cmd->parsed()) command.kind = CommandKind::table;
  else command.kind = CommandKind::verify;

  const auto errors = validate_config(command.config);
  if (!errors.empty()) {
    std::ostringstream msg;
    for (std::size_t i = 0; i < errors.size(); ++i) msg << (i ? "; " : "") << errors[i];
    throw UsageError(msg.str());
  }
  return command;
}

int run(const Command& command) {
  try {
    switch (command.kind) {
      case CommandKind::simulate: return run_simulate(command);
      case CommandKind::spectrum: return run_spectrum(command);
      case CommandKind::resolvent: return run_resolvent(command);
      case CommandKind::hardy: return run_hardy(command);
      case CommandKind::table: return run_table(command);
      case CommandKind::verify: return run_verify(command);
    }
    return 2;
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    const Command command = parse_args(args);
    return run(command);
  } catch (const UsageError& e) {
    if (e.what()[0] == '\0') return 0;  // --help
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace kvstring

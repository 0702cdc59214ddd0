#pragma once

#include <chrono>
#include <cstddef>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinres/backends.hpp"
#include "spinres/bench.hpp"
#include "spinres/config.hpp"
#include "spinres/errors.hpp"
#include "spinres/integrator.hpp"
#include "spinres/io.hpp"
#include "spinres/model.hpp"

namespace spinres::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kCapability = 3,
  kValidationFailed = 4,
  kDiverged = 5,
};

/// Command-line overrides; unset members leave config/default values alone.
struct Overrides {
  std::optional<std::size_t> n, steps, record_stride, workers;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt, phi0;
  std::optional<std::string> backend, config, output;

  /// defaults <- config file <- flags
  Settings resolve() const {
    Settings s;
    if (config) apply_config_file(*config, s);
    if (n) s.run.n = *n;
    if (steps) s.run.steps = *steps;
    if (record_stride) s.run.record_stride = *record_stride;
    if (seed) s.run.seed = *seed;
    if (dt) s.run.dt = *dt;
    if (phi0) s.run.phi0 = *phi0;
    if (backend) s.run.backend = *backend;
    if (output) s.output = *output;
    return s;
  }
};

inline BackendOptions backend_options(const Settings& s, std::optional<std::size_t> workers) {
  BackendOptions opts;
  opts.workers = workers.value_or(0);
  opts.gpu_device = s.gpu_device;
  return opts;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

/// Runs one integration and writes the trajectory CSV.
inline int cmd_simulate(const Settings& s, std::optional<std::size_t> workers, std::ostream& out) {
  s.run.validate();
  auto backend = make_backend(s.run.backend, backend_options(s, workers));
  const Reservoir res = make_reservoir(s.run.n, s.run.n_in, s.run.seed, s.params);
  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory traj = integrate(s.run, res, *backend);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string path = s.output.empty() ? "trajectory.csv" : s.output;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  write_trajectory_csv(f, traj);
  out << "backend " << backend->id() << ", n " << s.run.n << ", steps " << s.run.steps << '\n';
  out << "max_norm_drift " << format_double(traj.max_norm_drift) << '\n';
  out << "elapsed_s " << format_double(elapsed) << '\n';
  out << "wrote " << path << '\n';
  return kOk;
}

struct ValidateOptions {
  double tolerance = kDefaultDeviationBudget;
  double drift_budget = kDefaultDriftBudget;  // per 1e4 steps
};

/// Integrates the same configuration with every backend and checks pairwise
/// deviations and conservation drift.
inline int validate_backends(const Settings& s, std::vector<std::unique_ptr<Backend>>& backends,
                             const ValidateOptions& opts, std::ostream& out) {
  s.run.validate();
  if (backends.size() < 2) {
    out << "validate needs at least two available backends; have " << backends.size() << '\n';
    return kCapability;
  }
  const Reservoir res = make_reservoir(s.run.n, s.run.n_in, s.run.seed, s.params);
  std::vector<Trajectory> trajs;
  for (auto& b : backends) trajs.push_back(integrate(s.run, res, *b));

  const double budget = drift_budget_for(opts.drift_budget, s.run.steps);
  bool ok = true;
  for (std::size_t i = 0; i < backends.size(); ++i) {
    const bool within = trajs[i].max_norm_drift <= budget;
    ok = ok && within;
    out << "drift " << backends[i]->id() << ' ' << format_double(trajs[i].max_norm_drift)
        << (within ? "" : "  EXCEEDS BUDGET") << '\n';
  }
  double worst = -1.0;
  std::string worst_pair;
  for (std::size_t i = 0; i < backends.size(); ++i)
    for (std::size_t j = i + 1; j < backends.size(); ++j) {
      const double d = compare_trajectories(trajs[i], trajs[j]);
      out << "deviation " << backends[i]->id() << " vs " << backends[j]->id() << ' '
          << format_double(d) << '\n';
      if (d > worst) {
        worst = d;
        worst_pair = backends[i]->id() + " vs " + backends[j]->id();
      }
    }
  if (worst > opts.tolerance) ok = false;
  out << (ok ? "PASS" : "FAIL") << " worst pair " << worst_pair << " deviation " << format_double(worst)
      << " (tolerance " << format_double(opts.tolerance) << ", drift budget " << format_double(budget)
      << ")\n";
  return ok ? kOk : kValidationFailed;
}

inline std::vector<std::size_t> parse_n_list(const std::string& text) {
  std::vector<std::size_t> ns;
  for (auto part : split(text, ',')) {
    const auto t = detail::trim(part);
    if (t.empty()) continue;
    const auto v = detail::parse_count(t);
    if (v == 0) throw ConfigError("N values must be >= 1");
    ns.push_back(static_cast<std::size_t>(v));
  }
  if (ns.empty()) throw ConfigError("empty N list");
  return ns;
}

struct BenchOptions {
  bool full = false;
  std::optional<std::string> ns;        // overrides the grid
  std::optional<std::size_t> steps;     // overrides the protocol step count
  std::optional<std::string> backends;  // comma separated, default: all available
  std::string baseline = "reference";
  std::size_t repetitions = 3;
  double drift_budget = kDefaultDriftBudget;
  std::string hardware;
  std::string output = "bench";  // writes <output>.csv and <output>.md
};

inline int cmd_bench(const Settings& s, const BenchOptions& opts, std::optional<std::size_t> workers,
                     std::ostream& out) {
  const std::vector<std::size_t> ns =
      opts.ns ? parse_n_list(*opts.ns)
              : (opts.full ? std::vector<std::size_t>{1, 10, 100, 1000, 2500, 5000, 10000}
                           : std::vector<std::size_t>{1, 10, 100, 1000, 2500});
  const std::size_t steps = opts.steps.value_or(opts.full ? 500000 : 10000);

  std::vector<std::string> ids;
  if (opts.backends) {
    for (auto part : split(*opts.backends, ','))
      if (auto t = detail::trim(part); !t.empty()) ids.emplace_back(t);
  } else {
    ids = available_backend_ids(backend_options(s, workers));
  }
  if (std::find(ids.begin(), ids.end(), opts.baseline) == ids.end())
    throw ConfigError("baseline '" + opts.baseline + "' is not among the benchmarked backends");

  std::vector<std::unique_ptr<Backend>> backends;
  for (const auto& id : ids) backends.push_back(make_backend(id, backend_options(s, workers)));

  BenchReport report;
  report.baseline = opts.baseline;
  report.drift_budget = opts.drift_budget;
  report.hardware = opts.hardware;
  if (report.hardware.empty())
    if (const char* env = std::getenv("SPINRES_HARDWARE")) report.hardware = env;
  report.timestamp = utc_timestamp();

  for (std::size_t n : ns) {
    const Reservoir res = make_reservoir(n, 1, s.run.seed, s.params);
    std::optional<Trajectory> reference;
    std::vector<TimingRecord> cell;
    for (auto& b : backends) {
      out << "timing " << b->id() << " n=" << n << " steps=" << steps << " ..." << std::flush;
      cell.push_back(time_integration(*b, res, steps, s.run.dt, s.run.seed, opts.repetitions));
      out << ' ' << format_duration(cell.back().mean_seconds) << '\n';
      if (b->descriptor().kind == BackendKind::reference) reference = cell.back().last_run;
    }
    for (auto& rec : cell) {
      std::optional<double> dev;
      if (reference) dev = compare_trajectories(*reference, rec.last_run);
      report.admit(rec, dev);
    }
  }
  for (const auto& r : report.rejected) out << "rejected: " << r << '\n';
  if (report.records.empty()) {
    out << "no records admitted\n";
    return kValidationFailed;
  }

  const std::string md = emit_report(report, ReportFormat::markdown);
  write_text_file(opts.output + ".csv", emit_report(report, ReportFormat::csv));
  write_text_file(opts.output + ".md", md);
  out << '\n' << md << "\nwrote " << opts.output << ".csv and " << opts.output << ".md\n";
  return report.rejected.empty() ? kOk : kValidationFailed;
}

struct ScalingOptions {
  std::string ns = "500,1000,2000,4000,8000";
  std::size_t repetitions = 3;
  std::size_t batch = 5;
  bool self_test = false;
  std::string output = "scaling.csv";
};

inline int cmd_scaling(const Settings& s, const ScalingOptions& opts, std::optional<std::size_t> workers,
                       std::ostream& out) {
  const auto ns = parse_n_list(opts.ns);
  std::vector<TimingRecord> records;
  if (opts.self_test) {
    // Injected cost c * N^2 instead of measurements.
    for (std::size_t n : ns) {
      TimingRecord r;
      r.backend = "self-test";
      r.n = n;
      r.steps = opts.batch;
      r.repetitions = 1;
      r.mean_seconds = 1e-9 * static_cast<double>(n) * static_cast<double>(n);
      records.push_back(r);
    }
  } else {
    auto backend = make_backend(s.run.backend, backend_options(s, workers));
    for (std::size_t n : ns) {
      records.push_back(time_derivative_eval(*backend, n, opts.repetitions, opts.batch, s.run.seed + 1, s.params));
      out << "n " << n << " mean_s " << format_double(records.back().mean_seconds) << '\n';
    }
  }
  const double slope = fit_scaling_exponent(records);

  std::ofstream f(opts.output);
  if (!f) throw std::runtime_error("cannot write '" + opts.output + "'");
  f << "backend,n,batch,repetitions,mean_s,std_s\n";
  for (const auto& r : records)
    f << r.backend << ',' << r.n << ',' << r.steps << ',' << r.repetitions << ','
      << format_double(r.mean_seconds) << ',' << format_double(r.std_seconds) << '\n';
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", slope);
  out << "slope " << buf << '\n';
  return kOk;
}

inline int cmd_backends(const Settings& s, std::optional<std::size_t> workers, std::ostream& out) {
  for (const auto& d : list_backends(backend_options(s, workers)))
    out << d.id << "  kind=" << to_string(d.kind) << "  available=" << (d.available ? "yes" : "no")
        << "  workers=" << d.workers << "  device=" << d.device << '\n';
  return kOk;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coupled spin-torque oscillator reservoir simulator"};
  app.require_subcommand(1);

  Overrides ov;
  auto add_run_flags = [&ov](CLI::App* sub) {
    sub->add_option("--n", ov.n, "oscillator count");
    sub->add_option("--steps", ov.steps, "RK4 step count");
    sub->add_option("--dt", ov.dt, "step size in seconds");
    sub->add_option("--seed", ov.seed, "seed for coupling and input weights");
    sub->add_option("--phi0", ov.phi0, "initial polar angle in radians");
    sub->add_option("--backend", ov.backend, "reference | sequential | parallel | gpu");
    sub->add_option("--config", ov.config, "key = value config file");
    sub->add_option("--record-stride", ov.record_stride, "steps between recorded states");
    sub->add_option("--workers", ov.workers, "parallel backend worker count");
  };

  auto* simulate = app.add_subcommand("simulate", "integrate and write a trajectory CSV");
  add_run_flags(simulate);
  simulate->add_option("--output", ov.output, "trajectory CSV path");

  ValidateOptions vopts;
  auto* validate = app.add_subcommand("validate", "cross-check all available backends");
  add_run_flags(validate);
  validate->add_option("--tolerance", vopts.tolerance, "max allowed pairwise deviation");
  validate->add_option("--drift-budget", vopts.drift_budget, "allowed norm drift per 1e4 steps");

  BenchOptions bopts;
  auto* bench = app.add_subcommand("bench", "time full integrations over an N grid");
  add_run_flags(bench);
  bench->add_flag("--full", bopts.full, "N up to 10000 and 5e5 steps");
  bench->add_option("--ns", bopts.ns, "comma-separated N grid");
  bench->add_option("--backends", bopts.backends, "comma-separated backend ids");
  bench->add_option("--baseline", bopts.baseline, "backend the factors are relative to");
  bench->add_option("--repetitions", bopts.repetitions, "timed runs per cell")->check(CLI::PositiveNumber);
  bench->add_option("--drift-budget", bopts.drift_budget, "allowed norm drift per 1e4 steps");
  bench->add_option("--hardware", bopts.hardware, "hardware description for the report");
  bench->add_option("--output", bopts.output, "output prefix for .csv and .md");

  ScalingOptions sopts;
  auto* scaling = app.add_subcommand("scaling", "derivative cost versus N and fitted exponent");
  add_run_flags(scaling);
  scaling->add_option("--ns", sopts.ns, "comma-separated N list");
  scaling->add_option("--repetitions", sopts.repetitions)->check(CLI::PositiveNumber);
  scaling->add_option("--batch", sopts.batch, "derivative calls per repetition")->check(CLI::PositiveNumber);
  scaling->add_flag("--self-test", sopts.self_test, "fit injected N^2 costs instead of measuring");
  scaling->add_option("--output", sopts.output, "scaling CSV path");

  auto* backends = app.add_subcommand("backends", "list compiled-in backends");
  add_run_flags(backends);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const Settings s = ov.resolve();
    if (simulate->parsed()) return cmd_simulate(s, ov.workers, out);
    if (validate->parsed()) {
      std::vector<std::unique_ptr<Backend>> list;
      for (const auto& id : available_backend_ids(backend_options(s, ov.workers)))
        list.push_back(make_backend(id, backend_options(s, ov.workers)));
      return validate_backends(s, list, vopts, out);
    }
    if (bench->parsed()) {
      bopts.steps = ov.steps;
      return cmd_bench(s, bopts, ov.workers, out);
    }
    if (scaling->parsed()) return cmd_scaling(s, sopts, ov.workers, out);
    if (backends->parsed()) return cmd_backends(s, ov.workers, out);
  } catch (const CapabilityError& e) {
    err << "error: " << e.what() << '\n';
    return kCapability;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ContractError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace spinres::cli

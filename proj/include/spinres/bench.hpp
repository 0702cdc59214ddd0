#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "spinres/backends.hpp"
#include "spinres/errors.hpp"
#include "spinres/integrator.hpp"
#include "spinres/io.hpp"
#include "spinres/model.hpp"

namespace spinres {

struct TimingRecord {
  std::string backend;
  std::size_t n = 0;
  std::size_t steps = 0;
  double dt = 0.0;
  std::size_t repetitions = 0;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;  // sample standard deviation, 0 for one repetition
  double max_norm_drift = 0.0;
  std::vector<double> run_seconds;
  Trajectory last_run;  // initial and final state of the last timed run
};

namespace detail {

inline void summarize(TimingRecord& rec) {
  const auto& xs = rec.run_seconds;
  double sum = 0.0;
  for (double x : xs) sum += x;
  rec.mean_seconds = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - rec.mean_seconds) * (x - rec.mean_seconds);
  rec.std_seconds = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
}

}  // namespace detail

/// Times full RK4 integrations with u = 0 from the standard initial state.
///
/// The seeded reservoir is built and one complete untimed run is done before
/// timing; each timed run measures the stepping loop only.
inline TimingRecord time_integration(Backend& backend, const Reservoir& res, std::size_t steps,
                                     double dt, std::uint64_t seed, std::size_t repetitions) {
  if (repetitions == 0) throw ContractError("time_integration: repetitions must be >= 1");
  const std::size_t n = res.size();
  RunConfig cfg;
  cfg.n = n;
  cfg.dt = dt;
  cfg.steps = steps;
  cfg.seed = seed;
  cfg.record_stride = steps;
  cfg.backend = backend.id();
  cfg.n_in = res.n_in();

  TimingRecord rec;
  rec.backend = backend.id();
  rec.n = n;
  rec.steps = steps;
  rec.dt = dt;
  rec.repetitions = repetitions;
  rec.max_norm_drift = integrate(cfg, res, backend).max_norm_drift;  // warm-up
  for (std::size_t r = 0; r < repetitions; ++r) {
    Trajectory traj = integrate(cfg, res, backend);
    rec.run_seconds.push_back(traj.stepping_seconds);
    rec.max_norm_drift = std::max(rec.max_norm_drift, traj.max_norm_drift);
    rec.last_run = std::move(traj);
  }
  detail::summarize(rec);
  return rec;
}

/// Builds the seeded reservoir (one input channel) and times it.
inline TimingRecord time_integration(Backend& backend, std::size_t n, std::size_t steps, double dt,
                                     std::uint64_t seed, std::size_t repetitions,
                                     const PhysicalParams& params = {}) {
  const Reservoir res = make_reservoir(n, 1, seed, params);
  return time_integration(backend, res, steps, dt, seed, repetitions);
}

/// Seeded random state with unit-norm oscillators.
inline SystemState random_unit_state(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  SystemState s(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vec3 v{};
    double r = 0.0;
    do {
      v = {rng.uniform_pm1(), rng.uniform_pm1(), rng.uniform_pm1()};
      r = norm(v);
    } while (r < 1e-3 || r > 1.0);
    s.set(k, (1.0 / r) * v);
  }
  return s;
}

/// Times `batch` derivative evaluations per repetition on a random unit
/// state; mean_seconds is the per-call time. `steps` holds the batch size.
/// The coupling is approx_unit_coupling: the cost does not depend on the
/// entries, and iterative normalization at N ~ 1e4 would dominate the run.
inline TimingRecord time_derivative_eval(Backend& backend, std::size_t n, std::size_t repetitions,
                                         std::size_t batch = 10, std::uint64_t seed = 1,
                                         const PhysicalParams& params = {}) {
  if (batch == 0) throw ContractError("time_derivative_eval: batch must be >= 1");
  if (repetitions == 0) throw ContractError("time_derivative_eval: repetitions must be >= 1");
  RngStream rng(seed);
  CouplingMatrix w_cp = approx_unit_coupling(n, rng);
  InputWeights w_in = generate_input_weights(n, 1, rng);
  const Reservoir res(params, std::move(w_cp), std::move(w_in));
  const SystemState state = random_unit_state(n, seed + 1);
  const std::vector<double> u(1, 0.0);
  std::vector<double> out(3 * n);

  TimingRecord rec;
  rec.backend = backend.id();
  rec.n = n;
  rec.steps = batch;
  rec.repetitions = repetitions;
  rec.max_norm_drift = max_norm_drift(state);
  backend.derivative_into(res, state.data(), u, out);  // warm-up
  for (std::size_t r = 0; r < repetitions; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t b = 0; b < batch; ++b) backend.derivative_into(res, state.data(), u, out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.run_seconds.push_back(secs / static_cast<double>(batch));
  }
  detail::summarize(rec);
  return rec;
}

/// Least-squares slope of log(mean_seconds) against log(n).
inline double fit_scaling_exponent(const std::vector<TimingRecord>& records) {
  if (records.size() < 4) throw ContractError("fit_scaling_exponent: need at least 4 records");
  std::size_t lo = records.front().n, hi = records.front().n;
  for (const auto& r : records) {
    if (r.n == 0 || !(r.mean_seconds > 0.0))
      throw ContractError("fit_scaling_exponent: n and mean_seconds must be positive");
    lo = std::min(lo, r.n);
    hi = std::max(hi, r.n);
  }
  if (hi < 10 * lo) throw ContractError("fit_scaling_exponent: N range must span at least one decade");
  double sx = 0.0, sy = 0.0;
  for (const auto& r : records) {
    sx += std::log(static_cast<double>(r.n));
    sy += std::log(r.mean_seconds);
  }
  const double count = static_cast<double>(records.size());
  const double mx = sx / count, my = sy / count;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& r : records) {
    const double dx = std::log(static_cast<double>(r.n)) - mx;
    sxy += dx * (std::log(r.mean_seconds) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

// Drift allowed per 1e4 steps; longer runs scale linearly.
inline constexpr double kDefaultDriftBudget = 1e-5;
inline constexpr double kDefaultDeviationBudget = 1e-10;

inline double drift_budget_for(double per_1e4_steps, std::size_t steps) {
  return per_1e4_steps * std::max(1.0, static_cast<double>(steps) / 1e4);
}

struct BenchReport {
  std::vector<TimingRecord> records;
  std::string baseline = "reference";
  std::string hardware;
  std::string timestamp;
  double drift_budget = kDefaultDriftBudget;
  double deviation_budget = kDefaultDeviationBudget;
  std::vector<std::string> rejected;

  /// Adds `rec` only if its drift is within budget and, when given, its
  /// deviation from the reference trajectory for the same cell is too.
  bool admit(const TimingRecord& rec, std::optional<double> reference_deviation = std::nullopt) {
    const double budget = drift_budget_for(drift_budget, rec.steps);
    std::string cell = rec.backend + " n=" + std::to_string(rec.n);
    if (!(rec.max_norm_drift <= budget)) {
      rejected.push_back(cell + ": drift " + format_double(rec.max_norm_drift) + " > " + format_double(budget));
      return false;
    }
    if (reference_deviation && !(*reference_deviation <= deviation_budget)) {
      rejected.push_back(cell + ": deviation " + format_double(*reference_deviation) + " > " +
                         format_double(deviation_budget));
      return false;
    }
    records.push_back(rec);
    return true;
  }
};

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct FactorCell {
  std::string backend;
  std::size_t n = 0;
  std::size_t steps = 0;
  double dt = 0.0;
  double factor = 0.0;
  bool best = false;
};

/// factor = baseline mean / method mean per (n, steps, dt) cell; the largest
/// factor in each cell is flagged best.
inline std::vector<FactorCell> speedup_factors(const BenchReport& report) {
  using Key = std::tuple<std::size_t, std::size_t, double>;
  std::map<Key, double> base;
  for (const auto& r : report.records)
    if (r.backend == report.baseline) base[{r.n, r.steps, r.dt}] = r.mean_seconds;

  std::vector<FactorCell> cells;
  std::map<Key, double> best;
  for (const auto& r : report.records) {
    const Key key{r.n, r.steps, r.dt};
    auto it = base.find(key);
    if (it == base.end())
      throw ContractError("speedup_factors: no baseline '" + report.baseline + "' record for n=" +
                          std::to_string(r.n) + " steps=" + std::to_string(r.steps) +
                          " dt=" + format_double(r.dt));
    const double f = it->second / r.mean_seconds;
    cells.push_back({r.backend, r.n, r.steps, r.dt, f, false});
    auto [b, inserted] = best.emplace(key, f);
    if (!inserted) b->second = std::max(b->second, f);
  }
  for (auto& c : cells) c.best = c.factor == best[{c.n, c.steps, c.dt}];
  return cells;
}

/// One decimal place, as factors are displayed.
inline std::string format_factor(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", f);
  return buf;
}

/// Seconds below one minute, minutes from there on: "5.78s", "0.010s", "2.79m".
inline std::string format_duration(double seconds) {
  char buf[32];
  if (seconds >= 60.0)
    std::snprintf(buf, sizeof buf, "%.2fm", seconds / 60.0);
  else if (seconds >= 0.1)
    std::snprintf(buf, sizeof buf, "%.2fs", seconds);
  else
    std::snprintf(buf, sizeof buf, "%#.2gs", seconds);
  return buf;
}

enum class ReportFormat { csv, markdown };

inline constexpr const char* kReportCsvHeader =
    "backend,n,steps,dt,repetitions,mean_s,std_s,max_norm_drift,factor_vs_base";

inline std::string emit_report(const BenchReport& report, ReportFormat format) {
  if (report.records.empty()) throw ContractError("emit_report: report has no records");
  const auto factors = speedup_factors(report);
  std::ostringstream os;

  if (format == ReportFormat::csv) {
    os << kReportCsvHeader << '\n';
    for (std::size_t i = 0; i < report.records.size(); ++i) {
      const auto& r = report.records[i];
      os << r.backend << ',' << r.n << ',' << r.steps << ',' << format_double(r.dt) << ','
         << r.repetitions << ',' << format_double(r.mean_seconds) << ','
         << format_double(r.std_seconds) << ',' << format_double(r.max_norm_drift) << ','
         << format_double(factors[i].factor) << '\n';
    }
    return os.str();
  }

  os << "# Benchmark report\n\n";
  os << "- hardware: " << (report.hardware.empty() ? "unspecified" : report.hardware) << '\n';
  os << "- timestamp: " << report.timestamp << '\n';
  os << "- baseline: " << report.baseline << "\n";

  std::set<std::pair<std::size_t, double>> protocols;
  for (const auto& r : report.records) protocols.insert({r.steps, r.dt});
  for (const auto& [steps, dt] : protocols) {
    std::vector<std::string> backends;
    std::set<std::size_t> ns;
    std::map<std::pair<std::string, std::size_t>, std::size_t> at;
    for (std::size_t i = 0; i < report.records.size(); ++i) {
      const auto& r = report.records[i];
      if (r.steps != steps || r.dt != dt) continue;
      if (std::find(backends.begin(), backends.end(), r.backend) == backends.end())
        backends.push_back(r.backend);
      ns.insert(r.n);
      at[{r.backend, r.n}] = i;
    }
    std::map<std::size_t, double> fastest;
    for (const auto& [key, i] : at) {
      auto [it, inserted] = fastest.emplace(key.second, report.records[i].mean_seconds);
      if (!inserted) it->second = std::min(it->second, report.records[i].mean_seconds);
    }

    auto header = [&](const char* title) {
      char dt_text[32];
      std::snprintf(dt_text, sizeof dt_text, "%g", dt);
      os << "\n## " << title << " (steps = " << steps << ", dt = " << dt_text << ")\n\n";
      os << "| Backend |";
      for (auto n : ns) os << ' ' << n << " |";
      os << "\n|---|";
      for (std::size_t j = 0; j < ns.size(); ++j) os << "---:|";
      os << '\n';
    };

    header("Computation time");
    for (const auto& b : backends) {
      os << "| " << b << " |";
      for (auto n : ns) {
        auto it = at.find({b, n});
        if (it == at.end()) {
          os << " X |";
          continue;
        }
        const double t = report.records[it->second].mean_seconds;
        const std::string cell = format_duration(t);
        os << ' ' << (t == fastest[n] ? "**" + cell + "**" : cell) << " |";
      }
      os << '\n';
    }

    header("Speed factor vs baseline");
    for (const auto& b : backends) {
      os << "| " << b << " |";
      for (auto n : ns) {
        auto it = at.find({b, n});
        if (it == at.end()) {
          os << " X |";
          continue;
        }
        const FactorCell& f = factors[it->second];
        const std::string cell = format_factor(f.factor);
        os << ' ' << (f.best ? "**" + cell + "**" : cell) << " |";
      }
      os << '\n';
    }
  }

  if (!report.rejected.empty()) {
    os << "\n## Rejected cells\n\n";
    for (const auto& r : report.rejected) os << "- " << r << '\n';
  }
  return os.str();
}

struct ReportRow {
  TimingRecord record;
  double factor_vs_base = 0.0;
};

/// Parses the CSV produced by emit_report.
inline std::vector<ReportRow> parse_report_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kReportCsvHeader)
    throw ConfigError("report CSV: unexpected header", 1);
  std::vector<ReportRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw ConfigError("report CSV: expected 9 fields", lineno);
    ReportRow row;
    row.record.backend = std::string(f[0]);
    row.record.n = static_cast<std::size_t>(parse_double(f[1]));
    row.record.steps = static_cast<std::size_t>(parse_double(f[2]));
    row.record.dt = parse_double(f[3]);
    row.record.repetitions = static_cast<std::size_t>(parse_double(f[4]));
    row.record.mean_seconds = parse_double(f[5]);
    row.record.std_seconds = parse_double(f[6]);
    row.record.max_norm_drift = parse_double(f[7]);
    row.factor_vs_base = parse_double(f[8]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace spinres

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hrc/config_io.hpp"
#include "hrc/sim/compare.hpp"
#include "hrc/sim/engine.hpp"
#include "hrc/sim/metrics.hpp"
#include "hrc/sim/noise_calibration.hpp"
#include "hrc/sim/trace_io.hpp"
#include "serve.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << content;
}

template <typename F>
std::string render(F&& f)
{
  std::ostringstream os;
  f(os);
  return os.str();
}

void print_metrics(const hrc::sim::Metrics& m, std::ostream& os)
{
  using hrc::sim::fmt9;
  os << "task_time        " << fmt9(m.task_time) << " s" << (m.completed ? "" : " (incomplete)") << '\n';
  os << "tcp_path_length  " << fmt9(m.tcp_path_length) << " m\n";
  if (m.collision_path) {
    os << "collision_path   " << fmt9(*m.collision_path) << " m\n";
  }
  if (m.distance_samples > 0) {
    os << "min_d_RO         " << fmt9(m.min_d_ro) << " m\n";
    os << "mean_d_RO        " << fmt9(m.mean_d_ro) << " m\n";
    os << "occlusion_time   " << fmt9(m.occlusion_time) << " s\n";
  }
  os << "fdcm_count       " << m.fdcm_count << '\n';
}

int cmd_run(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed)
{
  auto cfg = hrc::load_scenario(config_path);
  if (seed) {
    cfg.seed = *seed;
    cfg.noise.seed = *seed;
  }
  const hrc::sim::SimTrace trace = hrc::sim::run(cfg);
  std::optional<hrc::sim::SimTrace> baseline;
  if (cfg.hand.kind != hrc::sim::HandKind::None) {
    baseline = hrc::sim::run(hrc::sim::baseline_of(cfg));
  }
  const auto metrics = hrc::sim::compute_metrics(trace, baseline ? &*baseline : nullptr);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  write_file(out / "trace.csv", render([&](std::ostream& os) { hrc::sim::write_csv(trace, os); }));
  write_file(out / "trace.jsonl", render([&](std::ostream& os) { hrc::sim::write_jsonl(trace, os); }));
  write_file(out / "metrics.json", hrc::sim::metrics_to_json(metrics).dump(2) + "\n");

  std::cout << "scenario " << trace.scenario << " seed " << trace.seed << ", " << trace.rows.size() << " rows\n";
  print_metrics(metrics, std::cout);
  return kExitOk;
}

int cmd_calibrate(const std::vector<double>& targets, std::size_t samples, const std::string& out)
{
  const hrc::Vec3 t(targets[0], targets[1], targets[2]);
  const auto r = hrc::sim::calibrate_noise(t, samples);
  nlohmann::json j = {{"schema", "hrc.noise"},
                      {"version", 1},
                      {"targets", {t[0], t[1], t[2]}},
                      {"sigma", {r.sigma[0], r.sigma[1], r.sigma[2]}},
                      {"achieved_mean_abs", {r.achieved_mean_abs[0], r.achieved_mean_abs[1], r.achieved_mean_abs[2]}},
                      {"achieved_radial", r.achieved_radial},
                      {"samples", samples},
                      {"iterations", r.iterations}};
  if (!out.empty()) {
    const fs::path p(out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_file(p, j.dump(2) + "\n");
  }
  using hrc::sim::fmt9;
  std::cout << "sigma              " << fmt9(r.sigma[0]) << ' ' << fmt9(r.sigma[1]) << ' ' << fmt9(r.sigma[2]) << " m\n";
  std::cout << "mean |error|       " << fmt9(r.achieved_mean_abs[0]) << ' ' << fmt9(r.achieved_mean_abs[1]) << ' '
            << fmt9(r.achieved_mean_abs[2]) << " m\n";
  std::cout << "mean radial error  " << fmt9(r.achieved_radial) << " m\n";
  return kExitOk;
}

hrc::sim::SimTrace load_trial(const fs::path& dir)
{
  const fs::path p = dir / "trace.jsonl";
  std::ifstream in(p);
  if (!in) {
    throw UsageError("missing trial trace: " + p.string());
  }
  try {
    return hrc::sim::read_jsonl(in);
  } catch (const std::exception& e) {
    throw UsageError(p.string() + ": " + e.what());
  }
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out_dir)
{
  hrc::sim::TrialTraces t;
  t.baseline = load_trial(dirs[0]);
  t.static_marker = load_trial(dirs[1]);
  t.gimbal = load_trial(dirs[2]);
  t.haptic = load_trial(dirs[3]);
  hrc::sim::TrialComparison c;
  try {
    c = hrc::sim::compare_trials(t);
  } catch (const hrc::sim::MetricsError& e) {
    throw UsageError(e.what());
  }
  const std::string table = render([&](std::ostream& os) { hrc::sim::write_comparison_table(c, os); });
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    write_file(out / "comparison.json", hrc::sim::comparison_to_json(c).dump(2) + "\n");
    write_file(out / "comparison.csv", table);
    write_file(out / "distance_histogram.csv",
               render([&](std::ostream& os) { hrc::sim::write_histogram_csv(c, os); }));
    write_file(out / "distance_vs_time.csv", render([&](std::ostream& os) { hrc::sim::write_distance_csv(t, os); }));
  }
  using hrc::sim::fmt9;
  std::cout << table;
  std::cout << "task time improvement (gimbal vs static)       " << fmt9(c.task_time_improvement_pct()) << " %\n";
  std::cout << "task time improvement (haptic vs static)       " << fmt9(c.haptic_task_time_improvement_pct()) << " %\n";
  std::cout << "collision path reduction (haptic vs static)    " << fmt9(c.collision_path_reduction_pct()) << " %\n";
  std::cout << "mean distance increase (haptic vs gimbal)      " << fmt9(c.mean_distance_increase()) << " m\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Human-robot collaboration simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run a scenario and write trace and metrics files");
  run->add_option("--config", config, "Scenario file")->required();
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--seed", seed, "Override the scenario seed");

  std::vector<double> targets{0.008, 0.007, 0.011};
  std::size_t samples = 1000000;
  auto* cal = app.add_subcommand("calibrate-noise", "Fit per-axis noise sigma to target mean absolute errors");
  cal->add_option("--targets", targets, "Mean absolute error per camera axis, m")->expected(3);
  cal->add_option("--samples", samples, "Monte-Carlo draws")->check(CLI::PositiveNumber);
  cal->add_option("--out", out, "Write the fitted model as JSON");

  std::vector<std::string> dirs;
  auto* cmp = app.add_subcommand("compare", "Compare baseline, static, gimbal and haptic trial outputs");
  cmp->add_option("trials", dirs, "Trial output directories: baseline static gimbal haptic")->expected(4)->required();
  cmp->add_option("--out", out, "Directory for comparison and plot data");

  std::string bind = "127.0.0.1:8765";
  double stream_hz = 30.0;
  auto* serve = app.add_subcommand("serve", "Run an interactive session over websocket");
  serve->add_option("--config", config, "Scenario file")->required();
  serve->add_option("--bind", bind, "host:port to listen on (port 0 picks a free port)");
  serve->add_option("--stream-hz", stream_hz, "State frame rate")->check(CLI::Range(1.0, 1000.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) {
      return cmd_run(config, out, seed);
    }
    if (*cal) {
      for (double t : targets) {
        if (!(t >= 0.0)) throw UsageError("targets must be non-negative");
      }
      return cmd_calibrate(targets, samples, out);
    }
    if (*cmp) {
      return cmd_compare(dirs, out);
    }
    if (*serve) {
      return hrcsim::serve(hrc::load_scenario(config), bind, stream_hz);
    }
  } catch (const hrc::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const hrc::SimulationAbort& e) {
    std::cerr << "simulation aborted: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

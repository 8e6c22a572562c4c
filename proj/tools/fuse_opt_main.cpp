// fuse-opt: experiment runner for the hybrid first/second-order optimizer
// library. Subcommands: run, race, check-grad, plot-data.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fuseopt/fuseopt.hpp"

namespace {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("FUSE_OPT_LOG");
  if (env == nullptr) return LogLevel::info;
  const std::string v(env);
  if (v == "quiet") return LogLevel::quiet;
  if (v == "info") return LogLevel::info;
  if (v == "debug") return LogLevel::debug;
  std::cerr << "fuse-opt: ignoring unknown FUSE_OPT_LOG value '" << v << "'\n";
  return LogLevel::info;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::info) std::cerr << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::debug) std::cerr << msg << "\n";
}

std::vector<std::uint64_t> parse_seed_list(const std::string& arg) {
  std::vector<std::uint64_t> seeds;
  std::size_t at = 0;
  while (at <= arg.size()) {
    const std::size_t pos = arg.find(',', at);
    const std::string tok = arg.substr(at, pos == std::string::npos ? pos : pos - at);
    if (!tok.empty()) {
      try {
        seeds.push_back(std::stoull(tok));
      } catch (...) {
        throw fuseopt::config_error("bad seed value: '" + tok + "'");
      }
    }
    if (pos == std::string::npos) break;
    at = pos + 1;
  }
  if (seeds.empty()) throw fuseopt::config_error("no seeds given");
  return seeds;
}

std::vector<std::string> parse_path_list(const std::string& arg) {
  std::vector<std::string> out;
  std::size_t at = 0;
  while (at <= arg.size()) {
    const std::size_t pos = arg.find(',', at);
    const std::string tok = arg.substr(at, pos == std::string::npos ? pos : pos - at);
    if (!tok.empty()) out.push_back(tok);
    if (pos == std::string::npos) break;
    at = pos + 1;
  }
  return out;
}

int cmd_run(const std::string& config_path, const std::string& output_override) {
  fuseopt::RunConfig cfg = fuseopt::load_run_config(config_path);
  if (!output_override.empty()) cfg.output = output_override;
  log_debug("running " + cfg.objective_name + " / " + cfg.optimizer_name + " seed " +
            std::to_string(cfg.seed));
  const fuseopt::RunResult r = fuseopt::run_experiment(cfg);
  if (!cfg.output.empty()) {
    fuseopt::write_trace_csv(cfg.output, r.trace);
  } else {
    fuseopt::write_trace_csv(std::cout, r.trace);
  }
  std::string line = "final_loss=" + fuseopt::format_double17(r.summary.final_loss) +
                     " best_loss=" + fuseopt::format_double17(r.summary.best_loss) +
                     " iterations=" + std::to_string(r.summary.iterations);
  if (r.summary.switch_iter) line += " switch_iter=" + std::to_string(*r.summary.switch_iter);
  if (r.summary.test_accuracy) {
    line += " test_accuracy=" + fuseopt::format_double17(*r.summary.test_accuracy);
  }
  log_info(line);
  if (r.summary.failed) {
    log_info("run aborted: " + r.summary.failure);
    return 1;
  }
  return 0;
}

int cmd_race(const std::string& config_path, const std::string& seeds_arg,
             const std::string& output_override) {
  std::ifstream in(config_path);
  if (!in) throw fuseopt::io_error("cannot open config file: " + config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw fuseopt::config_error("config parse failure in " + config_path + ": " + e.what());
  }
  if (!j.contains("configs") || !j.at("configs").is_array() || j.at("configs").empty()) {
    throw fuseopt::config_error("race config needs a non-empty 'configs' array");
  }
  std::vector<fuseopt::RunConfig> configs;
  for (const auto& item : j.at("configs")) {
    configs.push_back(fuseopt::parse_run_config(item));
  }
  const auto seeds = parse_seed_list(seeds_arg);
  std::string output = output_override;
  if (output.empty() && j.contains("output")) output = j.at("output").get<std::string>();

  const auto rows = fuseopt::run_race(configs, seeds);
  if (output.empty()) {
    fuseopt::write_race_csv(std::cout, rows);
  } else {
    fuseopt::write_race_csv(output, rows);
    log_info("race table written to " + output);
  }
  return 0;
}

int cmd_check_grad(const std::string& function, int points, double h, std::uint64_t seed) {
  struct Entry {
    std::string name;
    std::shared_ptr<fuseopt::Objective> obj;
    double lo, hi;
  };
  std::vector<Entry> entries;
  const auto add_analytic = [&](const std::string& name, fuseopt::AnalyticObjective::Fn fn,
                                double lo, double hi) {
    entries.push_back({name, std::make_shared<fuseopt::AnalyticObjective>(2, fn), lo, hi});
  };
  if (function == "rosenbrock" || function == "all")
    add_analytic("rosenbrock", &fuseopt::rosenbrock2d, -2.0, 2.0);
  if (function == "rastrigin" || function == "all")
    add_analytic("rastrigin", &fuseopt::rastrigin2d, -5.12, 5.12);
  if (function == "ackley" || function == "all")
    add_analytic("ackley", &fuseopt::ackley2d, -5.0, 5.0);
  if (function == "himmelblau" || function == "all")
    add_analytic("himmelblau", &fuseopt::himmelblau, -5.0, 5.0);
  if (function == "logistic" || function == "all") {
    entries.push_back({"logistic",
                       std::make_shared<fuseopt::LogisticObjective>(
                           fuseopt::make_synthetic_classification(64, 6, 2.0, seed)),
                       -1.0, 1.0});
  }
  if (entries.empty()) {
    throw fuseopt::config_error("unknown function '" + function +
                                "' (rosenbrock|rastrigin|ackley|himmelblau|logistic|all)");
  }

  bool ok = true;
  for (const auto& entry : entries) {
    fuseopt::Xoshiro256StarStar rng(seed);
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
      std::vector<double> coords(entry.obj->dimension());
      for (auto& c : coords) c = rng.uniform(entry.lo, entry.hi);
      worst = std::max(worst, fuseopt::check_gradient(*entry.obj, fuseopt::Point(coords), h));
    }
    const bool pass = worst <= 1e-5;
    ok = ok && pass;
    std::cout << entry.name << ": max_rel_error=" << fuseopt::format_double17(worst) << " "
              << (pass ? "ok" : "FAIL") << "\n";
  }
  return ok ? 0 : 1;
}

int cmd_plot_data(const std::string& inputs_arg, const std::string& out_path) {
  const auto paths = parse_path_list(inputs_arg);
  if (paths.empty()) throw fuseopt::config_error("plot-data needs at least one input trace");
  std::vector<std::pair<std::string, std::vector<fuseopt::TraceRecord>>> traces;
  for (const auto& p : paths) {
    traces.emplace_back(std::filesystem::path(p).stem().string(), fuseopt::read_trace_csv(p));
  }
  fuseopt::emit_plot_data(traces, out_path);
  log_info("plot data written to " + out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid first/second-order stochastic optimization harness"};
  app.require_subcommand(1);

  std::string config_path, output_override, seeds_arg = "1", function = "all";
  std::string inputs_arg, out_path = "curves.csv";
  int points = 100;
  double h = 1e-5;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--output", output_override, "trace CSV path (overrides config)");

  auto* race = app.add_subcommand("race", "run several configs across seeds");
  race->add_option("--config", config_path, "race config file")->required();
  race->add_option("--seeds", seeds_arg, "comma-separated seeds")->required();
  race->add_option("--out", output_override, "race table path (overrides config)");

  auto* check = app.add_subcommand("check-grad", "audit analytic gradients");
  check->add_option("--function", function, "function name or 'all'");
  check->add_option("--points", points, "seeded sample points per function");
  check->add_option("--h", h, "central difference step");
  check->add_option("--seed", seed, "sampling seed");

  auto* plot = app.add_subcommand("plot-data", "merge traces into long-format curve data");
  plot->add_option("--inputs", inputs_arg, "comma-separated trace CSVs")->required();
  plot->add_option("--out", out_path, "output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, output_override);
    if (race->parsed()) return cmd_race(config_path, seeds_arg, output_override);
    if (check->parsed()) return cmd_check_grad(function, points, h, seed);
    if (plot->parsed()) return cmd_plot_data(inputs_arg, out_path);
  } catch (const fuseopt::config_error& e) {
    std::cerr << "fuse-opt: config error: " << e.what() << "\n";
    return 2;
  } catch (const fuseopt::schema_error& e) {
    std::cerr << "fuse-opt: schema error: " << e.what() << "\n";
    return 2;
  } catch (const fuseopt::parse_error& e) {
    std::cerr << "fuse-opt: parse error: " << e.what() << "\n";
    return 2;
  } catch (const fuseopt::io_error& e) {
    std::cerr << "fuse-opt: io error: " << e.what() << "\n";
    return 3;
  } catch (const fuseopt::numeric_error& e) {
    std::cerr << "fuse-opt: numeric error: " << e.what() << "\n";
    return 1;
  } catch (const fuseopt::error& e) {
    std::cerr << "fuse-opt: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

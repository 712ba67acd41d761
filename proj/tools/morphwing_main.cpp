#include "morphwing/config.hpp"
#include "morphwing/scenario.hpp"
#include "morphwing/units.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

namespace fs = std::filesystem;
using namespace morphwing;

namespace {

struct Overrides {
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::string dt;
};

fs::path output_root() {
  if (const char* env = std::getenv("MORPHWING_OUTPUT_ROOT"); env && *env) return env;
  return "runs";
}

config::ScenarioConfig prepare(const fs::path& path, const Overrides& o) {
  config::ScenarioConfig cfg = config::load(path.string());
  if (o.seed) cfg.seed = *o.seed;
  if (!o.dt.empty()) {
    const double dt = units::parse(o.dt, units::Dimension::time);
    if (!(dt > 0.0)) throw ConfigError("--dt must be positive");
    cfg.flight.dt = dt;
    cfg.march.dt = dt;
    cfg.governor.dt = dt;
  }
  config::validate(cfg);
  return cfg;
}

fs::path run_dir(const config::ScenarioConfig& cfg, const fs::path& config_path, const Overrides& o) {
  if (!o.output_dir.empty()) return o.output_dir;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return output_root() / config_path.stem();
}

int run_one(const fs::path& path, const Overrides& o, std::ostream& log, std::ostream& err) {
  try {
    const config::ScenarioConfig cfg = prepare(path, o);
    const auto result = scenario::run_scenario(cfg, run_dir(cfg, path, o));
    log << path.string() << ": ok, " << result.artifacts.size() << " artifacts in " << result.output_dir.string()
        << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << path.string() << ": error: " << e.what() << '\n';
    return scenario::exit_code(e);
  }
}

int run_sweep(const fs::path& dir, const Overrides& o) {
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".yaml" || ext == ".yml")) configs.push_back(entry.path());
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    std::cerr << "no configs in " << dir.string() << '\n';
    return 1;
  }
  const fs::path root = o.output_dir.empty() ? output_root() : fs::path(o.output_dir);
  std::vector<int> codes(configs.size(), 0);
  std::atomic<std::size_t> next{0};
  std::mutex io;
  const auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      Overrides mine = o;
      mine.output_dir = (root / configs[i].stem()).string();
      std::ostringstream log;
      codes[i] = run_one(configs[i], mine, log, log);
      std::lock_guard<std::mutex> lock(io);
      std::cout << log.str() << std::flush;
    }
  };
  const std::size_t n = std::min<std::size_t>(configs.size(), std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return *std::max_element(codes.begin(), codes.end());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario runner for the morphing-wing flight models"};
  app.require_subcommand(1);

  Overrides o;
  std::uint64_t seed = 0;
  std::string config_path, sweep_dir;

  auto* run = app.add_subcommand("run", "Run a scenario config (or a directory of them with --sweep)");
  run->add_option("config", config_path, "Scenario YAML file");
  run->add_option("--output-dir", o.output_dir, "Artifact directory (sweep: root of per-run directories)");
  auto* seed_opt = run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--dt", o.dt, "Override every integration step, e.g. 1e-4s or 0.1ms");
  run->add_option("--sweep", sweep_dir, "Run every config in a directory in parallel")->check(CLI::ExistingDirectory);

  auto* validate = app.add_subcommand("validate", "Check a config and print it normalized");
  std::string validate_path;
  validate->add_option("config", validate_path, "Scenario YAML file")->required();

  CLI11_PARSE(app, argc, argv);

  if (*validate) {
    try {
      const config::ScenarioConfig cfg = config::load(validate_path);
      std::cout << config::emit(cfg);
      return 0;
    } catch (const std::exception& e) {
      std::cerr << e.what() << '\n';
      return scenario::exit_code(e);
    }
  }

  if (*seed_opt) o.seed = seed;
  if (!sweep_dir.empty()) {
    if (!config_path.empty()) {
      std::cerr << "give either a config file or --sweep, not both\n";
      return 1;
    }
    return run_sweep(sweep_dir, o);
  }
  if (config_path.empty()) {
    std::cerr << "run: a config file or --sweep <dir> is required\n";
    return 1;
  }
  return run_one(config_path, o, std::cout, std::cerr);
}

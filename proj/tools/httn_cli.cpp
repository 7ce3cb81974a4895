#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "httn/experiment.hpp"

using namespace httn;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw experiment::ConfigError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid tree tensor network experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> realizations;
  std::string out_dir = "out";
  std::size_t workers = 1;
  bool no_timing = false;

  auto* run = app.add_subcommand("run", "Run an experiment campaign");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seed", seed, "Base seed (overrides the config)");
  run->add_option("--realizations", realizations, "Number of realizations (overrides the config)")
      ->check(CLI::PositiveNumber);
  run->add_option("--out-dir", out_dir, "Output directory");
  run->add_option("--workers", workers, "Parallel realizations")->check(CLI::PositiveNumber);
  run->add_flag("--no-timing", no_timing, "Write zero wall times for bit-identical traces");

  auto* reference = app.add_subcommand("reference", "Exact ground energy of the configured model");
  reference->add_option("config", config_path, "Experiment config (JSON)")->required();
  std::string reference_out;
  reference->add_option("-o,--output", reference_out, "Write the reference JSON here as well");

  auto* compare = app.add_subcommand("compare", "Per-sweep deviation from the exact energy");
  std::vector<std::string> traces;
  std::string reference_path;
  compare->add_option("traces", traces, "Trace CSV files")->required();
  compare->add_option("--reference", reference_path, "Reference or summary JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what(), 2);
  }

  try {
    if (*run) {
      auto config = experiment::ExperimentConfig::from_json(slurp(config_path));
      if (seed) config.seed = *seed;
      if (realizations) config.realizations = *realizations;
      config.validate();
      experiment::RunOptions options;
      options.out_dir = out_dir;
      options.workers = workers;
      options.timing = !no_timing;
      const auto summary = experiment::run(config, options);
      const auto& best = summary.results[summary.best];
      json j = {{"config_hash", config.hash()},
                {"best_seed", best.seed},
                {"best_energy", best.final_energy},
                {"failed", std::count_if(summary.results.begin(), summary.results.end(),
                                         [](const auto& r) { return r.failed; })}};
      if (summary.exact) j["exact"] = *summary.exact;
      std::cout << j.dump() << '\n';
      return best.failed ? 3 : 0;
    }
    if (*reference) {
      const auto config = experiment::ExperimentConfig::from_json(slurp(config_path));
      const auto e = experiment::reference_energy(config);
      if (!e) return fail("infeasible", "no exact energy for " + std::to_string(config.n_sites()) + " sites", 4);
      const std::string text = experiment::reference_json(config, *e);
      if (!reference_out.empty()) {
        std::ofstream out(reference_out);
        out << text;
      }
      std::cout << text;
      return 0;
    }
    if (*compare) {
      std::vector<std::string> texts;
      for (const auto& t : traces) texts.push_back(slurp(t));
      std::cout << experiment::compare(texts, slurp(reference_path));
      return 0;
    }
  } catch (const experiment::ConfigError& e) {
    return fail("validation", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 3);
  }
  return 0;
}

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "projcons/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"projcons: distributed projection-consensus solver for Ax = b"};

  std::string config_path;
  std::string recipe_name;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<long> max_steps;
  std::optional<double> tol;

  app.add_option("--config", config_path, "Path to an experiment config (JSON)");
  app.add_option("--recipe", recipe_name, "Name of a canned experiment");
  app.add_option("--seed", seed, "Override the top-level seed");
  app.add_option("--out", out_dir, "Output directory for trace.csv and summary.json");
  app.add_option("--max-steps", max_steps, "Override engine.max_steps");
  app.add_option("--tol", tol, "Override engine.tol");

  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json config;
    if (!recipe_name.empty() && !config_path.empty())
      throw projcons::ConfigError("pass either --config or --recipe, not both");
    if (!recipe_name.empty()) {
      config = projcons::recipe_config(recipe_name);
    } else if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw projcons::ConfigError("cannot open config file: " + config_path);
      in >> config;
    } else {
      std::cerr << "error: one of --config or --recipe is required\n";
      std::cerr << "recipes:";
      for (const auto& name : projcons::recipe_names()) std::cerr << ' ' << name;
      std::cerr << '\n';
      return 1;
    }

    if (seed) config["seed"] = *seed;
    if (out_dir) config["out"] = *out_dir;
    if (max_steps) config["engine"]["max_steps"] = *max_steps;
    if (tol) config["engine"]["tol"] = *tol;

    const int code = projcons::run_experiment(config);
    const std::string out = config.value("out", std::string("out"));
    std::cout << "wrote " << out << "/trace.csv and " << out << "/summary.json\n";
    if (code == 2) std::cout << "run did not converge within max_steps (exit 2)\n";
    return code;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: invalid config JSON: " << e.what() << '\n';
    return 1;
  } catch (const projcons::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "wclab/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"wclab experiment runner"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  std::string config_path;
  run->add_option("config", config_path, "path to the experiment config (JSON)")
      ->required();
  std::uint64_t seed = 0;
  std::int64_t samples = 0;
  std::string out_dir;
  int workers = 0;
  bool verify_invariants = false;
  CLI::Option* seed_opt = run->add_option("--seed", seed, "override the seed");
  CLI::Option* samples_opt =
      run->add_option("--samples", samples, "override the sample count");
  CLI::Option* out_opt = run->add_option("--out", out_dir, "output directory");
  CLI::Option* workers_opt =
      run->add_option("--workers", workers, "worker pool size");
  run->add_flag("--verify-invariants", verify_invariants,
                "run the module invariant suites instead of the experiment");

  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot open config file '" << config_path << "'\n";
      return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();

    wclab::ExperimentConfig cfg = wclab::parse_config(buf.str());
    wclab::RunFlags flags;
    if (*seed_opt) flags.seed = seed;
    if (*samples_opt) flags.samples = samples;
    if (*out_opt) flags.out_dir = out_dir;
    if (*workers_opt) flags.workers = workers;
    flags.verify_invariants = verify_invariants;
    return wclab::run_experiment(std::move(cfg), flags, std::cout);
  } catch (const wclab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

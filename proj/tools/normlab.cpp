// normlab <experiment> --config <file> [--seed S] [--out-dir DIR] [--threads T]

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "normlab/harness.hpp"

namespace {

const char* const kExperiments[] = {"exact-norm",   "empirical-norm", "distortion", "xi-sweep",
                                    "scalar-sweep", "concentration",  "net-build"};

int report_error(const normlab::Error& e) {
  normlab::json err = {{"kind", normlab::to_string(e.kind())}, {"message", e.message()}};
  if (e.index()) err["trial"] = *e.index();
  std::cerr << normlab::json{{"error", err}}.dump() << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"normlab: randomized norm symmetrization experiments"};
  app.set_version_flag("--version", std::string(NORMLAB_VERSION));
  app.require_subcommand(1);

  std::string config_file;
  std::uint64_t seed = 0;
  std::string out_dir;
  unsigned threads = 0;

  for (const char* name : kExperiments) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", config_file, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed override");
    sub->add_option("--out-dir", out_dir, "output directory (default: output.dir or .)");
    sub->add_option("--threads", threads, "worker threads (default: NORMLAB_THREADS or hardware)");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string experiment = app.get_subcommands().front()->get_name();
  auto* sub = app.get_subcommands().front();
  try {
    auto config = normlab::load_config(config_file);
    if (config.value("experiment", experiment) != experiment) {
      throw normlab::Error(normlab::ErrorKind::config, "config.experiment: \"" + config["experiment"].get<std::string>() +
                                                            "\" does not match subcommand \"" + experiment + "\"");
    }
    config["experiment"] = experiment;

    normlab::RunOptions opt;
    if (sub->count("--seed")) opt.seed = seed;
    opt.threads = sub->count("--threads") ? threads : normlab::default_thread_count();
    if (opt.threads == 0) opt.threads = 1;

    std::string dir = ".";
    if (config.contains("output") && config["output"].contains("dir")) dir = config["output"]["dir"].get<std::string>();
    if (sub->count("--out-dir")) dir = out_dir;

    const auto run = normlab::run_experiment(config, opt);
    for (const auto& path : normlab::write_outputs(run, dir)) std::cout << path << "\n";
    return 0;
  } catch (const normlab::Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    return report_error(normlab::Error(normlab::ErrorKind::invalid_argument, e.what()));
  }
}

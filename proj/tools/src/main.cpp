#include "denoise_lab/errors.hpp"
#include "denoise_lab/tools/config.hpp"
#include "denoise_lab/tools/experiments.hpp"
#include "denoise_lab/tools/output.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;
constexpr int kAssumptionViolation = 3;
constexpr int kTrainingDiverged = 4;

struct Options {
  std::string config;
  std::vector<double> eta;
  std::uint64_t seed = 0;
  std::string out;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace denoise_lab;
  using namespace denoise_lab::tools;

  CLI::App app{"Distributional denoising experiments"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  Options opt;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"demo1d", "1D mixture: kernel densities of the four denoisers"},
      {"demo2d", "2D analytic signal: scatter of the four denoisers"},
      {"sweep", "second-moment, Wasserstein and energy errors over an eta grid"},
      {"ma", "Monge-Ampere residual slopes in eta"},
      {"moments", "bump-function moment error slopes in eta"},
      {"scorematch", "learned score, then the four denoisers on test samples"},
      {"verify", "identity battery; exit code 1 when a check fails"},
  };
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_opts;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "YAML experiment file");
    sub->add_option("--eta", opt.eta, "eta value(s), comma separated")->delimiter(',');
    seed_opts.push_back(sub->add_option("--seed", opt.seed, "random seed"));
    sub->add_option("--out", opt.out, "output directory");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  std::size_t index = 0;
  while (!subs[index]->parsed()) ++index;
  const Experiment experiment = experiment_from_string(commands[index].first);

  ExperimentConfig cfg;
  try {
    cfg = opt.config.empty() ? parse_config("{}", experiment) : load_config(opt.config, experiment);
    Overrides o;
    if (!opt.eta.empty()) o.eta = opt.eta;
    if (seed_opts[index]->count() > 0) o.seed = opt.seed;
    if (!opt.out.empty()) o.out_dir = opt.out;
    apply_overrides(cfg, o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    const RunOutput run = run_experiment(cfg);
    write_outputs(run, cfg);
    for (const auto& line : run.summary) std::cout << line << '\n';
    std::cout << "wrote " << cfg.out_dir << '/' << run.experiment << ".csv\n";
    if (run.assumption_violations > 0) {
      std::cerr << run.assumption_violations << " assumption violation(s); see the CSV status column\n";
      return kAssumptionViolation;
    }
    return run.checks_failed ? kFailure : kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const AssumptionViolation& e) {
    std::cerr << "assumption violation: " << e.what() << '\n';
    return kAssumptionViolation;
  } catch (const TrainingDiverged& e) {
    std::cerr << "training diverged at epoch " << e.epoch() << ": " << e.what() << '\n';
    return kTrainingDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}

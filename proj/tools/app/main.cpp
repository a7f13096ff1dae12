#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <CLI11.hpp>

#include "mvrl/data/idx.hpp"
#include "mvrl/errors.hpp"
#include "run.hpp"

namespace {

using namespace mvrl;
namespace fs = std::filesystem;

int fail(int code, const std::string& what) {
  std::fprintf(stderr, "error: %s\n", what.c_str());
  return code;
}

int dispatch(int argc, char** argv) {
  CLI::App cli{"Multiview variational and adversarial autoencoders"};
  cli.require_subcommand(1);

  std::string synth_out;
  std::size_t synth_count = 60000;
  std::uint64_t synth_seed = 0;
  auto* synth = cli.add_subcommand("synth-digits", "Write a synthetic MNIST-format digit set (IDX files)");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--count", synth_count, "Number of images")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Seed");

  std::string gen_config, gen_out;
  auto* gen = cli.add_subcommand("generate-dataset", "Build the paired dataset of a config and save it as .mvds");
  gen->add_option("--config", gen_config, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "Output .mvds file")->required();

  std::string train_config, train_out;
  auto* train = cli.add_subcommand("train", "Train one experiment into its run directory");
  train->add_option("--config", train_config, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
  train->add_option("--output", train_out, "Run directory (overrides output_dir)");

  std::string eval_dir;
  auto* evaluate = cli.add_subcommand("evaluate", "Probe matrix and posterior fit of a trained run");
  evaluate->add_option("--run", eval_dir, "Run directory")->required();

  std::string report_dir;
  auto* report = cli.add_subcommand("report", "Render figures of a trained run");
  report->add_option("--run", report_dir, "Run directory")->required();

  app::ReproduceOptions repro;
  std::string repro_out = "runs", repro_mnist;
  std::vector<std::size_t> repro_hidden;
  bool dry_run = false;
  auto* reproduce = cli.add_subcommand("reproduce", "Run a predefined experiment end to end");
  reproduce->add_option("--experiment", repro.experiment, "5.1a, 5.1b, 5.2a, 5.2b or 5.3")->required();
  reproduce->add_option("--scale", repro.scale, "Fraction of pairs and of the 100 epochs")->check(CLI::Range(1e-6, 1.0));
  reproduce->add_option("--out", repro_out, "Root of the run directories");
  reproduce->add_option("--mnist-dir", repro_mnist, "MNIST directory");
  reproduce->add_option("--hidden", repro_hidden, "Encoder/decoder hidden widths, e.g. --hidden 256 256");
  reproduce->add_option("--seed", repro.seed, "Master seed");
  reproduce->add_flag("--dry-run", dry_run, "Print the generated configs without training");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? app::kOk : app::kConfigFailure;
  }

  if (*synth) {
    app::synth_digits(synth_out, synth_count, synth_seed);
    std::printf("wrote %zu digits to %s\n", synth_count, synth_out.c_str());
  } else if (*gen) {
    const auto cfg = app::load_config(gen_config);
    std::string hashes;
    const auto ds = app::build_configured_dataset(cfg.dataset, &hashes);
    data::save_mvds(gen_out, ds, "{\"inputs\": " + hashes + "}");
    std::printf("wrote %zu pairs to %s\n", ds.size(), gen_out.c_str());
  } else if (*train) {
    auto cfg = app::load_config(train_config);
    if (!train_out.empty()) cfg.output_dir = train_out;
    std::ifstream in(train_config);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    app::run_train(cfg, text, cfg.output_dir);
  } else if (*evaluate) {
    app::run_evaluate(eval_dir);
  } else if (*report) {
    app::run_report(report_dir);
  } else if (*reproduce) {
    repro.out_root = repro_out;
    if (!repro_mnist.empty()) repro.mnist_dir = repro_mnist;
    if (!repro_hidden.empty()) repro.hidden = repro_hidden;
    if (dry_run) {
      for (const auto& c : app::experiment_configs(repro)) std::printf("# %s\n%s\n", c.name.c_str(), app::to_yaml(c).c_str());
    } else {
      app::run_reproduce(repro);
    }
  }
  return app::kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ConfigError& e) {
    return fail(app::kConfigFailure, e.what());
  } catch (const NumericError& e) {
    return fail(app::kNumericFailure, e.what());
  } catch (const DataError& e) {
    return fail(app::kDataFailure, e.what());
  } catch (const ParseError& e) {
    return fail(app::kDataFailure, e.what());
  } catch (const std::exception& e) {
    return fail(1, e.what());
  }
}

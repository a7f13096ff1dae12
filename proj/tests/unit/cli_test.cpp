#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "run.hpp"
#include "mvrl/errors.hpp"

namespace mvrl::app {
namespace {

namespace fs = std::filesystem;

// Curves without the wall-clock column.
std::string curves_without_seconds(const fs::path& p) {
  std::ifstream in(p);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool mentions(const ConfigError& e, const std::string& needle) {
  for (const auto& msg : e.errors()) {
    if (msg.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::vector<std::string> errors_of(const std::string& yaml) {
  try {
    parse_config(yaml);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

constexpr const char* kMinimal = R"(name: tiny
model:
  variant: acca
  z_dim: 2
priors:
  z:
    kind: standard_gaussian
)";

TEST(Config, MinimalConfigUsesDefaults) {
  const ExperimentConfig c = parse_config(kMinimal);
  EXPECT_EQ(c.name, "tiny");
  EXPECT_EQ(c.model.variant, models::Variant::kAcca);
  EXPECT_EQ(c.training.epochs, 100u);
  EXPECT_EQ(c.model.priors.at(models::Latent::kZ).kind(), PriorKind::kStandardGaussian);
}

TEST(Config, ReportsEveryProblemAtOnce) {
  const auto errs = errors_of(R"(name: bad
bogus_top: 1
model:
  variant: acca
  z_dim: -3
  widths: [1]
training:
  epochs: ten
)");
  ASSERT_GE(errs.size(), 3u);
  std::string all;
  for (const auto& e : errs) all += e + "\n";
  EXPECT_NE(all.find("bogus_top"), std::string::npos) << all;
  EXPECT_NE(all.find("model.widths"), std::string::npos) << all;
  EXPECT_NE(all.find("training.epochs"), std::string::npos) << all;
}

TEST(Config, VariationalModelWithPriorsNamesTheField) {
  try {
    parse_config(R"(model:
  variant: vcca_x
priors:
  z:
    kind: standard_gaussian
)");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(mentions(e, "priors")) << e.what();
  }
}

TEST(Config, AdversarialModelNeedsPriorForEveryLatent) {
  const auto errs = errors_of(R"(model:
  variant: acca_private
  z_dim: 2
  hx_dim: 2
  hy_dim: 2
priors:
  z:
    kind: standard_gaussian
)");
  EXPECT_FALSE(errs.empty());
}

TEST(Config, SyntaxErrorIsConfigError) { EXPECT_THROW(parse_config("model: [unclosed"), ConfigError); }

TEST(Config, YamlRoundTrip) {
  for (const char* name : {"5.1a_acca.yaml", "5.1b_acca.yaml", "5.2a_vcca_private.yaml", "5.3_acca_s_manifold.yaml"}) {
    const fs::path p = fs::path(MVRL_SOURCE_DIR) / "configs" / name;
    const ExperimentConfig c = load_config(p.string());
    const ExperimentConfig back = parse_config(to_yaml(c));
    EXPECT_EQ(to_yaml(back), to_yaml(c)) << name;
    EXPECT_EQ(to_json(back), to_json(c)) << name;
  }
}

TEST(Config, ExtraDecoderLayersAppendTwoLayers) {
  ExperimentConfig c = parse_config(kMinimal);
  c.extra_decoder_layers = true;
  EXPECT_EQ(c.resolved_model().decoder_hidden.size(), c.model.decoder_hidden.size() + 2);
}

TEST(Hash, GitBlobId) {
  const std::string hello = "hello\n";
  EXPECT_EQ(git_blob_hash(std::span(reinterpret_cast<const std::uint8_t*>(hello.data()), hello.size())),
            "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(git_blob_hash({}), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Reproduce, ExperimentConfigs) {
  ReproduceOptions o;
  o.experiment = "5.1a";
  o.scale = 0.1;
  const auto a = experiment_configs(o);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].model.z_dim, 5u);
  EXPECT_EQ(a[0].dataset.size, 6000u);
  EXPECT_EQ(a[0].training.epochs, 10u);

  o.experiment = "5.1b";
  for (const auto& c : experiment_configs(o)) {
    EXPECT_EQ(c.model.z_dim, 2u);
    EXPECT_TRUE(c.extra_decoder_layers);
  }
  o.experiment = "5.3";
  const auto s = experiment_configs(o);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].model.priors.at(models::Latent::kZ).kind(), PriorKind::kSManifold);
  EXPECT_EQ(s[1].model.hx_dim, 2u);

  o.experiment = "9.9";
  EXPECT_THROW(experiment_configs(o), ConfigError);
  o.experiment = "5.1a";
  o.scale = 0.0;
  EXPECT_THROW(experiment_configs(o), ConfigError);
}

class TinyRun : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / "mvrl_cli_test";
    fs::remove_all(root_);
    synth_digits(root_ / "mnist", 300, 5);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string config_text(const std::string& variant) const {
    std::string priors = variant == "acca" ? "priors:\n  z:\n    kind: standard_gaussian\n" : "";
    return "name: tiny\nseed: 3\ndataset:\n  mnist_dir: " + (root_ / "mnist").string() +
           "\n  size: 200\nmodel:\n  variant: " + variant +
           "\n  z_dim: 2\n  encoder_hidden: [16]\n  decoder_hidden: [16]\n  discriminator_hidden: [8]\n" + priors +
           "training:\n  epochs: 2\n  batch_size: 50\nevaluation:\n  samples: 50\n  figures: true\n";
  }

  fs::path root_;
};

TEST_F(TinyRun, TrainingIsDeterministicAndWritesArtifacts) {
  if (std::getenv("MVRL_MNIST_DIR")) GTEST_SKIP() << "MVRL_MNIST_DIR overrides the test dataset";
  const std::string text = config_text("acca");
  const ExperimentConfig c = parse_config(text);
  run_train(c, text, root_ / "a");
  run_train(c, text, root_ / "b");
  EXPECT_EQ(curves_without_seconds(root_ / "a" / "curves_losses.csv"),
            curves_without_seconds(root_ / "b" / "curves_losses.csv"));
  EXPECT_EQ(read_text(root_ / "a" / "checkpoint_final.mvrl"), read_text(root_ / "b" / "checkpoint_final.mvrl"));
  for (const char* f : {"config.yaml", "config.json", "provenance.json", "summary.json", "checkpoint_best.mvrl",
                        "checkpoint_final.mvrl", "evaluation.json", "info_matrix.csv", "eval_samples.mvds"}) {
    EXPECT_TRUE(fs::exists(root_ / "a" / f)) << f;
  }
  EXPECT_TRUE(fs::exists(root_ / "a" / "figures" / "grid_walk_x.png"));
  EXPECT_EQ(read_text(root_ / "a" / "provenance.json"), read_text(root_ / "b" / "provenance.json"));
}

TEST_F(TinyRun, VariationalRunEvaluatesAgain) {
  if (std::getenv("MVRL_MNIST_DIR")) GTEST_SKIP() << "MVRL_MNIST_DIR overrides the test dataset";
  const std::string text = config_text("vcca_xy");
  run_train(parse_config(text), text, root_ / "v");
  const std::string first = read_text(root_ / "v" / "evaluation.json");
  fs::remove(root_ / "v" / "evaluation.json");
  run_evaluate(root_ / "v");
  EXPECT_EQ(read_text(root_ / "v" / "evaluation.json"), first);
}

TEST_F(TinyRun, MissingMnistIsDataError) {
  if (std::getenv("MVRL_MNIST_DIR")) GTEST_SKIP() << "MVRL_MNIST_DIR overrides the test dataset";
  DatasetConfig d;
  d.mnist_dir = (root_ / "absent").string();
  EXPECT_THROW(build_configured_dataset(d), DataError);
}

}  // namespace
}  // namespace mvrl::app

#include <gtest/gtest.h>

#include <cmath>

#include "mvrl/errors.hpp"
#include "mvrl/nn/checkpoint.hpp"
#include "mvrl/nn/grad_check.hpp"
#include "mvrl/nn/mlp.hpp"
#include "mvrl/nn/optimizer.hpp"
#include "support.hpp"

namespace mvrl::nn {
namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

MlpParams random_params(const MlpSpec& spec, std::uint64_t seed) {
  Rng rng = make_rng(seed, 3);
  MlpParams p = init_params(spec, rng);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (auto& b : p.biases)
    for (double& v : b) v = u(rng);
  return p;
}

OutputLoss squared_loss(const Tensor2& target) {
  return [target](const Tensor2& out, Tensor2* grad) {
    double s = 0.0;
    if (grad) *grad = Tensor2(out.rows(), out.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double d = out.data()[i] - target.data()[i];
      s += 0.5 * d * d;
      if (grad) grad->data()[i] = d;
    }
    return s;
  };
}

TEST(Mlp, ZeroParametersGiveZeroOutput) {
  const MlpSpec spec{{3, 4, 2}, Activation::kRelu, Activation::kNone};
  const Tensor2 out = mlp_forward(spec, zero_params(spec), testing::random_tensor(5, 3, 1));
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Mlp, IdentityLayerCopiesInput) {
  const MlpSpec spec{{3, 3}, Activation::kRelu, Activation::kNone};
  MlpParams p = zero_params(spec);
  for (std::size_t i = 0; i < 3; ++i) p.weights[0](i, i) = 1.0;
  const Tensor2 in = testing::random_tensor(4, 3, 2);
  EXPECT_EQ(mlp_forward(spec, p, in), in);
}

TEST(Mlp, HandEvaluatedTwoLayerNet) {
  const MlpSpec spec{{2, 2, 1}, Activation::kRelu, Activation::kSigmoid};
  MlpParams p = zero_params(spec);
  p.weights[0] = Tensor2::from_rows({{0.5, -1.0}, {0.25, 2.0}});
  p.biases[0] = {0.1, -0.2};
  p.weights[1] = Tensor2::from_rows({{1.5}, {-0.5}});
  p.biases[1] = {0.3};
  const Tensor2 in = Tensor2::from_rows({{1.0, 2.0}});
  // hidden pre-activations: 0.5 + 0.5 + 0.1 = 1.1 and -1 + 4 - 0.2 = 2.8
  const double expected = sigmoid(1.5 * 1.1 - 0.5 * 2.8 + 0.3);
  EXPECT_NEAR(mlp_forward(spec, p, in)(0, 0), expected, 1e-15);
}

TEST(Mlp, ReluClipsNegativeHiddenUnits) {
  const MlpSpec spec{{1, 1, 1}, Activation::kRelu, Activation::kNone};
  MlpParams p = zero_params(spec);
  p.weights[0](0, 0) = -1.0;
  p.weights[1](0, 0) = 1.0;
  EXPECT_EQ(mlp_forward(spec, p, Tensor2::from_rows({{3.0}}))(0, 0), 0.0);
  EXPECT_EQ(mlp_forward(spec, p, Tensor2::from_rows({{-3.0}}))(0, 0), 3.0);
}

TEST(Mlp, SigmoidOutputsStayInsideUnitInterval) {
  const MlpSpec spec{{2, 3, 2}, Activation::kRelu, Activation::kSigmoid};
  MlpParams p = random_params(spec, 4);
  for (auto& w : p.weights)
    for (double& v : w.data()) v *= 20.0;
  const Tensor2 out = mlp_forward(spec, p, testing::random_tensor(50, 2, 5, -5, 5));
  for (double v : out.data()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(Mlp, ForwardIsDeterministic) {
  const MlpSpec spec{{4, 8, 3}, Activation::kRelu, Activation::kSigmoid};
  const MlpParams p = random_params(spec, 6);
  const Tensor2 in = testing::random_tensor(9, 4, 7);
  EXPECT_EQ(mlp_forward(spec, p, in), mlp_forward(spec, p, in));
}

TEST(Mlp, ShapeErrorsNameTheLayer) {
  const MlpSpec spec{{3, 4, 2}, Activation::kRelu, Activation::kNone};
  const MlpParams p = zero_params(spec);
  try {
    mlp_forward(spec, p, Tensor2(2, 5));
    FAIL();
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos);
  }
  MlpParams bad = p;
  bad.weights[1] = Tensor2(3, 2);
  try {
    mlp_forward(spec, bad, Tensor2(2, 3));
    FAIL();
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos);
  }
  EXPECT_THROW((MlpSpec{{3}, Activation::kRelu, Activation::kNone}.validate()), DimensionError);
  EXPECT_THROW((MlpSpec{{3, 0, 1}, Activation::kRelu, Activation::kNone}.validate()), DimensionError);
}

TEST(Mlp, InitShapesAndScale) {
  const MlpSpec spec{{100, 50, 10}, Activation::kRelu, Activation::kSigmoid};
  Rng rng(1);
  const MlpParams p = init_params(spec, rng);
  check_params(spec, p);
  const double he = std::sqrt(6.0 / 100.0), xavier = std::sqrt(6.0 / 60.0);
  for (double v : p.weights[0].data()) EXPECT_LE(std::abs(v), he);
  for (double v : p.weights[1].data()) EXPECT_LE(std::abs(v), xavier);
  for (const auto& b : p.biases)
    for (double v : b) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(parameter_count(spec), 100u * 50 + 50 + 50 * 10 + 10);
}

TEST(MlpBackward, ZeroOutputGradientGivesZeroGradients) {
  const MlpSpec spec{{3, 4, 2}, Activation::kRelu, Activation::kSigmoid};
  const MlpParams p = random_params(spec, 8);
  ForwardCache cache;
  const Tensor2 out = mlp_forward(spec, p, testing::random_tensor(5, 3, 9), cache);
  const MlpGradients g = mlp_backward(spec, p, cache, Tensor2(out.rows(), out.cols()));
  for (const auto& view : gradient_views(g))
    for (double v : view) EXPECT_EQ(v, 0.0);
  for (double v : g.input.data()) EXPECT_EQ(v, 0.0);
}

TEST(MlpBackward, LinearLayerWeightGradientIsTheInputRow) {
  const MlpSpec spec{{3, 1}, Activation::kRelu, Activation::kNone};
  const MlpParams p = random_params(spec, 10);
  const Tensor2 in = Tensor2::from_rows({{0.5, -2.0, 3.0}});
  ForwardCache cache;
  mlp_forward(spec, p, in, cache);
  const MlpGradients g = mlp_backward(spec, p, cache, Tensor2(1, 1, 1.0));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(g.weights[0](i, 0), in(0, i));
  EXPECT_EQ(g.biases[0][0], 1.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(g.input(0, i), p.weights[0](i, 0));
}

TEST(MlpBackward, StaleOrMissingCacheIsAUsageError) {
  const MlpSpec spec{{2, 3, 1}, Activation::kRelu, Activation::kNone};
  MlpParams p = random_params(spec, 11);
  ForwardCache empty;
  EXPECT_THROW(mlp_backward(spec, p, empty, Tensor2(1, 1)), UsageError);
  ForwardCache cache;
  mlp_forward(spec, p, Tensor2(1, 2, 0.5), cache);
  MlpGradients g = mlp_backward(spec, p, cache, Tensor2(1, 1, 1.0));
  OptimState opt = make_optim_state({OptimizerKind::kSgd, 0.1}, p);
  optimizer_step(p, g, opt, "test");
  EXPECT_THROW(mlp_backward(spec, p, cache, Tensor2(1, 1, 1.0)), UsageError);
  ForwardCache fresh;
  mlp_forward(spec, p, Tensor2(1, 2, 0.5), fresh);
  EXPECT_THROW(mlp_backward(spec, p, fresh, Tensor2(2, 1)), DimensionError);
}

struct GradCase {
  const char* name;
  MlpSpec spec;
};

class MlpGradCheck : public ::testing::TestWithParam<GradCase> {};

TEST_P(MlpGradCheck, MatchesCentralDifferences) {
  const MlpSpec spec = GetParam().spec;
  MlpParams p = random_params(spec, 12);
  // Inputs away from zero keep the ReLU pre-activations off their kinks for these seeds.
  const Tensor2 in = testing::random_tensor(6, spec.input_width(), 13);
  const Tensor2 target = testing::random_tensor(6, spec.output_width(), 14, 0.0, 1.0);
  const GradCheckReport r = grad_check(spec, p, in, squared_loss(target));
  EXPECT_GT(r.checked, 0u);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst.tensor << "[" << r.worst.index << "]";
}

INSTANTIATE_TEST_SUITE_P(
    LayerKinds, MlpGradCheck,
    ::testing::Values(GradCase{"linear", {{4, 3}, Activation::kRelu, Activation::kNone}},
                      GradCase{"sigmoid_out", {{4, 3}, Activation::kRelu, Activation::kSigmoid}},
                      GradCase{"relu3", {{4, 7, 6, 3}, Activation::kRelu, Activation::kNone}},
                      GradCase{"relu3_sigmoid", {{4, 7, 6, 3}, Activation::kRelu, Activation::kSigmoid}}),
    [](const auto& info) { return std::string(info.param.name); });

TEST(GradCheck, LinearRegressionIsNearExact) {
  const MlpSpec spec{{3, 1}, Activation::kRelu, Activation::kNone};
  MlpParams p = random_params(spec, 15);
  const GradCheckReport r =
      grad_check(spec, p, testing::random_tensor(10, 3, 16), squared_loss(testing::random_tensor(10, 1, 17)));
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST(GradCheck, ConstantLossHasZeroGradients) {
  const MlpSpec spec{{3, 2, 1}, Activation::kRelu, Activation::kNone};
  MlpParams p = random_params(spec, 18);
  const GradCheckReport r = grad_check(spec, p, testing::random_tensor(4, 3, 19), [](const Tensor2& out, Tensor2* g) {
    if (g) *g = Tensor2(out.rows(), out.cols());
    return 3.0;
  });
  EXPECT_EQ(r.max_rel_error, 0.0);
  EXPECT_EQ(r.worst.analytic, 0.0);
  EXPECT_EQ(r.worst.numeric, 0.0);
}

TEST(GradCheck, ReportsTheWorstEntry) {
  std::vector<double> values{1.0, 2.0};
  const std::vector<double> wrong{2.0, 4.5};  // true gradient of sum v^2 is (2, 4)
  const std::vector<ParamBlock> blocks{{"v", values, wrong}};
  const GradCheckReport r = check_gradients(blocks, [&] { return values[0] * values[0] + values[1] * values[1]; });
  EXPECT_EQ(r.worst.tensor, "v");
  EXPECT_EQ(r.worst.index, 1u);
  EXPECT_NEAR(r.worst.numeric, 4.0, 1e-8);
  EXPECT_NEAR(r.max_rel_error, 0.5 / 4.5, 1e-8);
  EXPECT_EQ(values[1], 2.0);  // values restored after probing
}

TEST(Optimizer, SgdSubstitution) {
  const MlpSpec spec{{1, 1}, Activation::kRelu, Activation::kNone};
  MlpParams p = zero_params(spec);
  p.weights[0](0, 0) = 1.0;
  MlpGradients g{{Tensor2(1, 1, 2.0)}, {{0.0}}, {}};
  OptimState s = make_optim_state({OptimizerKind::kSgd, 0.1}, p);
  optimizer_step(p, g, s, "test");
  EXPECT_DOUBLE_EQ(p.weights[0](0, 0), 0.8);
  EXPECT_EQ(s.step_count, 1u);
}

TEST(Optimizer, SgdOppositeStepsReturnExactly) {
  const MlpSpec spec{{2, 2}, Activation::kRelu, Activation::kNone};
  MlpParams p = zero_params(spec);
  p.weights[0] = Tensor2::from_rows({{1.0, -0.5}, {0.25, 2.0}});
  const MlpParams start = p;
  OptimState s = make_optim_state({OptimizerKind::kSgd, 0.25}, p);
  MlpGradients g{{Tensor2::from_rows({{2.0, 1.0}, {-4.0, 0.5}})}, {{1.0, -1.0}}, {}};
  optimizer_step(p, g, s, "test");
  for (double& v : g.weights[0].data()) v = -v;
  for (double& v : g.biases[0]) v = -v;
  optimizer_step(p, g, s, "test");
  EXPECT_EQ(p, start);
}

TEST(Optimizer, ZeroGradientLeavesParametersUnchanged) {
  for (auto kind : {OptimizerKind::kSgd, OptimizerKind::kAdam}) {
    const MlpSpec spec{{3, 2}, Activation::kRelu, Activation::kNone};
    MlpParams p = random_params(spec, 20);
    const MlpParams start = p;
    OptimState s = make_optim_state({kind, 1e-3}, p);
    MlpGradients g{{Tensor2(3, 2)}, {{0.0, 0.0}}, {}};
    optimizer_step(p, g, s, "test");
    EXPECT_EQ(p, start);
  }
}

TEST(Optimizer, AdamFirstStepHandExpansion) {
  const MlpSpec spec{{2, 2}, Activation::kRelu, Activation::kNone};
  MlpParams p = zero_params(spec);
  OptimState s = make_optim_state({OptimizerKind::kAdam, 1e-3, 0.9, 0.999, 1e-8}, p);
  MlpGradients g{{Tensor2(2, 2, 1.0)}, {{1.0, 1.0}}, {}};
  optimizer_step(p, g, s, "test");
  // m = 0.1, v = 0.001; bias-corrected m_hat = 1, v_hat = 1; step = lr / (1 + eps).
  const double expected = -1e-3 / (1.0 + 1e-8);
  for (double v : p.weights[0].data()) EXPECT_NEAR(v, expected, 1e-15);
  for (double v : p.biases[0]) EXPECT_NEAR(v, expected, 1e-15);
}

TEST(Optimizer, NonFiniteGradientAbortsWithPassName) {
  const MlpSpec spec{{2, 1}, Activation::kRelu, Activation::kNone};
  MlpParams p = random_params(spec, 21);
  const MlpParams start = p;
  OptimState s = make_optim_state({OptimizerKind::kAdam, 1e-3}, p);
  MlpGradients g{{Tensor2(2, 1, 0.5)}, {{std::nan("")}}, {}};
  try {
    optimizer_step(p, g, s, "discriminator");
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("discriminator"), std::string::npos);
  }
  EXPECT_EQ(p, start);
  EXPECT_EQ(s.step_count, 0u);
}

TEST(Optimizer, ConfigBounds) {
  EXPECT_TRUE((OptimConfig{}.problems().empty()));
  EXPECT_EQ((OptimConfig{OptimizerKind::kAdam, 0.0, 1.0, 0.999, 0.0}.problems().size()), 3u);
  EXPECT_THROW(make_optim_state({OptimizerKind::kAdam, -1.0}, MlpParams{}), ConfigError);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const MlpSpec a{{3, 4, 2}, Activation::kRelu, Activation::kSigmoid};
  const MlpSpec b{{5, 1}, Activation::kRelu, Activation::kNone};
  std::vector<NamedParams> nets{{"enc_z", random_params(a, 22)}, {"dec_x", random_params(b, 23)}};
  nets[0].params.weights[0](0, 0) = -0.0;
  nets[0].params.weights[0](1, 1) = 1e-310;
  const auto bytes = encode_checkpoint(nets);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MVRL");
  const auto back = decode_checkpoint(bytes);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].name, "enc_z");
  EXPECT_EQ(back[1].name, "dec_x");
  EXPECT_EQ(encode_checkpoint(back), bytes);
  EXPECT_TRUE(std::signbit(back[0].params.weights[0](0, 0)));
}

TEST(Checkpoint, CorruptInputsAreParseErrors) {
  const MlpSpec a{{2, 2}, Activation::kRelu, Activation::kNone};
  const std::vector<NamedParams> nets{{"n", random_params(a, 24)}};
  auto bytes = encode_checkpoint(nets);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(decode_checkpoint(truncated), ParseError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(magic), ParseError);
  auto version = bytes;
  version[4] = 9;
  EXPECT_THROW(decode_checkpoint(version), ParseError);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(decode_checkpoint(trailing), ParseError);
}

}  // namespace
}  // namespace mvrl::nn

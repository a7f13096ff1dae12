#include <gtest/gtest.h>

#include <cmath>

#include "mvrl/errors.hpp"
#include "mvrl/models/model.hpp"
#include "support.hpp"

namespace mvrl::models {
namespace {

using testing::tiny_batch;
using testing::tiny_spec;

constexpr std::array<Variant, 5> kVariants{Variant::kVccaX, Variant::kVccaXY, Variant::kVccaPrivate, Variant::kAcca,
                                           Variant::kAccaPrivate};
constexpr std::array<Variant, 3> kVcca{Variant::kVccaX, Variant::kVccaXY, Variant::kVccaPrivate};

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

ModelState make_state(const ModelSpec& spec, std::uint64_t seed = 1) {
  ModelState st = init_model(spec, testing::optimizers(), seed);
  testing::jitter_biases(st, seed);
  return st;
}

TEST(Kl, Examples) {
  const std::vector<double> zero{0.0}, one{1.0}, ln2{std::log(2.0)};
  EXPECT_EQ(kl_diag_gaussian_to_standard(zero, zero), 0.0);
  EXPECT_DOUBLE_EQ(kl_diag_gaussian_to_standard(one, zero), 0.5);
  EXPECT_NEAR(kl_diag_gaussian_to_standard(zero, ln2), 0.5 * (2.0 - std::log(2.0) - 1.0), 1e-15);
  EXPECT_NEAR(kl_diag_gaussian_to_standard(zero, ln2), 0.153426, 1e-6);
}

TEST(Kl, MonteCarloOracle) {
  Rng rng(2);
  std::normal_distribution<double> normal;
  const double mu = 0.7, lv = -0.4, sd = std::exp(lv / 2);
  double acc = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double e = normal(rng);
    const double z = mu + sd * e;
    acc += (-0.5 * e * e - std::log(sd)) - (-0.5 * z * z);
  }
  const std::vector<double> m{mu}, l{lv};
  EXPECT_NEAR(kl_diag_gaussian_to_standard(m, l), acc / n, 1e-2);
}

TEST(Kl, NonNegativeAndZeroOnlyAtPrior) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> m{u(rng), u(rng)}, l{u(rng), u(rng)};
    EXPECT_GT(kl_diag_gaussian_to_standard(m, l), 0.0);
  }
  const std::vector<double> tiny{1e-9};
  EXPECT_GE(kl_diag_gaussian_to_standard(tiny, tiny), 0.0);
}

TEST(Spec, NetworkShapes) {
  ModelSpec s = tiny_spec(Variant::kAcca);
  EXPECT_EQ(s.network_spec(NetRole::kEncZ).input_width(), s.x_dim + s.y_dim);
  EXPECT_EQ(s.network_spec(NetRole::kEncZ).output_width(), s.z_dim);
  EXPECT_EQ(s.network_spec(NetRole::kDiscZ).output, nn::Activation::kSigmoid);
  s = tiny_spec(Variant::kVccaX);
  EXPECT_EQ(s.network_spec(NetRole::kEncZ).input_width(), s.x_dim);
  EXPECT_EQ(s.network_spec(NetRole::kEncZ).output_width(), 2 * s.z_dim);
  EXPECT_FALSE(s.has_network(NetRole::kDiscZ));
  s = tiny_spec(Variant::kAccaPrivate);
  EXPECT_EQ(s.network_spec(NetRole::kEncZ).input_width(), s.x_dim);
  EXPECT_EQ(s.network_spec(NetRole::kEncHy).input_width(), s.y_dim);
  EXPECT_EQ(s.network_spec(NetRole::kDecX).input_width(), s.z_dim + s.hx_dim);
  EXPECT_EQ(s.network_spec(NetRole::kDecY).output, nn::Activation::kSigmoid);
  const ModelState st = make_state(s);
  for (std::size_t r = 0; r < kNetRoleCount; ++r) EXPECT_EQ(st.has(NetRole(r)), s.has_network(NetRole(r)));
}

TEST(Spec, ProblemsAreCollected) {
  ModelSpec s = tiny_spec(Variant::kVccaX);
  s.priors.emplace(Latent::kZ, Prior::standard_gaussian(2));
  s.hx_dim = 2;
  s.recon_norm = 3;
  const auto p = s.problems();
  ASSERT_EQ(p.size(), 3u);
  EXPECT_NE(p[0].find("hx_dim"), std::string::npos);
  EXPECT_NE(p[2].find("priors"), std::string::npos);
  EXPECT_THROW(s.validate(), ConfigError);

  ModelSpec a = tiny_spec(Variant::kAccaPrivate);
  a.priors.erase(Latent::kHy);
  a.priors.at(Latent::kZ) = Prior::standard_gaussian(3);
  const auto q = a.problems();
  ASSERT_EQ(q.size(), 2u);
  EXPECT_NE(q[0].find("priors.z has dim 3"), std::string::npos);
  EXPECT_NE(q[1].find("priors.h_y is required"), std::string::npos);
  EXPECT_TRUE(tiny_spec(Variant::kAcca).problems().empty());
}

TEST(Spec, VariantNames) {
  for (Variant v : kVariants) EXPECT_EQ(parse_variant(to_string(v)), v);
  EXPECT_FALSE(parse_variant("acca_x").has_value());
}

TEST(Encode, ZeroWeightAdversarialEncoderGivesZero) {
  const ModelSpec s = tiny_spec(Variant::kAcca);
  ModelState st = make_state(s);
  testing::zero_all(st);
  Rng rng(1);
  const Encoding e = encode(st, s, tiny_batch(s, 7, 2), rng);
  for (double v : e.at(Latent::kZ).z.data()) EXPECT_EQ(v, 0.0);
}

TEST(Encode, ReparameterizationMoments) {
  ModelSpec s = tiny_spec(Variant::kVccaX);
  ModelState st = make_state(s);
  testing::zero_all(st);
  const std::size_t n = 100000;
  Rng rng(4);
  const Encoding e = encode(st, s, {Tensor2(n, s.x_dim, 0.3), Tensor2(n, s.y_dim, 0.3)}, rng);
  const Tensor2& z = e.at(Latent::kZ).z;
  for (std::size_t d = 0; d < s.z_dim; ++d) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += z(i, d);
    EXPECT_NEAR(m / double(n), 0.0, 0.02);
  }
  Rng again(4);
  EXPECT_NE(encode(st, s, {Tensor2(2, s.x_dim), Tensor2(2, s.y_dim)}, again).at(Latent::kZ).z,
            encode(st, s, {Tensor2(2, s.x_dim), Tensor2(2, s.y_dim)}, again).at(Latent::kZ).z);
}

TEST(Encode, MeanModeReturnsMu) {
  const ModelSpec s = tiny_spec(Variant::kVccaXY);
  const ModelState st = make_state(s);
  Rng rng(5);
  const Encoding e = encode(st, s, tiny_batch(s, 4, 6), rng, EncodeMode::kMean);
  EXPECT_EQ(e.at(Latent::kZ).z, e.at(Latent::kZ).mu);
}

TEST(Encode, ShapeMismatch) {
  const ModelSpec s = tiny_spec(Variant::kAcca);
  const ModelState st = make_state(s);
  Rng rng(1);
  EXPECT_THROW(encode(st, s, {Tensor2(2, s.x_dim + 1), Tensor2(2, s.y_dim)}, rng), DimensionError);
  EXPECT_THROW(encode(st, s, {Tensor2(2, s.x_dim), Tensor2(3, s.y_dim)}, rng), DimensionError);
}

TEST(Decode, ZeroDecoderGivesHalf) {
  const ModelSpec s = tiny_spec(Variant::kVccaPrivate);
  ModelState st = make_state(s);
  testing::zero_all(st);
  const LatentSet lat{testing::random_tensor(3, 2, 1), testing::random_tensor(3, 2, 2), testing::random_tensor(3, 2, 3)};
  const Reconstruction r = decode(st, s, lat);
  for (double v : r.x_hat.data()) EXPECT_EQ(v, 0.5);
  for (double v : r.y_hat.data()) EXPECT_EQ(v, 0.5);
  EXPECT_THROW(decode(st, s, {Tensor2(3, 3), lat[1], lat[2]}), DimensionError);
}

TEST(Structure, PrivateLatentsFeedOnlyTheirOwnView) {
  for (Variant v : {Variant::kVccaPrivate, Variant::kAccaPrivate}) {
    const ModelSpec s = tiny_spec(v);
    const ModelState st = make_state(s);
    const LatentSet lat{testing::random_tensor(3, 2, 1), testing::random_tensor(3, 2, 2), testing::random_tensor(3, 2, 3)};
    LatentSet moved_hy = lat, moved_hx = lat;
    for (double& x : moved_hy[2].data()) x += 1.5;
    for (double& x : moved_hx[1].data()) x -= 2.0;
    const Reconstruction base = decode(st, s, lat);
    EXPECT_EQ(decode(st, s, moved_hy).x_hat, base.x_hat);
    EXPECT_NE(decode(st, s, moved_hy).y_hat, base.y_hat);
    EXPECT_EQ(decode(st, s, moved_hx).y_hat, base.y_hat);
    EXPECT_NE(decode(st, s, moved_hx).x_hat, base.x_hat);
  }
}

TEST(Structure, SingleViewZEncodersIgnoreY) {
  for (Variant v : {Variant::kVccaX, Variant::kVccaPrivate, Variant::kAccaPrivate}) {
    const ModelSpec s = tiny_spec(v);
    const ModelState st = make_state(s);
    Rng rng(1);
    const Noise noise = draw_noise(s, 4, rng);
    Batch b = tiny_batch(s, 4, 2);
    const Tensor2 z = encode(st, s, b, noise).at(Latent::kZ).z;
    for (double& y : b.y.data()) y = 1.0 - y;
    EXPECT_EQ(encode(st, s, b, noise).at(Latent::kZ).z, z) << to_string(v);
  }
}

TEST(VccaLoss, PerfectReconstructionAtThePriorIsZero) {
  const ModelSpec s = tiny_spec(Variant::kVccaXY);
  ModelState st = make_state(s);
  testing::zero_all(st);
  Noise noise;
  noise.eps[0] = Tensor2(3, s.z_dim, 0.0);
  const Batch b{Tensor2(3, s.x_dim, 0.5), Tensor2(3, s.y_dim, 0.5)};
  const VccaLoss l = vcca_loss(st, s, b, noise);
  EXPECT_EQ(l.total, 0.0);
  EXPECT_EQ(l.kl.at(Latent::kZ), 0.0);
}

TEST(VccaLoss, HandComputedSingleDatum) {
  ModelSpec s;
  s.variant = Variant::kVccaXY;
  s.x_dim = s.y_dim = 2;
  s.z_dim = 1;
  s.encoder_hidden = {1};
  s.decoder_hidden = {1};
  ModelState st = make_state(s);
  auto& enc = st.net(NetRole::kEncZ).params;
  enc.weights[0] = Tensor2::from_rows({{0.1}, {0.2}, {-0.3}, {0.4}});
  enc.biases[0] = {0.25};
  enc.weights[1] = Tensor2::from_rows({{0.5, -0.2}});
  enc.biases[1] = {0.1, 0.3};
  for (NetRole r : {NetRole::kDecX, NetRole::kDecY}) {
    auto& dec = st.net(r).params;
    dec.weights[0] = Tensor2::from_rows({{1.2}});
    dec.biases[0] = {0.1};
    dec.weights[1] = Tensor2::from_rows({{0.8, -0.6}});
    dec.biases[1] = {0.0, r == NetRole::kDecX ? 0.2 : -0.4};
  }
  const Batch b{Tensor2::from_rows({{0.2, 0.7}}), Tensor2::from_rows({{0.9, 0.1}})};
  Noise noise;
  noise.eps[0] = Tensor2::from_rows({{0.7}});

  const double h = std::max(0.0, 0.1 * 0.2 + 0.2 * 0.7 - 0.3 * 0.9 + 0.4 * 0.1 + 0.25);
  const double mu = 0.5 * h + 0.1, lv = -0.2 * h + 0.3;
  const double z = mu + std::exp(lv / 2) * 0.7;
  const double g = std::max(0.0, 1.2 * z + 0.1);
  const double kl = 0.5 * (mu * mu + std::exp(lv) - lv - 1);
  const double rx = 0.5 * (std::pow(0.2 - sigmoid(0.8 * g), 2) + std::pow(0.7 - sigmoid(-0.6 * g + 0.2), 2));
  const double ry = 0.5 * (std::pow(0.9 - sigmoid(0.8 * g), 2) + std::pow(0.1 - sigmoid(-0.6 * g - 0.4), 2));

  const VccaLoss l = vcca_loss(st, s, b, noise);
  EXPECT_NEAR(l.kl.at(Latent::kZ), kl, 1e-14);
  EXPECT_NEAR(l.recon_x, rx, 1e-14);
  EXPECT_NEAR(l.recon_y, ry, 1e-14);
  EXPECT_NEAR(l.total, kl + rx + ry, 1e-14);
}

TEST(VccaLoss, PrivateWithoutPrivateDimsReducesToVccaX) {
  const ModelSpec a = tiny_spec(Variant::kVccaX);
  ModelSpec p = a;
  p.variant = Variant::kVccaPrivate;
  ASSERT_TRUE(p.problems().empty());
  const ModelState sa = make_state(a, 3);
  ModelState sp = make_state(p, 4);
  import_params(sp, export_params(sa));
  Rng rng(1);
  const Noise noise = draw_noise(a, 6, rng);
  const Batch b = tiny_batch(a, 6, 7);
  EXPECT_EQ(vcca_loss(sa, a, b, noise).total, vcca_loss(sp, p, b, noise).total);
}

TEST(VccaLoss, KlWeightScalesOnlyTheKlTerm) {
  ModelSpec s = tiny_spec(Variant::kVccaXY);
  const ModelState st = make_state(s);
  Rng rng(2);
  const Noise noise = draw_noise(s, 5, rng);
  const Batch b = tiny_batch(s, 5, 3);
  const VccaLoss one = vcca_loss(st, s, b, noise);
  s.kl_weight = 0.25;
  const VccaLoss quarter = vcca_loss(st, s, b, noise);
  EXPECT_NEAR(quarter.total, 0.25 * one.kl.at(Latent::kZ) + one.recon_x + one.recon_y, 1e-12);
}

TEST(VccaLoss, AdversarialVariantsAreRejected) {
  const ModelSpec s = tiny_spec(Variant::kAcca);
  const ModelState st = make_state(s);
  EXPECT_THROW(vcca_loss(st, s, tiny_batch(s, 2, 1), Noise{}), UsageError);
}

class VccaGradients : public ::testing::TestWithParam<Variant> {};

TEST_P(VccaGradients, MatchFiniteDifferencesWithFrozenNoise) {
  const ModelSpec s = tiny_spec(GetParam());
  ModelState st = make_state(s, 11);
  const Batch b = tiny_batch(s, 4, 12);
  Rng rng(13);
  const Noise noise = draw_noise(s, 4, rng);
  ModelGradients g;
  const double total = vcca_loss_and_gradients(st, s, b, noise, g).total;
  EXPECT_DOUBLE_EQ(total, vcca_loss(st, s, b, noise).total);
  const auto r = testing::check_model_gradients(st, g, [&] { return vcca_loss(st, s, b, noise).total; });
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst.tensor << "[" << r.worst.index << "]";
}

INSTANTIATE_TEST_SUITE_P(Variants, VccaGradients, ::testing::ValuesIn(kVcca),
                         [](const auto& info) { return to_string(info.param); });

struct ReconCase {
  Variant variant;
  int norm;
};

class ReconGradients : public ::testing::TestWithParam<ReconCase> {};

TEST_P(ReconGradients, MatchFiniteDifferences) {
  ModelSpec s = tiny_spec(GetParam().variant);
  s.recon_norm = GetParam().norm;
  ModelState st = make_state(s, 21);
  const Batch b = tiny_batch(s, 4, 22);
  Rng rng(23);
  const Noise noise = draw_noise(s, 4, rng);
  ModelGradients g;
  reconstruction_loss_and_gradients(st, s, b, noise, g);
  for (NetRole r : {NetRole::kDiscZ, NetRole::kDiscHx, NetRole::kDiscHy}) EXPECT_FALSE(g.nets[std::size_t(r)]);
  const auto r = testing::check_model_gradients(st, g, [&] { return reconstruction_loss(st, s, b, noise); });
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst.tensor << "[" << r.worst.index << "] analytic " << r.worst.analytic << " numeric " << r.worst.numeric;
}

std::vector<ReconCase> recon_cases() {
  std::vector<ReconCase> out;
  for (Variant v : kVariants)
    for (int k : {1, 2}) out.push_back({v, k});
  return out;
}

INSTANTIATE_TEST_SUITE_P(Variants, ReconGradients, ::testing::ValuesIn(recon_cases()), [](const auto& info) {
  return to_string(info.param.variant) + "_k" + std::to_string(info.param.norm);
});

TEST(ReconstructionLoss, NormDefinition) {
  ModelSpec s = tiny_spec(Variant::kAcca);
  ModelState st = make_state(s);
  testing::zero_all(st);
  const Batch b{Tensor2(2, s.x_dim, 0.75), Tensor2(2, s.y_dim, 0.0)};
  s.recon_norm = 1;
  EXPECT_DOUBLE_EQ(reconstruction_loss(st, s, b, Noise{}), 0.25 * double(s.x_dim) + 0.5 * double(s.y_dim));
  s.recon_norm = 2;
  EXPECT_DOUBLE_EQ(reconstruction_loss(st, s, b, Noise{}), 0.0625 * double(s.x_dim) + 0.25 * double(s.y_dim));
}

TEST(Params, ExportImportRoundTrip) {
  const ModelSpec s = tiny_spec(Variant::kAccaPrivate);
  const ModelState a = make_state(s, 1);
  ModelState b = make_state(s, 2);
  EXPECT_NE(export_params(a)[0].params, export_params(b)[0].params);
  import_params(b, export_params(a));
  const auto pa = export_params(a), pb = export_params(b);
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].name, pb[i].name);
    EXPECT_EQ(pa[i].params, pb[i].params);
  }
}

TEST(Params, ImportMismatchIsADataError) {
  const ModelSpec s = tiny_spec(Variant::kAcca);
  ModelState st = make_state(s);
  auto params = export_params(st);
  params.pop_back();
  EXPECT_THROW(import_params(st, params), DataError);
  ModelSpec wide = s;
  wide.encoder_hidden = {7, 5};
  EXPECT_THROW(import_params(st, export_params(make_state(wide))), DataError);
}

TEST(Params, InitIsSeededPerRole) {
  const ModelSpec s = tiny_spec(Variant::kAcca);
  const auto a = export_params(make_state(s, 9)), b = export_params(make_state(s, 9));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].params, b[i].params);
  ModelSpec other = s;
  other.discriminator_hidden = {8};
  // Changing one network's shape leaves the others' initial weights unchanged.
  const auto c = export_params(make_state(other, 9));
  EXPECT_EQ(a[0].params, c[0].params);
}

}  // namespace
}  // namespace mvrl::models

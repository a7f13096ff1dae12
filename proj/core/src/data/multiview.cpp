#include "mvrl/data/multiview.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>

#include "mvrl/binary_io.hpp"
#include "mvrl/data/rotate.hpp"
#include "mvrl/errors.hpp"
#include "mvrl/rng.hpp"

namespace mvrl::data {
namespace {

constexpr std::string_view kMvdsMagic = "MVDS";
constexpr std::uint32_t kMvdsVersion = 1;

double draw_rotation(Rng& rng) {
  std::uniform_real_distribution<double> dist(-kMaxRotation, kMaxRotation);
  double a = dist(rng);
  while (a == -kMaxRotation) a = dist(rng);
  return a;
}

MultiviewDataset build(const MnistSet& mnist, DatasetVariant variant, std::uint64_t seed) {
  if (mnist.size() == 0) throw DataError("cannot build a multiview dataset from an empty MNIST set");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < mnist.size(); ++i) by_class[mnist.labels[i]].push_back(i);
  for (const auto& [label, members] : by_class) {
    if (members.size() < 2) {
      throw DataError("pairing error: class " + std::to_string(label) +
                      " has a single example, so no distinct same-class partner exists");
    }
  }
  // Position of each index inside its class list, for excluding i when drawing j.
  std::vector<std::size_t> rank(mnist.size());
  for (const auto& [label, members] : by_class) {
    for (std::size_t k = 0; k < members.size(); ++k) rank[members[k]] = k;
  }

  const std::size_t n = mnist.size();
  const std::size_t rows = mnist.image_rows;
  const std::size_t cols = mnist.image_cols;
  const std::size_t d = rows * cols;

  MultiviewDataset ds;
  ds.variant = variant;
  ds.seed = seed;
  ds.image_rows = rows;
  ds.image_cols = cols;
  ds.view_x = Tensor2(n, d);
  ds.view_y = Tensor2(n, d);
  ds.class_labels.resize(n);
  ds.rot_x.resize(n);
  ds.rot_y.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_rng(seed, i);
    const double rx = draw_rotation(rng);
    const double ry = draw_rotation(rng);
    const auto& members = by_class.at(mnist.labels[i]);
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 2);
    std::size_t k = pick(rng);
    if (k >= rank[i]) ++k;
    const std::size_t j = members[k];

    auto x = rotate_image(mnist.images.row(i), rows, cols, rx);
    std::copy(x.begin(), x.end(), ds.view_x.row(i).begin());
    auto dst = ds.view_y.row(i);
    if (variant == DatasetVariant::kTangled) {
      auto y = rotate_image(mnist.images.row(j), rows, cols, ry);
      std::copy(y.begin(), y.end(), dst.begin());
      ds.rot_y[i] = ry;
    } else {
      std::uniform_real_distribution<double> noise(0.0, 1.0);
      auto src = mnist.images.row(j);
      for (std::size_t p = 0; p < d; ++p) dst[p] = std::min(src[p] + noise(rng), 1.0);
      ds.rot_y[i] = std::numeric_limits<double>::quiet_NaN();
    }
    ds.class_labels[i] = mnist.labels[i];
    ds.rot_x[i] = rx;
  }
  return ds;
}

}  // namespace

std::string to_string(DatasetVariant v) { return v == DatasetVariant::kTangled ? "tangled" : "noisy"; }

std::optional<DatasetVariant> parse_dataset_variant(std::string_view s) {
  if (s == "tangled") return DatasetVariant::kTangled;
  if (s == "noisy") return DatasetVariant::kNoisy;
  return std::nullopt;
}

MultiviewDataset build_tangled_mnist(const MnistSet& mnist, std::uint64_t seed) {
  return build(mnist, DatasetVariant::kTangled, seed);
}

MultiviewDataset build_noisy_mnist(const MnistSet& mnist, std::uint64_t seed) {
  return build(mnist, DatasetVariant::kNoisy, seed);
}

MultiviewDataset build_dataset(const MnistSet& mnist, DatasetVariant variant, std::uint64_t seed) {
  return build(mnist, variant, seed);
}

MultiviewDataset subset(const MultiviewDataset& ds, std::span<const std::size_t> indices) {
  MultiviewDataset out;
  out.variant = ds.variant;
  out.seed = ds.seed;
  out.image_rows = ds.image_rows;
  out.image_cols = ds.image_cols;
  out.view_x = select_rows(ds.view_x, indices);
  out.view_y = select_rows(ds.view_y, indices);
  for (std::size_t i : indices) {
    out.class_labels.push_back(ds.class_labels[i]);
    out.rot_x.push_back(ds.rot_x[i]);
    out.rot_y.push_back(ds.rot_y[i]);
  }
  return out;
}

Split split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, 0x59117);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = std::size_t(std::llround(train_fraction * double(n)));
  Split s;
  s.train.assign(order.begin(), order.begin() + std::ptrdiff_t(n_train));
  s.validation.assign(order.begin() + std::ptrdiff_t(n_train), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.validation.begin(), s.validation.end());
  return s;
}

std::vector<std::uint8_t> encode_mvds(const MultiviewDataset& ds) {
  ByteWriter w;
  w.bytes(kMvdsMagic);
  w.u32(kMvdsVersion);
  w.u8(ds.variant == DatasetVariant::kTangled ? 0 : 1);
  w.u64(ds.seed);
  w.u64(ds.size());
  w.u32(std::uint32_t(ds.image_rows));
  w.u32(std::uint32_t(ds.image_cols));
  for (int c : ds.class_labels) w.i32(c);
  w.f64s(ds.rot_x);
  w.f64s(ds.rot_y);
  w.f64s(ds.view_x.data());
  w.f64s(ds.view_y.data());
  return w.take();
}

MultiviewDataset decode_mvds(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.bytes(4, "mvds header") != kMvdsMagic) throw ParseError("bad mvds magic (expected MVDS)", 0);
  const std::size_t version_at = r.offset();
  if (r.u32("mvds version") != kMvdsVersion) throw ParseError("unsupported mvds version", version_at);
  MultiviewDataset ds;
  const std::size_t variant_at = r.offset();
  const auto variant = r.u8("variant");
  if (variant > 1) throw ParseError("unknown dataset variant tag", variant_at);
  ds.variant = variant == 0 ? DatasetVariant::kTangled : DatasetVariant::kNoisy;
  ds.seed = r.u64("seed");
  const std::uint64_t n = r.u64("count");
  ds.image_rows = r.u32("image rows");
  ds.image_cols = r.u32("image cols");
  const std::uint64_t d = std::uint64_t(ds.image_rows) * ds.image_cols;
  const std::uint64_t need = n * (4 + 16) + 2 * n * d * 8;
  if (d == 0 || need != r.remaining()) {
    throw ParseError("mvds payload size mismatch: header implies " + std::to_string(need) + " bytes, found " +
                         std::to_string(r.remaining()),
                     r.offset());
  }
  ds.class_labels.resize(n);
  for (auto& c : ds.class_labels) c = r.i32("class labels");
  ds.rot_x.resize(n);
  r.f64s(ds.rot_x, "rot_x");
  ds.rot_y.resize(n);
  r.f64s(ds.rot_y, "rot_y");
  std::vector<double> vx(n * d), vy(n * d);
  r.f64s(vx, "view_x");
  r.f64s(vy, "view_y");
  ds.view_x = Tensor2(n, d, std::move(vx));
  ds.view_y = Tensor2(n, d, std::move(vy));
  return ds;
}

void save_mvds(const std::filesystem::path& path, const MultiviewDataset& ds, const std::string& provenance_json) {
  write_file_bytes(path, encode_mvds(ds));
  nlohmann::json meta = {
      {"format", "mvds"},
      {"version", kMvdsVersion},
      {"variant", to_string(ds.variant)},
      {"seed", ds.seed},
      {"count", ds.size()},
      {"image_rows", ds.image_rows},
      {"image_cols", ds.image_cols},
      {"pixel_type", "f64"},
      {"rotation_range", {-kMaxRotation, kMaxRotation}},
  };
  meta["provenance"] = nlohmann::json::parse(provenance_json);
  auto sidecar = path;
  sidecar.replace_extension(".json");
  const std::string text = meta.dump(2) + "\n";
  write_file_bytes(sidecar, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

MultiviewDataset load_mvds(const std::filesystem::path& path) { return decode_mvds(read_file_bytes(path)); }

}  // namespace mvrl::data

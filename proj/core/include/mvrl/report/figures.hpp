#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "mvrl/data/multiview.hpp"
#include "mvrl/eval/probes.hpp"
#include "mvrl/models/model.hpp"
#include "mvrl/report/csv.hpp"
#include "mvrl/train/trainer.hpp"

namespace mvrl::report {

using Paths = std::vector<std::filesystem::path>;

struct FigureStyle {
  std::size_t panel_size = 360;  // pixels per scatter or curve panel
  std::size_t margin = 16;
  long point_radius = 1;
  std::size_t tile_scale = 1;  // upscaling of decoded images
};

/// One panel per (representation, factor): embeddings_<rep>_by_<factor>.png,
/// plus the row-per-representation grid embeddings_grid.png and embeddings.csv.
/// 3-D representations are drawn as two fixed-azimuth projections side by side.
/// Throws UsageError for dims above 3 and DataError for an empty set; nothing is written then.
Paths plot_embeddings(const eval::EmbeddingSet& embs, const std::filesystem::path& out_dir, const FigureStyle& style = {});

/// Decoded images at the centers of a square grid over (lo, hi)^2. Private
/// latents are held at 0.
struct GridWalk {
  std::size_t side = 0;  // tiles per row and column
  Tensor2 centers;       // side*side x 2, row-major from (lo, lo)
  Tensor2 x_tiles;       // side*side x x_dim
  Tensor2 y_tiles;
};

/// Throws UsageError unless z has exactly 2 dimensions.
GridWalk grid_walk(const models::ModelState& state, const models::ModelSpec& spec, double lo = -4.0, double hi = 4.0,
                   double step = 0.25);
/// grid_walk_x.png, grid_walk_y.png and their CSV twins.
Paths write_grid_walk(const GridWalk& walk, std::size_t image_rows, std::size_t image_cols,
                      const std::filesystem::path& out_dir, const FigureStyle& style = {});

/// Rows of (x, x_hat, y, y_hat) for randomly chosen pairs.
struct ReconPanel {
  std::vector<std::size_t> indices;
  Tensor2 x, x_hat, y, y_hat;
  bool clamped = false;  // count exceeded the dataset size
};

/// count = 0 throws std::invalid_argument; count > dataset size is clamped (clamped = true).
ReconPanel recon_panel(const models::ModelState& state, const models::ModelSpec& spec,
                       const data::MultiviewDataset& dataset, std::size_t count, std::uint64_t seed);
/// recon_panel.png and recon_panel.csv.
Paths write_recon_panel(const ReconPanel& panel, std::size_t image_rows, std::size_t image_cols,
                        const std::filesystem::path& out_dir, const FigureStyle& style = {});

/// Decodes `count` prior draws (N(0, I) for variational models).
struct Generations {
  Tensor2 x;
  Tensor2 y;
};
Generations random_generations(const models::ModelState& state, const models::ModelSpec& spec, std::size_t count,
                               std::uint64_t seed);
/// random_generations_x.png, random_generations_y.png and their CSV twins.
Paths write_random_generations(const Generations& gens, std::size_t image_rows, std::size_t image_cols,
                               const std::filesystem::path& out_dir, const FigureStyle& style = {});

/// Per-epoch losses as a table: epoch, l_disc_<s>, l_gen_<s>, ..., l_recon, l_kl, l_total,
/// the same with a val_ prefix, val_score, seconds.
CsvTable curves_table(const train::ExperimentReport& report);
train::ExperimentReport report_from_curves(const CsvTable& table, models::Variant variant);

struct InfoRecord {
  std::size_t epoch = 0;
  eval::InfoMatrix info;
};
/// epoch, then one column per (representation, factor) named <rep>_<factor>.
CsvTable information_table(const std::vector<InfoRecord>& records);
std::vector<InfoRecord> information_from_table(const CsvTable& table);

/// curves_losses.png/.csv, and curves_information.png/.csv when `info` is non-empty.
/// Adversarial loss panels carry a dashed reference line at the equilibrium loss.
Paths plot_curves(const train::ExperimentReport& report, const std::vector<InfoRecord>& info,
                  const std::filesystem::path& out_dir, const FigureStyle& style = {});

struct KdeMap {
  double lo = -4.0;
  double hi = 4.0;
  double step = 0.1;
  std::size_t side = 0;
  Tensor2 centers;
  std::vector<double> log_density;
};
KdeMap kde_map(const Tensor2& points, double lo = -4.0, double hi = 4.0, double step = 0.1, double bandwidth = 0.2);
/// kde_<name>.png and kde_<name>.csv.
Paths write_kde_map(const KdeMap& map, const std::string& name, const std::filesystem::path& out_dir,
                    const FigureStyle& style = {});

}  // namespace mvrl::report

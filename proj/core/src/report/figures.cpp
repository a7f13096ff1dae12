#include "mvrl/report/figures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "mvrl/data/multiview.hpp"
#include "mvrl/errors.hpp"
#include "mvrl/eval/density.hpp"
#include "mvrl/report/canvas.hpp"
#include "mvrl/train/passes.hpp"

namespace mvrl::report {
namespace {

namespace fs = std::filesystem;
using models::Latent;

struct Range {
  double lo;
  double hi;
};

Range finite_range(std::span<const double> values, double pad_fraction = 0.05) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo <= hi)) return {-1.0, 1.0};
  if (hi - lo < 1e-12) return {lo - 1.0, hi + 1.0};
  const double pad = (hi - lo) * pad_fraction;
  return {lo - pad, hi + pad};
}

long to_pixel(double v, Range r, long first, long last) {
  return first + long(std::lround((v - r.lo) / (r.hi - r.lo) * double(last - first)));
}

// Scatter of (u, v) pairs on a framed square panel; v grows upward.
Canvas scatter_panel(std::span<const double> u, std::span<const double> v, std::span<const Color> colors,
                     const FigureStyle& style) {
  const long size = long(style.panel_size);
  const long m = long(style.margin);
  Canvas c(style.panel_size, style.panel_size);
  const Range ru = finite_range(u);
  const Range rv = finite_range(v);
  if (ru.lo < 0 && ru.hi > 0) {
    const long x0 = to_pixel(0.0, ru, m, size - 1 - m);
    c.line(x0, m, x0, size - 1 - m, kLightGray);
  }
  if (rv.lo < 0 && rv.hi > 0) {
    const long y0 = to_pixel(0.0, rv, size - 1 - m, m);
    c.line(m, y0, size - 1 - m, y0, kLightGray);
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(v[i])) continue;
    c.dot(to_pixel(u[i], ru, m, size - 1 - m), to_pixel(v[i], rv, size - 1 - m, m), style.point_radius, colors[i]);
  }
  c.rect_outline(m - 1, m - 1, size - m, size - m, kBlack);
  return c;
}

Canvas hconcat_canvases(const std::vector<Canvas>& parts) {
  std::size_t w = 0, h = 0;
  for (const auto& p : parts) {
    w += p.width();
    h = std::max(h, p.height());
  }
  Canvas out(w, h);
  long x = 0;
  for (const auto& p : parts) {
    out.blit(p, x, 0);
    x += long(p.width());
  }
  return out;
}

Canvas vconcat_canvases(const std::vector<Canvas>& parts) {
  std::size_t w = 0, h = 0;
  for (const auto& p : parts) {
    w = std::max(w, p.width());
    h += p.height();
  }
  Canvas out(w, h);
  long y = 0;
  for (const auto& p : parts) {
    out.blit(p, 0, y);
    y += long(p.height());
  }
  return out;
}

// Fixed-azimuth orthographic views of 3-D points.
std::array<std::vector<double>, 2> project(const Tensor2& pts, double azimuth_deg, double elevation_deg) {
  const double a = azimuth_deg * std::numbers::pi / 180.0;
  const double e = elevation_deg * std::numbers::pi / 180.0;
  std::array<std::vector<double>, 2> uv{std::vector<double>(pts.rows()), std::vector<double>(pts.rows())};
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    const double x = pts(i, 0), y = pts(i, 1), z = pts(i, 2);
    const double depth = -std::sin(a) * x + std::cos(a) * y;
    uv[0][i] = std::cos(a) * x + std::sin(a) * y;
    uv[1][i] = std::cos(e) * z - std::sin(e) * depth;
  }
  return uv;
}

std::vector<double> column(const Tensor2& t, std::size_t c) {
  std::vector<double> out(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) out[r] = t(r, c);
  return out;
}

Canvas embedding_panel(const Tensor2& rep, std::span<const Color> colors, const FigureStyle& style) {
  if (rep.cols() == 3) {
    std::vector<Canvas> views;
    for (double az : {30.0, 120.0}) {
      const auto uv = project(rep, az, 20.0);
      views.push_back(scatter_panel(uv[0], uv[1], colors, style));
    }
    return hconcat_canvases(views);
  }
  const auto u = column(rep, 0);
  const auto v = rep.cols() == 2 ? column(rep, 1) : std::vector<double>(rep.rows(), 0.0);
  return scatter_panel(u, v, colors, style);
}

std::vector<Color> factor_colors(const eval::EmbeddingSet& embs, eval::Factor f) {
  std::vector<Color> out(embs.size());
  for (std::size_t i = 0; i < embs.size(); ++i) {
    switch (f) {
      case eval::Factor::kClass: out[i] = categorical(embs.classes[i]); break;
      case eval::Factor::kRotX: out[i] = std::isfinite(embs.rot_x[i]) ? diverging(embs.rot_x[i] / data::kMaxRotation) : kGray; break;
      case eval::Factor::kRotY: out[i] = std::isfinite(embs.rot_y[i]) ? diverging(embs.rot_y[i] / data::kMaxRotation) : kGray; break;
    }
  }
  return out;
}

Canvas tile_grid(const Tensor2& tiles, std::size_t per_row, std::size_t rows, std::size_t cols, std::size_t scale,
                 bool flip_rows) {
  if (tiles.cols() != rows * cols) {
    throw DimensionError("tile width " + std::to_string(tiles.cols()) + " is not " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  const std::size_t grid_rows = (tiles.rows() + per_row - 1) / per_row;
  Canvas out(per_row * cols * scale, std::max<std::size_t>(1, grid_rows) * rows * scale);
  for (std::size_t i = 0; i < tiles.rows(); ++i) {
    const std::size_t gr = flip_rows ? grid_rows - 1 - i / per_row : i / per_row;
    const std::size_t gc = i % per_row;
    out.blit(grayscale_image(tiles.row(i), rows, cols, scale), long(gc * cols * scale), long(gr * rows * scale));
  }
  return out;
}

void require_image_shape(std::size_t width, std::size_t rows, std::size_t cols, const char* what) {
  if (width != rows * cols) {
    throw UsageError(std::string(what) + ": view width " + std::to_string(width) + " is not an image of " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

CsvTable pixel_table(std::vector<std::string> lead_names, const std::vector<std::vector<double>>& leads,
                     const Tensor2& pixels) {
  CsvTable t;
  t.header = std::move(lead_names);
  for (std::size_t p = 0; p < pixels.cols(); ++p) t.header.push_back("p" + std::to_string(p));
  for (std::size_t r = 0; r < pixels.rows(); ++r) {
    std::vector<double> row = leads[r];
    const auto px = pixels.row(r);
    row.insert(row.end(), px.begin(), px.end());
    t.rows.push_back(std::move(row));
  }
  return t;
}

struct Series {
  std::vector<double> y;
  Color color;
};

Canvas line_panel(std::span<const double> x, const std::vector<Series>& series, std::optional<double> reference,
                  const FigureStyle& style) {
  const long size = long(style.panel_size);
  const long m = long(style.margin);
  Canvas c(style.panel_size, style.panel_size);
  std::vector<double> all;
  for (const auto& s : series) all.insert(all.end(), s.y.begin(), s.y.end());
  if (reference) all.push_back(*reference);
  const Range ry = finite_range(all);
  Range rx = finite_range(x, 0.0);
  if (x.size() <= 1) rx = {x.empty() ? 0.0 : x[0] - 1.0, x.empty() ? 1.0 : x[0] + 1.0};
  if (reference) c.dashed_hline(m, size - 1 - m, to_pixel(*reference, ry, size - 1 - m, m), kGray);
  for (const auto& s : series) {
    std::optional<std::pair<long, long>> prev;
    for (std::size_t i = 0; i < x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) {
        prev.reset();
        continue;
      }
      const long px = to_pixel(x[i], rx, m, size - 1 - m);
      const long py = to_pixel(s.y[i], ry, size - 1 - m, m);
      if (prev) c.line(prev->first, prev->second, px, py, s.color);
      c.dot(px, py, 1, s.color);
      prev = {px, py};
    }
  }
  c.rect_outline(m - 1, m - 1, size - m, size - m, kBlack);
  return c;
}

std::vector<Latent> streams_of(const train::ExperimentReport& report) {
  std::vector<Latent> out;
  if (report.epochs.empty()) return out;
  for (const auto& [l, g] : report.epochs.front().train.games) out.push_back(l);
  return out;
}

void append_losses(std::vector<double>& row, const train::EpochLosses& l, const std::vector<Latent>& streams) {
  for (Latent s : streams) {
    const auto it = l.games.find(s);
    row.push_back(it == l.games.end() ? std::numeric_limits<double>::quiet_NaN() : it->second.disc);
    row.push_back(it == l.games.end() ? std::numeric_limits<double>::quiet_NaN() : it->second.gen);
  }
  row.push_back(l.recon);
  row.push_back(l.kl);
  row.push_back(l.total);
}

std::string info_column(Latent l, eval::Factor f) { return models::to_string(l) + "_" + eval::to_string(f); }

}  // namespace

Paths plot_embeddings(const eval::EmbeddingSet& embs, const fs::path& out_dir, const FigureStyle& style) {
  if (embs.size() == 0 || embs.reps.empty()) throw DataError("plot_embeddings: embedding set is empty");
  embs.validate();
  for (const auto& [l, rep] : embs.reps) {
    if (rep.cols() > 3) {
      throw UsageError("plot_embeddings: " + models::to_string(l) + " has " + std::to_string(rep.cols()) +
                       " dimensions; only 1-3 can be drawn, project pairs of coordinates first");
    }
  }
  const bool has_rot_y = std::all_of(embs.rot_y.begin(), embs.rot_y.end(), [](double v) { return std::isfinite(v); });
  std::vector<eval::Factor> factors{eval::Factor::kClass, eval::Factor::kRotX};
  if (has_rot_y) factors.push_back(eval::Factor::kRotY);

  Paths written;
  std::vector<Canvas> grid_rows;
  for (const auto& [l, rep] : embs.reps) {
    std::vector<Canvas> row;
    for (eval::Factor f : factors) {
      const auto colors = factor_colors(embs, f);
      Canvas panel = embedding_panel(rep, colors, style);
      const fs::path p = out_dir / ("embeddings_" + models::to_string(l) + "_by_" + eval::to_string(f) + ".png");
      write_png(p, panel);
      written.push_back(p);
      row.push_back(std::move(panel));
    }
    grid_rows.push_back(hconcat_canvases(row));
  }
  const fs::path grid = out_dir / "embeddings_grid.png";
  write_png(grid, vconcat_canvases(grid_rows));
  written.push_back(grid);

  CsvTable t;
  t.header = {"class", "rot_x", "rot_y"};
  for (const auto& [l, rep] : embs.reps) {
    for (std::size_t d = 0; d < rep.cols(); ++d) t.header.push_back(models::to_string(l) + "_" + std::to_string(d));
  }
  for (std::size_t i = 0; i < embs.size(); ++i) {
    std::vector<double> row{double(embs.classes[i]), embs.rot_x[i], embs.rot_y[i]};
    for (const auto& [l, rep] : embs.reps) {
      const auto r = rep.row(i);
      row.insert(row.end(), r.begin(), r.end());
    }
    t.rows.push_back(std::move(row));
  }
  const fs::path csv = out_dir / "embeddings.csv";
  write_csv(csv, t);
  written.push_back(csv);
  return written;
}

GridWalk grid_walk(const models::ModelState& state, const models::ModelSpec& spec, double lo, double hi, double step) {
  if (spec.z_dim != 2) {
    throw UsageError("grid_walk needs a 2-dimensional z, model has z_dim " + std::to_string(spec.z_dim));
  }
  GridWalk walk;
  walk.centers = eval::grid_centers(lo, hi, step);
  walk.side = std::size_t(std::llround((hi - lo) / step));
  models::LatentSet latents;
  latents[std::size_t(Latent::kZ)] = walk.centers;
  for (Latent l : {Latent::kHx, Latent::kHy}) {
    if (spec.latent_dim(l) > 0) latents[std::size_t(l)] = Tensor2(walk.centers.rows(), spec.latent_dim(l));
  }
  auto rec = models::decode(state, spec, latents);
  walk.x_tiles = std::move(rec.x_hat);
  walk.y_tiles = std::move(rec.y_hat);
  return walk;
}

Paths write_grid_walk(const GridWalk& walk, std::size_t image_rows, std::size_t image_cols, const fs::path& out_dir,
                      const FigureStyle& style) {
  Paths written;
  std::vector<std::vector<double>> leads;
  for (std::size_t i = 0; i < walk.centers.rows(); ++i) {
    leads.push_back({double(i / walk.side), double(i % walk.side), walk.centers(i, 0), walk.centers(i, 1)});
  }
  for (const auto& [name, tiles] : {std::pair{"x", &walk.x_tiles}, {"y", &walk.y_tiles}}) {
    require_image_shape(tiles->cols(), image_rows, image_cols, "grid_walk");
    const fs::path png = out_dir / (std::string("grid_walk_") + name + ".png");
    write_png(png, tile_grid(*tiles, walk.side, image_rows, image_cols, style.tile_scale, true));
    const fs::path csv = out_dir / (std::string("grid_walk_") + name + ".csv");
    write_csv(csv, pixel_table({"tile_row", "tile_col", "z_0", "z_1"}, leads, *tiles));
    written.push_back(png);
    written.push_back(csv);
  }
  return written;
}

ReconPanel recon_panel(const models::ModelState& state, const models::ModelSpec& spec,
                       const data::MultiviewDataset& dataset, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("recon_panel: count must be positive (empty panel)");
  if (dataset.size() == 0) throw DataError("recon_panel: dataset is empty");
  ReconPanel panel;
  if (count > dataset.size()) {
    panel.clamped = true;
    count = dataset.size();
  }
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, 0x5245);
  std::shuffle(order.begin(), order.end(), rng);
  panel.indices.assign(order.begin(), order.begin() + std::ptrdiff_t(count));
  panel.x = select_rows(dataset.view_x, panel.indices);
  panel.y = select_rows(dataset.view_y, panel.indices);
  const auto enc = models::encode(state, spec, models::Batch{panel.x, panel.y}, rng, models::EncodeMode::kMean);
  auto rec = models::decode(state, spec, models::latents_of(enc));
  panel.x_hat = std::move(rec.x_hat);
  panel.y_hat = std::move(rec.y_hat);
  return panel;
}

Paths write_recon_panel(const ReconPanel& panel, std::size_t image_rows, std::size_t image_cols,
                        const fs::path& out_dir, const FigureStyle& style) {
  require_image_shape(panel.x.cols(), image_rows, image_cols, "recon_panel");
  const std::size_t n = panel.indices.size();
  const std::array<const Tensor2*, 4> columns{&panel.x, &panel.x_hat, &panel.y, &panel.y_hat};
  Tensor2 tiles(4 * n, image_rows * image_cols);
  std::vector<std::vector<double>> leads;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const auto src = columns[c]->row(r);
      std::copy(src.begin(), src.end(), tiles.row(r * 4 + c).begin());
      leads.push_back({double(panel.indices[r]), double(c)});
    }
  }
  const fs::path png = out_dir / "recon_panel.png";
  write_png(png, tile_grid(tiles, 4, image_rows, image_cols, style.tile_scale, false));
  const fs::path csv = out_dir / "recon_panel.csv";
  write_csv(csv, pixel_table({"index", "column"}, leads, tiles));
  return {png, csv};
}

Generations random_generations(const models::ModelState& state, const models::ModelSpec& spec, std::size_t count,
                               std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("random_generations: count must be positive");
  models::LatentSet latents;
  for (Latent l : spec.latents()) {
    Rng rng = make_rng(seed, std::size_t(l));
    const auto it = spec.priors.find(l);
    latents[std::size_t(l)] = it != spec.priors.end() ? it->second.sample(count, rng)
                                                      : Prior::standard_gaussian(spec.latent_dim(l)).sample(count, rng);
  }
  auto rec = models::decode(state, spec, latents);
  return {std::move(rec.x_hat), std::move(rec.y_hat)};
}

Paths write_random_generations(const Generations& gens, std::size_t image_rows, std::size_t image_cols,
                               const fs::path& out_dir, const FigureStyle& style) {
  Paths written;
  const auto per_row = std::size_t(std::ceil(std::sqrt(double(gens.x.rows()))));
  for (const auto& [name, tiles] : {std::pair{"x", &gens.x}, {"y", &gens.y}}) {
    require_image_shape(tiles->cols(), image_rows, image_cols, "random_generations");
    const fs::path png = out_dir / (std::string("random_generations_") + name + ".png");
    write_png(png, tile_grid(*tiles, per_row, image_rows, image_cols, style.tile_scale, false));
    std::vector<std::vector<double>> leads;
    for (std::size_t i = 0; i < tiles->rows(); ++i) leads.push_back({double(i)});
    const fs::path csv = out_dir / (std::string("random_generations_") + name + ".csv");
    write_csv(csv, pixel_table({"sample"}, leads, *tiles));
    written.push_back(png);
    written.push_back(csv);
  }
  return written;
}

CsvTable curves_table(const train::ExperimentReport& report) {
  const auto streams = streams_of(report);
  CsvTable t;
  t.header.push_back("epoch");
  for (const std::string prefix : {"", "val_"}) {
    for (Latent s : streams) {
      t.header.push_back(prefix + "l_disc_" + models::to_string(s));
      t.header.push_back(prefix + "l_gen_" + models::to_string(s));
    }
    t.header.push_back(prefix + "l_recon");
    t.header.push_back(prefix + "l_kl");
    t.header.push_back(prefix + "l_total");
  }
  t.header.push_back("val_score");
  t.header.push_back("seconds");
  for (const auto& e : report.epochs) {
    std::vector<double> row{double(e.epoch)};
    append_losses(row, e.train, streams);
    append_losses(row, e.validation, streams);
    row.push_back(e.score);
    row.push_back(e.seconds);
    t.rows.push_back(std::move(row));
  }
  return t;
}

train::ExperimentReport report_from_curves(const CsvTable& table, models::Variant variant) {
  train::ExperimentReport report;
  report.variant = variant;
  report.best_score = std::numeric_limits<double>::infinity();
  std::vector<Latent> streams;
  for (Latent l : models::kAllLatents) {
    if (std::find(table.header.begin(), table.header.end(), "l_disc_" + models::to_string(l)) != table.header.end()) {
      streams.push_back(l);
    }
  }
  auto read_losses = [&](const std::vector<double>& row, const std::string& prefix) {
    train::EpochLosses l;
    for (Latent s : streams) {
      l.games[s].disc = row[table.column(prefix + "l_disc_" + models::to_string(s))];
      l.games[s].gen = row[table.column(prefix + "l_gen_" + models::to_string(s))];
    }
    l.recon = row[table.column(prefix + "l_recon")];
    l.kl = row[table.column(prefix + "l_kl")];
    l.total = row[table.column(prefix + "l_total")];
    return l;
  };
  for (const auto& row : table.rows) {
    train::EpochRecord e;
    e.epoch = std::size_t(row[table.column("epoch")]);
    e.train = read_losses(row, "");
    e.validation = read_losses(row, "val_");
    e.score = row[table.column("val_score")];
    e.seconds = row[table.column("seconds")];
    if (std::isfinite(e.score) && e.score < report.best_score) {
      report.best_score = e.score;
      report.best_epoch = e.epoch;
    }
    report.epochs.push_back(std::move(e));
  }
  return report;
}

CsvTable information_table(const std::vector<InfoRecord>& records) {
  CsvTable t;
  t.header.push_back("epoch");
  std::vector<std::pair<Latent, eval::Factor>> keys;
  if (!records.empty()) {
    for (const auto& [k, v] : records.front().info.entries) {
      keys.push_back(k);
      t.header.push_back(info_column(k.first, k.second));
    }
  }
  for (const auto& r : records) {
    std::vector<double> row{double(r.epoch)};
    for (const auto& k : keys) {
      const auto v = r.info.at(k.first, k.second);
      row.push_back(v ? *v : std::numeric_limits<double>::quiet_NaN());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<InfoRecord> information_from_table(const CsvTable& table) {
  std::vector<InfoRecord> out;
  for (const auto& row : table.rows) {
    InfoRecord r;
    r.epoch = std::size_t(row[table.column("epoch")]);
    for (Latent l : models::kAllLatents) {
      for (eval::Factor f : eval::kAllFactors) {
        const auto name = info_column(l, f);
        const auto it = std::find(table.header.begin(), table.header.end(), name);
        if (it != table.header.end()) r.info.entries[{l, f}] = row[std::size_t(it - table.header.begin())];
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

Paths plot_curves(const train::ExperimentReport& report, const std::vector<InfoRecord>& info, const fs::path& out_dir,
                  const FigureStyle& style) {
  if (report.epochs.empty()) throw DataError("plot_curves: report has no epochs");
  Paths written;
  std::vector<double> x;
  for (const auto& e : report.epochs) x.push_back(double(e.epoch));
  auto series_of = [&](auto&& get, Color color) {
    Series s{{}, color};
    for (const auto& e : report.epochs) s.y.push_back(get(e));
    return s;
  };

  std::vector<Canvas> panels;
  const auto streams = streams_of(report);
  if (!streams.empty()) {
    std::vector<Series> game;
    int color = 0;
    for (Latent s : streams) {
      game.push_back(series_of([&](const train::EpochRecord& e) { return e.train.games.at(s).disc; }, categorical(color++)));
      game.push_back(series_of([&](const train::EpochRecord& e) { return e.train.games.at(s).gen; }, categorical(color++)));
    }
    panels.push_back(line_panel(x, game, train::kEquilibriumLoss, style));
  } else {
    panels.push_back(line_panel(x, {series_of([](const train::EpochRecord& e) { return e.train.kl; }, categorical(4))},
                                std::nullopt, style));
  }
  panels.push_back(line_panel(x, {series_of([](const train::EpochRecord& e) { return e.train.recon; }, categorical(0))},
                              std::nullopt, style));
  panels.push_back(line_panel(x,
                              {series_of([](const train::EpochRecord& e) { return e.train.total; }, categorical(1)),
                               series_of([](const train::EpochRecord& e) { return e.score; }, categorical(3))},
                              std::nullopt, style));
  const fs::path losses_png = out_dir / "curves_losses.png";
  write_png(losses_png, hconcat_canvases(panels));
  const fs::path losses_csv = out_dir / "curves_losses.csv";
  write_csv(losses_csv, curves_table(report));
  written.push_back(losses_png);
  written.push_back(losses_csv);

  if (!info.empty()) {
    std::vector<double> ix;
    for (const auto& r : info) ix.push_back(double(r.epoch));
    std::vector<Canvas> info_panels;
    for (Latent l : models::kAllLatents) {
      std::vector<Series> s;
      for (eval::Factor f : eval::kAllFactors) {
        if (!info.front().info.at(l, f)) continue;
        Series ser{{}, categorical(int(f))};
        for (const auto& r : info) {
          const auto v = r.info.at(l, f);
          ser.y.push_back(v ? *v : std::numeric_limits<double>::quiet_NaN());
        }
        s.push_back(std::move(ser));
      }
      if (!s.empty()) info_panels.push_back(line_panel(ix, s, std::nullopt, style));
    }
    const fs::path info_png = out_dir / "curves_information.png";
    write_png(info_png, hconcat_canvases(info_panels));
    const fs::path info_csv = out_dir / "curves_information.csv";
    write_csv(info_csv, information_table(info));
    written.push_back(info_png);
    written.push_back(info_csv);
  }
  return written;
}

KdeMap kde_map(const Tensor2& points, double lo, double hi, double step, double bandwidth) {
  if (points.cols() != 2) throw UsageError("kde_map needs 2-D points; project first");
  KdeMap map;
  map.lo = lo;
  map.hi = hi;
  map.step = step;
  map.centers = eval::grid_centers(lo, hi, step);
  map.side = std::size_t(std::llround((hi - lo) / step));
  map.log_density = eval::kde_log_density(points, map.centers, bandwidth);
  return map;
}

Paths write_kde_map(const KdeMap& map, const std::string& name, const fs::path& out_dir, const FigureStyle& style) {
  const double peak = *std::max_element(map.log_density.begin(), map.log_density.end());
  const std::size_t scale = std::max<std::size_t>(1, style.panel_size / std::max<std::size_t>(1, map.side));
  Canvas c(map.side * scale, map.side * scale);
  for (std::size_t i = 0; i < map.log_density.size(); ++i) {
    const std::size_t r = map.side - 1 - i / map.side;
    const std::size_t col = i % map.side;
    c.fill_rect(long(col * scale), long(r * scale), long((col + 1) * scale) - 1, long((r + 1) * scale) - 1,
                sequential(std::exp(map.log_density[i] - peak)));
  }
  const fs::path png = out_dir / ("kde_" + name + ".png");
  write_png(png, c);
  CsvTable t;
  t.header = {"x", "y", "log_density"};
  for (std::size_t i = 0; i < map.log_density.size(); ++i) {
    t.rows.push_back({map.centers(i, 0), map.centers(i, 1), map.log_density[i]});
  }
  const fs::path csv = out_dir / ("kde_" + name + ".csv");
  write_csv(csv, t);
  return {png, csv};
}

}  // namespace mvrl::report

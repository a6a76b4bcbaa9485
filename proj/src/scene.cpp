#include "mvlci/scene.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mvlci/rng.hpp"

namespace mvlci {

SceneKind parse_scene_kind(std::string_view name) {
  if (name == "blocks") return SceneKind::blocks;
  if (name == "gradient-bars") return SceneKind::gradient_bars;
  if (name == "checker-text") return SceneKind::checker_text;
  throw Error("unknown scene kind '" + std::string(name) + "'");
}

std::string_view to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::blocks:
      return "blocks";
    case SceneKind::gradient_bars:
      return "gradient-bars";
    case SceneKind::checker_text:
      return "checker-text";
  }
  return "?";
}

void CameraGeometry::validate() const {
  if (aperture_width == 0 || aperture_height == 0) {
    throw Error("camera geometry: aperture dimensions must be positive");
  }
  if (sensor_offsets.empty()) throw Error("camera geometry: at least one sensor is required");
  if (sensor_offsets.front().dx != 0.0 || sensor_offsets.front().dy != 0.0) {
    throw Error("camera geometry: sensor 1 must sit at offset (0, 0)");
  }
  if (!(sensor_plane_distance > 0.0) || !std::isfinite(sensor_plane_distance)) {
    throw Error("camera geometry: sensor plane distance f must be positive");
  }
  if (!(scene_distance > 0.0)) throw Error("camera geometry: scene distance Z must be positive");
}

CameraGeometry two_sensor_geometry(std::size_t width, std::size_t height, double dx, double f,
                                   double z) {
  CameraGeometry g;
  g.aperture_width = width;
  g.aperture_height = height;
  g.sensor_offsets = {{0.0, 0.0}, {dx, 0.0}};
  g.sensor_plane_distance = f;
  g.scene_distance = z;
  return g;
}

namespace {

struct Rect {
  std::size_t x0, y0, x1, y1;  // half-open

  bool overlaps_with_gap(const Rect& o) const {
    return !(x1 + 1 <= o.x0 || o.x1 + 1 <= x0 || y1 + 1 <= o.y0 || o.y1 + 1 <= y0);
  }
};

void fill_rect(Image& img, const Rect& r, double value) {
  for (std::size_t y = r.y0; y < r.y1; ++y) {
    for (std::size_t x = r.x0; x < r.x1; ++x) img(x, y) = value;
  }
}

std::size_t rand_range(SplitMix64& rng, std::size_t lo, std::size_t hi) {
  return hi <= lo ? lo : lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

// Background plus up to 11 non-overlapping rectangles separated by at least
// one background pixel, so the image has at most 12 constant regions.
Image make_blocks(std::size_t w, std::size_t h, SplitMix64& rng) {
  Image img(w, h, 0.15 + 0.15 * rng.uniform());
  std::vector<Rect> placed;
  const std::size_t min_w = std::max<std::size_t>(2, w / 10);
  const std::size_t max_w = std::max(min_w, w / 3);
  const std::size_t min_h = std::max<std::size_t>(2, h / 10);
  const std::size_t max_h = std::max(min_h, h / 3);
  for (int attempt = 0; attempt < 200 && placed.size() < 11; ++attempt) {
    const std::size_t rw = rand_range(rng, min_w, max_w);
    const std::size_t rh = rand_range(rng, min_h, max_h);
    if (rw + 2 > w || rh + 2 > h) continue;
    const std::size_t x0 = rand_range(rng, 1, w - rw - 1);
    const std::size_t y0 = rand_range(rng, 1, h - rh - 1);
    const Rect r{x0, y0, x0 + rw, y0 + rh};
    if (std::any_of(placed.begin(), placed.end(),
                    [&](const Rect& o) { return r.overlaps_with_gap(o); })) {
      continue;
    }
    placed.push_back(r);
    fill_rect(img, r, 0.35 + 0.6 * rng.uniform());
  }
  return img;
}

// Smooth diagonal ramp with a handful of constant vertical bars on top.
Image make_gradient_bars(std::size_t w, std::size_t h, SplitMix64& rng) {
  Image img(w, h);
  const double tilt = 0.2 + 0.3 * rng.uniform();
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double u = static_cast<double>(x) / static_cast<double>(w - 1);
      const double v = static_cast<double>(y) / static_cast<double>(h - 1);
      img(x, y) = 0.1 + 0.6 * ((1.0 - tilt) * u + tilt * v);
    }
  }
  const std::size_t bars = 3 + static_cast<std::size_t>(rng.below(3));
  for (std::size_t b = 0; b < bars; ++b) {
    const std::size_t bw = rand_range(rng, std::max<std::size_t>(1, w / 32), std::max<std::size_t>(2, w / 12));
    const std::size_t x0 = rand_range(rng, 0, w - bw);
    const std::size_t y0 = rand_range(rng, 0, h / 4);
    const std::size_t y1 = rand_range(rng, 3 * h / 4, h);
    fill_rect(img, {x0, y0, x0 + bw, y1}, 0.05 + 0.9 * rng.uniform());
  }
  return img;
}

// Fine detail at the sampling limit: a checkerboard with odd-sized cells and
// thin glyph-like strokes of single-pixel width on a flat background.
Image make_checker_text(std::size_t w, std::size_t h, SplitMix64& rng) {
  Image img(w, h, 0.3 + 0.1 * rng.uniform());
  const std::size_t cell = 3;
  const Rect board{w / 8, h / 8, w / 8 + (w / 3) / cell * cell, h / 8 + (h / 2) / cell * cell};
  for (std::size_t y = board.y0; y < board.y1; ++y) {
    for (std::size_t x = board.x0; x < board.x1; ++x) {
      const bool dark = (((x - board.x0) / cell) + ((y - board.y0) / cell)) % 2 == 0;
      img(x, y) = dark ? 0.1 : 0.9;
    }
  }
  // Glyphs: small boxes of 1-pixel strokes, with a vertical middle stroke
  // on some of them, laid out like a line of text.
  const std::size_t glyph_w = 5;
  const std::size_t glyph_h = std::max<std::size_t>(5, h / 8);
  const std::size_t text_y = std::min(h - glyph_h - 1, board.y1 + 3);
  for (std::size_t gx = w / 2; gx + glyph_w + 1 < w; gx += glyph_w + 2) {
    const double ink = 0.85 + 0.1 * rng.uniform();
    const std::uint64_t shape = rng.below(8);
    for (std::size_t y = text_y; y < text_y + glyph_h; ++y) {
      img(gx, y) = ink;
      if (shape & 1) img(gx + glyph_w - 1, y) = ink;
      if (shape & 2) img(gx + glyph_w / 2, y) = ink;
    }
    for (std::size_t x = gx; x < gx + glyph_w; ++x) {
      img(x, text_y) = ink;
      if (shape & 4) img(x, text_y + glyph_h - 1) = ink;
    }
  }
  return img;
}

}  // namespace

SceneModel make_test_scene(SceneKind kind, std::size_t width, std::size_t height,
                           std::uint64_t seed) {
  if (width < 8 || height < 8) {
    throw Error("make_test_scene: width and height must be at least 8 (got " +
                std::to_string(width) + "x" + std::to_string(height) + ")");
  }
  SplitMix64 rng(seed);
  SceneModel scene;
  switch (kind) {
    case SceneKind::blocks:
      scene.base = make_blocks(width, height, rng);
      break;
    case SceneKind::gradient_bars:
      scene.base = make_gradient_bars(width, height, rng);
      break;
    case SceneKind::checker_text:
      scene.base = make_checker_text(width, height, rng);
      break;
  }
  std::ostringstream desc;
  desc << to_string(kind) << " " << width << "x" << height << " seed=" << seed;
  scene.description = desc.str();
  return scene;
}

ParallaxShift parallax_shift(const CameraGeometry& geometry, std::size_t sensor_index) {
  if (sensor_index >= geometry.sensor_offsets.size()) {
    throw Error("parallax_shift: sensor index " + std::to_string(sensor_index) +
                " out of range");
  }
  const SensorOffset& off = geometry.sensor_offsets[sensor_index];
  const double z = geometry.scene_distance;
  const double factor = z / (z + geometry.sensor_plane_distance);
  return {off.dx * factor, off.dy * factor};
}

std::size_t required_margin(double max_shift, std::size_t scale) {
  return static_cast<std::size_t>(std::ceil(std::abs(max_shift) * static_cast<double>(scale)));
}

double bilinear_sample(const Image& image, double x, double y) {
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const double tx = x - fx0;
  const double ty = y - fy0;
  const auto x0 = static_cast<std::size_t>(fx0);
  const auto y0 = static_cast<std::size_t>(fy0);
  auto row = [&](std::size_t yy) {
    const double a = image(x0, yy);
    return tx == 0.0 ? a : a + tx * (image(x0 + 1, yy) - a);
  };
  const double top = row(y0);
  return ty == 0.0 ? top : top + ty * (row(y0 + 1) - top);
}

namespace {

// Checks that positions [lo, hi] (fine-grid coordinates) keep the bilinear
// stencil inside [0, extent - 1].
bool stencil_in_bounds(double lo, double hi, std::size_t extent) {
  if (lo < 0.0) return false;
  const double last = std::floor(hi) == hi ? hi : std::floor(hi) + 1.0;
  return last <= static_cast<double>(extent) - 1.0;
}

}  // namespace

Image render_view(const SceneModel& scene, const CameraGeometry& geometry,
                  std::size_t sensor_index) {
  geometry.validate();
  const std::size_t w = geometry.aperture_width;
  const std::size_t h = geometry.aperture_height;
  const std::size_t sx = scene.scale_x;
  const std::size_t sy = scene.scale_y;
  if (sx == 0 || sy == 0) throw Error("render_view: scene scale must be positive");
  const Image& base = scene.base;
  if (base.width() < w * sx || base.height() < h * sy) {
    throw Error("render_view: scene " + std::to_string(base.width()) + "x" +
                std::to_string(base.height()) + " is smaller than the aperture footprint " +
                std::to_string(w * sx) + "x" + std::to_string(h * sy));
  }
  const ParallaxShift shift = parallax_shift(geometry, sensor_index);
  const double tx = shift.dx * static_cast<double>(sx);
  const double ty = shift.dy * static_cast<double>(sy);
  const double ox = static_cast<double>((base.width() - w * sx) / 2);
  const double oy = static_cast<double>((base.height() - h * sy) / 2);

  const double x_lo = ox - tx;
  const double x_hi = ox + static_cast<double>(w * sx - 1) - tx;
  const double y_lo = oy - ty;
  const double y_hi = oy + static_cast<double>(h * sy - 1) - ty;
  if (!stencil_in_bounds(x_lo, x_hi, base.width()) ||
      !stencil_in_bounds(y_lo, y_hi, base.height())) {
    throw Error("render_view: sensor " + std::to_string(sensor_index + 1) + " shift (" +
                std::to_string(shift.dx) + ", " + std::to_string(shift.dy) +
                ") leaves the scene; it needs a margin of at least " +
                std::to_string(required_margin(shift.dx, sx) + 1) + " px horizontally and " +
                std::to_string(required_margin(shift.dy, sy) + 1) +
                " px vertically on each side of the " + std::to_string(w * sx) + "x" +
                std::to_string(h * sy) + " aperture footprint");
  }

  Image view(w, h);
  const double inv_count = 1.0 / static_cast<double>(sx * sy);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::size_t j = 0; j < sy; ++j) {
        const double py = y_lo + static_cast<double>(y * sy + j);
        for (std::size_t i = 0; i < sx; ++i) {
          acc += bilinear_sample(base, x_lo + static_cast<double>(x * sx + i), py);
        }
      }
      view(x, y) = sx * sy == 1 ? acc : acc * inv_count;
    }
  }
  return view;
}

}  // namespace mvlci

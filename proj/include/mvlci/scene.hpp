#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mvlci/image.hpp"

namespace mvlci {

enum class SceneKind { blocks, gradient_bars, checker_text };

SceneKind parse_scene_kind(std::string_view name);
std::string_view to_string(SceneKind kind);

/// A static planar scene. `base` is sampled on a grid that is `scale_x` x
/// `scale_y` times finer than the aperture; the aperture window sits centered
/// in `base`, and any surplus acts as a margin for parallax shifts.
struct SceneModel {
  Image base;
  double scene_distance = 1e6;
  std::string description;
  std::size_t scale_x = 1;
  std::size_t scale_y = 1;
};

struct SensorOffset {
  double dx = 0.0;
  double dy = 0.0;
};

struct ParallaxShift {
  double dx = 0.0;
  double dy = 0.0;
};

/// Aperture at z = 0, sensors on the plane z = -f, scene plane at z = Z.
/// Offsets are in aperture-pixel units relative to sensor 1.
struct CameraGeometry {
  std::size_t aperture_width = 0;
  std::size_t aperture_height = 0;
  std::vector<SensorOffset> sensor_offsets{{0.0, 0.0}};
  double sensor_plane_distance = 1.0;
  double scene_distance = 1e6;

  /// Throws Error if any invariant is violated.
  void validate() const;
  std::size_t sensor_count() const { return sensor_offsets.size(); }
};

/// Two-sensor geometry with sensor 2 displaced horizontally by `dx` pixels.
CameraGeometry two_sensor_geometry(std::size_t width, std::size_t height, double dx,
                                   double f = 1.0, double z = 1e6);

/// Deterministic synthetic scene of the requested kind and size (both >= 8).
SceneModel make_test_scene(SceneKind kind, std::size_t width, std::size_t height,
                           std::uint64_t seed);

/// Displacement of sensor `sensor_index`'s view on the aperture plane:
/// (dx, dy) * Z / (Z + f). Sensor 0 is the reference.
ParallaxShift parallax_shift(const CameraGeometry& geometry, std::size_t sensor_index);

/// Virtual image seen by one sensor, at aperture resolution.
///
/// The scene is translated by the sensor's parallax shift (bilinear
/// resampling on the fine grid) and box-averaged down to one value per
/// aperture element. View k at pixel x sees what view 0 sees at x - shift.
Image render_view(const SceneModel& scene, const CameraGeometry& geometry,
                  std::size_t sensor_index);

/// Horizontal margin (fine-grid pixels per side) a scene needs so that a
/// shift of `max_shift` aperture pixels keeps every sample in bounds.
std::size_t required_margin(double max_shift, std::size_t scale);

/// Bilinear sample at a non-negative position whose stencil is in bounds.
/// Exact at integer coordinates and for constant neighbourhoods.
double bilinear_sample(const Image& image, double x, double y);

}  // namespace mvlci

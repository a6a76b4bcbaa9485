#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mvlci/image.hpp"

namespace mvlci {

/// In-place fast Walsh-Hadamard transform in Sylvester (natural) order.
/// Unnormalized: applying it twice multiplies by data.size(), which must be a
/// power of two.
void fwht(std::span<double> data);

bool is_power_of_two(std::uint64_t n);

/// Smallest power of two >= n (and >= 2).
std::size_t next_power_of_two(std::size_t n);

/// Fully determines the 0/1 sensing matrix: entry (m, n) is
/// (H[rows[m]][c(n)] + 1) / 2 with H the Sylvester Hadamard matrix of
/// `order` and c = pixel_columns(spec) the column assigned to pixel n.
struct SensingSpec {
  std::size_t order = 0;
  std::vector<std::uint32_t> rows;
  std::uint64_t seed = 0;
  std::size_t pixel_count = 0;
  double rate = 1.0;

  void validate() const;
  std::size_t measurement_count() const { return rows.size(); }
  bool operator==(const SensingSpec&) const = default;
};

/// Row 0 followed by ceil(rate * n) - 1 distinct rows drawn uniformly from
/// [1, n) by a partial Fisher-Yates shuffle driven by splitmix64.
std::vector<std::uint32_t> select_rows(std::size_t n, double rate, std::uint64_t seed);

/// Hadamard column of each pixel (row-major pixel index -> column): the
/// first pixel_count entries of a splitmix64 Fisher-Yates shuffle of
/// [0, order), seeded from spec.seed. Scrambling the columns keeps small
/// image translations from mapping Walsh patterns onto themselves.
std::vector<std::uint32_t> pixel_columns(const SensingSpec& spec);

/// Spec for a `pixel_count`-pixel image at the given rate, using the smallest
/// admissible Hadamard order.
SensingSpec make_sensing_spec(std::size_t pixel_count, double rate, std::uint64_t seed);

/// Per-sensor measurement vectors that share one sensing spec.
struct MeasurementSet {
  std::vector<std::vector<double>> z;
  SensingSpec spec;
  double noise_sigma = 0.0;
  std::size_t width = 0;
  std::size_t height = 0;

  std::size_t sensor_count() const { return z.size(); }
  void validate() const;
  bool operator==(const MeasurementSet&) const = default;
};

/// Fast 0/1 Hadamard measurement operator with its own scratch buffer.
/// Not safe to share between threads; create one per thread.
class HadamardSensor {
 public:
  explicit HadamardSensor(SensingSpec spec);

  const SensingSpec& spec() const { return spec_; }

  /// z = A x. `x` has pixel_count entries, `z` has |rows| entries.
  void forward(std::span<const double> x, std::span<double> z);
  /// x = A^T z.
  void adjoint(std::span<const double> z, std::span<double> x);

 private:
  SensingSpec spec_;
  std::vector<std::uint32_t> columns_;
  std::vector<double> scratch_;
};

/// z = A * image: pixels scattered to their Hadamard columns (unused columns
/// are zero padding), then one fast transform.
std::vector<double> measure(const Image& image, const SensingSpec& spec);

/// A^T v, returned as a flat vector of pixel_count entries.
std::vector<double> measure_adjoint(std::span<const double> v, const SensingSpec& spec);

/// Adds i.i.d. Gaussian noise with standard deviation sigma * mean(|z|).
std::vector<double> add_noise(std::span<const double> z, double sigma, std::uint64_t seed);

/// Measures every view under one shared spec and optionally adds noise
/// (sensor k uses noise seed `noise_seed + k`).
MeasurementSet measure_views(std::span<const Image> views, const SensingSpec& spec,
                             double noise_sigma = 0.0, std::uint64_t noise_seed = 0);

}  // namespace mvlci

#include "mvlci/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "mvlci/rng.hpp"

namespace mvlci {

bool is_power_of_two(std::uint64_t n) { return n > 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 2;
  while (p < n) p <<= 1;
  return p;
}

void fwht(std::span<double> data) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw Error("fwht: length must be a power of two");
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += h << 1) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = data[j];
        const double b = data[j + h];
        data[j] = a + b;
        data[j + h] = a - b;
      }
    }
  }
}

void SensingSpec::validate() const {
  if (order < 2 || !is_power_of_two(order)) {
    throw Error("sensing spec: order " + std::to_string(order) + " is not a power of two >= 2");
  }
  if (pixel_count == 0 || pixel_count > order) {
    throw Error("sensing spec: pixel count " + std::to_string(pixel_count) +
                " must be in [1, " + std::to_string(order) + "]");
  }
  if (rows.empty() || rows.front() != 0) {
    throw Error("sensing spec: the row list must start with row 0");
  }
  std::unordered_set<std::uint32_t> seen;
  for (std::uint32_t r : rows) {
    if (r >= order) throw Error("sensing spec: row index " + std::to_string(r) + " >= order");
    if (!seen.insert(r).second) {
      throw Error("sensing spec: duplicate row index " + std::to_string(r));
    }
  }
}

std::vector<std::uint32_t> select_rows(std::size_t n, double rate, std::uint64_t seed) {
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw Error("select_rows: rate must lie in (0, 1], got " + std::to_string(rate));
  }
  if (n < 2 || !is_power_of_two(n)) throw Error("select_rows: order must be a power of two");
  if (n > (std::size_t{1} << 32)) throw Error("select_rows: order exceeds 2^32");
  // Guard against rate * n landing a hair above an integer.
  const auto count = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n) - 1e-9));
  if (count < 1) throw Error("select_rows: rate * order must be at least 1");

  std::vector<std::uint32_t> rows;
  rows.reserve(count);
  rows.push_back(0);
  // Partial Fisher-Yates over the virtual array [1, 2, ..., n - 1]; only
  // displaced slots are materialized.
  const std::uint64_t pool = n - 1;
  std::unordered_map<std::uint64_t, std::uint64_t> displaced;
  auto slot = [&](std::uint64_t i) {
    auto it = displaced.find(i);
    return it == displaced.end() ? i + 1 : it->second;
  };
  SplitMix64 rng(seed);
  for (std::uint64_t i = 0; i + 1 < count; ++i) {
    const std::uint64_t j = i + rng.below(pool - i);
    const std::uint64_t picked = slot(j);
    displaced[j] = slot(i);
    rows.push_back(static_cast<std::uint32_t>(picked));
  }
  return rows;
}

SensingSpec make_sensing_spec(std::size_t pixel_count, double rate, std::uint64_t seed) {
  SensingSpec spec;
  spec.order = next_power_of_two(pixel_count);
  spec.rows = select_rows(spec.order, rate, seed);
  spec.seed = seed;
  spec.pixel_count = pixel_count;
  spec.rate = rate;
  return spec;
}

void MeasurementSet::validate() const {
  spec.validate();
  if (width * height != spec.pixel_count) {
    throw Error("measurement set: " + std::to_string(width) + "x" + std::to_string(height) +
                " does not match pixel count " + std::to_string(spec.pixel_count));
  }
  if (z.empty()) throw Error("measurement set: no sensors");
  for (const auto& v : z) {
    if (v.size() != spec.rows.size()) {
      throw Error("measurement set: vector length " + std::to_string(v.size()) +
                  " differs from row count " + std::to_string(spec.rows.size()));
    }
  }
  if (!(noise_sigma >= 0.0)) throw Error("measurement set: negative noise sigma");
}

std::vector<std::uint32_t> pixel_columns(const SensingSpec& spec) {
  std::vector<std::uint32_t> perm(spec.order);
  std::iota(perm.begin(), perm.end(), std::uint32_t{0});
  SplitMix64 rng(spec.seed ^ 0x5eed5c4a3b1e0f27ULL);
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.below(i + 1)]);
  }
  perm.resize(spec.pixel_count);
  return perm;
}

HadamardSensor::HadamardSensor(SensingSpec spec)
    : spec_((spec.validate(), std::move(spec))), columns_(pixel_columns(spec_)) {
  scratch_.resize(spec_.order);
}

void HadamardSensor::forward(std::span<const double> x, std::span<double> z) {
  if (x.size() != spec_.pixel_count || z.size() != spec_.rows.size()) {
    throw Error("measure: size mismatch (image has " + std::to_string(x.size()) +
                " pixels, spec expects " + std::to_string(spec_.pixel_count) + ")");
  }
  std::fill(scratch_.begin(), scratch_.end(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) scratch_[columns_[n]] = x[n];
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  fwht(scratch_);
  for (std::size_t m = 0; m < z.size(); ++m) {
    z[m] = 0.5 * (scratch_[spec_.rows[m]] + total);
  }
}

void HadamardSensor::adjoint(std::span<const double> z, std::span<double> x) {
  if (z.size() != spec_.rows.size() || x.size() != spec_.pixel_count) {
    throw Error("measure_adjoint: size mismatch (got " + std::to_string(z.size()) +
                " measurements, spec has " + std::to_string(spec_.rows.size()) + " rows)");
  }
  std::fill(scratch_.begin(), scratch_.end(), 0.0);
  for (std::size_t m = 0; m < z.size(); ++m) scratch_[spec_.rows[m]] = z[m];
  const double total = std::accumulate(z.begin(), z.end(), 0.0);
  fwht(scratch_);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = 0.5 * (scratch_[columns_[n]] + total);
}

std::vector<double> measure(const Image& image, const SensingSpec& spec) {
  HadamardSensor sensor(spec);
  std::vector<double> z(spec.rows.size());
  sensor.forward(image.pixels(), z);
  return z;
}

std::vector<double> measure_adjoint(std::span<const double> v, const SensingSpec& spec) {
  HadamardSensor sensor(spec);
  std::vector<double> x(spec.pixel_count);
  sensor.adjoint(v, x);
  return x;
}

std::vector<double> add_noise(std::span<const double> z, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw Error("add_noise: sigma must be non-negative");
  std::vector<double> out(z.begin(), z.end());
  if (sigma == 0.0 || z.empty()) return out;
  double mean_abs = 0.0;
  for (double v : z) mean_abs += std::abs(v);
  mean_abs /= static_cast<double>(z.size());
  const double std_dev = sigma * mean_abs;
  SplitMix64 rng(seed);
  for (double& v : out) v += std_dev * rng.gaussian();
  return out;
}

MeasurementSet measure_views(std::span<const Image> views, const SensingSpec& spec,
                             double noise_sigma, std::uint64_t noise_seed) {
  if (views.empty()) throw Error("measure_views: no views");
  MeasurementSet set;
  set.spec = spec;
  set.noise_sigma = noise_sigma;
  set.width = views.front().width();
  set.height = views.front().height();
  HadamardSensor sensor(spec);
  for (std::size_t k = 0; k < views.size(); ++k) {
    require_same_shape(views.front(), views[k], "measure_views");
    std::vector<double> z(spec.rows.size());
    sensor.forward(views[k].pixels(), z);
    set.z.push_back(add_noise(z, noise_sigma, noise_seed + k));
  }
  return set;
}

}  // namespace mvlci

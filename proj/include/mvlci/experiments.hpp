#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mvlci/image.hpp"
#include "mvlci/scene.hpp"
#include "mvlci/solver.hpp"

namespace mvlci {

struct CaseRow {
  std::string name;
  std::string mode;
  std::string sensors;
  double rate = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
  int iterations = 0;
  double wall_ms = 0.0;
};

/// A named claim with the measured margin (positive when it holds).
struct Verdict {
  std::string name;
  bool passed = false;
  double margin_db = 0.0;
  std::string detail;
};

struct ExperimentReport {
  std::string id;
  std::vector<CaseRow> rows;
  std::vector<Verdict> verdicts;
  /// Ground truth and reconstructions, written as <name>.pgm.
  std::vector<std::pair<std::string, Image>> images;

  bool all_passed() const;
  /// Throws Error when no row has this name.
  const CaseRow& row(const std::string& name) const;
};

struct ExperimentSeeds {
  std::uint64_t scene = 1;
  std::uint64_t measurement = 1;
  std::uint64_t noise = 1;
};

struct MeasurementIncreaseParams {
  SceneKind kind = SceneKind::gradient_bars;
  std::size_t width = 64;
  std::size_t height = 64;
  double dx = 3.5;
  double low_rate = 0.125;
  double high_rate = 0.25;
  double noise_sigma = 0.0;
  double scene_distance = 1e12;
  /// Minimum PSNR gain of the joint views over the low-rate singles.
  double joint_gain_db = 1.0;
  /// Allowed distance between joint PSNR and the mean high-rate PSNR.
  double high_rate_band_db = 1.5;
  ExperimentSeeds seeds;
  SolverConfig solver;
};

/// Two sensors at low and high rate plus joint reconstruction at the low
/// rate. Rows: sensor1-low, sensor1-high, sensor2-low, sensor2-high, joint.
/// Equal rates are treated as a degenerate sanity run whose comparative
/// verdicts pass trivially.
ExperimentReport run_measurement_increase(const MeasurementIncreaseParams& params);

struct SuperresParams {
  SceneKind kind = SceneKind::checker_text;
  std::size_t width = 64;
  std::size_t height = 64;
  double dx = 3.5;
  double rate = 0.25;
  double noise_sigma = 0.0;
  double scene_distance = 1e12;
  /// Minimum PSNR gain of super-res over each upsampled single view.
  double margin_db = 0.5;
  ExperimentSeeds seeds;
  SolverConfig solver;
};

/// Super-resolution against 2x-upsampled single views, scored on the common
/// region of the high-res grid. Rows: sensor1-upsampled, sensor2-upsampled,
/// superres.
ExperimentReport run_superres(const SuperresParams& params);

/// 2x horizontal linear interpolation at pixel centres, edges clamped.
Image upsample_horizontal(const Image& low);

/// Writes report.csv, summary.txt and one PGM per image into `dir`.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);
std::string format_summary(const ExperimentReport& report);

}  // namespace mvlci

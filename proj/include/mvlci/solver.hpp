#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mvlci/geometry.hpp"
#include "mvlci/image.hpp"
#include "mvlci/sensing.hpp"
#include "mvlci/tv.hpp"

namespace mvlci {

class SolverError : public Error {
 public:
  SolverError(const std::string& what, int iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

enum class SigmaMode { automatic, fixed };

struct SolverConfig {
  int max_iters = 500;
  /// Stop once the relative iterate change and every relative constraint
  /// residual fall below this.
  double rel_tol = 1e-4;
  /// Initial augmented-Lagrangian penalty, doubled every
  /// `continuation_interval` iterations up to `max_penalty_ratio` times.
  double penalty = 32.0;
  int continuation_interval = 50;
  double max_penalty_ratio = 1024.0;
  SigmaMode sigma_mode = SigmaMode::automatic;
  double sigma = 1.0;
  /// Radius of the per-sensor fidelity ball ||A x - z||_2 <= epsilon, in
  /// measurement units. Zero means equality constraints.
  double epsilon = 0.0;
  int cg_max_iters = 40;
  double cg_tol = 1e-8;
  /// Per-iteration progress lines go here when non-null.
  std::ostream* progress = nullptr;

  void validate() const;
};

/// Discrepancy-principle radius for noisy data:
/// noise_sigma * sqrt(|z|) * mean(|z|).
double discrepancy_epsilon(std::span<const double> z, double noise_sigma);

/// Linear model shared by every reconstruction mode.
///
/// The unknown vector is a concatenation of image blocks, each with a support
/// mask and a TV weight. Sensor k observes A * v_k where the view v_k is a sum
/// of linear maps applied to blocks. Internally the 0/1 operator is rescaled
/// by 2 / sqrt(N) so that its non-DC singular values are at most one; the
/// targets are rescaled the same way, which leaves the constraint set
/// unchanged.
class MeasurementModel {
 public:
  using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

  struct Block {
    std::string name;
    std::size_t width = 0;
    std::size_t height = 0;
    Mask support;
    double tv_weight = 1.0;
  };

  /// `forward` maps a block to view space, `adjoint` maps back; both
  /// overwrite their output.
  struct Term {
    std::size_t block = 0;
    LinearMap forward;
    LinearMap adjoint;
  };

  MeasurementModel(SensingSpec spec, std::size_t view_width, std::size_t view_height);

  std::size_t add_block(Block block);
  void add_sensor(std::vector<double> z, std::vector<Term> terms);

  std::size_t unknowns() const { return total_; }
  std::size_t block_count() const { return blocks_.size(); }
  std::size_t sensor_count() const { return sensors_.size(); }
  const Block& block(std::size_t b) const { return blocks_[b]; }
  std::size_t block_offset(std::size_t b) const { return offsets_[b]; }
  std::size_t view_size() const { return view_width_ * view_height_; }
  std::size_t view_width() const { return view_width_; }
  std::size_t view_height() const { return view_height_; }
  std::size_t measurement_count() const { return spec_.rows.size(); }
  /// Factor 2 / sqrt(N) applied to A and to the targets.
  double scale() const { return scale_; }
  const SensingSpec& spec() const { return spec_; }
  /// Scaled target of sensor k.
  std::span<const double> target(std::size_t k) const { return sensors_[k].target; }
  /// Unscaled measurements of sensor k.
  std::span<const double> measurements(std::size_t k) const { return sensors_[k].z; }

  std::span<double> block_span(std::span<double> u, std::size_t b) const {
    return u.subspan(offsets_[b], blocks_[b].width * blocks_[b].height);
  }
  std::span<const double> block_span(std::span<const double> u, std::size_t b) const {
    return u.subspan(offsets_[b], blocks_[b].width * blocks_[b].height);
  }

  /// Zeroes every entry outside the block supports.
  void project(std::span<double> u) const;
  /// view = v_k(u).
  void compose_view(std::span<const double> u, std::size_t k, std::span<double> view);
  /// y_k = scale * A v_k(u), one vector per sensor.
  void forward(std::span<const double> u, std::vector<std::vector<double>>& y);
  /// u = P sum_k v_k^T(scale * A^T y_k), P the support projection.
  void adjoint(const std::vector<std::vector<double>>& y, std::span<double> u);

  /// 1/2 sum_k ||scale A v_k(u) - b_k||^2 (b_k the scaled targets).
  double fidelity(std::span<const double> u);
  void fidelity_gradient(std::span<const double> u, std::span<double> grad);

  /// Weighted TV objective sum_b w_b TV(u_b) over the block supports.
  double objective(std::span<const double> u) const;
  const FiniteDifference& difference(std::size_t b) const { return differences_[b]; }

 private:
  struct Sensor {
    std::vector<double> z;
    std::vector<double> target;
    std::vector<Term> terms;
  };

  SensingSpec spec_;
  HadamardSensor sensor_;
  std::size_t view_width_;
  std::size_t view_height_;
  double scale_;
  std::vector<Block> blocks_;
  std::vector<FiniteDifference> differences_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
  std::vector<Sensor> sensors_;
  std::vector<double> view_;
  std::vector<double> term_;
  std::vector<double> back_;
};

/// Identity map on a grid, for use as a MeasurementModel term.
MeasurementModel::Term identity_term(std::size_t block, std::size_t size);

struct SolveStats {
  std::vector<double> solution;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  std::vector<double> objective_history;
  /// Index (into objective_history) of the last iteration of each
  /// continuation stage that ran to completion.
  std::vector<int> stage_ends;
};

/// Augmented-Lagrangian alternating minimization for
///   min sum_b w_b ||D u_b||_1  s.t.  ||scale A v_k(u) - b_k|| <= scale * eps.
/// TV splitting g = D u is handled by soft-thresholding; the quadratic
/// u-subproblem is solved by conjugate gradients on the support subspace.
SolveStats solve_tv(MeasurementModel& model, const SolverConfig& config);

struct ReconstructionResult {
  /// SINGLE: the reconstruction; JOINT: I_C; SUPERRES: the high-res image.
  Image image;
  /// JOINT / SUPERRES: I_C (or high-res I_C), I_D1, I_D2.
  std::vector<Image> components;
  /// Composed per-sensor views at aperture resolution.
  std::vector<Image> views;
  int iterations = 0;
  bool converged = false;
  /// ||A v_k - z_k||_2 / ||z_k||_2 per sensor.
  std::vector<double> residuals;
  double objective = 0.0;
  double sigma = 1.0;
  std::vector<double> objective_history;
  std::vector<int> stage_ends;
};

/// Single-view reconstruction. Passing several measurement vectors stacks
/// them as repeated observations of one image under the same spec.
ReconstructionResult reconstruct_single(const std::vector<std::vector<double>>& z,
                                        const SensingSpec& spec, std::size_t width,
                                        std::size_t height, const SolverConfig& config);
ReconstructionResult reconstruct_single(std::span<const double> z, const SensingSpec& spec,
                                        std::size_t width, std::size_t height,
                                        const SolverConfig& config);

/// sigma in automatic mode is 2, which gives every pixel of every component
/// the same TV weight; the disjoint components are already confined to their
/// own areas by the support constraints.
double resolve_sigma(const RegionMasks& masks, const SolverConfig& config);

ReconstructionResult reconstruct_joint(std::span<const double> z1, std::span<const double> z2,
                                       const SensingSpec& spec, std::size_t width,
                                       std::size_t height, const ShiftOperator& shift,
                                       const RegionMasks& masks, const SolverConfig& config);

/// Horizontal 2x box binning: (S h)(x, y) = (h(2x, y) + h(2x + 1, y)) / 2.
void bin_horizontal(std::span<const double> high, std::span<double> low, std::size_t width,
                    std::size_t height);
void bin_horizontal_adjoint(std::span<const double> low, std::span<double> high,
                            std::size_t width, std::size_t height);
Image bin_horizontal(const Image& high);

ReconstructionResult reconstruct_superres(std::span<const double> z1, std::span<const double> z2,
                                          const SensingSpec& spec, std::size_t width,
                                          std::size_t height, double dx,
                                          const SolverConfig& config);

/// Builders for the models behind each mode; exposed for diagnostics.
MeasurementModel make_single_model(const std::vector<std::vector<double>>& z,
                                   const SensingSpec& spec, std::size_t width,
                                   std::size_t height);
MeasurementModel make_joint_model(std::span<const double> z1, std::span<const double> z2,
                                  const SensingSpec& spec, std::size_t width, std::size_t height,
                                  const ShiftOperator& shift, const RegionMasks& masks,
                                  double sigma);
MeasurementModel make_superres_model(std::span<const double> z1, std::span<const double> z2,
                                     const SensingSpec& spec, std::size_t width,
                                     std::size_t height, double dx, const RegionMasks& masks,
                                     double sigma);

}  // namespace mvlci

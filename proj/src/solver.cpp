#include "mvlci/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <ostream>

namespace mvlci {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

// Euclidean projection onto the ball of the given radius around the origin.
void project_ball(std::span<double> v, double radius) {
  const double n = norm2(v);
  if (n > radius) {
    const double s = radius / n;
    for (double& x : v) x *= s;
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iters <= 0) throw Error("solver config: max_iters must be positive");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw Error("solver config: rel_tol must be in (0, 1)");
  if (!(penalty > 0.0)) throw Error("solver config: penalty must be positive");
  if (continuation_interval <= 0) {
    throw Error("solver config: continuation interval must be positive");
  }
  if (!(max_penalty_ratio >= 1.0)) throw Error("solver config: max penalty ratio must be >= 1");
  if (sigma_mode == SigmaMode::fixed && !(sigma > 0.0)) {
    throw Error("solver config: fixed sigma must be positive");
  }
  if (!(epsilon >= 0.0)) throw Error("solver config: epsilon must be non-negative");
  if (cg_max_iters <= 0 || !(cg_tol > 0.0)) throw Error("solver config: invalid CG settings");
}

double discrepancy_epsilon(std::span<const double> z, double noise_sigma) {
  if (z.empty() || noise_sigma <= 0.0) return 0.0;
  double mean_abs = 0.0;
  for (double v : z) mean_abs += std::abs(v);
  mean_abs /= static_cast<double>(z.size());
  return noise_sigma * std::sqrt(static_cast<double>(z.size())) * mean_abs;
}

// ---------------------------------------------------------------------------
// MeasurementModel

MeasurementModel::MeasurementModel(SensingSpec spec, std::size_t view_width,
                                   std::size_t view_height)
    : spec_(std::move(spec)),
      sensor_(spec_),
      view_width_(view_width),
      view_height_(view_height),
      scale_(2.0 / std::sqrt(static_cast<double>(spec_.order))),
      view_(view_width * view_height),
      term_(view_width * view_height) {
  if (view_width * view_height != spec_.pixel_count) {
    throw Error("measurement model: view " + std::to_string(view_width) + "x" +
                std::to_string(view_height) + " does not match the spec's pixel count " +
                std::to_string(spec_.pixel_count));
  }
}

std::size_t MeasurementModel::add_block(Block block) {
  if (block.support.width != block.width || block.support.height != block.height) {
    throw Error("measurement model: support mask of block '" + block.name +
                "' does not match its grid");
  }
  differences_.emplace_back(block.width, block.height, block.support);
  offsets_.push_back(total_);
  total_ += block.width * block.height;
  back_.resize(std::max(back_.size(), block.width * block.height));
  blocks_.push_back(std::move(block));
  return blocks_.size() - 1;
}

void MeasurementModel::add_sensor(std::vector<double> z, std::vector<Term> terms) {
  if (z.size() != spec_.rows.size()) {
    throw Error("measurement model: sensor " + std::to_string(sensors_.size() + 1) + " has " +
                std::to_string(z.size()) + " measurements, spec has " +
                std::to_string(spec_.rows.size()) + " rows");
  }
  if (!all_finite(z)) {
    throw Error("measurement model: sensor " + std::to_string(sensors_.size() + 1) +
                " has non-finite measurements");
  }
  for (const Term& t : terms) {
    if (t.block >= blocks_.size()) throw Error("measurement model: term references no block");
  }
  Sensor s;
  s.target.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) s.target[i] = scale_ * z[i];
  s.z = std::move(z);
  s.terms = std::move(terms);
  sensors_.push_back(std::move(s));
}

void MeasurementModel::project(std::span<double> u) const {
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    auto part = block_span(u, b);
    const Mask& m = blocks_[b].support;
    for (std::size_t i = 0; i < part.size(); ++i) {
      if (!m[i]) part[i] = 0.0;
    }
  }
}

void MeasurementModel::compose_view(std::span<const double> u, std::size_t k,
                                    std::span<double> view) {
  std::fill(view.begin(), view.end(), 0.0);
  for (const Term& t : sensors_[k].terms) {
    t.forward(block_span(u, t.block), term_);
    for (std::size_t i = 0; i < view.size(); ++i) view[i] += term_[i];
  }
}

void MeasurementModel::forward(std::span<const double> u, std::vector<std::vector<double>>& y) {
  y.resize(sensors_.size());
  for (std::size_t k = 0; k < sensors_.size(); ++k) {
    y[k].resize(spec_.rows.size());
    compose_view(u, k, view_);
    sensor_.forward(view_, y[k]);
    for (double& v : y[k]) v *= scale_;
  }
}

void MeasurementModel::adjoint(const std::vector<std::vector<double>>& y, std::span<double> u) {
  std::fill(u.begin(), u.end(), 0.0);
  for (std::size_t k = 0; k < sensors_.size(); ++k) {
    sensor_.adjoint(y[k], view_);
    for (double& v : view_) v *= scale_;
    for (const Term& t : sensors_[k].terms) {
      auto part = block_span(u, t.block);
      std::span<double> tmp(back_.data(), part.size());
      t.adjoint(view_, tmp);
      for (std::size_t i = 0; i < part.size(); ++i) part[i] += tmp[i];
    }
  }
  project(u);
}

double MeasurementModel::fidelity(std::span<const double> u) {
  std::vector<std::vector<double>> y;
  forward(u, y);
  double f = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    for (std::size_t m = 0; m < y[k].size(); ++m) {
      const double r = y[k][m] - sensors_[k].target[m];
      f += r * r;
    }
  }
  return 0.5 * f;
}

void MeasurementModel::fidelity_gradient(std::span<const double> u, std::span<double> grad) {
  std::vector<std::vector<double>> y;
  forward(u, y);
  for (std::size_t k = 0; k < y.size(); ++k) {
    for (std::size_t m = 0; m < y[k].size(); ++m) y[k][m] -= sensors_[k].target[m];
  }
  adjoint(y, grad);
}

double MeasurementModel::objective(std::span<const double> u) const {
  double obj = 0.0;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    obj += blocks_[b].tv_weight * differences_[b].seminorm(block_span(u, b));
  }
  return obj;
}

MeasurementModel::Term identity_term(std::size_t block, std::size_t size) {
  auto copy = [size](std::span<const double> in, std::span<double> out) {
    std::copy_n(in.begin(), size, out.begin());
  };
  return {block, copy, copy};
}

// ---------------------------------------------------------------------------
// ADMM

namespace {

class TvSolver {
 public:
  TvSolver(MeasurementModel& model, const SolverConfig& config)
      : model_(model),
        cfg_(config),
        n_(model.unknowns()),
        sensors_(model.sensor_count()),
        gx_(n_),
        gy_(n_),
        px_(n_),
        py_(n_),
        dx_(n_),
        dy_(n_),
        tmp_(n_) {
    targets_.resize(sensors_);
    for (std::size_t k = 0; k < sensors_; ++k) {
      auto t = model.target(k);
      targets_[k].assign(t.begin(), t.end());
      target_norms_.push_back(norm2(t));
    }
    q_.assign(sensors_, std::vector<double>(model.measurement_count(), 0.0));
    r_ = q_;
    radius_ = model.scale() * cfg_.epsilon;
  }

  SolveStats run() {
    SolveStats stats;
    std::vector<double> u = initial_guess();
    double mu = cfg_.penalty;
    double beta = cfg_.penalty;
    const double mu_max = cfg_.penalty * cfg_.max_penalty_ratio;

    gradient(u, gx_, gy_);
    std::vector<double> u_prev(n_);
    std::vector<double> rhs(n_);
    std::vector<std::vector<double>> y;
    std::vector<double> residual_norms(sensors_);

    for (int it = 0; it < cfg_.max_iters; ++it) {
      u_prev = u;

      // u-step: (beta D^T D + mu M^T M) u = beta D^T (g - p) + mu M^T (b + r - q)
      for (std::size_t i = 0; i < n_; ++i) {
        dx_[i] = gx_[i] - px_[i];
        dy_[i] = gy_[i] - py_[i];
      }
      gradient_transpose(dx_, dy_, rhs);
      std::vector<std::vector<double>> c(sensors_);
      for (std::size_t k = 0; k < sensors_; ++k) {
        c[k].resize(targets_[k].size());
        for (std::size_t m = 0; m < c[k].size(); ++m) {
          c[k][m] = targets_[k][m] + r_[k][m] - q_[k][m];
        }
      }
      model_.adjoint(c, tmp_);
      for (std::size_t i = 0; i < n_; ++i) rhs[i] = beta * rhs[i] + mu * tmp_[i];
      model_.project(rhs);
      conjugate_gradient(rhs, u, beta, mu);
      model_.project(u);

      // g-step and TV multiplier update.
      gradient(u, dx_, dy_);
      for (std::size_t b = 0; b < model_.block_count(); ++b) {
        const double thr = model_.block(b).tv_weight / beta;
        const std::size_t off = model_.block_offset(b);
        const std::size_t len = model_.block(b).width * model_.block(b).height;
        for (std::size_t i = off; i < off + len; ++i) {
          gx_[i] = soft_threshold(dx_[i] + px_[i], thr);
          gy_[i] = soft_threshold(dy_[i] + py_[i], thr);
          px_[i] += dx_[i] - gx_[i];
          py_[i] += dy_[i] - gy_[i];
        }
      }

      // Residual slack (noisy case) and data multiplier update.
      model_.forward(u, y);
      bool feasible = true;
      for (std::size_t k = 0; k < sensors_; ++k) {
        std::vector<double>& res = y[k];
        for (std::size_t m = 0; m < res.size(); ++m) res[m] -= targets_[k][m];
        residual_norms[k] = norm2(res);
        if (radius_ > 0.0) {
          for (std::size_t m = 0; m < res.size(); ++m) r_[k][m] = res[m] + q_[k][m];
          project_ball(r_[k], radius_);
        }
        for (std::size_t m = 0; m < res.size(); ++m) q_[k][m] += res[m] - r_[k][m];
        const double bound = std::max(cfg_.rel_tol * target_norms_[k], radius_);
        if (residual_norms[k] > bound) feasible = false;
      }

      double diff = 0.0;
      for (std::size_t i = 0; i < n_; ++i) diff += (u[i] - u_prev[i]) * (u[i] - u_prev[i]);
      const double unorm = norm2(u);
      const double change = unorm > 0.0 ? std::sqrt(diff) / unorm : std::sqrt(diff);
      const double obj = model_.objective(u);
      stats.objective_history.push_back(obj);
      stats.iterations = it + 1;

      if (!std::isfinite(obj) || !std::isfinite(unorm)) {
        throw SolverError("reconstruction diverged: non-finite iterate", it + 1);
      }
      if (cfg_.progress) {
        *cfg_.progress << "iter=" << it + 1 << " obj=" << obj;
        for (std::size_t k = 0; k < sensors_; ++k) {
          const double rel = target_norms_[k] > 0.0 ? residual_norms[k] / target_norms_[k]
                                                    : residual_norms[k];
          *cfg_.progress << " res" << k + 1 << "=" << rel;
        }
        *cfg_.progress << '\n';
      }
      if (change < cfg_.rel_tol && feasible) {
        stats.converged = true;
        break;
      }
      if ((it + 1) % cfg_.continuation_interval == 0) {
        stats.stage_ends.push_back(it);
        if (mu * 2.0 <= mu_max * (1.0 + 1e-12)) {
          mu *= 2.0;
          beta *= 2.0;
          // Scaled multipliers are lambda / penalty.
          for (std::size_t i = 0; i < n_; ++i) {
            px_[i] *= 0.5;
            py_[i] *= 0.5;
          }
          for (auto& qk : q_) {
            for (double& v : qk) v *= 0.5;
          }
        }
      }
    }
    stats.objective = model_.objective(u);
    stats.solution = std::move(u);
    return stats;
  }

 private:
  void gradient(std::span<const double> u, std::span<double> gx, std::span<double> gy) const {
    for (std::size_t b = 0; b < model_.block_count(); ++b) {
      const std::size_t off = model_.block_offset(b);
      const std::size_t len = model_.block(b).width * model_.block(b).height;
      model_.difference(b).apply(u.subspan(off, len), gx.subspan(off, len), gy.subspan(off, len));
    }
  }

  void gradient_transpose(std::span<const double> gx, std::span<const double> gy,
                          std::span<double> out) const {
    for (std::size_t b = 0; b < model_.block_count(); ++b) {
      const std::size_t off = model_.block_offset(b);
      const std::size_t len = model_.block(b).width * model_.block(b).height;
      model_.difference(b).apply_transpose(gx.subspan(off, len), gy.subspan(off, len),
                                           out.subspan(off, len));
    }
  }

  // out = P (beta D^T D + mu M^T M) in
  void apply_normal(std::span<const double> in, std::span<double> out, double beta, double mu) {
    std::vector<double>& gx = scratch_x_;
    std::vector<double>& gy = scratch_y_;
    gx.resize(n_);
    gy.resize(n_);
    gradient(in, gx, gy);
    gradient_transpose(gx, gy, out);
    model_.forward(in, normal_y_);
    model_.adjoint(normal_y_, tmp_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = beta * out[i] + mu * tmp_[i];
    model_.project(out);
  }

  void conjugate_gradient(std::span<const double> rhs, std::vector<double>& x, double beta,
                          double mu) {
    const double rhs_norm = norm2(rhs);
    if (rhs_norm == 0.0) {
      std::fill(x.begin(), x.end(), 0.0);
      return;
    }
    std::vector<double> r(n_), p(n_), ap(n_);
    apply_normal(x, ap, beta, mu);
    for (std::size_t i = 0; i < n_; ++i) r[i] = rhs[i] - ap[i];
    p = r;
    double rs = dot(r, r);
    const double stop = cfg_.cg_tol * rhs_norm;
    for (int i = 0; i < cfg_.cg_max_iters && std::sqrt(rs) > stop; ++i) {
      apply_normal(p, ap, beta, mu);
      const double pap = dot(p, ap);
      if (!(pap > 0.0)) break;
      const double alpha = rs / pap;
      for (std::size_t j = 0; j < n_; ++j) {
        x[j] += alpha * p[j];
        r[j] -= alpha * ap[j];
      }
      const double rs_new = dot(r, r);
      const double gamma = rs_new / rs;
      rs = rs_new;
      for (std::size_t j = 0; j < n_; ++j) p[j] = r[j] + gamma * p[j];
    }
  }

  // Back-projection M^T b scaled by 1 / ||M||^2 (power-iteration estimate).
  std::vector<double> initial_guess() {
    std::vector<double> v(n_, 1.0);
    model_.project(v);
    std::vector<double> w(n_);
    double lipschitz = 0.0;
    double vn = norm2(v);
    if (vn > 0.0) {
      for (double& x : v) x /= vn;
      for (int i = 0; i < 30; ++i) {
        model_.forward(v, normal_y_);
        model_.adjoint(normal_y_, w);
        lipschitz = norm2(w);
        if (lipschitz == 0.0) break;
        for (std::size_t j = 0; j < n_; ++j) v[j] = w[j] / lipschitz;
      }
    }
    std::vector<double> u(n_);
    model_.adjoint(targets_, u);
    if (lipschitz > 0.0) {
      for (double& x : u) x /= lipschitz;
    }
    return u;
  }

  MeasurementModel& model_;
  const SolverConfig& cfg_;
  std::size_t n_;
  std::size_t sensors_;
  std::vector<std::vector<double>> targets_;
  std::vector<double> target_norms_;
  std::vector<std::vector<double>> q_;
  std::vector<std::vector<double>> r_;
  double radius_ = 0.0;
  std::vector<double> gx_, gy_, px_, py_, dx_, dy_, tmp_;
  std::vector<double> scratch_x_, scratch_y_;
  std::vector<std::vector<double>> normal_y_;
};

}  // namespace

SolveStats solve_tv(MeasurementModel& model, const SolverConfig& config) {
  config.validate();
  if (model.sensor_count() == 0 || model.block_count() == 0) {
    throw Error("solve_tv: model has no sensors or no unknowns");
  }
  return TvSolver(model, config).run();
}

// ---------------------------------------------------------------------------
// Modes

namespace {

Image block_image(const MeasurementModel& model, std::span<const double> u, std::size_t b) {
  const auto part = model.block_span(u, b);
  return Image(model.block(b).width, model.block(b).height,
               std::vector<double>(part.begin(), part.end()));
}

ReconstructionResult finish(MeasurementModel& model, SolveStats stats, double sigma) {
  ReconstructionResult result;
  result.iterations = stats.iterations;
  result.converged = stats.converged;
  result.objective = stats.objective;
  result.sigma = sigma;
  result.objective_history = std::move(stats.objective_history);
  result.stage_ends = std::move(stats.stage_ends);
  for (std::size_t b = 0; b < model.block_count(); ++b) {
    result.components.push_back(block_image(model, stats.solution, b));
  }
  std::vector<std::vector<double>> y;
  model.forward(stats.solution, y);
  for (std::size_t k = 0; k < model.sensor_count(); ++k) {
    Image view(model.view_width(), model.view_height());
    model.compose_view(stats.solution, k, view.pixels());
    result.views.push_back(std::move(view));
    const auto target = model.target(k);
    double rn = 0.0;
    for (std::size_t m = 0; m < y[k].size(); ++m) {
      rn += (y[k][m] - target[m]) * (y[k][m] - target[m]);
    }
    const double tn = norm2(target);
    result.residuals.push_back(tn > 0.0 ? std::sqrt(rn) / tn : std::sqrt(rn));
  }
  result.image = result.components.front();
  return result;
}

void require_lengths(std::span<const double> z, const SensingSpec& spec, const char* what) {
  if (z.size() != spec.rows.size()) {
    throw Error(std::string(what) + ": measurement vector has " + std::to_string(z.size()) +
                " entries, spec has " + std::to_string(spec.rows.size()) + " rows");
  }
}

}  // namespace

MeasurementModel make_single_model(const std::vector<std::vector<double>>& z,
                                   const SensingSpec& spec, std::size_t width,
                                   std::size_t height) {
  if (z.empty()) throw Error("reconstruct_single: no measurement vectors");
  MeasurementModel model(spec, width, height);
  const std::size_t b = model.add_block({"image", width, height, Mask(width, height, true), 1.0});
  for (const auto& zk : z) {
    require_lengths(zk, spec, "reconstruct_single");
    model.add_sensor(zk, {identity_term(b, width * height)});
  }
  return model;
}

ReconstructionResult reconstruct_single(const std::vector<std::vector<double>>& z,
                                        const SensingSpec& spec, std::size_t width,
                                        std::size_t height, const SolverConfig& config) {
  MeasurementModel model = make_single_model(z, spec, width, height);
  return finish(model, solve_tv(model, config), 1.0);
}

ReconstructionResult reconstruct_single(std::span<const double> z, const SensingSpec& spec,
                                        std::size_t width, std::size_t height,
                                        const SolverConfig& config) {
  return reconstruct_single(std::vector<std::vector<double>>{{z.begin(), z.end()}}, spec, width,
                            height, config);
}

double resolve_sigma(const RegionMasks& masks, const SolverConfig& config) {
  (void)masks;
  if (config.sigma_mode == SigmaMode::fixed) return config.sigma;
  return 2.0;
}

MeasurementModel make_joint_model(std::span<const double> z1, std::span<const double> z2,
                                  const SensingSpec& spec, std::size_t width, std::size_t height,
                                  const ShiftOperator& shift, const RegionMasks& masks,
                                  double sigma) {
  require_lengths(z1, spec, "reconstruct_joint");
  require_lengths(z2, spec, "reconstruct_joint");
  if (shift.width() != width || shift.height() != height || masks.width() != width ||
      masks.height() != height || masks.disjoint.size() != 2) {
    throw Error("reconstruct_joint: shift operator or region masks do not match the " +
                std::to_string(width) + "x" + std::to_string(height) + " grid");
  }
  MeasurementModel model(spec, width, height);
  const std::size_t n = width * height;
  const std::size_t c = model.add_block({"common", width, height, masks.common, 1.0});
  const std::size_t d1 =
      model.add_block({"disjoint1", width, height, masks.disjoint[0], 0.5 * sigma});
  const std::size_t d2 =
      model.add_block({"disjoint2", width, height, masks.disjoint[1], 0.5 * sigma});

  auto op = std::make_shared<ShiftOperator>(shift);
  MeasurementModel::Term shifted{
      c, [op](std::span<const double> in, std::span<double> out) { op->apply(in, out); },
      [op](std::span<const double> in, std::span<double> out) { op->apply_transpose(in, out); }};

  model.add_sensor({z1.begin(), z1.end()}, {identity_term(c, n), identity_term(d1, n)});
  model.add_sensor({z2.begin(), z2.end()}, {shifted, identity_term(d2, n)});
  return model;
}

ReconstructionResult reconstruct_joint(std::span<const double> z1, std::span<const double> z2,
                                       const SensingSpec& spec, std::size_t width,
                                       std::size_t height, const ShiftOperator& shift,
                                       const RegionMasks& masks, const SolverConfig& config) {
  config.validate();
  const double sigma = resolve_sigma(masks, config);
  MeasurementModel model = make_joint_model(z1, z2, spec, width, height, shift, masks, sigma);
  return finish(model, solve_tv(model, config), sigma);
}

void bin_horizontal(std::span<const double> high, std::span<double> low, std::size_t width,
                    std::size_t height) {
  for (std::size_t y = 0; y < height; ++y) {
    const double* src = high.data() + y * 2 * width;
    double* dst = low.data() + y * width;
    for (std::size_t x = 0; x < width; ++x) dst[x] = 0.5 * (src[2 * x] + src[2 * x + 1]);
  }
}

void bin_horizontal_adjoint(std::span<const double> low, std::span<double> high,
                            std::size_t width, std::size_t height) {
  for (std::size_t y = 0; y < height; ++y) {
    const double* src = low.data() + y * width;
    double* dst = high.data() + y * 2 * width;
    for (std::size_t x = 0; x < width; ++x) {
      dst[2 * x] = 0.5 * src[x];
      dst[2 * x + 1] = 0.5 * src[x];
    }
  }
}

Image bin_horizontal(const Image& high) {
  if (high.width() % 2 != 0) throw Error("bin_horizontal: width must be even");
  Image low(high.width() / 2, high.height());
  bin_horizontal(high.pixels(), low.pixels(), low.width(), low.height());
  return low;
}

MeasurementModel make_superres_model(std::span<const double> z1, std::span<const double> z2,
                                     const SensingSpec& spec, std::size_t width,
                                     std::size_t height, double dx, const RegionMasks& masks,
                                     double sigma) {
  require_lengths(z1, spec, "reconstruct_superres");
  require_lengths(z2, spec, "reconstruct_superres");
  if (masks.width() != width || masks.height() != height || masks.disjoint.size() != 2) {
    throw Error("reconstruct_superres: region masks do not match the grid");
  }
  const std::size_t hw = 2 * width;
  Mask high_support(hw, height, false);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < hw; ++x) {
      high_support.bits[y * hw + x] = masks.common.bits[y * width + x / 2];
    }
  }
  MeasurementModel model(spec, width, height);
  const std::size_t n = width * height;
  const std::size_t c = model.add_block({"common_highres", hw, height, high_support, 1.0});
  const std::size_t d1 =
      model.add_block({"disjoint1", width, height, masks.disjoint[0], 0.5 * sigma});
  const std::size_t d2 =
      model.add_block({"disjoint2", width, height, masks.disjoint[1], 0.5 * sigma});

  MeasurementModel::Term sample1{
      c,
      [width, height](std::span<const double> in, std::span<double> out) {
        bin_horizontal(in, out, width, height);
      },
      [width, height](std::span<const double> in, std::span<double> out) {
        bin_horizontal_adjoint(in, out, width, height);
      }};

  // A low-res offset of dx is a shift of 2 dx on the high-res grid.
  auto shift = std::make_shared<ShiftOperator>(build_shift(2.0 * dx, 0.0, hw, height));
  auto buffer = std::make_shared<std::vector<double>>(hw * height);
  MeasurementModel::Term sample2{
      c,
      [width, height, shift, buffer](std::span<const double> in, std::span<double> out) {
        shift->apply(in, *buffer);
        bin_horizontal(*buffer, out, width, height);
      },
      [width, height, shift, buffer](std::span<const double> in, std::span<double> out) {
        bin_horizontal_adjoint(in, *buffer, width, height);
        shift->apply_transpose(*buffer, out);
      }};

  model.add_sensor({z1.begin(), z1.end()}, {sample1, identity_term(d1, n)});
  model.add_sensor({z2.begin(), z2.end()}, {sample2, identity_term(d2, n)});
  return model;
}

ReconstructionResult reconstruct_superres(std::span<const double> z1, std::span<const double> z2,
                                          const SensingSpec& spec, std::size_t width,
                                          std::size_t height, double dx,
                                          const SolverConfig& config) {
  config.validate();
  if (!std::isfinite(dx) || dx == std::floor(dx)) {
    throw Error("reconstruct_superres: super-resolution requires a non-integer horizontal "
                "offset, got dx = " + std::to_string(dx));
  }
  const RegionMasks masks = build_region_masks(dx, 0.0, width, height);
  const double sigma = resolve_sigma(masks, config);
  MeasurementModel model = make_superres_model(z1, z2, spec, width, height, dx, masks, sigma);
  ReconstructionResult result = finish(model, solve_tv(model, config), sigma);

  // Full high-res image: common part plus the sensor-1 border, replicated
  // onto the fine grid.
  Image full = result.components[0];
  const Image& d1 = result.components[1];
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < full.width(); ++x) full(x, y) += d1(x / 2, y);
  }
  result.image = std::move(full);
  return result;
}

}  // namespace mvlci

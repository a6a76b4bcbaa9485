#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mvlci/metrics.hpp"
#include "mvlci/scene.hpp"
#include "mvlci/solver.hpp"
#include "oracles.hpp"

using namespace mvlci;

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

struct TwoViews {
  Image v1, v2;
};

TwoViews far_views(SceneKind kind, std::size_t w, std::size_t h, double dx, std::uint64_t seed) {
  const std::size_t m = required_margin(std::abs(dx), 1) + 1;
  const SceneModel scene = make_test_scene(kind, w + 2 * m, h, seed);
  const CameraGeometry g = two_sensor_geometry(w, h, dx, 1.0, 1e300);
  return {render_view(scene, g, 0), render_view(scene, g, 1)};
}

}  // namespace

TEST_CASE("tv seminorm") {
  CHECK(tv_seminorm(Image(8, 8, 0.4)) == 0.0);
  Image step(8, 8);
  for (std::size_t y = 0; y < 8; ++y) {
    for (std::size_t x = 4; x < 8; ++x) step(x, y) = 1.0;
  }
  CHECK(tv_seminorm(step) == 8.0);
  Image diag(3, 3);
  diag(1, 1) = 2.0;
  CHECK(tv_seminorm(diag) == 8.0);
}

TEST_CASE("soft thresholding") {
  CHECK(soft_threshold(0.3, 0.5) == 0.0);
  CHECK(soft_threshold(-0.3, 0.5) == 0.0);
  CHECK(soft_threshold(1.5, 0.5) == 1.0);
  CHECK(soft_threshold(-1.5, 0.5) == -1.0);
  std::vector<double> v{2.0, -0.1, -3.0, 0.0};
  tv_shrink(v, 1.0);
  CHECK(v == std::vector<double>{1.0, 0.0, -2.0, 0.0});
}

TEST_CASE("finite differences: adjoint and masked support") {
  Mask support(9, 7, true);
  for (std::size_t i = 0; i < support.bits.size(); i += 5) support.bits[i] = 0;
  const FiniteDifference d(9, 7, support);
  const auto u = oracle::random_vector(63, 1);
  const auto gx = oracle::random_vector(63, 2);
  const auto gy = oracle::random_vector(63, 3);
  std::vector<double> dux(63), duy(63), dtg(63);
  d.apply(u, dux, duy);
  d.apply_transpose(gx, gy, dtg);
  std::vector<double> g_valid_x(63), g_valid_y(63);
  for (std::size_t i = 0; i < 63; ++i) {
    g_valid_x[i] = d.valid_x(i) ? gx[i] : 0.0;
    g_valid_y[i] = d.valid_y(i) ? gy[i] : 0.0;
  }
  CHECK(oracle::dot(dux, g_valid_x) + oracle::dot(duy, g_valid_y) ==
        doctest::Approx(oracle::dot(u, dtg)).epsilon(1e-12));

  for (std::size_t i = 0; i < 63; ++i) {
    const std::size_t x = i % 9, y = i / 9;
    CHECK(d.valid_x(i) == (x + 1 < 9 && support[i] && support[i + 1]));
    CHECK(d.valid_y(i) == (y + 1 < 7 && support[i] && support[i + 9]));
  }
  CHECK_THROWS_AS(FiniteDifference(9, 8, support), Error);
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.rel_tol = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.penalty = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.sigma_mode = SigmaMode::fixed;
  cfg.sigma = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.epsilon = -0.1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("discrepancy epsilon") {
  const std::vector<double> z{1.0, -3.0, 2.0, 2.0};
  CHECK(discrepancy_epsilon(z, 0.1) == doctest::Approx(0.1 * 2.0 * 2.0));
  CHECK(discrepancy_epsilon(z, 0.0) == 0.0);
}

TEST_CASE("model forward and adjoint are transposes") {
  const SensingSpec spec = make_sensing_spec(100, 0.4, 3);
  const auto z1 = oracle::random_vector(spec.rows.size(), 1);
  const auto z2 = oracle::random_vector(spec.rows.size(), 2);
  const RegionMasks masks = build_region_masks(2.5, 0.0, 10, 10);
  MeasurementModel model =
      make_joint_model(z1, z2, spec, 10, 10, build_shift(2.5, 0.0, 10, 10), masks, 2.0);
  auto u = oracle::random_vector(model.unknowns(), 3);
  model.project(u);
  const std::vector<std::vector<double>> y{oracle::random_vector(spec.rows.size(), 4),
                                           oracle::random_vector(spec.rows.size(), 5)};
  std::vector<std::vector<double>> mu;
  model.forward(u, mu);
  std::vector<double> mty(model.unknowns());
  model.adjoint(y, mty);
  const double lhs = oracle::dot(mu[0], y[0]) + oracle::dot(mu[1], y[1]);
  CHECK(lhs == doctest::Approx(oracle::dot(u, mty)).epsilon(1e-12));
}

TEST_CASE("fidelity gradient matches central differences") {
  const SensingSpec spec = make_sensing_spec(64, 0.5, 8);
  const Image truth = oracle::random_image(8, 8, 1);
  const auto z = measure(truth, spec);

  auto check_model = [](MeasurementModel& model, std::uint64_t seed) {
    auto u = oracle::random_vector(model.unknowns(), seed);
    model.project(u);
    std::vector<double> grad(model.unknowns());
    model.fidelity_gradient(u, grad);
    SplitMix64 rng(seed + 100);
    int checked = 0;
    while (checked < 10) {
      const std::size_t i = rng.below(model.unknowns());
      std::vector<double> probe(model.unknowns(), 0.0);
      probe[i] = 1.0;
      model.project(probe);
      if (probe[i] == 0.0) continue;
      const double h = 1e-4;
      auto up = u, dn = u;
      up[i] += h;
      dn[i] -= h;
      const double fd = (model.fidelity(up) - model.fidelity(dn)) / (2.0 * h);
      CHECK(std::abs(fd - grad[i]) <= 1e-5 * std::max(1.0, std::abs(grad[i])));
      ++checked;
    }
  };

  MeasurementModel single = make_single_model({z}, spec, 8, 8);
  check_model(single, 1);
  const RegionMasks masks = build_region_masks(1.5, 0.0, 8, 8);
  MeasurementModel joint =
      make_joint_model(z, z, spec, 8, 8, build_shift(1.5, 0.0, 8, 8), masks, 2.0);
  check_model(joint, 2);
  MeasurementModel sr = make_superres_model(z, z, spec, 8, 8, 1.5, masks, 2.0);
  check_model(sr, 3);
}

TEST_CASE("zero measurements give zero reconstructions") {
  const SensingSpec spec = make_sensing_spec(256, 0.3, 1);
  const std::vector<double> zero(spec.rows.size(), 0.0);
  const SolverConfig cfg;
  const auto s = reconstruct_single(zero, spec, 16, 16, cfg);
  CHECK(std::all_of(s.image.pixels().begin(), s.image.pixels().end(),
                    [](double v) { return v == 0.0; }));
  const RegionMasks masks = build_region_masks(2.5, 0.0, 16, 16);
  const auto j = reconstruct_joint(zero, zero, spec, 16, 16, build_shift(2.5, 0.0, 16, 16), masks, cfg);
  for (const Image& c : j.components) {
    CHECK(std::all_of(c.pixels().begin(), c.pixels().end(), [](double v) { return v == 0.0; }));
  }
}

TEST_CASE("full-rate single view inverts the operator") {
  const Image truth = far_views(SceneKind::gradient_bars, 32, 32, 0.0, 3).v1;
  const SensingSpec spec = make_sensing_spec(1024, 1.0, 2);
  const auto r = reconstruct_single(measure(truth, spec), spec, 32, 32, SolverConfig{});
  std::vector<double> a(r.image.pixels().begin(), r.image.pixels().end());
  std::vector<double> b(truth.pixels().begin(), truth.pixels().end());
  CHECK(oracle::rel_diff(a, b) < 1e-3);
  CHECK(r.converged);
}

TEST_CASE("reported convergence implies small residuals") {
  const Image truth = far_views(SceneKind::blocks, 32, 32, 0.0, 4).v1;
  const SensingSpec spec = make_sensing_spec(1024, 0.35, 6);
  SolverConfig cfg;
  const auto r = reconstruct_single(measure(truth, spec), spec, 32, 32, cfg);
  REQUIRE(r.converged);
  CHECK(r.iterations <= cfg.max_iters);
  for (double res : r.residuals) {
    CHECK(std::isfinite(res));
    CHECK(res <= cfg.rel_tol);
  }
  CHECK(psnr(truth, r.image) > 40.0);
}

TEST_CASE("objective settles at the end of each continuation stage") {
  const TwoViews v = far_views(SceneKind::gradient_bars, 32, 32, 2.5, 5);
  const SensingSpec spec = make_sensing_spec(1024, 0.25, 7);
  const auto z1 = measure(v.v1, spec), z2 = measure(v.v2, spec);
  SolverConfig cfg;
  cfg.rel_tol = 1e-9;
  cfg.max_iters = 400;
  const RegionMasks masks = build_region_masks(2.5, 0.0, 32, 32);
  const auto r = reconstruct_joint(z1, z2, spec, 32, 32, build_shift(2.5, 0.0, 32, 32), masks, cfg);
  REQUIRE(r.stage_ends.size() >= 7);
  // The TV value is not monotone while the penalty is still doubling: it
  // creeps up as the iterate closes in on the constraint set, by up to a few
  // 1e-4 per iteration in the first stage. The creep shrinks stage by stage
  // and the last stage meets the 1e-6 bound.
  auto max_increase = [&](int end) {
    double worst = -1.0;
    for (int i = end - 9; i <= end; ++i) {
      const double prev = r.objective_history[i - 1];
      worst = std::max(worst, (r.objective_history[i] - prev) / std::abs(prev));
    }
    return worst;
  };
  for (std::size_t s = 0; s < r.stage_ends.size(); ++s) {
    CAPTURE(s);
    CHECK(max_increase(r.stage_ends[s]) <= (s < 3 ? 1e-3 : 2e-5));
  }
  CHECK(max_increase(r.stage_ends.back()) <= 1e-6);
}

TEST_CASE("support constraints hold exactly") {
  const TwoViews v = far_views(SceneKind::blocks, 24, 24, 3.5, 2);
  const SensingSpec spec = make_sensing_spec(576, 0.3, 1);
  const RegionMasks masks = build_region_masks(3.5, 0.0, 24, 24);
  const auto r = reconstruct_joint(measure(v.v1, spec), measure(v.v2, spec), spec, 24, 24,
                                   build_shift(3.5, 0.0, 24, 24), masks, SolverConfig{});
  REQUIRE(r.components.size() == 3);
  for (std::size_t i = 0; i < 24 * 24; ++i) {
    if (!masks.common[i]) CHECK(r.components[0].pixels()[i] == 0.0);
    if (!masks.disjoint[0][i]) CHECK(r.components[1].pixels()[i] == 0.0);
    if (!masks.disjoint[1][i]) CHECK(r.components[2].pixels()[i] == 0.0);
  }
  CHECK(r.views.size() == 2);
  CHECK(r.sigma == 2.0);
}

TEST_CASE("joint with no offset reduces to stacked single view") {
  const Image truth = far_views(SceneKind::blocks, 16, 16, 0.0, 6).v1;
  const SensingSpec spec = make_sensing_spec(256, 0.3, 2);
  const auto z = measure(truth, spec);
  const SolverConfig cfg;
  const auto single = reconstruct_single(std::vector<std::vector<double>>{z, z}, spec, 16, 16, cfg);
  const RegionMasks masks = build_region_masks(0.0, 0.0, 16, 16);
  const auto joint =
      reconstruct_joint(z, z, spec, 16, 16, build_shift(0.0, 0.0, 16, 16), masks, cfg);
  std::vector<double> a(joint.image.pixels().begin(), joint.image.pixels().end());
  std::vector<double> b(single.image.pixels().begin(), single.image.pixels().end());
  CHECK(oracle::rel_diff(a, b) < 1e-6);
}

TEST_CASE("sigma resolution") {
  const RegionMasks masks = build_region_masks(3.5, 0.0, 64, 64);
  SolverConfig cfg;
  CHECK(resolve_sigma(masks, cfg) == 2.0);
  cfg.sigma_mode = SigmaMode::fixed;
  cfg.sigma = 5.0;
  CHECK(resolve_sigma(masks, cfg) == 5.0);
}

TEST_CASE("horizontal binning") {
  Image flat(12, 3, 0.7);
  const Image low = bin_horizontal(flat);
  CHECK(low.width() == 6);
  for (double v : low.pixels()) CHECK(v == 0.7);
  const auto h = oracle::random_vector(24, 1);
  const auto l = oracle::random_vector(12, 2);
  std::vector<double> sh(12), stl(24);
  bin_horizontal(h, sh, 6, 2);
  bin_horizontal_adjoint(l, stl, 6, 2);
  CHECK(oracle::dot(sh, l) == doctest::Approx(oracle::dot(h, stl)).epsilon(1e-14));
  CHECK(sh[0] == doctest::Approx(0.5 * (h[0] + h[1])));
}

TEST_CASE("superres contract") {
  const SensingSpec spec = make_sensing_spec(256, 0.5, 1);
  const std::vector<double> zero(spec.rows.size(), 0.0);
  CHECK_THROWS_AS(reconstruct_superres(zero, zero, spec, 16, 16, 3.0, SolverConfig{}), Error);
  const auto r = reconstruct_superres(zero, zero, spec, 16, 16, 2.5, SolverConfig{});
  CHECK(r.image.width() == 32);
  CHECK(r.image.height() == 16);
}

TEST_CASE("mode entry points reject inconsistent inputs") {
  const SensingSpec spec = make_sensing_spec(256, 0.5, 1);
  const std::vector<double> z(spec.rows.size(), 1.0);
  const std::vector<double> short_z(spec.rows.size() - 1, 1.0);
  const SolverConfig cfg;
  CHECK_THROWS_AS(reconstruct_single(short_z, spec, 16, 16, cfg), Error);
  CHECK_THROWS_AS(reconstruct_single(z, spec, 8, 16, cfg), Error);
  const RegionMasks masks = build_region_masks(1.0, 0.0, 16, 16);
  CHECK_THROWS_AS(reconstruct_joint(z, z, spec, 16, 16, build_shift(1.0, 0.0, 8, 32), masks, cfg),
                  Error);
  CHECK_THROWS_AS(
      reconstruct_joint(z, short_z, spec, 16, 16, build_shift(1.0, 0.0, 16, 16), masks, cfg),
      Error);
  std::vector<double> bad = z;
  bad[3] = std::nan("");
  CHECK_THROWS_AS(reconstruct_single(bad, spec, 16, 16, cfg), Error);
}

TEST_CASE("divergence is reported with the iteration") {
  const SensingSpec spec = make_sensing_spec(64, 0.5, 1);
  const std::vector<double> z(spec.rows.size(), 1e300);
  SolverConfig cfg;
  cfg.penalty = 1e300;
  try {
    reconstruct_single(z, spec, 8, 8, cfg);
    FAIL("expected divergence");
  } catch (const SolverError& e) {
    CHECK(e.iteration() >= 1);
    CHECK(std::string(e.what()).find("iteration") != std::string::npos);
  }
}

TEST_CASE("noisy data with a fidelity ball") {
  const Image truth = far_views(SceneKind::blocks, 32, 32, 0.0, 8).v1;
  const SensingSpec spec = make_sensing_spec(1024, 0.4, 3);
  // Noise is relative to mean |z|, which row 0 dominates, so 1e-3 is
  // already a few percent of the non-DC signal.
  const auto z = add_noise(measure(truth, spec), 1e-3, 5);
  SolverConfig cfg;
  cfg.epsilon = discrepancy_epsilon(z, 1e-3);
  const auto r = reconstruct_single(z, spec, 32, 32, cfg);
  CHECK(std::isfinite(r.residuals[0]));
  CHECK(psnr(truth, r.image) > 30.0);
  // Residual within the ball (relative to ||z||) up to the stopping tolerance.
  CHECK(r.residuals[0] * norm(z) <= cfg.epsilon * 1.01 + cfg.rel_tol * norm(z));
}

TEST_CASE("progress lines") {
  const SensingSpec spec = make_sensing_spec(64, 0.5, 1);
  const auto z = measure(oracle::random_image(8, 8, 1), spec);
  std::ostringstream log;
  SolverConfig cfg;
  cfg.max_iters = 3;
  cfg.progress = &log;
  const RegionMasks masks = build_region_masks(1.0, 0.0, 8, 8);
  reconstruct_joint(z, z, spec, 8, 8, build_shift(1.0, 0.0, 8, 8), masks, cfg);
  const std::string text = log.str();
  CHECK(text.find("iter=1 obj=") == 0);
  CHECK(text.find("res1=") != std::string::npos);
  CHECK(text.find("res2=") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

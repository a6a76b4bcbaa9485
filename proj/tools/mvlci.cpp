// mvlci: scene synthesis, measurement, reconstruction and experiment runs
// for two-sensor lensless compressive imaging.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mvlci/experiments.hpp"
#include "mvlci/geometry.hpp"
#include "mvlci/io.hpp"
#include "mvlci/scene.hpp"
#include "mvlci/sensing.hpp"
#include "mvlci/solver.hpp"

namespace fs = std::filesystem;
using namespace mvlci;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr unsigned kDepth = 65535;

using Clock = std::chrono::steady_clock;

struct SceneArgs {
  std::string kind = "blocks";
  std::size_t width = 64;
  std::size_t height = 64;
  std::uint64_t seed = 7;
  fs::path out = "scene.pgm";
  bool views = false;
  double dx = 0.0;
  double f = 100.0;
  double z = 1e6;
  std::size_t scale = 1;
};

struct MeasureArgs {
  std::vector<fs::path> views;
  double rate = 0.25;
  std::uint64_t seed = 42;
  double noise = 0.0;
  std::uint64_t noise_seed = 0;
  fs::path out = "meas.mvm";
};

struct ReconstructArgs {
  fs::path meas;
  std::string mode = "single";
  std::size_t sensor = 1;
  double dx = 0.0;
  double dy = 0.0;
  std::string sigma = "auto";
  double tol = 1e-4;
  int max_iters = 500;
  double epsilon = -1.0;
  bool verbose = false;
  fs::path out = "recon";
};

struct ExperimentArgs {
  std::string which;
  fs::path out = "experiment";
  std::string kind;
  std::uint64_t scene_seed = 1;
  std::uint64_t seed = 1;
  double dx = 3.5;
  double low = 0.125;
  double high = 0.25;
  double rate = 0.25;
  double noise = 0.0;
};

double wall_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

fs::path sibling(const fs::path& file, const std::string& name) {
  return file.has_parent_path() ? file.parent_path() / name : fs::path(name);
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

Manifest base_manifest(const std::string& command) {
  return {{"command", command}, {"tool_version", kVersion}};
}

void run_scene(const SceneArgs& a) {
  const auto start = Clock::now();
  if (a.scale == 0 || a.width % a.scale != 0) {
    throw Error("--width must be a positive multiple of --scale");
  }
  const SceneKind kind = parse_scene_kind(a.kind);
  Manifest m = base_manifest("scene");
  m.insert(m.end(), {{"kind", std::string(to_string(kind))},
                     {"width", std::to_string(a.width)},
                     {"height", std::to_string(a.height)},
                     {"seed", std::to_string(a.seed)},
                     {"out", a.out.string()},
                     {"views", a.views ? "1" : "0"}});

  if (!a.views) {
    const SceneModel scene = make_test_scene(kind, a.width, a.height, a.seed);
    ensure_parent(a.out);
    write_pgm(a.out, scene.base, kDepth);
  } else {
    const std::size_t aw = a.width / a.scale;
    CameraGeometry geometry = two_sensor_geometry(aw, a.height, a.dx, a.f, a.z);
    geometry.validate();
    const ParallaxShift shift = parallax_shift(geometry, 1);
    const std::size_t margin = required_margin(std::abs(shift.dx), a.scale) + a.scale;
    SceneModel scene = make_test_scene(kind, a.width + 2 * margin, a.height, a.seed);
    scene.scale_x = a.scale;
    scene.scene_distance = a.z;
    const Image window = crop(scene.base, margin, 0, a.width, a.height);
    ensure_parent(a.out);
    write_pgm(a.out, window, kDepth);
    const fs::path v1 = sibling(a.out, "view1.pgm");
    const fs::path v2 = sibling(a.out, "view2.pgm");
    write_pgm(v1, render_view(scene, geometry, 0), kDepth);
    write_pgm(v2, render_view(scene, geometry, 1), kDepth);
    m.insert(m.end(), {{"dx", format_double(a.dx)},
                       {"f", format_double(a.f)},
                       {"z", format_double(a.z)},
                       {"scale", std::to_string(a.scale)},
                       {"effective_shift_x", format_double(shift.dx)},
                       {"effective_shift_y", format_double(shift.dy)},
                       {"view1", v1.string()},
                       {"view2", v2.string()}});
  }
  m.emplace_back("wall_ms", format_double(wall_ms(start)));
  write_manifest(sibling(a.out, a.out.stem().string() + ".manifest"), m);
}

void run_measure(const MeasureArgs& a) {
  const auto start = Clock::now();
  std::vector<Image> views;
  for (const auto& path : a.views) views.push_back(read_pgm(path));
  for (std::size_t k = 1; k < views.size(); ++k) {
    if (!views[k].same_shape(views[0])) {
      throw Error("view " + a.views[k].string() + " is " + std::to_string(views[k].width()) + "x" +
                  std::to_string(views[k].height()) + ", expected " +
                  std::to_string(views[0].width()) + "x" + std::to_string(views[0].height()));
    }
  }
  const SensingSpec spec =
      make_sensing_spec(views[0].width() * views[0].height(), a.rate, a.seed);
  const MeasurementSet set = measure_views(views, spec, a.noise, a.noise_seed);
  ensure_parent(a.out);
  write_mvm(a.out, set);

  Manifest m = base_manifest("measure");
  for (std::size_t k = 0; k < a.views.size(); ++k) {
    m.emplace_back("view" + std::to_string(k + 1), a.views[k].string());
  }
  m.insert(m.end(), {{"rate", format_double(a.rate)},
                     {"seed", std::to_string(a.seed)},
                     {"noise", format_double(a.noise)},
                     {"noise_seed", std::to_string(a.noise_seed)},
                     {"order", std::to_string(spec.order)},
                     {"rows", std::to_string(spec.rows.size())},
                     {"out", a.out.string()},
                     {"wall_ms", format_double(wall_ms(start))}});
  write_manifest(sibling(a.out, a.out.stem().string() + ".manifest"), m);
}

void write_clamped(const fs::path& path, Image image) {
  image.clamp();
  write_pgm(path, image, kDepth);
}

void run_reconstruct(const ReconstructArgs& a) {
  const auto start = Clock::now();
  const MeasurementSet set = read_mvm(a.meas);
  set.validate();
  const std::size_t w = set.width;
  const std::size_t h = set.height;

  SolverConfig cfg;
  cfg.rel_tol = a.tol;
  cfg.max_iters = a.max_iters;
  if (a.sigma != "auto") {
    cfg.sigma_mode = SigmaMode::fixed;
    try {
      std::size_t used = 0;
      cfg.sigma = std::stod(a.sigma, &used);
      if (used != a.sigma.size()) throw std::invalid_argument(a.sigma);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--sigma", "expected 'auto' or a positive number");
    }
  }
  if (a.epsilon >= 0.0) {
    cfg.epsilon = a.epsilon;
  } else {
    for (const auto& z : set.z) {
      cfg.epsilon = std::max(cfg.epsilon, discrepancy_epsilon(z, set.noise_sigma));
    }
  }
  if (a.verbose) cfg.progress = &std::cerr;
  cfg.validate();

  const auto need_two = [&] {
    if (set.sensor_count() < 2) {
      throw Error("mode " + a.mode + " needs two sensors, " + a.meas.string() + " has " +
                  std::to_string(set.sensor_count()));
    }
  };

  fs::create_directories(a.out);
  ReconstructionResult r;
  if (a.mode == "single") {
    if (a.sensor > set.sensor_count()) {
      throw Error("--sensor " + std::to_string(a.sensor) + " but the file has " +
                  std::to_string(set.sensor_count()) + " sensors");
    }
    r = a.sensor == 0 ? reconstruct_single(set.z, set.spec, w, h, cfg)
                      : reconstruct_single(set.z[a.sensor - 1], set.spec, w, h, cfg);
    write_clamped(a.out / "recon.pgm", r.image);
  } else if (a.mode == "joint") {
    need_two();
    const ShiftOperator shift = build_shift(a.dx, a.dy, w, h);
    const RegionMasks masks = build_region_masks(a.dx, a.dy, w, h);
    r = reconstruct_joint(set.z[0], set.z[1], set.spec, w, h, shift, masks, cfg);
    write_clamped(a.out / "common.pgm", r.components[0]);
    write_clamped(a.out / "disjoint1.pgm", r.components[1]);
    write_clamped(a.out / "disjoint2.pgm", r.components[2]);
    write_clamped(a.out / "view1.pgm", r.views[0]);
    write_clamped(a.out / "view2.pgm", r.views[1]);
  } else {
    need_two();
    if (a.dy != 0.0) throw Error("mode superres supports horizontal offsets only (--dy 0)");
    r = reconstruct_superres(set.z[0], set.z[1], set.spec, w, h, a.dx, cfg);
    write_clamped(a.out / "superres.pgm", r.image);
    write_clamped(a.out / "common_highres.pgm", r.components[0]);
    write_clamped(a.out / "disjoint1.pgm", r.components[1]);
    write_clamped(a.out / "disjoint2.pgm", r.components[2]);
  }

  Manifest m = base_manifest("reconstruct");
  m.insert(m.end(), {{"meas", a.meas.string()},
                     {"mode", a.mode},
                     {"sensor", std::to_string(a.sensor)},
                     {"dx", format_double(a.dx)},
                     {"dy", format_double(a.dy)},
                     {"sigma", a.sigma},
                     {"sigma_value", format_double(r.sigma)},
                     {"tol", format_double(a.tol)},
                     {"max_iters", std::to_string(a.max_iters)},
                     {"epsilon", format_double(cfg.epsilon)},
                     {"out", a.out.string()},
                     {"iterations", std::to_string(r.iterations)},
                     {"converged", r.converged ? "1" : "0"},
                     {"objective", format_double(r.objective)}});
  for (std::size_t k = 0; k < r.residuals.size(); ++k) {
    m.emplace_back("residual" + std::to_string(k + 1), format_double(r.residuals[k]));
  }
  m.emplace_back("wall_ms", format_double(wall_ms(start)));
  write_manifest(a.out / "manifest.txt", m);
  std::cout << a.mode << ": " << r.iterations << " iterations"
            << (r.converged ? "" : " (not converged)") << ", outputs in " << a.out.string()
            << "\n";
}

void run_experiment(const ExperimentArgs& a) {
  const auto start = Clock::now();
  ExperimentReport report;
  Manifest m = base_manifest("experiment");
  m.insert(m.end(), {{"which", a.which},
                     {"scene_seed", std::to_string(a.scene_seed)},
                     {"seed", std::to_string(a.seed)},
                     {"dx", format_double(a.dx)},
                     {"noise", format_double(a.noise)}});
  if (a.which == "fig3") {
    MeasurementIncreaseParams p;
    if (!a.kind.empty()) p.kind = parse_scene_kind(a.kind);
    p.dx = a.dx;
    p.low_rate = a.low;
    p.high_rate = a.high;
    p.noise_sigma = a.noise;
    p.seeds = {a.scene_seed, a.seed, a.seed};
    report = run_measurement_increase(p);
    m.insert(m.end(), {{"kind", std::string(to_string(p.kind))},
                       {"low", format_double(a.low)},
                       {"high", format_double(a.high)}});
  } else {
    SuperresParams p;
    if (!a.kind.empty()) p.kind = parse_scene_kind(a.kind);
    p.dx = a.dx;
    p.rate = a.rate;
    p.noise_sigma = a.noise;
    p.seeds = {a.scene_seed, a.seed, a.seed};
    report = run_superres(p);
    m.insert(m.end(), {{"kind", std::string(to_string(p.kind))}, {"rate", format_double(a.rate)}});
  }
  write_report(report, a.out);
  m.insert(m.end(), {{"out", a.out.string()},
                     {"all_passed", report.all_passed() ? "1" : "0"},
                     {"wall_ms", format_double(wall_ms(start))}});
  write_manifest(a.out / "manifest.txt", m);
  std::cout << format_summary(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-sensor lensless compressive imaging toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SceneArgs scene;
  auto* sc = app.add_subcommand("scene", "Synthesize a test scene and optional sensor views");
  sc->add_option("--kind", scene.kind, "blocks | gradient-bars | checker-text")
      ->check(CLI::IsMember({"blocks", "gradient-bars", "checker-text"}))
      ->capture_default_str();
  sc->add_option("--width", scene.width, "Scene width in fine pixels")->capture_default_str();
  sc->add_option("--height", scene.height)->capture_default_str();
  sc->add_option("--seed", scene.seed)->capture_default_str();
  sc->add_option("--out", scene.out, "Scene PGM; views go beside it")->capture_default_str();
  sc->add_flag("--views", scene.views, "Also write view1.pgm and view2.pgm");
  sc->add_option("--dx", scene.dx, "Sensor separation in aperture pixels")->capture_default_str();
  sc->add_option("--f", scene.f, "Aperture-to-sensor distance")->capture_default_str();
  sc->add_option("--z", scene.z, "Aperture-to-scene distance")->capture_default_str();
  sc->add_option("--scale", scene.scale, "Fine pixels per aperture element, horizontally")
      ->check(CLI::Range(1, 16))
      ->capture_default_str();

  MeasureArgs measure;
  auto* ms = app.add_subcommand("measure", "Simulate Hadamard measurements of sensor views");
  ms->add_option("--views", measure.views, "One PGM per sensor")->required()->check(CLI::ExistingFile);
  ms->add_option("--rate", measure.rate, "Measurements per pixel, in (0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  ms->add_option("--seed", measure.seed, "Row and pixel-order seed")->capture_default_str();
  ms->add_option("--noise", measure.noise, "Noise sigma relative to mean |z|")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ms->add_option("--noise-seed", measure.noise_seed)->capture_default_str();
  ms->add_option("--out", measure.out)->capture_default_str();

  ReconstructArgs recon;
  auto* rc = app.add_subcommand("reconstruct", "Reconstruct images from an MVM1 file");
  rc->add_option("--meas", recon.meas)->required()->check(CLI::ExistingFile);
  rc->add_option("--mode", recon.mode)
      ->check(CLI::IsMember({"single", "joint", "superres"}))
      ->capture_default_str();
  rc->add_option("--sensor", recon.sensor, "Sensor for single mode; 0 stacks all sensors")
      ->capture_default_str();
  rc->add_option("--dx", recon.dx, "Horizontal view offset in pixels")->capture_default_str();
  rc->add_option("--dy", recon.dy, "Vertical view offset in pixels")->capture_default_str();
  rc->add_option("--sigma", recon.sigma, "'auto' or a fixed disjoint-region weight")
      ->capture_default_str();
  rc->add_option("--tol", recon.tol)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  rc->add_option("--max-iters", recon.max_iters)->check(CLI::PositiveNumber)->capture_default_str();
  rc->add_option("--epsilon", recon.epsilon,
                 "Fidelity radius; negative derives it from the file's noise level")
      ->capture_default_str();
  rc->add_flag("--verbose", recon.verbose, "Per-iteration progress on stderr");
  rc->add_option("--out", recon.out, "Output directory")->capture_default_str();

  ExperimentArgs exp;
  auto* ex = app.add_subcommand("experiment", "Run a scripted comparison and write a report");
  ex->add_option("--which", exp.which)->required()->check(CLI::IsMember({"fig3", "fig4"}));
  ex->add_option("--out", exp.out, "Report directory")->capture_default_str();
  ex->add_option("--kind", exp.kind, "Scene kind (default gradient-bars for fig3, checker-text for fig4)")
      ->check(CLI::IsMember({"blocks", "gradient-bars", "checker-text"}));
  ex->add_option("--scene-seed", exp.scene_seed)->capture_default_str();
  ex->add_option("--seed", exp.seed, "Measurement and noise seed")->capture_default_str();
  ex->add_option("--dx", exp.dx)->capture_default_str();
  ex->add_option("--low", exp.low, "fig3 low rate")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  ex->add_option("--high", exp.high, "fig3 high rate")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  ex->add_option("--rate", exp.rate, "fig4 rate")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  ex->add_option("--noise", exp.noise)->check(CLI::NonNegativeNumber)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sc) run_scene(scene);
    if (*ms) run_measure(measure);
    if (*rc) run_reconstruct(recon);
    if (*ex) run_experiment(exp);
  } catch (const CLI::ParseError& e) {
    std::cerr << "mvlci: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mvlci: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

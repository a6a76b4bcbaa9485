#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "mvlci/experiments.hpp"
#include "mvlci/io.hpp"

using namespace mvlci;

namespace {

std::size_t count_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("upsampling preserves constants and interpolates ramps") {
  const Image flat = upsample_horizontal(Image(5, 3, 0.25));
  CHECK(flat.width() == 10);
  for (double v : flat.pixels()) CHECK(v == 0.25);
  Image ramp(6, 1);
  for (std::size_t x = 0; x < 6; ++x) ramp(x, 0) = static_cast<double>(x);
  const Image up = upsample_horizontal(ramp);
  // Fine pixel j sits at coarse coordinate (j + 0.5) / 2 - 0.5.
  for (std::size_t j = 1; j + 1 < 12; ++j) {
    CHECK(up(j, 0) == doctest::Approx((j + 0.5) / 2.0 - 0.5).epsilon(1e-15));
  }
  CHECK(up(0, 0) == 0.0);
  CHECK(up(11, 0) == 5.0);
}

TEST_CASE("fig3 harness on a small instance") {
  MeasurementIncreaseParams p;
  p.width = 32;
  p.height = 32;
  p.low_rate = 0.2;
  p.high_rate = 0.4;
  const ExperimentReport r = run_measurement_increase(p);
  CHECK(r.id == "fig3");
  REQUIRE(r.rows.size() == 5);
  const char* names[] = {"sensor1-low", "sensor1-high", "sensor2-low", "sensor2-high", "joint"};
  for (int i = 0; i < 5; ++i) {
    CHECK(r.rows[i].name == names[i]);
    CHECK(std::isfinite(r.rows[i].psnr_db));
    CHECK(r.rows[i].ssim <= 1.0);
    CHECK(r.rows[i].iterations > 0);
  }
  CHECK(r.verdicts.size() == 5);
  for (const Verdict& v : r.verdicts) {
    CHECK_FALSE(v.name.empty());
    CHECK_FALSE(v.detail.empty());
  }
  CHECK_THROWS_AS(r.row("superres"), Error);

  SUBCASE("deterministic apart from timing") {
    const ExperimentReport again = run_measurement_increase(p);
    for (int i = 0; i < 5; ++i) {
      CHECK(again.rows[i].psnr_db == r.rows[i].psnr_db);
      CHECK(again.rows[i].iterations == r.rows[i].iterations);
    }
  }
}

TEST_CASE("fig3 degenerate full-rate pair") {
  MeasurementIncreaseParams p;
  p.width = 32;
  p.height = 32;
  p.low_rate = 1.0;
  p.high_rate = 1.0;
  const ExperimentReport r = run_measurement_increase(p);
  for (const CaseRow& row : r.rows) CHECK(row.psnr_db >= 40.0);
  CHECK(r.all_passed());
}

TEST_CASE("fig3 rejects inverted rates") {
  MeasurementIncreaseParams p;
  p.low_rate = 0.5;
  p.high_rate = 0.25;
  CHECK_THROWS_AS(run_measurement_increase(p), Error);
}

TEST_CASE("fig4 harness") {
  SuperresParams p;
  p.width = 32;
  p.height = 32;
  p.rate = 1.0;
  const ExperimentReport r = run_superres(p);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[2].name == "superres");
  CHECK(r.row("superres").psnr_db >= 35.0);
  CHECK(r.verdicts.size() == 2);
  p.dx = 3.0;
  p.scene_distance = 1e300;
  CHECK_THROWS_AS(run_superres(p), Error);
}

TEST_CASE("reports are written as CSV, summary and PGMs") {
  ExperimentReport r;
  r.id = "demo";
  r.rows.push_back({"a", "single", "1", 0.25, 30.5, 0.9, 10, 1.0});
  r.rows.push_back({"b", "joint", "1+2", 0.25, 31.0, 0.95, 12, 2.0});
  r.verdicts.push_back({"b-beats-a", true, 0.5, "difference"});
  r.images.emplace_back("img", Image(4, 4, 0.5));
  const auto dir = std::filesystem::temp_directory_path() / "mvlci_report_test";
  std::filesystem::remove_all(dir);
  write_report(r, dir);
  CHECK(count_lines(dir / "report.csv") == 3);
  std::ifstream csv(dir / "report.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "case,mode,sensors,rate,psnr_db,ssim,iterations,wall_ms");
  CHECK(read_pgm(dir / "img.pgm").width() == 4);
  const std::string summary = format_summary(r);
  CHECK(summary.find("PASS b-beats-a") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "summary.txt"));
  std::filesystem::remove_all(dir);
}

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cssense/harness.hpp"
#include "cssense/io.hpp"
#include "cssense/parallel.hpp"

using namespace cssense;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("cssense_harness_" + name);
  fs::create_directories(d);
  return d;
}

BandPlan small_plan() { return BandPlan{{{"test band", 100.0, 110.0, 2.5, 4}}}; }

ScanConfig small_scan() {
  ScanConfig c;
  c.slots = 2;
  c.n = 512;
  c.snr_grid_db = {-10.0, 5.0};
  c.sample_budget = 512 * 10;
  return c;
}

}  // namespace

TEST_CASE("parallel_for visits every index once") {
  for (std::size_t workers : {1u, 3u, 8u}) {
    set_thread_count(workers);
    std::vector<int> hits(101, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
  set_thread_count(2);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  set_thread_count(0);
}

TEST_CASE("nrz waveform holds each symbol") {
  Rng rng = make_rng(3);
  auto w = nrz_waveform(100, 8, 2.0, rng);
  CHECK(w.size() == 100);
  for (Eigen::Index i = 0; i < 100; ++i) {
    CHECK(std::fabs(w[i]) == 2.0);
    if (i % 8 != 0) CHECK(w[i] == w[i - 1]);
  }
}

TEST_CASE("measure references the per-sample signal power") {
  auto a = SensingMatrix::build(Scheme::gaussian, 20, 40, 1);
  auto x = gen_sparse_signal(40, 4, AmplitudeLaw::unit, 2);
  auto y = measure(a, x.samples, 10.0, 3);
  CHECK(y.noise_variance == doctest::Approx((4.0 / 40.0) / 10.0));
  auto clean = measure(a, x.samples, std::numeric_limits<double>::infinity(), 3);
  CHECK(clean.noise_variance == 0.0);
  CHECK(clean.values == a.apply(x.samples));
}

TEST_CASE("detection rows cover the grid and count consistently") {
  DetectionConfig c;
  c.techniques = {Technique::energy, Technique::autocorrelation};
  c.n = 256;
  c.trials = 50;
  c.snr_grid_db = {-5.0, 5.0};
  c.threshold_factors = {1.0, 2.0};
  auto curve = run_detection_mc(c);
  CHECK(curve.points.size() == 8);
  for (const auto& p : curve.points) {
    CHECK(p.trials == 50);
    CHECK(p.pd == doctest::Approx(static_cast<double>(p.nd) / 50.0));
    CHECK(p.pfa == doctest::Approx(static_cast<double>(p.nf) / 50.0));
  }
}

TEST_CASE("band plan consistency flags mismatched declared counts") {
  auto plan = default_band_plan();
  CHECK(plan.total_channels() == 87);
  CHECK(plan.bands[0].implied_count() == 7);
  CHECK(plan.bands[1].implied_count() == 18);
  CHECK(plan.bands[2].implied_count() == 19);
  CHECK(plan.bands[3].implied_count() == 30);
  CHECK(small_plan().bands[0].implied_count() == 4);
  CHECK(scan_time_per_channel(81.0, 6, 87) == doctest::Approx(81.0 / (6 * 87)));
}

TEST_CASE("experiments are identical across thread counts") {
  DetectionConfig dc;
  dc.techniques = {Technique::energy, Technique::matched_filter, Technique::compressive};
  dc.n = 256;
  dc.trials = 40;
  dc.snr_grid_db = {-8.0, 0.0};
  RecoveryConfig rc;
  rc.n_grid = {64};
  rc.snr_grid_db = {10.0, 30.0};
  rc.trials = 4;
  const auto dir = scratch("threads");

  std::string det[2], rec[2], scan[2];
  const std::size_t workers[2] = {1, 4};
  for (int w = 0; w < 2; ++w) {
    set_thread_count(workers[w]);
    io::write_detection_csv(run_detection_mc(dc), dir / "d.csv");
    io::write_recovery_csv(run_recovery_mc(rc), dir / "r.csv");
    io::write_scan_csv(run_scan_sim(small_scan(), small_plan(), {}), dir / "s.csv");
    det[w] = slurp(dir / "d.csv");
    rec[w] = slurp(dir / "r.csv");
    scan[w] = slurp(dir / "s.csv");
  }
  set_thread_count(0);
  CHECK(det[0] == det[1]);
  CHECK(rec[0] == rec[1]);
  CHECK(scan[0] == scan[1]);
  CHECK_FALSE(det[0].empty());
}

TEST_CASE("scan report bookkeeping") {
  auto rep = run_scan_sim(small_scan(), small_plan(), {});
  CHECK(rep.channels_scanned == 4);
  CHECK(rep.band_checks.size() == 1);
  CHECK(rep.band_checks[0].consistent());
  for (const auto& [name, s] : rep.techniques) {
    CHECK(s.occupancy_pct.size() == 2);
    CHECK(s.detection_rate >= 0.0);
    CHECK(s.detection_rate <= 1.0);
  }
  CHECK(rep.channels_per_budget_compressive > rep.channels_per_budget_conventional);
}

TEST_CASE("recovery rows report one line per solver and cell") {
  RecoveryConfig rc;
  rc.n_grid = {64, 128};
  rc.snr_grid_db = {20.0};
  rc.trials = 3;
  auto rep = run_recovery_mc(rc);
  CHECK(rep.rows.size() == 6);
  for (const auto& r : rep.rows) {
    CHECK(r.m == r.n / 2);
    CHECK(r.trials == 3);
    CHECK(r.mean_tr_ms == 0.0);
    CHECK(std::isfinite(r.mean_re));
  }
}

// Throughput comparison of the OpenMP path ensemble against the serial
// reference, plus per-ray profile builds. Run after any change to the
// stepping kernel; the two ensembles must agree path for path.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "walsh/model.hpp"
#include "walsh/simulate.hpp"

using namespace walsh;
using Clock = std::chrono::steady_clock;

namespace {

ModelSpec two_ray_spec() {
  RayModel a;
  a.theta = 0.0;
  a.weight = 2.0 / 3.0;
  a.ell = XReal::finite(1.0);
  RayModel b;
  b.theta = 3.141592653589793;
  b.weight = 1.0 / 3.0;
  b.ell = XReal::finite(1.0);
  return ModelSpec({a, b});
}

double run(const ModelSpec& spec, const SimConfig& cfg, bool parallel, double* checksum) {
  std::vector<double> final_r(cfg.paths);
  auto consume = [&](std::size_t i, const PathRecord& rec) { final_r[i] = rec.final_r; };
  const auto t0 = Clock::now();
  if (parallel) {
    simulate_ensemble(spec, RayPoint::origin(), cfg, consume);
  } else {
    simulate_ensemble_serial(spec, RayPoint::origin(), cfg, consume);
  }
  const auto t1 = Clock::now();
  *checksum = 0.0;
  for (double r : final_r) *checksum += r;
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main() {
  const ModelSpec spec = two_ray_spec();
  SimConfig cfg;
  cfg.step = 1e-4;
  cfg.horizon = 1.0;
  cfg.paths = 2000;
  cfg.seed = 7;
  cfg.record_path = false;

#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP: not enabled\n");
#endif

  double sum_serial = 0.0, sum_parallel = 0.0;
  const double t_serial = run(spec, cfg, false, &sum_serial);
  const double t_parallel = run(spec, cfg, true, &sum_parallel);
  std::printf("paths: %d  step: %g  horizon: %g\n", cfg.paths, cfg.step, cfg.horizon);
  std::printf("serial:   %.3f s  (%.0f paths/s)\n", t_serial, cfg.paths / t_serial);
  std::printf("parallel: %.3f s  (%.0f paths/s)  speedup %.2fx\n", t_parallel,
              cfg.paths / t_parallel, t_serial / t_parallel);
  std::printf("checksum match: %s\n", sum_serial == sum_parallel ? "yes" : "NO");

  const auto t0 = Clock::now();
  const std::vector<RayProfile> profiles = build_profiles(spec, 512);
  const auto t1 = Clock::now();
  std::printf("profiles (%zu rays, 512 panels): %.3f s\n", profiles.size(),
              std::chrono::duration<double>(t1 - t0).count());
  return sum_serial == sum_parallel ? 0 : 1;
}

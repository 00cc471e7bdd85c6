#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "walsh/model.hpp"
#include "walsh/tree_geometry.hpp"

namespace walsh {

enum class Scheme { EulerReflect, TimeChange };

struct SimConfig {
  double step = 1e-4;
  double horizon = 1.0;
  int paths = 1;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::EulerReflect;
  bool record_path = true;  // keep the full arrays; summaries stay either way
  double overflow_radius = 1e9;  // censoring level on rays with infinite extent
};

// One simulated trajectory. radial(k) = driver partial sum + local_time(k)
// with local_time(k) the running negative-part maximum of the driver sums
// (discrete Skorokhod reflection). theta(k) is the active ray; at radial 0 it
// is the freshly drawn ray of the next excursion. driver_increments has one
// entry per step (times.size() - 1 of them) when recording is on.
struct PathRecord {
  std::vector<double> times;
  std::vector<double> radial;
  std::vector<double> theta;
  std::vector<double> driver_increments;
  std::vector<double> local_time;
  std::optional<double> exploded_at;
  std::optional<RayPoint> exit_point;
  bool overflow = false;

  // Scalars kept even when array recording is off.
  double final_r = 0.0;
  double final_theta = 0.0;
  double local_time_total = 0.0;
  double final_time = 0.0;
};

PathRecord simulate_path(const ModelSpec& spec, const RayPoint& start, const SimConfig& cfg,
                         std::uint64_t stream);

// Runs cfg.paths independent paths and hands each to the consumer, indexed by
// path id. The parallel variant distributes paths across OpenMP threads; the
// serial variant is the reference and produces identical records path for
// path (streams depend only on (seed, index)).
using PathConsumer = std::function<void(std::size_t, const PathRecord&)>;
void simulate_ensemble(const ModelSpec& spec, const RayPoint& start, const SimConfig& cfg,
                       const PathConsumer& consume);
void simulate_ensemble_serial(const ModelSpec& spec, const RayPoint& start, const SimConfig& cfg,
                              const PathConsumer& consume);

// Occupation-density estimator of the local time accumulated on rays in the
// angle set: (1/2eps) sum 1{radial < eps, theta in A} s^2 h.
double occupation_local_time(const PathRecord& path, const ModelSpec& spec,
                             const std::vector<double>& angles, double eps);

// Test function with per-ray radial derivatives, for the change-of-variable
// residual. slope0 is the right derivative at the origin along the ray.
struct RayTestFunction {
  std::function<double(double)> g;
  std::function<double(double)> g1;
  std::function<double(double)> g2;
  double slope0 = 0.0;
};

struct TestFunction {
  std::vector<std::pair<double, RayTestFunction>> rays;
  const RayTestFunction& ray(double theta) const;
};

// Residual of the change-of-variable identity along the path, one value per
// recorded time. The stochastic integral is discretized with the reflected
// increment; the part of each increment absorbed by the reflection is booked
// at the origin slope of the active ray, so the identity is exact for
// g(r, theta) = r and mean-zero for smooth g.
std::vector<double> fs_residual(const PathRecord& path, const TestFunction& g,
                                const AngularMeasure& nu);

// Empirical exit law with binomial 95% half-widths.
struct MCExitLaw {
  std::vector<std::pair<double, double>> atoms;  // (theta, frequency among exploded)
  std::vector<double> ci_radius;                 // per atom
  double explosion_frequency = 0.0;
  double explosion_ci_radius = 0.0;
  std::size_t n_paths = 0;
  std::size_t n_exploded = 0;
  double mean_explosion_time = 0.0;  // among exploded paths
};

MCExitLaw mc_exit_law(const ModelSpec& spec, const RayPoint& start, const SimConfig& cfg);

}  // namespace walsh

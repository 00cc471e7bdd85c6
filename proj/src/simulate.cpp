#include "walsh/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "walsh/rng.hpp"

namespace walsh {

namespace {

int draw_ray(const std::vector<double>& cum, Stream& rng) {
  const double x = rng.uniform();
  for (std::size_t i = 0; i < cum.size(); ++i) {
    if (x < cum[i]) return static_cast<int>(i);
  }
  return static_cast<int>(cum.size()) - 1;
}

std::vector<double> cumulative_weights(const ModelSpec& spec) {
  std::vector<double> cum;
  cum.reserve(spec.rays().size());
  double acc = 0.0;
  for (const auto& ray : spec.rays()) {
    acc += ray.weight;
    cum.push_back(acc);
  }
  return cum;
}

void record_state(PathRecord& rec, bool keep, double t, double r, double theta, double lt) {
  if (keep) {
    rec.times.push_back(t);
    rec.radial.push_back(r);
    rec.theta.push_back(theta);
    rec.local_time.push_back(lt);
  }
  rec.final_time = t;
  rec.final_r = r;
  rec.final_theta = theta;
  rec.local_time_total = lt;
}

PathRecord euler_reflect_path(const ModelSpec& spec, const RayPoint& start, const SimConfig& cfg,
                              std::uint64_t stream) {
  Stream rng(cfg.seed, stream);
  const std::vector<double> cum = cumulative_weights(spec);
  const double h = cfg.step;
  const double sqrt_h = std::sqrt(h);
  const std::size_t n_steps = static_cast<std::size_t>(cfg.horizon / h + 0.5);

  PathRecord rec;
  if (cfg.record_path) {
    rec.times.reserve(n_steps + 1);
    rec.radial.reserve(n_steps + 1);
    rec.theta.reserve(n_steps + 1);
    rec.driver_increments.reserve(n_steps);
    rec.local_time.reserve(n_steps + 1);
  }

  double r = start.r;
  int ray_idx = start.is_origin() ? draw_ray(cum, rng) : spec.ray_index(start.theta);
  double driver = r;    // partial sums of the driver, started at the radius
  double lt = 0.0;      // running max of (-driver)+
  record_state(rec, cfg.record_path, 0.0, r, spec.rays()[ray_idx].theta, lt);

  for (std::size_t k = 0; k < n_steps; ++k) {
    const RayModel& ray = spec.rays()[ray_idx];
    const double bv = ray.b(r);
    const double sv = ray.s(r);
    const double du = bv * h + sv * sqrt_h * rng.normal();
    driver += du;
    if (-driver > lt) lt = -driver;
    r = driver + lt;
    const double t = (k + 1) * h;

    if (cfg.record_path) rec.driver_increments.push_back(du);

    if (ray.ell.is_finite() && r >= ray.ell.value()) {
      // raw radial kept so the discrete reflection identity holds verbatim
      record_state(rec, cfg.record_path, t, r, ray.theta, lt);
      rec.exploded_at = t;
      rec.exit_point = RayPoint::make(ray.ell.value(), ray.theta);
      return rec;
    }
    if (!ray.ell.is_finite() && r > cfg.overflow_radius) {
      record_state(rec, cfg.record_path, t, r, ray.theta, lt);
      rec.overflow = true;
      return rec;
    }
    if (r == 0.0) ray_idx = draw_ray(cum, rng);
    record_state(rec, cfg.record_path, t, r, spec.rays()[ray_idx].theta, lt);
  }
  return rec;
}

PathRecord time_change_path(const ModelSpec& spec, const RayPoint& start, const SimConfig& cfg,
                            std::uint64_t stream) {
  if (!spec.driftless()) {
    throw ConfigError("time-change scheme requires a driftless model");
  }
  Stream rng(cfg.seed, stream);
  const std::vector<double> cum = cumulative_weights(spec);
  const double h = cfg.step;
  const double sqrt_h = std::sqrt(h);

  PathRecord rec;
  double z = start.r;  // Walsh Brownian motion, unit dispersion, in its own clock
  int ray_idx = start.is_origin() ? draw_ray(cum, rng) : spec.ray_index(start.theta);
  double driver = z;
  double lt = 0.0;
  double clock = 0.0;  // T(s) = int 1{Z != 0} / s^2(Z) ds
  record_state(rec, cfg.record_path, 0.0, z, spec.rays()[ray_idx].theta, lt);

  double next_out = h;
  const std::size_t max_z_steps = static_cast<std::size_t>(1e9);
  for (std::size_t k = 0; k < max_z_steps && next_out <= cfg.horizon + 0.5 * h; ++k) {
    const RayModel& ray = spec.rays()[ray_idx];
    if (z > 0.0) {
      const double sv = ray.s(z);
      clock += h / (sv * sv);
    }
    const double du = sqrt_h * rng.normal();
    driver += du;
    if (-driver > lt) lt = -driver;
    z = driver + lt;

    const bool exploded = ray.ell.is_finite() && z >= ray.ell.value();
    if (exploded) {
      const double t = std::min(clock, cfg.horizon);
      record_state(rec, cfg.record_path, t, z, ray.theta, lt);
      if (cfg.record_path && rec.radial.size() >= 2) {
        const std::size_t n = rec.radial.size();
        rec.driver_increments.push_back(rec.radial[n - 1] - rec.radial[n - 2] -
                                        (rec.local_time[n - 1] - rec.local_time[n - 2]));
      }
      if (clock <= cfg.horizon) {
        rec.exploded_at = clock;
        rec.exit_point = RayPoint::make(ray.ell.value(), ray.theta);
      }
      return rec;
    }
    if (z == 0.0) ray_idx = draw_ray(cum, rng);

    while (clock >= next_out && next_out <= cfg.horizon + 0.5 * h) {
      record_state(rec, cfg.record_path, next_out, z, spec.rays()[ray_idx].theta, lt);
      if (cfg.record_path) {
        const std::size_t n = rec.radial.size();
        rec.driver_increments.push_back(rec.radial[n - 1] - rec.radial[n - 2] -
                                        (rec.local_time[n - 1] - rec.local_time[n - 2]));
      }
      next_out += h;
    }
    if (!ray.ell.is_finite() && z > cfg.overflow_radius) {
      rec.overflow = true;
      return rec;
    }
  }
  return rec;
}

}  // namespace

PathRecord simulate_path(const ModelSpec& spec, const RayPoint& start, const SimConfig& cfg,
                         std::uint64_t stream) {
  if (!(cfg.step > 0.0) || cfg.horizon < cfg.step) {
    throw ConfigError("simulate: need step > 0 and horizon >= step");
  }
  const double floor = spec.floor();
  if (std::isfinite(floor) && cfg.step > floor * floor / 16.0) {
    throw ConfigError("simulate: step too large for the domain floor (max " +
                      std::to_string(floor * floor / 16.0) + ")");
  }
  if (!start.is_origin()) {
    if (spec.ray_index(start.theta) < 0) {
      throw UnsupportedRayError("simulate: start ray not part of the model");
    }
    const RayModel& ray = spec.ray(start.theta);
    if (ray.ell.is_finite() && start.r >= ray.ell.value()) {
      throw ValidationError("simulate: start outside the state space");
    }
  }
  return cfg.scheme == Scheme::EulerReflect ? euler_reflect_path(spec, start, cfg, stream)
                                            : time_change_path(spec, start, cfg, stream);
}

void simulate_ensemble(const ModelSpec& spec, const RayPoint& start, const SimConfig& cfg,
                       const PathConsumer& consume) {
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < cfg.paths; ++i) {
    const PathRecord rec = simulate_path(spec, start, cfg, static_cast<std::uint64_t>(i));
    consume(static_cast<std::size_t>(i), rec);
  }
}

void simulate_ensemble_serial(const ModelSpec& spec, const RayPoint& start, const SimConfig& cfg,
                              const PathConsumer& consume) {
  for (int i = 0; i < cfg.paths; ++i) {
    const PathRecord rec = simulate_path(spec, start, cfg, static_cast<std::uint64_t>(i));
    consume(static_cast<std::size_t>(i), rec);
  }
}

double occupation_local_time(const PathRecord& path, const ModelSpec& spec,
                             const std::vector<double>& angles, double eps) {
  if (path.times.size() < 2) throw ValidationError("occupation_local_time: path not recorded");
  const double h = path.times[1] - path.times[0];
  if (eps < 2.0 * std::sqrt(h)) {
    throw ValidationError("occupation_local_time: eps below the sqrt(step) resolution");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
    if (path.radial[k] >= eps) continue;
    const double th = path.theta[k];
    if (std::find(angles.begin(), angles.end(), th) == angles.end()) continue;
    const double sv = spec.ray(th).s(path.radial[k]);
    acc += sv * sv * h;
  }
  return acc / (2.0 * eps);
}

const RayTestFunction& TestFunction::ray(double theta) const {
  for (const auto& [th, f] : rays) {
    if (th == theta) return f;
  }
  throw ValidationError("TestFunction: missing ray theta=" + std::to_string(theta));
}

std::vector<double> fs_residual(const PathRecord& path, const TestFunction& g,
                                const AngularMeasure& nu) {
  if (path.times.size() < 2) throw ValidationError("fs_residual: path not recorded");
  double nu_slope = 0.0;
  for (const auto& [theta, w] : nu.atoms()) nu_slope += w * g.ray(theta).slope0;

  const double g0 = g.ray(path.theta[0]).g(path.radial[0]);
  std::vector<double> residual(path.times.size(), 0.0);
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
    const RayTestFunction& f = g.ray(path.theta[k]);
    const double r = path.radial[k];
    const double dr = path.radial[k + 1] - path.radial[k];
    const double dl = path.local_time[k + 1] - path.local_time[k];
    integral += f.g1(r) * dr - f.slope0 * dl + 0.5 * f.g2(r) * dr * dr;
    const double gk = g.ray(path.theta[k + 1]).g(path.radial[k + 1]);
    residual[k + 1] = gk - g0 - integral - nu_slope * path.local_time[k + 1];
  }
  return residual;
}

MCExitLaw mc_exit_law(const ModelSpec& spec, const RayPoint& start, const SimConfig& cfg) {
  MCExitLaw law;
  law.n_paths = static_cast<std::size_t>(cfg.paths);
  std::vector<double> exit_theta(law.n_paths, -1.0);
  std::vector<double> exit_time(law.n_paths, 0.0);

  SimConfig run = cfg;
  run.record_path = false;
  simulate_ensemble(spec, start, run, [&](std::size_t i, const PathRecord& rec) {
    if (rec.exploded_at) {
      exit_theta[i] = rec.exit_point->theta;
      exit_time[i] = *rec.exploded_at;
    }
  });

  double sum_t = 0.0;
  for (std::size_t i = 0; i < law.n_paths; ++i) {
    if (exit_theta[i] >= 0.0) {
      ++law.n_exploded;
      sum_t += exit_time[i];
    }
  }
  law.explosion_frequency = static_cast<double>(law.n_exploded) / law.n_paths;
  law.explosion_ci_radius = 1.96 * std::sqrt(law.explosion_frequency *
                                             (1.0 - law.explosion_frequency) / law.n_paths);
  law.mean_explosion_time = law.n_exploded ? sum_t / law.n_exploded : 0.0;

  for (const auto& ray : spec.rays()) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < law.n_paths; ++i) {
      if (exit_theta[i] == ray.theta) ++count;
    }
    const double freq =
        law.n_exploded ? static_cast<double>(count) / law.n_exploded : 0.0;
    law.atoms.emplace_back(ray.theta, freq);
    law.ci_radius.push_back(
        law.n_exploded ? 1.96 * std::sqrt(freq * (1.0 - freq) / law.n_exploded) : 0.0);
  }
  return law;
}

}  // namespace walsh

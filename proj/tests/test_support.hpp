#pragma once

#include <random>
#include <vector>

#include "walsh/model.hpp"

namespace walsh::testing {

inline constexpr double kPi = 3.141592653589793;

inline RayModel make_ray(double theta, double weight, XReal ell, double b = 0.0,
                         double s = 1.0) {
  RayModel ray;
  ray.theta = theta;
  ray.weight = weight;
  ray.ell = ell;
  ray.b = RayField::constant(b);
  ray.s = RayField::constant(s);
  return ray;
}

// Standard two-ray Walsh Brownian model on the unit disc, weights 2/3 : 1/3.
inline ModelSpec walsh_bm_disc() {
  return ModelSpec({make_ray(0.0, 2.0 / 3.0, XReal::finite(1.0)),
                    make_ray(kPi, 1.0 / 3.0, XReal::finite(1.0))});
}

inline ModelSpec walsh_bm_disc_half() {
  return ModelSpec({make_ray(0.0, 0.5, XReal::finite(1.0)),
                    make_ray(kPi, 0.5, XReal::finite(1.0))});
}

inline ModelSpec walsh_bm_plane(double w0 = 0.5) {
  return ModelSpec({make_ray(0.0, w0, XReal::infinity()),
                    make_ray(kPi, 1.0 - w0, XReal::infinity())});
}

// Ray 0 explodes in finite time, ray pi drifts to infinity with finite scale.
inline ModelSpec mixed_spec() {
  return ModelSpec({make_ray(0.0, 0.5, XReal::finite(1.0)),
                    make_ray(kPi, 0.5, XReal::infinity(), 1.0)});
}

// Random constant-coefficient spec with moderate Feller function, so the
// u-series stays inside its term budget.
inline ModelSpec random_spec(std::mt19937_64& gen, int n_rays = 2) {
  std::uniform_real_distribution<double> drift(-1.0, 1.0);
  std::uniform_real_distribution<double> disp(0.8, 1.5);
  std::uniform_real_distribution<double> radius(0.4, 1.2);
  std::vector<RayModel> rays;
  for (int i = 0; i < n_rays; ++i) {
    rays.push_back(make_ray(i * kTwoPi / n_rays, 1.0 / n_rays,
                            XReal::finite(radius(gen)), drift(gen), disp(gen)));
  }
  // exact unit mass
  double total = 0.0;
  for (auto& r : rays) total += r.weight;
  rays.back().weight += 1.0 - total;
  return ModelSpec(std::move(rays));
}

}  // namespace walsh::testing

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "walsh/model.hpp"
#include "walsh/tree_geometry.hpp"

namespace walsh {

// Distribution of the ray along which the process leaves the state space.
struct ExitLaw {
  std::vector<std::pair<double, double>> atoms;  // (theta, probability)
  double total_exit_mass = 0.0;

  double prob(double theta) const;
};

enum class ExplosionCase { Never, Certain, Mixed };
enum class LimitTag { LimitExistsOnBoundary, LimitFails };

std::string to_string(ExplosionCase c);
std::string to_string(LimitTag t);

struct LimitBehavior {
  LimitTag tag = LimitTag::LimitFails;
  // Interior start when every charged ray has infinite scale: probability of
  // converging to the endpoint of the start ray. 1 - this is the mass on
  // which the limit fails and the lifetime is infinite.
  std::optional<double> boundary_convergence_prob;
  std::optional<ExitLaw> law;  // exit-angle law when the limit exists a.s.
};

struct ExplosionVerdict {
  ExplosionCase case_tag = ExplosionCase::Never;
  LimitTag limit_tag = LimitTag::LimitFails;
  bool finite_expectation = false;   // sufficient condition for E[S] < infinity
  std::optional<double> m_bound;     // M(x), an upper bound for E[S]
};

// Law of the exit angle. Requires positive nu-mass on rays with finite scale
// limit; otherwise no exit angle exists and this is not applicable.
ExitLaw exit_angle_law(const std::vector<RayProfile>& profiles, const AngularMeasure& nu,
                       const RayPoint& start);

LimitBehavior classify_limit(const std::vector<RayProfile>& profiles, const AngularMeasure& nu,
                             const RayPoint& start);

ExplosionVerdict classify_explosion(const std::vector<RayProfile>& profiles,
                                    const AngularMeasure& nu, const RayPoint& start);

// Upper bound M(x) >= E^x[S] from the Feller-function comparison; throws
// NotApplicableError when the hypothesis (positive mass on finite-scale rays
// and bounded v/p edge ratios) fails.
double expected_explosion_bound(const std::vector<RayProfile>& profiles,
                                const AngularMeasure& nu, const RayPoint& x);

}  // namespace walsh

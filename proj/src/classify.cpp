#include "walsh/classify.hpp"

#include <cmath>

namespace walsh {

double ExitLaw::prob(double theta) const {
  for (const auto& [th, p] : atoms) {
    if (th == theta) return p;
  }
  return 0.0;
}

std::string to_string(ExplosionCase c) {
  switch (c) {
    case ExplosionCase::Never: return "never";
    case ExplosionCase::Certain: return "certain";
    case ExplosionCase::Mixed: return "mixed";
  }
  return "?";
}

std::string to_string(LimitTag t) {
  return t == LimitTag::LimitExistsOnBoundary ? "limit-exists-on-boundary" : "limit-fails";
}

namespace {

// nu-masses of the finiteness sets driving the dichotomies.
struct Masses {
  double p_finite = 0.0;              // nu{p(ell-) < inf}
  double v_finite = 0.0;              // nu{v(ell-) < inf}
  double v_inf_p_finite = 0.0;        // nu{v = inf, p < inf}
};

Masses masses(const std::vector<RayProfile>& profiles, const AngularMeasure& nu) {
  Masses m;
  for (const auto& [theta, w] : nu.atoms()) {
    const RayProfile& prof = profile_for(profiles, theta);
    if (prof.p_limit.is_finite()) m.p_finite += w;
    if (prof.v_limit.is_finite()) m.v_finite += w;
    if (!prof.v_limit.is_finite() && prof.p_limit.is_finite()) m.v_inf_p_finite += w;
  }
  return m;
}

ExitLaw origin_law(const std::vector<RayProfile>& profiles, const AngularMeasure& nu) {
  ExitLaw law;
  double denom = 0.0;
  for (const auto& [theta, w] : nu.atoms()) {
    denom += w * profile_for(profiles, theta).p_limit.reciprocal();
  }
  if (denom <= 0.0) {
    throw NotApplicableError(
        "exit_angle_law: every charged ray has infinite scale limit; the path "
        "has no exit angle (limit fails, lifetime infinite)");
  }
  for (const auto& [theta, w] : nu.atoms()) {
    law.atoms.emplace_back(theta, w * profile_for(profiles, theta).p_limit.reciprocal() / denom);
  }
  law.total_exit_mass = 1.0;
  return law;
}

}  // namespace

ExitLaw exit_angle_law(const std::vector<RayProfile>& profiles, const AngularMeasure& nu,
                       const RayPoint& start) {
  ExitLaw base = origin_law(profiles, nu);
  if (start.is_origin()) return base;

  const RayProfile& prof0 = profile_for(profiles, start.theta);
  const double stay = prof0.eval_p(start.r) * prof0.p_limit.reciprocal();
  ExitLaw law;
  law.total_exit_mass = 1.0;
  bool start_ray_present = false;
  for (auto& [theta, p] : base.atoms) {
    double q = p * (1.0 - stay);
    if (theta == start.theta) {
      q += stay;
      start_ray_present = true;
    }
    law.atoms.emplace_back(theta, q);
  }
  if (!start_ray_present && stay > 0.0) {
    law.atoms.emplace_back(start.theta, stay);
  }
  return law;
}

LimitBehavior classify_limit(const std::vector<RayProfile>& profiles, const AngularMeasure& nu,
                             const RayPoint& start) {
  const Masses m = masses(profiles, nu);
  LimitBehavior out;
  if (m.p_finite > 0.0) {
    out.tag = LimitTag::LimitExistsOnBoundary;
    out.law = exit_angle_law(profiles, nu, start);
    return out;
  }
  out.tag = LimitTag::LimitFails;
  if (!start.is_origin()) {
    const RayProfile& prof0 = profile_for(profiles, start.theta);
    out.boundary_convergence_prob = prof0.eval_p(start.r) * prof0.p_limit.reciprocal();
  }
  return out;
}

ExplosionVerdict classify_explosion(const std::vector<RayProfile>& profiles,
                                    const AngularMeasure& nu, const RayPoint& start) {
  const Masses m = masses(profiles, nu);
  ExplosionVerdict verdict;
  verdict.limit_tag = classify_limit(profiles, nu, start).tag;

  if (start.is_origin()) {
    if (m.v_finite == 0.0) {
      verdict.case_tag = ExplosionCase::Never;
    } else if (m.v_inf_p_finite == 0.0) {
      verdict.case_tag = ExplosionCase::Certain;
    } else {
      verdict.case_tag = ExplosionCase::Mixed;
    }
  } else {
    const RayProfile& prof0 = profile_for(profiles, start.theta);
    const bool v0_finite = prof0.v_limit.is_finite();
    const bool p0_infinite = !prof0.p_limit.is_finite();
    if (m.v_finite == 0.0) {
      verdict.case_tag = v0_finite ? ExplosionCase::Mixed : ExplosionCase::Never;
    } else if (m.v_inf_p_finite == 0.0) {
      verdict.case_tag =
          (v0_finite || p0_infinite) ? ExplosionCase::Certain : ExplosionCase::Mixed;
    } else {
      verdict.case_tag = ExplosionCase::Mixed;
    }
  }

  try {
    verdict.m_bound = expected_explosion_bound(profiles, nu, start);
    verdict.finite_expectation = true;
  } catch (const NotApplicableError&) {
    verdict.finite_expectation = false;
  }
  return verdict;
}

double expected_explosion_bound(const std::vector<RayProfile>& profiles,
                                const AngularMeasure& nu, const RayPoint& x) {
  double inv_p = 0.0, vp = 0.0;
  for (const auto& [theta, w] : nu.atoms()) {
    const RayProfile& prof = profile_for(profiles, theta);
    if (!prof.vp_ratio_limit.is_finite()) {
      throw NotApplicableError("expected_explosion_bound: (v/p)(ell-) is infinite on theta=" +
                               std::to_string(theta));
    }
    inv_p += w * prof.p_limit.reciprocal();
    vp += w * prof.vp_ratio_limit.value();
  }
  if (inv_p <= 0.0) {
    throw NotApplicableError(
        "expected_explosion_bound: no nu-mass on rays with finite scale limit");
  }
  const double c1 = vp / inv_p;
  if (x.is_origin()) return c1;

  const RayProfile& prof = profile_for(profiles, x.theta);
  if (!prof.vp_ratio_limit.is_finite()) {
    throw NotApplicableError("expected_explosion_bound: (v/p)(ell-) infinite on the start ray");
  }
  const double c2 = -c1 * prof.p_limit.reciprocal() + prof.vp_ratio_limit.value();
  return -prof.eval_v(x.r) + c2 * prof.eval_p(x.r) + c1;
}

}  // namespace walsh

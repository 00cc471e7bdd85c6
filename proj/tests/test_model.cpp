#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "walsh/model.hpp"

using namespace walsh;
using namespace walsh::testing;

TEST_CASE("scale function closed forms") {
  const ModelSpec bm = walsh_bm_disc();
  CHECK(scale_function(bm, 0.0, 0.7) == doctest::Approx(0.7).epsilon(1e-12));

  const ModelSpec up({make_ray(0.0, 1.0, XReal::finite(1.0), 1.0)});
  const double expected = (1.0 - std::exp(-1.0)) / 2.0;
  CHECK(std::fabs(scale_function(up, 0.0, 0.5) - expected) < 1e-10);
  CHECK(scale_function(up, 0.0, 0.5) == doctest::Approx(0.316060).epsilon(1e-5));

  const ModelSpec down({make_ray(0.0, 1.0, XReal::finite(2.0), -1.0)});
  CHECK(std::fabs(scale_function(down, 0.0, 1.0) - (std::exp(2.0) - 1.0) / 2.0) < 1e-9);
  CHECK(scale_function(down, 0.0, 1.0) == doctest::Approx(3.194528).epsilon(1e-5));

  CHECK_THROWS_AS(scale_function(bm, 0.0, 1.0), ValidationError);  // boundary excluded
}

TEST_CASE("scale inverse") {
  const ModelSpec bm = walsh_bm_disc();
  CHECK(scale_inverse(bm, 0.0, 0.7) == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(scale_inverse(bm, 0.0, 0.0) == 0.0);

  const ModelSpec up({make_ray(0.0, 1.0, XReal::finite(1.0), 1.0)});
  const double y = (1.0 - std::exp(-1.0)) / 2.0;
  CHECK(std::fabs(scale_inverse(up, 0.0, y) - 0.5) < 1e-9);
  CHECK_THROWS_AS(scale_inverse(up, 0.0, 0.6), ValidationError);  // beyond p(1-)
}

TEST_CASE("speed measure closed forms") {
  const ModelSpec bm = walsh_bm_disc();
  CHECK(speed_cdf(bm, 0.0, 0.0, 0.5).value() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(speed_cdf(bm, 0.0, 0.3, 0.3).value() == 0.0);

  const ModelSpec up({make_ray(0.0, 1.0, XReal::finite(2.0), 1.0)});
  CHECK(speed_cdf(up, 0.0, 0.0, 1.0).value() ==
        doctest::Approx(std::exp(2.0) - 1.0).epsilon(1e-10));

  // 1/s^2 ~ r^-2 diverges at the origin
  const ModelSpec sing({[] {
    RayModel ray = make_ray(0.0, 1.0, XReal::finite(1.0));
    ray.s = RayField::grid({0.0, 1.0}, {0.0, 1.0});  // s(r) = r
    return ray;
  }()});
  CHECK_FALSE(speed_cdf(sing, 0.0, 0.0, 0.5).is_finite());
}

TEST_CASE("feller function closed forms") {
  const ModelSpec bm = walsh_bm_disc();
  CHECK(feller_v(bm, 0.0, 0.5) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(feller_v(bm, 0.0, 0.0) == 0.0);

  const ModelSpec up({make_ray(0.0, 1.0, XReal::finite(2.0), 1.0)});
  const double expected = 1.0 - (1.0 - std::exp(-2.0)) / 2.0;
  CHECK(std::fabs(feller_v(up, 0.0, 1.0) - expected) < 1e-9);
  CHECK(feller_v(up, 0.0, 1.0) == doctest::Approx(0.567667).epsilon(1e-5));
}

TEST_CASE("u-series values and bounds") {
  const ModelSpec bm = walsh_bm_disc();
  CHECK(feller_u(bm, 0.0, 0.0) == 1.0);

  // closed form for unit coefficients: u solves u'' = 2u, u(0)=1, u'(0)=0
  const double u_half = feller_u(bm, 0.0, 0.5);
  CHECK(u_half == doctest::Approx(std::cosh(std::sqrt(2.0) * 0.5)).epsilon(1e-5));
  CHECK(u_half >= 1.25);
  CHECK(u_half <= std::exp(0.25) + 1e-9);

  const ModelSpec plane = walsh_bm_plane();
  const double u_one = feller_u(plane, 0.0, 1.0);
  CHECK(u_one >= 2.0 - 1e-9);
  CHECK(u_one <= std::exp(1.0) + 1e-9);
}

TEST_CASE("condition report") {
  CHECK(validate_conditions(walsh_bm_disc()).all_pass());

  const ModelSpec drifted({make_ray(0.0, 1.0, XReal::finite(1.0), 1.0)});
  CHECK(validate_conditions(drifted).all_pass());

  // s(r) = r fails boundedness of (1+|b|)/s^2 near the origin
  RayModel bad = make_ray(0.0, 1.0, XReal::finite(1.0));
  bad.s = RayField::grid({0.0, 1.0}, {0.0, 1.0});
  const ConditionReport report = validate_conditions(ModelSpec({bad}));
  CHECK_FALSE(report.all_pass());
  bool ring_failed = false;
  for (const auto& c : report.clauses) {
    if (c.name == "near-origin-boundedness") ring_failed = !c.pass;
  }
  CHECK(ring_failed);
}

TEST_CASE("profile limits for the canonical trio") {
  const ModelSpec disc = walsh_bm_disc();
  const RayProfile finite = build_profile(disc, 0.0);
  CHECK(finite.p_limit.is_finite());
  CHECK(finite.p_limit.value() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(finite.v_limit.value() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(finite.vp_ratio_limit.value() == doctest::Approx(1.0).epsilon(1e-8));

  const ModelSpec plane = walsh_bm_plane();
  const RayProfile inf_both = build_profile(plane, 0.0);
  CHECK_FALSE(inf_both.p_limit.is_finite());
  CHECK_FALSE(inf_both.v_limit.is_finite());

  const ModelSpec drift_up({make_ray(0.0, 1.0, XReal::infinity(), 1.0)});
  const RayProfile drifted = build_profile(drift_up, 0.0);
  CHECK(drifted.p_limit.is_finite());
  CHECK(drifted.p_limit.value() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_FALSE(drifted.v_limit.is_finite());
}

TEST_CASE("profile internal invariants") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 12; ++trial) {
    const ModelSpec spec = random_spec(gen);
    for (const auto& ray : spec.rays()) {
      const RayProfile prof = build_profile(spec, ray.theta, 128);
      REQUIRE(prof.grid.front() == 0.0);
      CHECK(prof.p.front() == 0.0);
      CHECK(prof.v.front() == 0.0);
      CHECK(std::fabs(prof.p_prime.front() - 1.0) < 1e-12);
      double last_ratio = 0.0;
      for (std::size_t i = 1; i < prof.grid.size(); ++i) {
        CHECK(prof.p[i] > prof.p[i - 1]);
        CHECK(prof.v[i] >= prof.v[i - 1]);
        const double ratio = prof.v[i] / prof.p[i];
        CHECK(ratio >= last_ratio - 1e-9);
        last_ratio = ratio;
      }
      // v/p vanishes at the origin
      CHECK(prof.v[1] / prof.p[1] < 0.05);
      // u-series bounds at every converged node
      REQUIRE(prof.u_valid > 0);
      for (std::size_t i = 0; i < prof.u_valid; ++i) {
        CHECK(prof.u[i] >= 1.0 + prof.v[i] - 1e-9 * (1.0 + prof.v[i]));
        CHECK(prof.u[i] <= std::exp(prof.v[i]) * (1.0 + 1e-6) + 1e-9);
        if (i > 0) CHECK(prof.u[i] > prof.u[i - 1]);
      }
      // infinite scale forces infinite Feller limit
      if (!prof.p_limit.is_finite()) CHECK_FALSE(prof.v_limit.is_finite());
    }
  }
}

TEST_CASE("scale round trip on random specs") {
  std::mt19937_64 gen(22);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  for (int trial = 0; trial < 8; ++trial) {
    const ModelSpec spec = random_spec(gen);
    const RayModel& ray = spec.rays()[0];
    const RayProfile prof = build_profile(spec, ray.theta, 128);
    for (int k = 0; k < 12; ++k) {
      const double r = unit(gen) * (ray.ell.value() * 0.99);
      const double y = prof.eval_p(r);
      CHECK(std::fabs(prof.eval_q(y) - r) < 1e-8);
      CHECK(std::fabs(prof.eval_p(prof.eval_q(y)) - y) < 1e-8);
    }
  }
}

TEST_CASE("remove drift closed forms") {
  // b = 1, s = 1, ell = 1: image radius (1 - e^-2)/2, dispersion 1 - 2y
  const ModelSpec up({make_ray(0.0, 1.0, XReal::finite(1.0), 1.0)});
  const ModelSpec img = remove_drift(up);
  CHECK(img.driftless());
  const double ell_img = img.rays()[0].ell.value();
  CHECK(ell_img == doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-8));
  CHECK(ell_img == doctest::Approx(0.432332).epsilon(1e-5));
  for (double y : {0.05, 0.15, 0.3, 0.4}) {
    CHECK(img.rays()[0].s(y) == doctest::Approx(1.0 - 2.0 * y).epsilon(1e-6));
  }

  const ModelSpec down({make_ray(0.0, 1.0, XReal::finite(1.0), -1.0)});
  const ModelSpec img2 = remove_drift(down);
  CHECK(img2.rays()[0].ell.value() ==
        doctest::Approx((std::exp(2.0) - 1.0) / 2.0).epsilon(1e-8));
  for (double y : {0.2, 1.0, 2.5}) {
    CHECK(img2.rays()[0].s(y) == doctest::Approx(1.0 + 2.0 * y).epsilon(1e-6));
  }

  // driftless input comes back unchanged up to resampling
  const ModelSpec bm = walsh_bm_disc();
  const ModelSpec same = remove_drift(bm);
  CHECK(same.rays()[0].ell.value() == doctest::Approx(1.0).epsilon(1e-9));
  for (double y : {0.1, 0.5, 0.9}) {
    CHECK(same.rays()[0].s(y) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("removed drift has identity scale") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 6; ++trial) {
    const ModelSpec spec = random_spec(gen);
    const ModelSpec img = remove_drift(spec);
    for (const auto& ray : img.rays()) {
      if (!ray.ell.is_finite()) continue;
      const double probe = 0.5 * ray.ell.value();
      CHECK(scale_function(img, ray.theta, probe) == doctest::Approx(probe).epsilon(5e-4));
    }
  }
}

TEST_CASE("ray field kinds") {
  const RayField pw = RayField::piecewise({0.5}, {1.0, 2.0});
  CHECK(pw(0.2) == 1.0);
  CHECK(pw(0.5) == 2.0);
  CHECK(pw(0.9) == 2.0);

  const RayField g = RayField::grid({0.0, 1.0}, {0.0, 2.0});
  CHECK(g(0.25) == doctest::Approx(0.5));
  CHECK(g(2.0) == 2.0);

  const RayField sw = RayField::switched(RayField::constant(1.0), RayField::constant(-1.0), 0.5);
  CHECK(sw(0.4) == 1.0);
  CHECK(sw(0.5) == -1.0);
  CHECK_FALSE(sw.is_zero());
  CHECK(RayField::constant(0.0).is_zero());

  CHECK_THROWS_AS(RayField::piecewise({0.5, 0.4}, {1, 2, 3}), ValidationError);
  CHECK_THROWS_AS(RayField::grid({0.0}, {1.0}), ValidationError);
}

TEST_CASE("model spec validation") {
  CHECK_THROWS_AS(ModelSpec({}), ValidationError);
  CHECK_THROWS_AS(ModelSpec({make_ray(0.0, 0.5, XReal::finite(1.0)),
                             make_ray(0.0, 0.5, XReal::finite(1.0))}),
                  ValidationError);
  CHECK_THROWS_AS(ModelSpec({make_ray(0.0, 0.7, XReal::finite(1.0))}), ValidationError);

  // zero-weight rays stay in the domain but carry no excursion mass
  const ModelSpec spec({make_ray(0.0, 1.0, XReal::finite(1.0)),
                        make_ray(1.0, 0.0, XReal::finite(2.0))});
  CHECK(spec.nu().atoms().size() == 1);
  CHECK(spec.domain().supports(1.0));
}

TEST_CASE("feller function solves its differential equation") {
  // b v' + s^2 v''/2 = 1 a.e., checked by central differences on smooth fields
  std::mt19937_64 gen(24);
  std::uniform_real_distribution<double> drift(-1.0, 1.0);
  std::uniform_real_distribution<double> disp(0.8, 1.5);
  for (int trial = 0; trial < 6; ++trial) {
    const double b = drift(gen), s = disp(gen);
    const ModelSpec spec({make_ray(0.0, 1.0, XReal::finite(1.5), b, s)});
    const double dh = 1e-4;
    for (double r : {0.3, 0.7, 1.1}) {
      const double vm = feller_v(spec, 0.0, r - dh);
      const double v0 = feller_v(spec, 0.0, r);
      const double vp = feller_v(spec, 0.0, r + dh);
      const double d1 = (vp - vm) / (2.0 * dh);
      const double d2 = (vp - 2.0 * v0 + vm) / (dh * dh);
      CHECK(b * d1 + 0.5 * s * s * d2 == doctest::Approx(1.0).epsilon(1e-4));
    }
  }
}

TEST_CASE("u-series reports truncation when the budget cannot converge") {
  // driftless far out: u = cosh(sqrt(2) r), and the 64th term still carries
  // relative weight above the tolerance once sqrt(2) r is near 100
  const ModelSpec spec({make_ray(0.0, 1.0, XReal::infinity())});
  CHECK_THROWS_AS(feller_u(spec, 0.0, 60.0, 1e-10), TruncationError);

  // strong drift keeps the series geometric; it converges within the bounds
  const ModelSpec drifted({make_ray(0.0, 1.0, XReal::finite(1.0), -3.0, 0.5)});
  const double v = feller_v(drifted, 0.0, 0.95);
  const double u = feller_u(drifted, 0.0, 0.95, 1e-10);
  CHECK(u >= 1.0 + v);
  CHECK(v > 1e6);
}

TEST_CASE("remove drift propagates condition failures") {
  RayModel bad = make_ray(0.0, 1.0, XReal::finite(1.0));
  bad.s = RayField::grid({0.0, 1.0}, {0.0, 1.0});  // s(r) = r fails the ring bound
  CHECK_THROWS_AS(remove_drift(ModelSpec({bad})), ValidationError);
}

TEST_CASE("profile grid floor") {
  CHECK_THROWS_AS(build_profile(walsh_bm_disc(), 0.0, 8), ValidationError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "walsh/tree_geometry.hpp"

using namespace walsh;

namespace {

RayPoint random_point(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> radius(0.0, 5.0);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::bernoulli_distribution at_origin(0.15);
  std::bernoulli_distribution share_ray(0.3);
  static double last_theta = 1.0;
  if (at_origin(gen)) return RayPoint::origin();
  const double theta = share_ray(gen) ? last_theta : angle(gen);
  last_theta = theta;
  return RayPoint::make(radius(gen), theta);
}

double euclidean(const RayPoint& a, const RayPoint& b) {
  const double ax = a.r * std::cos(a.theta), ay = a.r * std::sin(a.theta);
  const double bx = b.r * std::cos(b.theta), by = b.r * std::sin(b.theta);
  return std::hypot(ax - bx, ay - by);
}

}  // namespace

TEST_CASE("tree distance examples") {
  CHECK(tree_distance(RayPoint::make(1, 0), RayPoint::make(2, 0)) == doctest::Approx(1.0));
  CHECK(tree_distance(RayPoint::make(1, 0), RayPoint::make(1, 3.141592653589793)) ==
        doctest::Approx(2.0));
  CHECK(tree_distance(RayPoint::make(0, 2.7), RayPoint::make(3, 1.2)) == doctest::Approx(3.0));
}

TEST_CASE("canonical origin") {
  const RayPoint a = RayPoint::make(0.0, 1.5);
  CHECK(a.theta == 0.0);
  CHECK(a == RayPoint::origin());
  CHECK_THROWS_AS(RayPoint::make(-1.0, 0.0), ValidationError);
  // angle wrapping
  CHECK(RayPoint::make(1.0, kTwoPi + 0.5).theta == doctest::Approx(0.5));
  CHECK(RayPoint::make(1.0, -0.5).theta == doctest::Approx(kTwoPi - 0.5));
}

TEST_CASE("metric axioms on random triples") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const RayPoint x = random_point(gen), y = random_point(gen), z = random_point(gen);
    const double dxy = tree_distance(x, y);
    const double dyx = tree_distance(y, x);
    CHECK(dxy == dyx);
    CHECK(dxy >= 0.0);
    if (x == y) CHECK(dxy == 0.0);
    if (dxy == 0.0) CHECK(x == y);
    CHECK(dxy <= tree_distance(x, z) + tree_distance(z, y) + 1e-12);
  }
}

TEST_CASE("tree distance dominates euclidean") {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 2000; ++trial) {
    const RayPoint x = random_point(gen), y = random_point(gen);
    CHECK(tree_distance(x, y) >= euclidean(x, y) - 1e-12);
  }
}

TEST_CASE("domain membership") {
  const Domain d({0.0, 1.0}, {XReal::finite(1.0), XReal::infinity()});
  CHECK(in_domain(RayPoint::origin(), d));
  CHECK(in_domain(RayPoint::make(0.5, 0.0), d));
  CHECK_FALSE(in_domain(RayPoint::make(1.0, 0.0), d));
  CHECK(in_domain(RayPoint::make(1e9, 1.0), d));
  CHECK_THROWS_AS(in_domain(RayPoint::make(0.5, 2.0), d), UnsupportedRayError);
  CHECK(d.floor() == doctest::Approx(1.0));
}

TEST_CASE("domain validation") {
  CHECK_THROWS_AS(Domain({0.0, 0.0}, {XReal::finite(1.0), XReal::finite(2.0)}), ValidationError);
  CHECK_THROWS_AS(Domain({0.0}, {XReal::finite(0.0)}), ValidationError);
  const Domain all_inf({0.0}, {XReal::infinity()});
  CHECK(std::isinf(all_inf.floor()));
}

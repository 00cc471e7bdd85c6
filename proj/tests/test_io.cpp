#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "test_support.hpp"
#include "walsh/io.hpp"

using namespace walsh;
using namespace walsh::testing;

namespace {

const char* kTwoRaySpec = R"({
  "rays": [
    {"theta": 0.0, "weight": 0.6666666666666666, "ell": 1.0,
     "b": {"kind": "constant", "value": 0.0},
     "s": {"kind": "constant", "value": 1.0}},
    {"theta": 3.141592653589793, "weight": 0.3333333333333333, "ell": "inf",
     "b": {"kind": "piecewise", "breakpoints": [0.5], "values": [1.0, -1.0]},
     "s": {"kind": "grid", "radii": [0.0, 1.0], "values": [1.0, 2.0]}}
  ]
})";

}  // namespace

TEST_CASE("model spec parsing") {
  const ModelSpec spec = parse_model_spec(kTwoRaySpec);
  REQUIRE(spec.rays().size() == 2);
  CHECK(spec.rays()[0].weight == doctest::Approx(2.0 / 3.0));
  CHECK(spec.rays()[0].ell.value() == 1.0);
  CHECK_FALSE(spec.rays()[1].ell.is_finite());
  CHECK(spec.rays()[1].b(0.2) == 1.0);
  CHECK(spec.rays()[1].b(0.7) == -1.0);
  CHECK(spec.rays()[1].s(0.5) == doctest::Approx(1.5));
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_AS(parse_model_spec(R"({"rays": [], "extra": 1})"), ValidationError);
  CHECK_THROWS_AS(
      parse_model_spec(
          R"({"rays": [{"theta": 0, "weight": 1, "ell": 1, "b": {"kind": "constant", "value": 0, "oops": 2}, "s": {"kind": "constant", "value": 1}}]})"),
      ValidationError);
  CHECK_THROWS_AS(parse_model_spec("not json"), ValidationError);
  CHECK_THROWS_AS(parse_model_spec(R"({"rays": [{"theta": 0}]})"), ValidationError);
}

TEST_CASE("weight and ell validation") {
  CHECK_THROWS_AS(
      parse_model_spec(
          R"({"rays": [{"theta": 0, "weight": 0.9, "ell": 1, "b": {"kind": "constant", "value": 0}, "s": {"kind": "constant", "value": 1}}]})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse_model_spec(
          R"({"rays": [{"theta": 0, "weight": 1, "ell": "huge", "b": {"kind": "constant", "value": 0}, "s": {"kind": "constant", "value": 1}}]})"),
      ValidationError);
}

TEST_CASE("reward parsing") {
  const ModelSpec spec = parse_model_spec(kTwoRaySpec);
  const char* text = R"({
    "origin": 0.0,
    "rays": [
      {"theta": 0.0, "radii": [0.0, 0.5, 1.0], "values": [0.0, 0.5, 1.0]},
      {"theta": 3.141592653589793, "radii": [0.0, 1.0], "values": [0.0, 0.0]}
    ]
  })";
  const Reward reward = parse_reward(text, spec);
  CHECK(reward.eval(0.25, 0.0) == doctest::Approx(0.25));
  CHECK(reward.max_value() == 1.0);

  // missing ray
  const char* missing = R"({"origin": 0, "rays": [{"theta": 0.0, "radii": [0, 1], "values": [0, 1]}]})";
  CHECK_THROWS_AS(parse_reward(missing, spec), ValidationError);
  // grid not anchored at the origin value
  const char* off = R"({
    "origin": 0.5,
    "rays": [
      {"theta": 0.0, "radii": [0.0, 1.0], "values": [0.0, 1.0]},
      {"theta": 3.141592653589793, "radii": [0.0, 1.0], "values": [0.5, 0.0]}
    ]
  })";
  CHECK_THROWS_AS(parse_reward(off, spec), ValidationError);
}

TEST_CASE("control parsing") {
  const char* spec_text = R"({
    "rays": [
      {"theta": 0.0, "weight": 1.0, "ell": 1.0,
       "b": {"kind": "constant", "value": 0.0},
       "s": {"kind": "constant", "value": 1.0}}
    ]
  })";
  const ModelSpec spec = parse_model_spec(spec_text);
  const char* ctrl_text = R"({
    "pair0": {"rays": [{"theta": 0.0, "b": {"kind": "constant", "value": -1.0},
                        "s": {"kind": "constant", "value": 1.0}}]},
    "pair1": {"rays": [{"theta": 0.0, "b": {"kind": "constant", "value": 1.0},
                        "s": {"kind": "constant", "value": 1.0}}]}
  })";
  const ControlSpec ctrl = parse_control(ctrl_text, spec);
  CHECK(ctrl.rays()[0].b0(0.5) == -1.0);
  CHECK(ctrl.rays()[0].b1(0.5) == 1.0);

  const char* bad = R"({"pair0": {"rays": []}, "pair1": {"rays": []}})";
  CHECK_THROWS_AS(parse_control(bad, spec), ValidationError);
}

TEST_CASE("json writer determinism and precision") {
  JsonWriter w;
  w.begin_object();
  w.key("value").value(2.0 / 3.0);
  w.key("flag").value(true);
  w.key("items").begin_array().value(1.0).value(0.5).end_array();
  w.key("name").value("a\"b");
  w.end_object();
  CHECK(w.str() ==
        "{\"value\":0.66666666666666663,\"flag\":true,\"items\":[1,0.5],\"name\":\"a\\\"b\"}");
  CHECK(format_double(0.1) == "0.10000000000000001");

  JsonWriter w2;
  w2.begin_object();
  w2.key("value").value(2.0 / 3.0);
  w2.key("flag").value(true);
  w2.key("items").begin_array().value(1.0).value(0.5).end_array();
  w2.key("name").value("a\"b");
  w2.end_object();
  CHECK(w.str() == w2.str());
}

TEST_CASE("document builders round out") {
  const ModelSpec spec = walsh_bm_disc();
  const auto profiles = build_profiles(spec, 64);
  const std::string pj = profiles_json(profiles);
  const auto pos = pj.find("\"p_limit\":");
  REQUIRE(pos != std::string::npos);
  CHECK(std::atof(pj.c_str() + pos + 10) == doctest::Approx(1.0).epsilon(1e-9));
  const std::string pc = profiles_csv(profiles);
  CHECK(pc.rfind("theta,r,p", 0) == 0);

  const ConditionReport report = validate_conditions(spec);
  CHECK(condition_report_json(report).find("\"all_pass\":true") != std::string::npos);
}

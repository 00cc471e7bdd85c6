#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "walsh/classify.hpp"
#include "walsh/control.hpp"
#include "walsh/model.hpp"
#include "walsh/simulate.hpp"
#include "walsh/stopping.hpp"

namespace walsh {

// Parsers reject unknown keys so schema drift fails loudly.
ModelSpec load_model_spec(const std::string& path);
ModelSpec parse_model_spec(const std::string& text);
Reward load_reward(const std::string& path, const ModelSpec& spec);
Reward parse_reward(const std::string& text, const ModelSpec& spec);
ControlSpec load_control(const std::string& path, const ModelSpec& spec);
ControlSpec parse_control(const std::string& text, const ModelSpec& spec);

// Minimal JSON emitter with fixed key order and doubles at 17 significant
// digits, so identical runs give byte-identical output.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& k);
  JsonWriter& value(double v);
  JsonWriter& value(const std::string& v);
  JsonWriter& value(const char* v) { return value(std::string(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(long long v);
  JsonWriter& value_xreal(const XReal& v);  // number or the string "inf"
  std::string str() const { return out_.str(); }

 private:
  void separator();
  std::ostringstream out_;
  std::vector<bool> first_;   // per nesting level
  bool after_key_ = false;
};

std::string format_double(double v);

// Document builders for the CLI.
std::string condition_report_json(const ConditionReport& report);
std::string profiles_json(const std::vector<RayProfile>& profiles);
std::string profiles_csv(const std::vector<RayProfile>& profiles);
std::string verdict_json(const ExplosionVerdict& verdict, const LimitBehavior& limit);
std::string exit_law_json(const ExitLaw& law, const MCExitLaw* mc);
std::string stopping_json(const StoppingSolution& sol);
std::string stopping_csv(const StoppingSolution& sol);
std::string control_json(const ControlSolution& sol);
std::string model_spec_json(const ModelSpec& spec, int sample_grid = 129);

}  // namespace walsh

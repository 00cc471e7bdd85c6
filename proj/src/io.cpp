#include "walsh/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace walsh {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw ValidationError(where + ": unknown key '" + it.key() + "'");
    }
  }
}

double require_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where + ": expected a number");
  return j.get<double>();
}

const json& require_key(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ValidationError(where + ": missing key '" + key + "'");
  }
  return obj.at(key);
}

std::vector<double> require_number_array(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(require_number(x, where));
  return out;
}

RayField parse_field(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": field spec must be an object");
  if (!j.contains("kind")) throw ValidationError(where + ": field spec needs 'kind'");
  if (!j.at("kind").is_string()) throw ValidationError(where + ": field kind must be a string");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    reject_unknown(j, {"kind", "value"}, where);
    return RayField::constant(require_number(require_key(j, "value", where), where));
  }
  if (kind == "piecewise") {
    reject_unknown(j, {"kind", "breakpoints", "values"}, where);
    return RayField::piecewise(require_number_array(require_key(j, "breakpoints", where), where),
                               require_number_array(require_key(j, "values", where), where));
  }
  if (kind == "grid") {
    reject_unknown(j, {"kind", "radii", "values"}, where);
    return RayField::grid(require_number_array(require_key(j, "radii", where), where),
                          require_number_array(require_key(j, "values", where), where));
  }
  throw ValidationError(where + ": unknown field kind '" + kind + "'");
}

XReal parse_ell(const json& j, const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return XReal::infinity();
    throw ValidationError(where + ": ell must be a number or \"inf\"");
  }
  return XReal::finite(require_number(j, where));
}

json parse_text(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ValidationError(what + ": malformed JSON");
  return j;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ModelSpec parse_model_spec(const std::string& text) {
  const json j = parse_text(text, "model spec");
  reject_unknown(j, {"rays"}, "model spec");
  if (!j.contains("rays") || !j.at("rays").is_array()) {
    throw ValidationError("model spec: needs a 'rays' array");
  }
  std::vector<RayModel> rays;
  for (const auto& rj : j.at("rays")) {
    reject_unknown(rj, {"theta", "weight", "ell", "b", "s"}, "model spec ray");
    RayModel ray;
    ray.theta = require_number(require_key(rj, "theta", "model spec ray"), "ray theta");
    ray.weight = require_number(require_key(rj, "weight", "model spec ray"), "ray weight");
    ray.ell = parse_ell(require_key(rj, "ell", "model spec ray"), "ray ell");
    ray.b = parse_field(require_key(rj, "b", "model spec ray"), "ray b");
    ray.s = parse_field(require_key(rj, "s", "model spec ray"), "ray s");
    rays.push_back(std::move(ray));
  }
  return ModelSpec(std::move(rays));
}

ModelSpec load_model_spec(const std::string& path) { return parse_model_spec(slurp(path)); }

Reward parse_reward(const std::string& text, const ModelSpec& spec) {
  const json j = parse_text(text, "reward");
  reject_unknown(j, {"origin", "rays"}, "reward");
  Reward reward;
  reward.at_origin = require_number(require_key(j, "origin", "reward"), "reward origin");
  if (!j.contains("rays") || !j.at("rays").is_array()) {
    throw ValidationError("reward: needs a 'rays' array");
  }
  for (const auto& rj : j.at("rays")) {
    reject_unknown(rj, {"theta", "radii", "values"}, "reward ray");
    Reward::RayGrid g;
    g.theta = require_number(require_key(rj, "theta", "reward ray"), "reward theta");
    g.radii = require_number_array(require_key(rj, "radii", "reward ray"), "reward radii");
    g.values = require_number_array(require_key(rj, "values", "reward ray"), "reward values");
    if (spec.ray_index(g.theta) < 0) {
      throw ValidationError("reward: ray theta=" + std::to_string(g.theta) +
                            " not in the model spec");
    }
    reward.rays.push_back(std::move(g));
  }
  for (const auto& ray : spec.rays()) {
    if (reward.ray_index(ray.theta) < 0) {
      throw ValidationError("reward: missing grid for model ray theta=" +
                            std::to_string(ray.theta));
    }
  }
  reward.validate();
  return reward;
}

Reward load_reward(const std::string& path, const ModelSpec& spec) {
  return parse_reward(slurp(path), spec);
}

ControlSpec parse_control(const std::string& text, const ModelSpec& spec) {
  const json j = parse_text(text, "control spec");
  reject_unknown(j, {"pair0", "pair1"}, "control spec");
  if (!j.contains("pair0") || !j.contains("pair1")) {
    throw ValidationError("control spec: needs 'pair0' and 'pair1'");
  }
  auto parse_pair = [&](const json& pj, const std::string& name) {
    reject_unknown(pj, {"rays"}, name);
    if (!pj.contains("rays") || !pj.at("rays").is_array()) {
      throw ValidationError(name + ": needs a 'rays' array");
    }
    std::vector<std::pair<double, std::pair<RayField, RayField>>> out;
    for (const auto& rj : pj.at("rays")) {
      reject_unknown(rj, {"theta", "b", "s"}, name + " ray");
      out.emplace_back(require_number(require_key(rj, "theta", name), name + " theta"),
                       std::make_pair(parse_field(require_key(rj, "b", name), name + " b"),
                                      parse_field(require_key(rj, "s", name), name + " s")));
    }
    return out;
  };
  const auto p0 = parse_pair(j.at("pair0"), "pair0");
  const auto p1 = parse_pair(j.at("pair1"), "pair1");

  std::vector<ControlRay> rays;
  for (const auto& ray : spec.rays()) {
    ControlRay cr;
    cr.theta = ray.theta;
    bool found0 = false, found1 = false;
    for (const auto& [th, fields] : p0) {
      if (th == ray.theta) {
        cr.b0 = fields.first;
        cr.s0 = fields.second;
        found0 = true;
      }
    }
    for (const auto& [th, fields] : p1) {
      if (th == ray.theta) {
        cr.b1 = fields.first;
        cr.s1 = fields.second;
        found1 = true;
      }
    }
    if (!found0 || !found1) {
      throw ValidationError("control spec: missing pair entries for theta=" +
                            std::to_string(ray.theta));
    }
    rays.push_back(std::move(cr));
  }
  return ControlSpec(std::move(rays));
}

ControlSpec load_control(const std::string& path, const ModelSpec& spec) {
  return parse_control(slurp(path), spec);
}

// ---------------------------------------------------------------------------
// Emission

std::string format_double(double v) {
  char buf[40];
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

JsonWriter& JsonWriter::begin_object() {
  separator();
  out_ << "{";
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  out_ << "}";
  first_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  separator();
  out_ << "[";
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  out_ << "]";
  first_.pop_back();
  return *this;
}

void JsonWriter::separator() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (!first_.empty()) {
    if (!first_.back()) out_ << ",";
    first_.back() = false;
  }
}

JsonWriter& JsonWriter::key(const std::string& k) {
  separator();
  out_ << '"' << k << "\":";
  after_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  separator();
  out_ << format_double(v);
  return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
  separator();
  out_ << '"';
  for (char c : v) {
    switch (c) {
      case '"': out_ << "\\\""; break;
      case '\\': out_ << "\\\\"; break;
      case '\n': out_ << "\\n"; break;
      case '\t': out_ << "\\t"; break;
      default: out_ << c;
    }
  }
  out_ << '"';
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  separator();
  out_ << (v ? "true" : "false");
  return *this;
}

JsonWriter& JsonWriter::value(long long v) {
  separator();
  out_ << v;
  return *this;
}

JsonWriter& JsonWriter::value_xreal(const XReal& v) {
  if (v.is_finite()) return value(v.value());
  return value("inf");
}

std::string condition_report_json(const ConditionReport& report) {
  JsonWriter w;
  w.begin_object();
  w.key("all_pass").value(report.all_pass());
  w.key("clauses").begin_array();
  for (const auto& c : report.clauses) {
    w.begin_object();
    w.key("name").value(c.name);
    w.key("pass").value(c.pass);
    w.key("detail").value(c.detail);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

std::string profiles_json(const std::vector<RayProfile>& profiles) {
  JsonWriter w;
  w.begin_object();
  w.key("rays").begin_array();
  for (const auto& p : profiles) {
    w.begin_object();
    w.key("theta").value(p.theta);
    w.key("p_limit").value_xreal(p.p_limit);
    w.key("v_limit").value_xreal(p.v_limit);
    w.key("vp_ratio_limit").value_xreal(p.vp_ratio_limit);
    auto dump = [&](const char* name, const std::vector<double>& xs, std::size_t n) {
      w.key(name).begin_array();
      for (std::size_t i = 0; i < n; ++i) w.value(xs[i]);
      w.end_array();
    };
    dump("grid", p.grid, p.grid.size());
    dump("p", p.p, p.p.size());
    dump("p_prime", p.p_prime, p.p_prime.size());
    dump("m_cdf", p.m_cdf, p.m_cdf.size());
    dump("v", p.v, p.v.size());
    dump("u", p.u, p.u_valid);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

std::string profiles_csv(const std::vector<RayProfile>& profiles) {
  std::ostringstream out;
  out << "theta,r,p,p_prime,m_cdf,v,u\n";
  for (const auto& p : profiles) {
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
      out << format_double(p.theta) << ',' << format_double(p.grid[i]) << ','
          << format_double(p.p[i]) << ',' << format_double(p.p_prime[i]) << ','
          << format_double(p.m_cdf[i]) << ',' << format_double(p.v[i]) << ','
          << (i < p.u_valid ? format_double(p.u[i]) : "") << '\n';
    }
  }
  return out.str();
}

std::string verdict_json(const ExplosionVerdict& verdict, const LimitBehavior& limit) {
  JsonWriter w;
  w.begin_object();
  w.key("case").value(to_string(verdict.case_tag));
  w.key("limit").value(to_string(verdict.limit_tag));
  w.key("finite_expectation").value(verdict.finite_expectation);
  if (verdict.m_bound) {
    w.key("m_bound").value(*verdict.m_bound);
  }
  if (limit.boundary_convergence_prob) {
    w.key("boundary_convergence_prob").value(*limit.boundary_convergence_prob);
  }
  if (limit.law) {
    w.key("exit_law").begin_array();
    for (const auto& [theta, prob] : limit.law->atoms) {
      w.begin_object();
      w.key("theta").value(theta);
      w.key("prob").value(prob);
      w.end_object();
    }
    w.end_array();
  }
  w.end_object();
  return w.str();
}

std::string exit_law_json(const ExitLaw& law, const MCExitLaw* mc) {
  JsonWriter w;
  w.begin_object();
  w.key("atoms").begin_array();
  for (const auto& [theta, prob] : law.atoms) {
    w.begin_object();
    w.key("theta").value(theta);
    w.key("prob").value(prob);
    w.end_object();
  }
  w.end_array();
  w.key("total_exit_mass").value(law.total_exit_mass);
  if (mc) {
    w.key("mc").begin_object();
    w.key("paths").value(static_cast<long long>(mc->n_paths));
    w.key("exploded").value(static_cast<long long>(mc->n_exploded));
    w.key("explosion_frequency").value(mc->explosion_frequency);
    w.key("explosion_ci95").value(mc->explosion_ci_radius);
    w.key("mean_explosion_time").value(mc->mean_explosion_time);
    w.key("atoms").begin_array();
    for (std::size_t i = 0; i < mc->atoms.size(); ++i) {
      w.begin_object();
      w.key("theta").value(mc->atoms[i].first);
      w.key("freq").value(mc->atoms[i].second);
      w.key("ci95").value(mc->ci_radius[i]);
      w.end_object();
    }
    w.end_array();
    w.end_object();
  }
  w.end_object();
  return w.str();
}

namespace {

void stopping_rays_json(JsonWriter& w, const StoppingSolution& sol) {
  w.key("origin_in_region").value(sol.origin_in_region);
  w.key("origin_slope_integral").value(sol.origin_slope_integral);
  w.key("rays").begin_array();
  for (const auto& ray : sol.rays) {
    w.begin_object();
    w.key("theta").value(ray.theta);
    w.key("radii").begin_array();
    for (double r : ray.radii) w.value(r);
    w.end_array();
    w.key("q").begin_array();
    for (double q : ray.q) w.value(q);
    w.end_array();
    w.key("stop_intervals").begin_array();
    for (const auto& [a, b] : ray.stop_intervals) {
      w.begin_array().value(a).value(b).end_array();
    }
    w.end_array();
    w.end_object();
  }
  w.end_array();
}

}  // namespace

std::string stopping_json(const StoppingSolution& sol) {
  JsonWriter w;
  w.begin_object();
  w.key("c0").value(sol.c0);
  stopping_rays_json(w, sol);
  w.end_object();
  return w.str();
}

std::string stopping_csv(const StoppingSolution& sol) {
  std::ostringstream out;
  out << "theta,r,q\n";
  for (const auto& ray : sol.rays) {
    for (std::size_t i = 0; i < ray.radii.size(); ++i) {
      out << format_double(ray.theta) << ',' << format_double(ray.radii[i]) << ','
          << format_double(ray.q[i]) << '\n';
    }
  }
  return out.str();
}

std::string control_json(const ControlSolution& sol) {
  JsonWriter w;
  w.begin_object();
  w.key("c_star").value(sol.c_star);
  stopping_rays_json(w, sol.value);
  w.key("strategy").begin_array();
  for (const auto& [theta, label] : sol.strategy) {
    w.begin_object();
    w.key("theta").value(theta);
    w.key("label").value(label);
    w.end_object();
  }
  w.end_array();
  w.key("switched_spec_sample").begin_array();
  for (const auto& ray : sol.switched_spec.rays()) {
    w.begin_object();
    w.key("theta").value(ray.theta);
    w.key("r").begin_array();
    for (int i = 0; i <= 32; ++i) w.value(i / 32.0);
    w.end_array();
    w.key("b").begin_array();
    for (int i = 0; i <= 32; ++i) w.value(ray.b(i / 32.0));
    w.end_array();
    w.key("s").begin_array();
    for (int i = 0; i <= 32; ++i) w.value(ray.s(i / 32.0));
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

std::string model_spec_json(const ModelSpec& spec, int sample_grid) {
  JsonWriter w;
  w.begin_object();
  w.key("rays").begin_array();
  for (const auto& ray : spec.rays()) {
    w.begin_object();
    w.key("theta").value(ray.theta);
    w.key("weight").value(ray.weight);
    w.key("ell");
    w.value_xreal(ray.ell);
    const double reach = ray.ell.is_finite() ? ray.ell.value() : 16.0;
    w.key("r").begin_array();
    for (int i = 1; i < sample_grid; ++i) w.value(reach * i / sample_grid);
    w.end_array();
    w.key("b").begin_array();
    for (int i = 1; i < sample_grid; ++i) w.value(ray.b(reach * i / sample_grid));
    w.end_array();
    w.key("s").begin_array();
    for (int i = 1; i < sample_grid; ++i) w.value(ray.s(reach * i / sample_grid));
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

}  // namespace walsh

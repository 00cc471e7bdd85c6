// Command-line front end: model ingestion, analytic classification, Monte
// Carlo runs, and the stopping/control solvers. Every command prints a short
// human summary on stdout followed by (or writing to --out) a machine
// readable document.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "walsh/classify.hpp"
#include "walsh/control.hpp"
#include "walsh/io.hpp"
#include "walsh/model.hpp"
#include "walsh/simulate.hpp"
#include "walsh/stopping.hpp"

namespace {

using namespace walsh;

int log_level() {
  const char* env = std::getenv("WALSH_LOG");
  if (!env) return 0;
  const std::string v(env);
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

void info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[walsh] " << msg << "\n";
}

RayPoint parse_start(const std::string& text) {
  if (text == "origin") return RayPoint::origin();
  const auto at = text.find('@');
  if (at == std::string::npos) {
    throw ValidationError("start must be 'origin' or 'r@theta' (theta in radians)");
  }
  const double r = std::stod(text.substr(0, at));
  const double theta = std::stod(text.substr(at + 1));
  return RayPoint::make(r, theta);
}

void emit(const std::string& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc << "\n";
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ValidationError("cannot write: " + out_path);
    out << doc;
  }
}

struct CommonOpts {
  std::string spec_path;
  std::string out_path;
  std::string format = "json";
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--spec", opts.spec_path, "model spec file (JSON)")->required();
  cmd->add_option("--out", opts.out_path, "write the machine-readable result here");
  cmd->add_option("--format", opts.format, "json|csv|text")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  cmd->add_option("--threads", opts.threads, "cap worker threads (0 = default)");
}

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

std::string verdict_text(const ExplosionVerdict& verdict, const LimitBehavior& limit) {
  std::ostringstream out;
  out << "case: " << to_string(verdict.case_tag);
  if (verdict.case_tag == ExplosionCase::Never) out << " (P(S<inf) = 0)";
  if (verdict.case_tag == ExplosionCase::Certain) out << " (P(S<inf) = 1)";
  if (verdict.case_tag == ExplosionCase::Mixed) out << " (0 < P(S<inf) < 1)";
  out << "\nlimit: " << to_string(verdict.limit_tag) << "\n";
  if (verdict.m_bound) {
    out << "E[S] <= M = " << format_double(*verdict.m_bound) << "\n";
  }
  if (limit.boundary_convergence_prob) {
    out << "P(converge to own-ray endpoint) = "
        << format_double(*limit.boundary_convergence_prob) << "\n";
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"walsh - Walsh diffusions on rays: classification, simulation, control"};
  app.require_subcommand(1);

  // ---- check
  CommonOpts check_opts;
  auto* cmd_check = app.add_subcommand("check", "validate a model spec's conditions");
  add_common(cmd_check, check_opts);

  // ---- profile
  CommonOpts prof_opts;
  int prof_grid = 512;
  auto* cmd_profile = app.add_subcommand("profile", "tabulate p, m, v, u per ray");
  add_common(cmd_profile, prof_opts);
  cmd_profile->add_option("--grid", prof_grid, "main grid intervals per ray");

  // ---- classify
  CommonOpts cls_opts;
  std::string cls_start = "origin";
  auto* cmd_classify = app.add_subcommand("classify", "explosion/limit classification");
  add_common(cmd_classify, cls_opts);
  cmd_classify->add_option("--start", cls_start, "origin or r@theta");

  // ---- exit-law
  CommonOpts law_opts;
  std::string law_start = "origin";
  bool law_mc = false;
  std::uint64_t law_seed = 0;
  bool law_seed_set = false;
  int law_paths = 10000;
  double law_step = 1e-4, law_horizon = 10.0;
  auto* cmd_law = app.add_subcommand("exit-law", "analytic exit-angle law");
  add_common(cmd_law, law_opts);
  cmd_law->add_option("--start", law_start, "origin or r@theta");
  cmd_law->add_flag("--mc", law_mc, "add a Monte Carlo estimate");
  cmd_law->add_option("--seed", law_seed, "RNG seed (required with --mc)")
      ->each([&](const std::string&) { law_seed_set = true; });
  cmd_law->add_option("--paths", law_paths, "Monte Carlo paths");
  cmd_law->add_option("--step", law_step, "Euler step");
  cmd_law->add_option("--horizon", law_horizon, "censoring horizon");

  // ---- simulate
  CommonOpts sim_opts;
  std::string sim_start = "origin";
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  int sim_paths = 1000;
  double sim_step = 1e-4, sim_horizon = 1.0;
  std::string sim_scheme = "euler-reflect";
  std::string sim_dump;
  auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo paths with diagnostics");
  add_common(cmd_sim, sim_opts);
  cmd_sim->add_option("--start", sim_start, "origin or r@theta");
  cmd_sim->add_option("--seed", sim_seed, "RNG seed (required)")
      ->each([&](const std::string&) { sim_seed_set = true; });
  cmd_sim->add_option("--paths", sim_paths, "number of paths");
  cmd_sim->add_option("--step", sim_step, "Euler step");
  cmd_sim->add_option("--horizon", sim_horizon, "time horizon");
  cmd_sim->add_option("--scheme", sim_scheme, "euler-reflect|time-change")
      ->check(CLI::IsMember({"euler-reflect", "time-change"}));
  cmd_sim->add_option("--dump-paths", sim_dump, "CSV dump (long format with path id)");

  // ---- stop
  CommonOpts stop_opts;
  std::string stop_reward;
  double stop_tol = 1e-8;
  auto* cmd_stop = app.add_subcommand("stop", "optimal stopping: c0, Q, region");
  add_common(cmd_stop, stop_opts);
  cmd_stop->add_option("--reward", stop_reward, "reward file (JSON)")->required();
  cmd_stop->add_option("--tol", stop_tol, "bisection tolerance");

  // ---- control
  CommonOpts ctl_opts;
  std::string ctl_reward, ctl_control;
  double ctl_tol = 1e-8;
  auto* cmd_control = app.add_subcommand("control", "control with discretionary stopping");
  add_common(cmd_control, ctl_opts);
  cmd_control->add_option("--reward", ctl_reward, "reward file (JSON)")->required();
  cmd_control->add_option("--control", ctl_control, "control pairs file (JSON)")->required();
  cmd_control->add_option("--tol", ctl_tol, "bisection tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 64;
  }

  try {
    if (cmd_check->parsed()) {
      apply_threads(check_opts.threads);
      const ModelSpec spec = load_model_spec(check_opts.spec_path);
      ConditionReport report = validate_conditions(spec);
      if (report.all_pass()) {
        // per-ray invariant suite on the tabulated profiles
        const std::vector<RayProfile> profiles = build_profiles(spec, 256);
        ConditionClause invariants{"profile-invariants", true, "p increasing, v/p increasing, "
                                   "u within [1+v, exp(v)], q inverts p"};
        for (const auto& prof : profiles) {
          for (std::size_t i = 1; i < prof.grid.size() && invariants.pass; ++i) {
            if (!std::isfinite(prof.p[i]) || !std::isfinite(prof.v[i])) break;
            // far-tail increments may underflow to zero; flatness there is fine
            const bool resolvable = prof.p_prime[i] * (prof.grid[i] - prof.grid[i - 1]) >
                                    1e-300 + 1e-15 * prof.p[i - 1];
            if (prof.p[i] < prof.p[i - 1] || (resolvable && prof.p[i] == prof.p[i - 1]) ||
                (prof.p[i] > 0.0 && prof.p[i - 1] > 0.0 &&
                 prof.v[i] / prof.p[i] < prof.v[i - 1] / prof.p[i - 1] - 1e-9)) {
              invariants.pass = false;
              invariants.detail = "monotonicity breaks on theta=" + std::to_string(prof.theta);
            }
          }
          for (std::size_t i = 0; i < prof.u_valid && invariants.pass; ++i) {
            if (prof.u[i] < 1.0 + prof.v[i] - 1e-9 * (1.0 + prof.v[i]) ||
                prof.u[i] > std::exp(prof.v[i]) * (1.0 + 1e-6)) {
              invariants.pass = false;
              invariants.detail = "u-series bounds break on theta=" + std::to_string(prof.theta);
            }
          }
          const double probe = 0.5 * prof.grid[prof.grid.size() / 2];
          if (invariants.pass && probe > 0.0 && prof.p_limit.is_finite()) {
            const double y = prof.eval_p(probe);
            if (std::fabs(prof.eval_q(y) - probe) > 1e-8) {
              invariants.pass = false;
              invariants.detail = "scale inversion breaks on theta=" + std::to_string(prof.theta);
            }
          }
        }
        report.clauses.push_back(invariants);
      }
      for (const auto& c : report.clauses) {
        std::cout << (c.pass ? "[pass] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
      }
      emit(condition_report_json(report), check_opts.out_path);
      return report.all_pass() ? 0 : 2;
    }

    if (cmd_profile->parsed()) {
      apply_threads(prof_opts.threads);
      const ModelSpec spec = load_model_spec(prof_opts.spec_path);
      info("building profiles");
      const std::vector<RayProfile> profiles = build_profiles(spec, prof_grid);
      for (const auto& p : profiles) {
        std::cout << "theta=" << format_double(p.theta) << "  p(ell-)=" << p.p_limit.str()
                  << "  v(ell-)=" << p.v_limit.str()
                  << "  (v/p)(ell-)=" << p.vp_ratio_limit.str() << "\n";
      }
      emit(prof_opts.format == "csv" ? profiles_csv(profiles) : profiles_json(profiles),
           prof_opts.out_path);
      return 0;
    }

    if (cmd_classify->parsed()) {
      apply_threads(cls_opts.threads);
      const ModelSpec spec = load_model_spec(cls_opts.spec_path);
      const RayPoint start = parse_start(cls_start);
      const std::vector<RayProfile> profiles = build_profiles(spec, 512, start.r);
      const AngularMeasure nu = spec.nu();
      const ExplosionVerdict verdict = classify_explosion(profiles, nu, start);
      const LimitBehavior limit = classify_limit(profiles, nu, start);
      std::cout << verdict_text(verdict, limit);
      emit(verdict_json(verdict, limit), cls_opts.out_path);
      return 0;
    }

    if (cmd_law->parsed()) {
      apply_threads(law_opts.threads);
      const ModelSpec spec = load_model_spec(law_opts.spec_path);
      const RayPoint start = parse_start(law_start);
      const std::vector<RayProfile> profiles = build_profiles(spec, 512, start.r);
      const ExitLaw law = exit_angle_law(profiles, spec.nu(), start);
      std::optional<MCExitLaw> mc;
      if (law_mc) {
        if (!law_seed_set) throw ConfigError("exit-law --mc requires --seed");
        SimConfig cfg;
        cfg.seed = law_seed;
        cfg.paths = law_paths;
        cfg.step = law_step;
        cfg.horizon = law_horizon;
        cfg.record_path = false;
        mc = mc_exit_law(spec, start, cfg);
      }
      for (const auto& [theta, prob] : law.atoms) {
        std::cout << "theta " << format_double(theta) << ": " << format_double(prob) << "\n";
      }
      emit(exit_law_json(law, mc ? &*mc : nullptr), law_opts.out_path);
      return 0;
    }

    if (cmd_sim->parsed()) {
      apply_threads(sim_opts.threads);
      if (!sim_seed_set) throw ConfigError("simulate requires --seed");
      const ModelSpec spec = load_model_spec(sim_opts.spec_path);
      const RayPoint start = parse_start(sim_start);
      SimConfig cfg;
      cfg.seed = sim_seed;
      cfg.paths = sim_paths;
      cfg.step = sim_step;
      cfg.horizon = sim_horizon;
      cfg.scheme = sim_scheme == "time-change" ? Scheme::TimeChange : Scheme::EulerReflect;
      cfg.record_path = !sim_dump.empty();

      std::vector<double> final_r(cfg.paths), lt(cfg.paths);
      std::vector<int> exploded(cfg.paths, 0), overflowed(cfg.paths, 0);
      std::vector<double> exit_t(cfg.paths, 0.0);
      std::ofstream dump;
      if (!sim_dump.empty()) {
        dump.open(sim_dump, std::ios::binary);
        if (!dump) throw ValidationError("cannot write: " + sim_dump);
        dump << "path,t,r,theta,L\n";
      }
      auto consume = [&](std::size_t i, const PathRecord& rec) {
        final_r[i] = rec.final_r;
        lt[i] = rec.local_time_total;
        exploded[i] = rec.exploded_at ? 1 : 0;
        overflowed[i] = rec.overflow ? 1 : 0;
        if (rec.exploded_at) exit_t[i] = *rec.exploded_at;
      };
      if (cfg.record_path) {
        // dump serially so rows stay ordered by path id
        for (int i = 0; i < cfg.paths; ++i) {
          const PathRecord rec = simulate_path(spec, start, cfg, i);
          consume(i, rec);
          for (std::size_t k = 0; k < rec.times.size(); ++k) {
            dump << i << ',' << format_double(rec.times[k]) << ','
                 << format_double(rec.radial[k]) << ',' << format_double(rec.theta[k]) << ','
                 << format_double(rec.local_time[k]) << '\n';
          }
        }
      } else {
        simulate_ensemble(spec, start, cfg, consume);
      }

      double mean_r = 0.0, mean_lt = 0.0, frac_exploded = 0.0, frac_overflow = 0.0;
      double mean_exit = 0.0;
      int n_exp = 0;
      for (int i = 0; i < cfg.paths; ++i) {
        mean_r += final_r[i];
        mean_lt += lt[i];
        frac_exploded += exploded[i];
        frac_overflow += overflowed[i];
        if (exploded[i]) {
          mean_exit += exit_t[i];
          ++n_exp;
        }
      }
      mean_r /= cfg.paths;
      mean_lt /= cfg.paths;
      frac_exploded /= cfg.paths;
      frac_overflow /= cfg.paths;
      if (n_exp) mean_exit /= n_exp;

      std::cout << "paths: " << cfg.paths << "  exploded: " << format_double(frac_exploded)
                << "  censored-overflow: " << format_double(frac_overflow) << "\n"
                << "mean final radius: " << format_double(mean_r)
                << "  mean local time: " << format_double(mean_lt) << "\n";
      if (n_exp) std::cout << "mean explosion time: " << format_double(mean_exit) << "\n";

      JsonWriter w;
      w.begin_object();
      w.key("paths").value(static_cast<long long>(cfg.paths));
      w.key("explosion_frequency").value(frac_exploded);
      w.key("overflow_frequency").value(frac_overflow);
      w.key("mean_final_radius").value(mean_r);
      w.key("mean_local_time").value(mean_lt);
      w.key("mean_explosion_time").value(n_exp ? mean_exit : 0.0);
      w.end_object();
      emit(w.str(), sim_opts.out_path);
      return 0;
    }

    if (cmd_stop->parsed()) {
      apply_threads(stop_opts.threads);
      const ModelSpec spec = load_model_spec(stop_opts.spec_path);
      const Reward reward = load_reward(stop_reward, spec);
      const std::vector<RayProfile> profiles = build_profiles(spec);
      const StoppingSolution sol = value_function(profiles, spec.nu(), reward, stop_tol);
      char c0buf[40];
      std::snprintf(c0buf, sizeof(c0buf), "%.8f", sol.c0);
      std::cout << "c0 = " << c0buf << "\n";
      for (const auto& ray : sol.rays) {
        std::cout << "theta " << format_double(ray.theta) << ": stop region";
        for (const auto& [a, b] : ray.stop_intervals) {
          std::cout << " [" << format_double(a) << ", " << format_double(b) << "]";
        }
        std::cout << "\n";
      }
      emit(stop_opts.format == "csv" ? stopping_csv(sol) : stopping_json(sol),
           stop_opts.out_path);
      return 0;
    }

    if (cmd_control->parsed()) {
      apply_threads(ctl_opts.threads);
      const ModelSpec spec = load_model_spec(ctl_opts.spec_path);
      const Reward reward = load_reward(ctl_reward, spec);
      const ControlSpec ctrl = load_control(ctl_control, spec);
      const ControlSolution sol = solve_cstar(spec, ctrl, reward, ctl_tol);
      char cbuf[40];
      std::snprintf(cbuf, sizeof(cbuf), "%.8f", sol.c_star);
      std::cout << "c* = " << cbuf << "\n";
      for (const auto& [theta, label] : sol.strategy) {
        std::cout << "theta " << format_double(theta) << ": " << label << "\n";
      }
      emit(control_json(sol), ctl_opts.out_path);
      return 0;
    }
  } catch (const NotApplicableError& e) {
    std::cerr << "not applicable: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include "fidhvi/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fidhvi/contact.hpp"
#include "fidhvi/errors.hpp"
#include "fidhvi/hypotheses.hpp"
#include "fidhvi/perturbation.hpp"
#include "fidhvi/solver.hpp"
#include "fidhvi/special.hpp"

namespace fidhvi::cli {

namespace {

using nlohmann::json;

std::string fmt(double v) { return csv::format_double(v); }

csv::Table key_values(const std::vector<std::pair<std::string, std::string>>& kv) {
  csv::Table t;
  t.header = {"key", "value"};
  for (const auto& [k, v] : kv) t.add_row({k, v});
  return t;
}

std::string path_in(const RunConfig& c, const std::string& file) {
  return (std::filesystem::path(c.out_dir) / file).string();
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config: " + key + " must be a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("config: " + key + " must be an integer");
  return v.get<int>();
}

std::vector<double> numbers(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError("config: " + key + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(number(x, key));
  return out;
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("config: " + key + " must be a string");
  return v.get<std::string>();
}

SolveOptions solve_options(const RunConfig& c) {
  SolveOptions o;
  o.tol = c.tol;
  o.inner.tol = c.inner_tol;
  o.max_sweeps = c.max_sweeps;
  return o;
}

bool residuals_pass(const ResidualReport& r) {
  return r.r_z <= kMaxIntegralResidual && r.r_y <= kMaxInclusionResidual &&
         r.caputo <= kMaxCaputoResidual;
}

std::vector<std::pair<std::string, std::string>> residual_rows(const SolveReport& rep,
                                                               const ResidualReport& r) {
  return {{"picard_iterations", std::to_string(rep.picard_iterations)},
          {"contraction_factor", fmt(rep.contraction_factor)},
          {"r_z", fmt(r.r_z)},
          {"r_y", fmt(r.r_y)},
          {"caputo", fmt(r.caputo)},
          {"caputo_nodes", std::to_string(r.caputo_nodes)},
          {"order_is_one", rep.order_is_one ? "1" : "0"},
          {"pass", residuals_pass(r) ? "1" : "0"}};
}

int cmd_check(const RunConfig& c, std::ostream& log) {
  const ProblemSpec spec = build_preset(c.preset, c.overrides, c.steps_per_subinterval);
  const HOReport ho = check_HO(spec);
  SamplingOptions opt;
  opt.samples = c.samples;
  opt.seed = c.seed;
  const auto estimates = hypotheses_report(spec, opt);
  csv::write_table_file(path_in(c, "hypotheses.csv"), estimates_table(estimates));
  csv::write_table_file(path_in(c, "ho_report.csv"),
                        key_values({{"m_a", fmt(ho.m_a)},
                                    {"budget", fmt(ho.budget)},
                                    {"rho", fmt(ho.rho)},
                                    {"strong_monotonicity_ok", ho.strong_monotonicity_ok ? "1" : "0"},
                                    {"contraction_ok", ho.contraction_ok ? "1" : "0"}}));
  log << "preset " << spec.name << ": m_A=" << fmt(ho.m_a) << " budget=" << fmt(ho.budget)
      << " rho=" << fmt(ho.rho) << "\n";
  if (!ho.strong_monotonicity_ok) {
    throw ConstantViolation("m_A must exceed c_J ‖N‖²", ho.m_a, ho.budget);
  }
  if (!ho.contraction_ok) throw ConstantViolation("contraction factor must be below 1", ho.rho, 1.0);
  int refuted = 0;
  for (const auto& e : estimates) {
    if (e.refuted) {
      ++refuted;
      log << "refuted: " << e.name << " declared " << fmt(e.declared) << " observed "
          << fmt(e.observed) << "\n";
    }
  }
  log << estimates.size() - refuted << "/" << estimates.size() << " constants consistent\n";
  return refuted == 0 ? kOk : kBoundsFailed;
}

int cmd_solve(const RunConfig& c, std::ostream& log) {
  const ProblemSpec spec = build_preset(c.preset, c.overrides, c.steps_per_subinterval);
  const SolveReport rep = picard_solve(spec, solve_options(c));
  const ResidualReport r = residual_check(spec, rep);
  csv::write_table_file(path_in(c, "z.csv"), trajectory_table(rep.z, "z"));
  csv::write_table_file(path_in(c, "y.csv"), trajectory_table(rep.y, "y"));
  csv::write_table_file(path_in(c, "convergence.csv"), rep.convergence_table());
  csv::write_table_file(path_in(c, "residuals.csv"), key_values(residual_rows(rep, r)));
  log << "preset " << spec.name << ": " << rep.picard_iterations << " sweeps, r_z=" << fmt(r.r_z)
      << " r_y=" << fmt(r.r_y) << " caputo=" << fmt(r.caputo) << "\n";
  if (rep.order_is_one) log << "order 1: classical derivative\n";
  return residuals_pass(r) ? kOk : kBoundsFailed;
}

int cmd_contact(const RunConfig& c, std::ostream& log) {
  const ContactModel model = build_contact_model(c.preset, c.overrides);
  const ProblemSpec spec = to_problem_spec(model, contact_grid(model, c.steps_per_subinterval));
  const ContactConstants k = contact_constants(model);
  const SolveReport rep = picard_solve(spec, solve_options(c));
  const ResidualReport r = residual_check(spec, rep);
  csv::write_table_file(path_in(c, "displacement.csv"), displacement_table(rep.y));
  csv::write_table_file(path_in(c, "traction.csv"), trajectory_table(rep.z, "f2", "f2"));
  csv::write_table_file(path_in(c, "convergence.csv"), rep.convergence_table());
  csv::write_table_file(path_in(c, "residuals.csv"), key_values(residual_rows(rep, r)));
  csv::write_table_file(path_in(c, "constants.csv"),
                        key_values({{"lambda_min", fmt(k.lambda_min)},
                                    {"m_a", fmt(k.m_a)},
                                    {"alpha_normal", fmt(k.alpha_normal)},
                                    {"alpha_friction", fmt(k.alpha_friction)},
                                    {"c0", fmt(k.c0)},
                                    {"m1", fmt(k.m1)},
                                    {"m_g", fmt(k.m_g)},
                                    {"rho", fmt(rep.contraction_factor)}}));
  log << "rod with " << model.elements << " elements: lambda_min=" << fmt(k.lambda_min)
      << ", " << rep.picard_iterations << " sweeps, r_z=" << fmt(r.r_z) << " r_y=" << fmt(r.r_y)
      << "\n";
  return residuals_pass(r) ? kOk : kBoundsFailed;
}

ContactFamilyKind contact_kind(const std::string& name) {
  if (name == "normal_quadratic") return ContactFamilyKind::normal_quadratic;
  if (name == "friction_to_zero") return ContactFamilyKind::friction_to_zero;
  if (name == "normal_absolute") return ContactFamilyKind::normal_absolute;
  throw ConfigError("unknown contact family " + name);
}

int cmd_perturb(const RunConfig& c, std::ostream& log) {
  const PresetInfo& info = preset_info(c.preset);
  std::string family = c.family;
  if (family.empty()) family = info.contact ? "friction_to_zero" : "linear_shift";

  PerturbationOptions opt;
  opt.solve = solve_options(c);
  opt.sampling.samples = c.samples;
  opt.sampling.seed = c.seed;
  opt.threads = c.threads;

  PerturbationStudy study = [&] {
    if (family != "linear_shift") {
      if (!info.contact) throw ConfigError("family " + family + " needs a contact preset");
      return run_contact_perturbation(build_contact_model(c.preset, c.overrides),
                                      contact_kind(family), c.deltas, c.steps_per_subinterval,
                                      opt);
    }
    const ProblemSpec spec = build_preset(c.preset, c.overrides, c.steps_per_subinterval);
    Vec b = Vec::Ones(spec.j.dim);
    if (!c.shift.empty()) {
      if (static_cast<int>(c.shift.size()) != spec.j.dim) {
        throw ConfigError("shift must have one entry per component of Ny");
      }
      b = Eigen::Map<const Vec>(c.shift.data(), spec.j.dim);
    }
    return run_perturbation_study(spec, linear_shift_family(spec, b), c.deltas, opt);
  }();

  csv::write_table_file(path_in(c, "perturbation.csv"), study.table());
  bool bounds = true;
  for (const auto& r : study.rows) {
    bounds = bounds && r.sup_z_err <= r.gronwall_ceiling + study.solver_slack &&
             r.sup_y_err <= r.y_bound + study.solver_slack;
  }
  std::vector<std::pair<std::string, std::string>> rows = {
      {"family", family}, {"k2", fmt(study.k2)}, {"solver_slack", fmt(study.solver_slack)}};
  bool slope_ok = true;
  if (study.rows.size() >= 2) {
    const double slope = study.z_slope();
    slope_ok = slope >= kSlopeLow && slope <= kSlopeHigh;
    rows.push_back({"slope", fmt(slope)});
    log << "family " << family << ": slope " << fmt(slope) << "\n";
  }
  rows.push_back({"bounds_hold", bounds ? "1" : "0"});
  csv::write_table_file(path_in(c, "perturbation_summary.csv"), key_values(rows));
  return bounds && slope_ok ? kOk : kBoundsFailed;
}

int cmd_bench(const RunConfig& c, std::ostream& log) {
  csv::Table t;
  t.header = {"case", "computed", "reference", "abs_error", "tolerance", "pass"};
  bool all = true;
  auto add = [&](const std::string& name, double got, double ref, double tol) {
    const double err = std::abs(got - ref);
    const bool pass = err <= tol;
    all = all && pass;
    t.add_row({name, fmt(got), fmt(ref), fmt(err), fmt(tol), pass ? "1" : "0"});
  };
  add("E_1(1)", special::mittag_leffler(1.0, 1.0).value, std::exp(1.0), 1e-10);
  add("E_2(1)", special::mittag_leffler(2.0, 1.0).value, std::cosh(1.0), 1e-10);
  add("E_0.5(-1)", special::mittag_leffler(0.5, -1.0).value, std::exp(1.0) * std::erfc(1.0),
      1e-8);

  const int n = c.steps_per_subinterval;
  std::vector<double> nodes(n + 1);
  for (int i = 0; i <= n; ++i) nodes[i] = static_cast<double>(i) / n;
  const double k = 0.5;
  const auto w = special::riemann_liouville_weights(k, nodes, 1.0);
  const std::vector<double> ones(nodes.size(), 1.0);
  const double gk = special::gamma_fn(k);
  add("I^0.5[1](1)", w.apply(ones) / gk, 1.0 / special::gamma_fn(k + 1.0), 1e-10);
  add("I^0.5[t](1)", w.apply(nodes) / gk, 1.0 / special::gamma_fn(k + 2.0), 1e-6);
  add("Gamma(0.5)", special::gamma_fn(0.5), std::sqrt(std::acos(-1.0)), 1e-13);
  csv::write_table_file(path_in(c, "bench_special.csv"), t);
  log << t.rows.size() << " special-function cases, " << (all ? "all pass" : "failures") << "\n";
  return all ? kOk : kBoundsFailed;
}

void error_line(std::ostream& err, const std::string& kind, const std::string& message, int code,
                const json& extra = json::object()) {
  json j = {{"error", kind}, {"message", message}, {"exit", code}};
  j.update(extra);
  err << j.dump() << "\n";
}

}  // namespace

void RunConfig::validate() const {
  static const std::vector<std::string> commands = {"check", "solve", "perturb", "contact",
                                                    "bench"};
  if (std::find(commands.begin(), commands.end(), command) == commands.end()) {
    throw ConfigError("unknown command '" + command + "'");
  }
  if (command != "bench") preset_info(preset);
  if (steps_per_subinterval < 8) throw ConfigError("need at least 8 steps per subinterval");
  if (!(tol > 0.0) || !(inner_tol > 0.0)) throw ConfigError("tolerances must be positive");
  if (max_sweeps < 1) throw ConfigError("max_sweeps must be positive");
  if (samples < 1) throw ConfigError("samples must be positive");
  if (threads < 1) throw ConfigError("threads must be positive");
  if (out_dir.empty()) throw ConfigError("output directory must not be empty");
  if (overrides.impulse_times) {
    const auto& ts = *overrides.impulse_times;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (!(ts[i] > 0.0) || (i > 0 && !(ts[i] > ts[i - 1]))) {
        throw ConfigError("impulse times must be positive and strictly increasing");
      }
    }
  }
}

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  for (const auto& [key, v] : doc.items()) {
    if (key == "command") {
      c.command = text(v, key);
    } else if (key == "preset") {
      c.preset = text(v, key);
    } else if (key == "parameters") {
      if (!v.is_object()) throw ConfigError("config: parameters must be an object");
      for (const auto& [pk, pv] : v.items()) c.overrides.values[pk] = number(pv, pk);
    } else if (key == "impulse_times") {
      c.overrides.impulse_times = numbers(v, key);
    } else if (key == "steps_per_subinterval") {
      c.steps_per_subinterval = integer(v, key);
    } else if (key == "tol") {
      c.tol = number(v, key);
    } else if (key == "inner_tol") {
      c.inner_tol = number(v, key);
    } else if (key == "max_sweeps") {
      c.max_sweeps = integer(v, key);
    } else if (key == "out") {
      c.out_dir = text(v, key);
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw ConfigError("config: seed must be a nonnegative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "samples") {
      c.samples = integer(v, key);
    } else if (key == "deltas") {
      c.deltas = numbers(v, key);
    } else if (key == "family") {
      c.family = text(v, key);
    } else if (key == "shift") {
      c.shift = numbers(v, key);
    } else {
      throw ConfigError("config: unknown key " + key);
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& cell : csv::split_row(text)) out.push_back(csv::parse_double(cell));
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

int thread_budget() {
  const int hw = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  const char* env = std::getenv("FIDHVI_THREADS");
  if (!env || !*env) return hw;
  try {
    const double v = csv::parse_double(env);
    if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("");
    return std::min(hw, static_cast<int>(v));
  } catch (const ConfigError&) {
    throw ConfigError("FIDHVI_THREADS must be a positive integer");
  }
}

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    config.validate();
    if (config.command == "check") return cmd_check(config, log);
    if (config.command == "solve") return cmd_solve(config, log);
    if (config.command == "perturb") return cmd_perturb(config, log);
    if (config.command == "contact") return cmd_contact(config, log);
    return cmd_bench(config, log);
  } catch (const ConfigError& e) {
    error_line(err, "config", e.what(), kConfigError);
    return kConfigError;
  } catch (const ConstantViolation& e) {
    error_line(err, "constant_violation", e.what(), kConstantViolation,
               {{"lhs", e.lhs()}, {"rhs", e.rhs()}});
    return kConstantViolation;
  } catch (const NonConvergence& e) {
    error_line(err, "nonconvergence", e.what(), kNonConvergence,
               {{"best_residual", e.best_residual()}, {"iterations", e.iterations()}});
    return kNonConvergence;
  } catch (const DomainError& e) {
    error_line(err, "domain", e.what(), kConfigError);
    return kConfigError;
  } catch (const std::exception& e) {
    error_line(err, "io", e.what(), kConfigError);
    return kConfigError;
  }
}

}  // namespace fidhvi::cli

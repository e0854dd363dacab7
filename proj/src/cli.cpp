#include "sigmaflow/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <omp.h>

#include <CLI11.hpp>

#include "sigmaflow/error.hpp"
#include "sigmaflow/flow.hpp"
#include "sigmaflow/io.hpp"
#include "sigmaflow/legendre.hpp"
#include "sigmaflow/operators.hpp"
#include "sigmaflow/pde.hpp"
#include "sigmaflow/toric.hpp"
#include "sigmaflow/verify.hpp"

namespace sigmaflow {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Errors raised while reading input are exit code 2 whatever their type.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
auto loading(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
}

json load(const RunConfig& rc) {
  if (rc.config.empty()) throw ConfigError("--config is required for '" + rc.command + "'");
  json j = io::read_json_file(rc.config);
  io::require_object(j, "config");
  return j;
}

const json& require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing key '" + key + "'");
  return j.at(key);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

json spectrum_json(const Spectrum& s) { return std::vector<double>(s.values().begin(), s.values().end()); }

json structural_json(const StructuralReport& r) {
  json conds = json::array();
  for (std::size_t i = 0; i < r.conditions.size(); ++i) {
    const ConditionResult& c = r.conditions[i];
    json row = {{"condition", i + 1}, {"pass", c.pass}, {"detail", c.detail}};
    row["witness"] = c.witness ? spectrum_json(*c.witness) : json(nullptr);
    conds.push_back(row);
  }
  return {{"samples", r.samples},         {"conditions", conds},         {"ratio_min", r.ratio_min},
          {"ratio_max", r.ratio_max},     {"ratio_constant", r.ratio_constant},
          {"dominance_min", r.dominance_min}, {"convexity_min", r.convexity_min},
          {"epsilon_rule", r.epsilon_rule}, {"all_pass", r.all_pass()}};
}

int check_operator(const RunConfig& rc) {
  const auto [spec, samples, box] = loading([&] {
    const json j = load(rc);
    io::require_keys(j, {"operator", "samples", "box"}, "config");
    const OperatorSpec s = operator_spec_from_json(require(j, "operator"));
    const long n = io::get_integer_or(j, "samples", 2000, "config");
    if (n < 1) throw ConfigError("key 'config.samples' must be positive");
    SpectrumBox b;
    if (j.contains("box")) {
      io::require_keys(j.at("box"), {"lo", "hi"}, "config.box");
      b.lo = io::get_number_or(j.at("box"), "lo", b.lo, "config.box");
      b.hi = io::get_number_or(j.at("box"), "hi", b.hi, "config.box");
      if (!(b.lo > 0.0 && b.hi > b.lo)) throw ConfigError("key 'config.box' needs 0 < lo < hi");
    }
    return std::tuple{s, static_cast<std::size_t>(n), b};
  });
  StructuralOptions opt;
  if (rc.seed) opt.seed = *rc.seed;
  const StructuralReport rep = check_structural(spec, samples, box, opt);
  json out = structural_json(rep);
  out["operator"] = spec;
  out["seed"] = opt.seed;
  io::write_json_file(rc.out / "structural.json", out);
  std::cout << describe(spec.region) << ": " << (rep.all_pass() ? "all conditions pass" : "condition failure") << '\n';
  return rep.all_pass() ? exit_code::ok : exit_code::math_failure;
}

int toric(const RunConfig& rc) {
  const auto [chi, alpha, opt] = loading([&] {
    const json j = load(rc);
    io::require_keys(j, {"chi", "alpha", "c"}, "config");
    const Polytope c = polytope_from_json(require(j, "chi"), "config.chi");
    const Polytope a = polytope_from_json(require(j, "alpha"), "config.alpha");
    StabilityOptions o;
    if (j.contains("c")) o.c = io::get_number(j, "c", "config");
    if (rc.tol) o.margin_tol = *rc.tol;
    require_compatible_fans(c, a);
    return std::tuple{c, a, o};
  });
  const StabilityReport rep = stability_report(chi, alpha, opt);
  io::write_json_file(rc.out / "stability.json", to_json(rep));
  write_text(rc.out / "faces.csv", face_table_csv(rep));
  std::cout << "verdict " << to_string(rep.verdict) << " c=" << io::format_double(rep.c);
  if (!rep.witness.empty()) std::cout << " witness " << rep.witness;
  std::cout << '\n';
  return rc.expect_stable && rep.verdict == Verdict::Unstable ? exit_code::math_failure : exit_code::ok;
}

int flow(const RunConfig& rc) {
  struct Setup {
    TorusProblem prob;
    PotentialField phi0;
    FlowOptions opt;
    double tol, t_max;
  };
  const Setup s = loading([&] {
    const json j = load(rc);
    io::require_keys(j, {"problem", "initial", "dt", "cfl", "t_max", "tol", "path_steps"}, "config");
    Setup u;
    u.prob = torus_problem_from_json(require(j, "problem"));
    u.phi0 = j.contains("initial") ? potential_from_modes(u.prob.grid, j.at("initial"), "config.initial")
                                   : PotentialField{std::vector<double>(u.prob.grid.size(), 0.0)};
    u.opt.dt = io::get_number_or(j, "dt", u.opt.dt, "config");
    u.opt.cfl = io::get_number_or(j, "cfl", u.opt.cfl, "config");
    const long ps = io::get_integer_or(j, "path_steps", 3, "config");
    if (ps < 3 || ps % 2 == 0) throw ConfigError("key 'config.path_steps' must be odd and >= 3");
    u.opt.path_steps = static_cast<std::size_t>(ps);
    u.t_max = io::get_number_or(j, "t_max", 50.0, "config");
    u.tol = rc.tol ? *rc.tol : io::get_number_or(j, "tol", 1e-5, "config");
    if (!(u.opt.dt > 0.0 && u.opt.cfl > 0.0 && u.t_max > 0.0 && u.tol > 0.0))
      throw ConfigError("flow dt, cfl, t_max and tol must be positive");
    return u;
  });
  const FlowResult r = run(s.prob, s.phi0, s.tol, s.t_max, s.opt);
  const json summary = {{"status", r.status},       {"converged", r.converged},
                        {"t", r.state.t},           {"steps", r.steps},
                        {"residual", r.state.residual}, {"c", r.state.c_eps},
                        {"sup_F", r.state.sup_F},   {"J", r.state.J_value},
                        {"dt_halvings", r.dt_halvings}, {"max_sup_increase", r.max_sup_increase},
                        {"max_J_increase", r.max_J_increase}, {"tol", s.tol}};
  io::write_json_file(rc.out / "flow.json", summary);
  write_text(rc.out / "trace.csv", trace_csv(r));
  write_potential_csv(rc.out / "potential.csv", s.prob, r.state.phi);
  std::cout << "flow " << r.status << " t=" << io::format_double(r.state.t)
            << " residual=" << io::format_double(r.state.residual) << '\n';
  return r.converged ? exit_code::ok : exit_code::math_failure;
}

std::pair<DirichletProblem, NewtonOptions> load_dirichlet(const RunConfig& rc, const json& j) {
  DirichletProblem p = dirichlet_problem_from_json(require(j, "problem"));
  NewtonOptions o = j.contains("newton") ? newton_options_from_json(j.at("newton"), "config.newton") : NewtonOptions{};
  if (rc.tol) o.tol = *rc.tol;
  return {std::move(p), o};
}

void write_solution(const RunConfig& rc, const SolveResult& r) {
  write_text(rc.out / "newton_log.csv", newton_log_csv(r));
  write_text(rc.out / "solution.csv", grid_function_csv(r.solution));
}

int solve(const RunConfig& rc, Equation eq) {
  const auto [prob, opt] = loading([&] {
    const json j = load(rc);
    io::require_keys(j, {"problem", "newton"}, "config");
    auto pr = load_dirichlet(rc, j);
    if (pr.first.target != eq)
      throw ConfigError(std::string("key 'problem.equation' must be '") + (eq == Equation::Model ? "model" : "toric") +
                        "' for this command");
    return pr;
  });
  const SolveResult r = eq == Equation::Model ? solve_model_dirichlet(prob, opt) : solve_toric_equation(prob, opt);
  json summary = to_json(r);
  if (eq == Equation::Model && r.converged) {
    const SupersolutionReport sup = supersolution_check(r.solution, prob.weight);
    const HessianBound hb = hessian_bound_check(r.solution, prob.weight);
    summary["supersolution"] = {{"max_Lf", sup.max_Lf}, {"nodes", sup.nodes}, {"warning", sup.warning}};
    summary["hessian_bound"] = {{"max_frobenius", hb.max_frobenius}, {"bound", hb.bound}};
  }
  io::write_json_file(rc.out / "solution.json", summary);
  write_solution(rc, r);
  std::cout << "newton " << r.status << " residual=" << io::format_double(r.residual) << " iterations=" << r.iterations
            << '\n';
  return r.converged ? exit_code::ok : exit_code::math_failure;
}

int continuity(const RunConfig& rc) {
  struct Setup {
    DirichletProblem prob;
    NewtonOptions opt;
    double d_start, d_end;
    std::size_t stages;
    CNormalization norm;
  };
  const Setup s = loading([&] {
    const json j = load(rc);
    io::require_keys(j, {"problem", "newton", "d_start", "d_end", "stages", "normalization"}, "config");
    auto [p, o] = load_dirichlet(rc, j);
    if (p.target != Equation::Toric) throw ConfigError("continuity needs 'problem.equation' = 'toric'");
    const std::string norm = io::get_string_or(j, "normalization", "fixed", "config");
    if (norm != "fixed" && norm != "recompute")
      throw ConfigError("key 'config.normalization' must be 'fixed' or 'recompute'");
    const long st = io::get_integer_or(j, "stages", 8, "config");
    if (st < 2) throw ConfigError("key 'config.stages' must be >= 2");
    return Setup{std::move(p), o, io::get_number(j, "d_start", "config"), io::get_number_or(j, "d_end", 0.0, "config"),
                 static_cast<std::size_t>(st), norm == "fixed" ? CNormalization::Fixed : CNormalization::Recompute};
  });
  // Schedule errors are input errors too.
  loading([&] { return continuity_schedule(s.d_start, s.d_end, s.stages); });
  const ContinuityPath path = continuity_solve(s.prob, s.d_start, s.d_end, s.stages, s.norm, s.opt);
  io::CsvWriter csv({"d", "c", "status", "iterations", "residual", "min_eig"});
  json stages = json::array();
  for (const ContinuityStage& st : path.stages) {
    csv.add_row({io::format_double(st.d), io::format_double(st.c), st.status, std::to_string(st.iterations),
                 io::format_double(st.residual), io::format_double(st.min_eig)});
    stages.push_back({{"d", st.d}, {"c", st.c}, {"status", st.status}, {"iterations", st.iterations},
                      {"residual", st.residual}});
  }
  json summary = {{"completed", path.completed}, {"d_schedule", path.d_schedule}, {"stages", stages},
                  {"smallest_d", path.smallest_d}};
  summary["stall_d"] = path.stall_d ? json(*path.stall_d) : json(nullptr);
  io::write_json_file(rc.out / "continuity.json", summary);
  csv.write(rc.out / "stages.csv");
  write_text(rc.out / "solution.csv", grid_function_csv(path.solution));
  if (path.completed)
    std::cout << "continuity completed to d=" << io::format_double(path.smallest_d) << '\n';
  else
    std::cout << "continuity stalled at d=" << io::format_double(*path.stall_d) << '\n';
  return path.completed ? exit_code::ok : exit_code::math_failure;
}

int legendre(const RunConfig& rc) {
  const LegendreConfig cfg = loading([&] { return legendre_config_from_json(load(rc)); });
  const ConvexGridFunction h = legendre_transform(cfg.source, cfg.options);
  std::size_t valid = 0;
  for (char v : h.valid) valid += v != 0;
  const auto& box = std::get<domain::Box>(h.grid.domain());
  const GradientImage im = gradient_image(cfg.source);
  io::write_json_file(rc.out / "legendre.json", {{"box_lo", box.lo}, {"box_hi", box.hi}, {"points", h.grid.points()},
                                                 {"valid_nodes", valid}, {"gradient_image_lo", im.lo},
                                                 {"gradient_image_hi", im.hi}});
  write_text(rc.out / "transform.csv", grid_function_csv(h));
  std::cout << "legendre transform on " << valid << " valid nodes\n";
  return exit_code::ok;
}

int verify(const RunConfig& rc) {
  VerifyOptions o;
  if (rc.seed) o.seed = *rc.seed;
  if (rc.tol) o.tol_scale = *rc.tol;
  const VerifyReport rep = verify_all(o);
  write_text(rc.out / "verify.json", report_text(rep, o));
  for (const CriterionResult& c : rep.criteria)
    std::cout << "criterion " << c.id << " " << c.name << ": " << (c.pass ? "PASS" : "FAIL") << '\n';
  if (rep.pass()) return exit_code::ok;
  std::cerr << "failed criteria:";
  for (int id : rep.failed()) std::cerr << ' ' << id;
  std::cerr << '\n';
  return exit_code::math_failure;
}

void apply_thread_cap() {
  const char* env = std::getenv("SIGMAFLOW_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("SIGMAFLOW_THREADS must be a positive integer");
  omp_set_num_threads(static_cast<int>(n));
}

}  // namespace

int dispatch(const RunConfig& rc) {
  try {
    if (rc.command != "verify-all" && rc.command != "check-operator" && rc.command != "toric-stability" &&
        rc.command != "flow" && rc.command != "solve-model" && rc.command != "solve-toric" &&
        rc.command != "continuity" && rc.command != "legendre")
      throw ConfigError("unknown command '" + rc.command + "'");
    std::error_code ec;
    fs::create_directories(rc.out, ec);
    if (ec) throw ConfigError("cannot create output directory '" + rc.out.string() + "'");
    if (rc.command == "check-operator") return check_operator(rc);
    if (rc.command == "toric-stability") return toric(rc);
    if (rc.command == "flow") return flow(rc);
    if (rc.command == "solve-model") return solve(rc, Equation::Model);
    if (rc.command == "solve-toric") return solve(rc, Equation::Toric);
    if (rc.command == "continuity") return continuity(rc);
    if (rc.command == "legendre") return legendre(rc);
    return verify(rc);
  } catch (const ConfigError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return exit_code::input_error;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return exit_code::input_error;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return exit_code::math_failure;
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Numerical lab for inverse sigma_k equations, J-flow and toric stability"};
  app.require_subcommand(1, 1);
  RunConfig rc;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::string config, out = ".";
  const char* names[][2] = {
      {"check-operator", "Sample the structural conditions of an operator"},
      {"toric-stability", "Face-wise stability criterion for a pair of moment polytopes"},
      {"flow", "Run the flow on a periodic grid"},
      {"solve-model", "Dirichlet problem for the model equation"},
      {"solve-toric", "Dirichlet problem for the toric equation"},
      {"continuity", "Continuity path in d for the toric equation"},
      {"legendre", "Discrete Legendre transform of a convex grid function"},
      {"verify-all", "Run the acceptance battery"}};
  std::vector<CLI::App*> subs;
  for (const auto& nm : names) {
    CLI::App* sub = app.add_subcommand(nm[0], nm[1]);
    if (std::string(nm[0]) != "verify-all") sub->add_option("--config", config, "JSON config")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "sampling seed");
    sub->add_option("--tol", tol, "tolerance override (verify-all: scale on every tolerance)");
    sub->add_flag("--expect-stable", rc.expect_stable, "exit 1 on an unstable verdict");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_code::ok : exit_code::input_error;
  }
  for (CLI::App* sub : subs) {
    if (!sub->parsed()) continue;
    rc.command = sub->get_name();
    if (sub->count("--seed")) rc.seed = seed;
    if (sub->count("--tol")) rc.tol = tol;
  }
  rc.config = config;
  rc.out = out;
  try {
    apply_thread_cap();
  } catch (const ConfigError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return exit_code::input_error;
  }
  return dispatch(rc);
}

}  // namespace sigmaflow

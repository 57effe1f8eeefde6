#include "mim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "mim/barron.hpp"
#include "mim/csv.hpp"
#include "mim/kernels.hpp"

namespace mim {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kBuildId = "mim 0.1.0";

ProblemSpec cos_problem(int d, std::vector<int> k) {
  ProblemSpec p;
  p.n = 1;
  p.d = d;
  p.kind = BoundaryKind::dirichlet;
  p.u_star = SpectralFunction(d, {Mode{std::move(k), 1.0}});
  return p;
}

std::string kind_name(BoundaryKind k) { return to_string(k); }

const char* method_name(OptimizerConfig::Method m) {
  return m == OptimizerConfig::Method::adam ? "adam" : "sgd";
}

ojson problem_json(const ProblemSpec& p) {
  ojson j;
  j["n"] = p.n;
  j["d"] = p.d;
  j["kind"] = kind_name(p.kind);
  j["lambda"] = p.lambda;
  j["mu"] = p.mu;
  auto modes = ojson::array();
  for (const auto& m : p.u_star.modes()) {
    ojson mj;
    mj["k"] = m.k;
    mj["coeff"] = m.coeff;
    modes.push_back(mj);
  }
  j["modes"] = modes;
  return j;
}

template <class T>
T get_or(const json& j, const char* key, T def) {
  if (!j.contains(key)) return def;
  return j.at(key).get<T>();
}

ProblemSpec parse_problem(const json& j, const ProblemSpec& def) {
  ProblemSpec p = def;
  p.n = get_or(j, "n", def.n);
  p.d = get_or(j, "d", def.d);
  if (j.contains("kind")) p.kind = boundary_kind_from_string(j.at("kind").get<std::string>());
  p.lambda = get_or(j, "lambda", def.lambda);
  p.mu = get_or(j, "mu", def.mu);
  if (j.contains("modes")) {
    std::vector<Mode> modes;
    for (const auto& mj : j.at("modes")) {
      modes.push_back(Mode{mj.at("k").get<std::vector<int>>(), mj.at("coeff").get<double>()});
    }
    p.u_star = SpectralFunction(p.d, std::move(modes));
  } else if (p.d != def.d) {
    std::vector<int> k(static_cast<std::size_t>(p.d), 0);
    k[0] = 1;
    p.u_star = SpectralFunction(p.d, {Mode{k, 1.0}});
  }
  p.validate();
  return p;
}

void require_list(const std::vector<int>& v, const char* name, int min_value) {
  if (v.empty()) throw ConfigError(std::string(name) + " list must be nonempty");
  for (int x : v) {
    if (x < min_value) throw ConfigError(std::string(name) + " entries must be >= " + std::to_string(min_value));
  }
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.problem = cos_problem(1, {1});
  c.optimizer.steps = 20000;
  c.optimizer.log_interval = 100;
  c.rademacher.gap_problem = cos_problem(2, {1, 1});
  return c;
}

void set_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.optimizer.seed = seed;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c = default_config();
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("problem")) c.problem = parse_problem(j.at("problem"), c.problem);
    if (j.contains("system")) c.system = system_from_string(j.at("system").get<std::string>());
    c.m = get_or(j, "m", c.m);
    c.N = get_or(j, "N", c.N);
    c.N_hat = get_or(j, "N_hat", c.N_hat);
    c.jobs = get_or(j, "jobs", c.jobs);
    set_seed(c, get_or<std::uint64_t>(j, "seed", c.seed));
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      auto& opt = c.optimizer;
      if (o.contains("method")) {
        const auto m = o.at("method").get<std::string>();
        if (m == "adam") opt.method = OptimizerConfig::Method::adam;
        else if (m == "sgd") opt.method = OptimizerConfig::Method::sgd;
        else throw ConfigError("unknown optimizer method: " + m);
      }
      opt.step_size = get_or(o, "step_size", opt.step_size);
      opt.beta1 = get_or(o, "beta1", opt.beta1);
      opt.beta2 = get_or(o, "beta2", opt.beta2);
      opt.epsilon = get_or(o, "epsilon", opt.epsilon);
      opt.steps = get_or(o, "steps", opt.steps);
      opt.resample = get_or(o, "resample", opt.resample);
      opt.log_interval = get_or(o, "log_interval", opt.log_interval);
      opt.validate();
    }
    if (j.contains("convergence")) {
      const auto& s = j.at("convergence");
      c.convergence.mode = get_or(s, "mode", c.convergence.mode);
      c.convergence.seeds = get_or(s, "seeds", c.convergence.seeds);
      c.convergence.partition = get_or(s, "partition", c.convergence.partition);
      if (c.convergence.mode != "train" && c.convergence.mode != "approximation") {
        throw ConfigError("convergence.mode must be \"train\" or \"approximation\"");
      }
    }
    if (j.contains("derivatives")) {
      const auto& s = j.at("derivatives");
      auto& v = c.derivatives;
      v.points = get_or(s, "points", v.points);
      v.step = get_or(s, "step", v.step);
      v.tolerance = get_or(s, "tolerance", v.tolerance);
      v.width = get_or(s, "width", v.width);
    }
    if (j.contains("coercivity")) {
      const auto& s = j.at("coercivity");
      auto& v = c.coercivity;
      v.trials = get_or(s, "trials", v.trials);
      v.seeds = get_or(s, "seeds", v.seeds);
      v.delta = get_or(s, "delta", v.delta);
      v.n = get_or(s, "n", v.n);
      v.d = get_or(s, "d", v.d);
      if (s.contains("kinds")) {
        v.kinds.clear();
        for (const auto& k : s.at("kinds")) v.kinds.push_back(boundary_kind_from_string(k.get<std::string>()));
      }
      if (s.contains("systems")) {
        v.systems.clear();
        for (const auto& k : s.at("systems")) v.systems.push_back(system_from_string(k.get<std::string>()));
      }
      v.options.width = get_or(s, "width", v.options.width);
      v.options.B = get_or(s, "B", v.options.B);
      v.options.q = get_or(s, "q", v.options.q);
      v.options.panels = get_or(s, "panels", v.options.panels);
      v.options.lambda = get_or(s, "lambda", v.options.lambda);
      v.options.mu = get_or(s, "mu", v.options.mu);
      v.options.minimize_outer = get_or(s, "minimize_outer", v.options.minimize_outer);
    }
    if (j.contains("approximation")) {
      const auto& s = j.at("approximation");
      c.approximation.m = get_or(s, "m", c.approximation.m);
      c.approximation.k1 = get_or(s, "k1", c.approximation.k1);
      c.approximation.B = get_or(s, "B", c.approximation.B);
    }
    if (j.contains("rademacher")) {
      const auto& s = j.at("rademacher");
      auto& v = c.rademacher;
      v.d = get_or(s, "d", v.d);
      v.N = get_or(s, "N", v.N);
      v.sign_draws = get_or(s, "sign_draws", v.sign_draws);
      v.candidates = get_or(s, "candidates", v.candidates);
      v.x_draws = get_or(s, "x_draws", v.x_draws);
      v.gap_resamples = get_or(s, "gap_resamples", v.gap_resamples);
      v.gap_width = get_or(s, "gap_width", v.gap_width);
      if (s.contains("gap_problem")) v.gap_problem = parse_problem(s.at("gap_problem"), v.gap_problem);
    }
    if (j.contains("inequalities")) {
      const auto& s = j.at("inequalities");
      auto& v = c.inequalities;
      v.delta = get_or(s, "delta", v.delta);
      v.n = get_or(s, "n", v.n);
      v.ab_points = get_or(s, "ab_points", v.ab_points);
      v.ab_step = get_or(s, "ab_step", v.ab_step);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  require_list(c.m, "m", 1);
  require_list(c.N, "N", 1);
  if (c.N_hat < 0) throw ConfigError("N_hat must be >= 0");
  if (c.convergence.seeds < 1) throw ConfigError("convergence.seeds must be >= 1");
  if (c.convergence.partition < 2) throw ConfigError("convergence.partition must be >= 2");
  if (c.derivatives.points < 1 || !(c.derivatives.step > 0.0) || c.derivatives.width < 1) {
    throw ConfigError("derivatives settings out of range");
  }
  if (c.coercivity.trials < 1 || c.coercivity.seeds < 1 || !(c.coercivity.delta > 0.0 && c.coercivity.delta < 1.0)) {
    throw ConfigError("coercivity settings out of range");
  }
  require_list(c.coercivity.n, "coercivity.n", 1);
  require_list(c.coercivity.d, "coercivity.d", 1);
  require_list(c.approximation.m, "approximation.m", 2);
  require_list(c.approximation.k1, "approximation.k1", 1);
  require_list(c.rademacher.d, "rademacher.d", 1);
  require_list(c.rademacher.N, "rademacher.N", 1);
  require_list(c.inequalities.n, "inequalities.n", 1);
  if (c.inequalities.ab_points < 1) throw ConfigError("inequalities.ab_points must be >= 1");
  for (double dl : c.inequalities.delta) {
    if (!(dl > 0.0 && dl < 1.0)) throw ConfigError("inequalities.delta entries must lie in (0, 1)");
  }
  return c;
}

std::string config_json(const ExperimentConfig& c) {
  ojson j;
  j["problem"] = problem_json(c.problem);
  j["system"] = to_string(c.system);
  j["m"] = c.m;
  j["N"] = c.N;
  j["N_hat"] = c.N_hat;
  j["seed"] = c.seed;
  ojson o;
  o["method"] = method_name(c.optimizer.method);
  o["step_size"] = c.optimizer.step_size;
  o["beta1"] = c.optimizer.beta1;
  o["beta2"] = c.optimizer.beta2;
  o["epsilon"] = c.optimizer.epsilon;
  o["steps"] = c.optimizer.steps;
  o["resample"] = c.optimizer.resample;
  o["log_interval"] = c.optimizer.log_interval;
  j["optimizer"] = o;
  j["convergence"] = {{"mode", c.convergence.mode}, {"seeds", c.convergence.seeds},
                      {"partition", c.convergence.partition}};
  j["derivatives"] = {{"points", c.derivatives.points}, {"step", c.derivatives.step},
                      {"tolerance", c.derivatives.tolerance}, {"width", c.derivatives.width}};
  ojson co;
  co["trials"] = c.coercivity.trials;
  co["seeds"] = c.coercivity.seeds;
  co["delta"] = c.coercivity.delta;
  co["n"] = c.coercivity.n;
  co["d"] = c.coercivity.d;
  auto kinds = ojson::array();
  for (auto k : c.coercivity.kinds) kinds.push_back(kind_name(k));
  co["kinds"] = kinds;
  auto systems = ojson::array();
  for (auto s : c.coercivity.systems) systems.push_back(to_string(s));
  co["systems"] = systems;
  co["width"] = c.coercivity.options.width;
  co["B"] = c.coercivity.options.B;
  co["q"] = c.coercivity.options.q;
  co["panels"] = c.coercivity.options.panels;
  co["lambda"] = c.coercivity.options.lambda;
  co["mu"] = c.coercivity.options.mu;
  co["minimize_outer"] = c.coercivity.options.minimize_outer;
  j["coercivity"] = co;
  j["approximation"] = {{"m", c.approximation.m}, {"k1", c.approximation.k1}, {"B", c.approximation.B}};
  ojson r;
  r["d"] = c.rademacher.d;
  r["N"] = c.rademacher.N;
  r["sign_draws"] = c.rademacher.sign_draws;
  r["candidates"] = c.rademacher.candidates;
  r["x_draws"] = c.rademacher.x_draws;
  r["gap_resamples"] = c.rademacher.gap_resamples;
  r["gap_width"] = c.rademacher.gap_width;
  r["gap_problem"] = problem_json(c.rademacher.gap_problem);
  j["rademacher"] = r;
  j["inequalities"] = {{"delta", c.inequalities.delta}, {"n", c.inequalities.n},
                       {"ab_points", c.inequalities.ab_points}, {"ab_step", c.inequalities.ab_step}};
  return j.dump();
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{
      "train", "study-convergence", "verify-derivatives", "verify-coercivity",
      "verify-approximation", "estimate-rademacher", "check-inequalities"};
  return names;
}

namespace {

struct Output {
  std::map<std::string, std::string> files;
  ojson results;
  bool checks_ok = true;
  ojson checks = ojson::array();

  void check(const std::string& name, bool ok, double value, double threshold) {
    checks.push_back({{"name", name}, {"pass", ok}, {"value", value}, {"threshold", threshold}});
    checks_ok = checks_ok && ok;
  }
};

ojson loss_json(const LossBreakdown& L) {
  return {{"interior", L.interior}, {"boundary", L.boundary}, {"mean_penalty", L.mean_penalty},
          {"total", L.total}};
}

ojson errors_json(const ErrorNorms& e) {
  return {{"h1_sq", e.h1_sq}, {"hdiv_sq", e.hdiv_sq}, {"ref_h1_sq", e.ref_h1_sq}, {"total", e.total()}};
}

void cmd_train(const ExperimentConfig& c, const std::string& hash, Output& out) {
  const auto res = train(c.problem, c.system, c.m.front(), c.N.front(), c.N_hat, c.optimizer);
  CsvTable log({"step", "interior", "boundary", "mean_penalty", "total"});
  for (const auto& tp : res.report.trajectory) {
    log.add_row(row({tp.step, tp.loss.interior, tp.loss.boundary, tp.loss.mean_penalty, tp.loss.total}));
  }
  out.files["train_log.csv"] = log.render(hash);
  out.files["network.json"] = to_json(res.net) + "\n";
  const auto& r = res.report;
  out.results = {{"seed", r.seed},
                 {"steps_run", r.steps_run},
                 {"diverged", r.diverged},
                 {"initial_loss", loss_json(r.initial)},
                 {"final_loss", loss_json(r.final_loss)},
                 {"loss_decrease", r.initial.total / r.final_loss.total},
                 {"errors", errors_json(r.errors)},
                 {"relative_h1", r.relative_h1},
                 {"wall_seconds", r.wall_seconds}};
}

void cmd_convergence(const ExperimentConfig& c, const std::string& hash, Output& out) {
  CsvTable t({"mode", "m", "N", "seed", "error_sq", "relative_h1", "final_loss", "diverged"});
  const bool approx = c.convergence.mode == "approximation";
  std::map<std::pair<int, int>, std::vector<double>> cells;
  for (int m : c.m) {
    for (int N : approx ? std::vector<int>{0} : c.N) {
      for (int s = 0; s < c.convergence.seeds; ++s) {
        const std::uint64_t seed = derive_seed(c.seed, static_cast<std::uint64_t>(s), 11);
        if (approx) {
          const auto a = approximate_barron(c.problem.u_star, m, seed, c.convergence.partition);
          const double e2 = a.h1_error * a.h1_error;
          t.add_row(row({"approximation", m, N, seed, e2, "nan", "nan", false}));
          cells[{m, N}].push_back(e2);
          continue;
        }
        OptimizerConfig opt = c.optimizer;
        opt.seed = seed;
        const auto res = train(c.problem, c.system, m, N, c.N_hat, opt);
        const double e2 = res.report.diverged ? std::nan("") : res.report.errors.total();
        t.add_row(row({"train", m, N, seed, e2, res.report.relative_h1, res.report.final_loss.total,
                       res.report.diverged}));
        cells[{m, N}].push_back(e2);
      }
    }
  }
  out.files["convergence.csv"] = t.render(hash);

  auto fit = [&](bool along_m) {
    std::vector<double> xs, ys;
    if (along_m) {
      const int N = approx ? 0 : c.N.back();
      for (int m : c.m) {
        xs.push_back(m);
        ys.push_back(median(cells[{m, N}]));
      }
    } else {
      for (int N : c.N) {
        xs.push_back(N);
        ys.push_back(median(cells[{c.m.back(), N}]));
      }
    }
    ojson j;
    j["x"] = xs;
    j["median_error_sq"] = ys;
    bool finite = xs.size() >= 2;
    for (double y : ys) finite = finite && std::isfinite(y) && y > 0.0;
    j["slope"] = finite ? loglog_slope(xs, ys) : std::nan("");
    return j;
  };
  out.results["mode"] = c.convergence.mode;
  out.results["cells"] = t.size();
  out.results["along_m"] = fit(true);
  if (!approx) out.results["along_N"] = fit(false);
}

void cmd_derivatives(const ExperimentConfig& c, const std::string& hash, Output& out) {
  const auto& s = c.derivatives;
  const auto checks = verify_derivatives(s.points, s.step, s.tolerance, c.seed, s.width);
  CsvTable t({"k", "d", "p", "m", "quantity", "points", "max_rel_error", "failures"});
  int failures = 0;
  double worst = 0.0;
  for (const auto& ch : checks) {
    t.add_row(row({ch.k, ch.d, ch.p, ch.m, ch.quantity, ch.points, ch.max_rel_error, ch.failures}));
    failures += ch.failures;
    worst = std::max(worst, ch.max_rel_error);
  }
  out.files["derivatives.csv"] = t.render(hash);
  out.results = {{"configurations", checks.size()}, {"failures", failures}, {"max_rel_error", worst}};
  out.check("fd_failures", failures == 0, failures, 0);
}

void cmd_coercivity(const ExperimentConfig& c, const std::string& hash, Output& out) {
  const auto& s = c.coercivity;
  CsvTable t({"system", "kind", "n", "d", "seed_index", "trial", "seed", "B_value", "norm_sum", "lhs",
              "ratio", "ratio_scaled", "energy", "phi0_h1"});
  auto summary = ojson::array();
  bool positive = true;
  double scale_dev = 0.0;
  double worst_spread = 0.0;
  for (System sys : s.systems) {
    for (BoundaryKind kind : s.kinds) {
      for (int n : s.n) {
        for (int d : s.d) {
          std::vector<double> mins;
          ojson cfg{{"system", to_string(sys)}, {"kind", kind_name(kind)}, {"n", n}, {"d", d}};
          for (int si = 0; si < s.seeds; ++si) {
            const std::uint64_t seed = derive_seed(c.seed, static_cast<std::uint64_t>(si), 12);
            const auto rep = coercivity_study(kind, sys, n, d, s.trials, s.delta, seed, s.options);
            for (const auto& tr : rep.trials) {
              t.add_row(row({to_string(sys), kind_name(kind), n, d, si, tr.trial, tr.seed, tr.B_value,
                             tr.norm_sum, tr.lhs, tr.ratio, tr.ratio_scaled, tr.energy, tr.phi0_h1}));
            }
            mins.push_back(rep.min_ratio);
            positive = positive && rep.all_positive;
            scale_dev = std::max(scale_dev, rep.max_scale_deviation);
            cfg["median_ratio_" + std::to_string(si)] = rep.median_ratio;
          }
          const double lo = *std::min_element(mins.begin(), mins.end());
          const double hi = *std::max_element(mins.begin(), mins.end());
          const double spread = hi > 0.0 ? (hi - lo) / hi : std::nan("");
          worst_spread = std::max(worst_spread, std::isfinite(spread) ? spread : 1.0);
          cfg["min_ratio"] = mins;
          cfg["min_spread"] = spread;
          summary.push_back(cfg);
        }
      }
    }
  }
  out.files["coercivity.csv"] = t.render(hash);
  out.results = {{"configs", summary},
                 {"all_positive", positive},
                 {"max_scale_deviation", scale_dev},
                 {"max_min_spread", worst_spread}};
  out.check("all_ratios_positive", positive, positive ? 1.0 : 0.0, 1.0);
  out.check("scale_invariance", scale_dev <= 1e-10, scale_dev, 1e-10);
  if (s.seeds > 1) out.check("min_ratio_seed_spread", worst_spread <= 0.2, worst_spread, 0.2);
}

void cmd_approximation(const ExperimentConfig& c, const std::string& hash, Output& out) {
  const auto& s = c.approximation;
  CsvTable t({"k1", "m", "h1_error", "bound_6B_sqrt_m", "requ_h1_error", "bound_5B_sqrt_m",
              "coeff_l1", "bound_8B"});
  auto slopes = ojson::object();
  for (int k1 : s.k1) {
    const CosProfile g(s.B, k1, 0, s.B);
    std::vector<double> ms, e_requ, e_recu;
    for (int m : s.m) {
      const ShallowNetwork ghat = requ_interpolant(g, m);
      const ShallowNetwork gm = recu_from_requ(ghat, 1.0 / m);
      const double er = h1_error_1d(ghat, g, m);
      const double ec = h1_error_1d(gm, g, m);
      double l1 = 0.0;
      for (double a : requ_coefficients(ghat)) l1 += std::abs(a);
      const double b5 = 5.0 * s.B / std::sqrt(m);
      const double b6 = 6.0 * s.B / std::sqrt(m);
      t.add_row(row({k1, m, ec, b6, er, b5, l1, 8.0 * s.B}));
      const std::string tag = "k1=" + std::to_string(k1) + ",m=" + std::to_string(m);
      out.check("requ_bound " + tag, er <= b5, er, b5);
      out.check("recu_bound " + tag, ec <= b6, ec, b6);
      out.check("coeff_bound " + tag, l1 <= 8.0 * s.B, l1, 8.0 * s.B);
      ms.push_back(m);
      e_requ.push_back(er);
      e_recu.push_back(ec);
    }
    const double sr = loglog_slope(ms, e_requ);
    const double sc = loglog_slope(ms, e_recu);
    slopes[std::to_string(k1)] = {{"requ", sr}, {"recu", sc}};
    if (ms.size() >= 2) {
      out.check("requ_slope k1=" + std::to_string(k1), sr <= -0.45, sr, -0.45);
      out.check("recu_slope k1=" + std::to_string(k1), sc <= -0.45, sc, -0.45);
    }
  }
  out.files["approx_rates.csv"] = t.render(hash);
  out.results = {{"slopes", slopes}};
}

void cmd_rademacher(const ExperimentConfig& c, const std::string& hash, Output& out) {
  const auto& s = c.rademacher;
  CsvTable t({"d", "N", "estimate", "bound", "exact_sup"});
  bool ok = true;
  double worst = 0.0;
  for (int d : s.d) {
    for (int N : s.N) {
      const std::uint64_t seed = derive_seed(c.seed, static_cast<std::uint64_t>(d) * 1000003ULL + N, 13);
      const double est = empirical_rademacher(linear_class(d), N, s.sign_draws, s.candidates, seed, s.x_draws);
      const double exact = linear_class_rademacher_exact(d, N, s.sign_draws, seed, s.x_draws);
      const double bound = linear_class_bound(d, N);
      t.add_row(row({d, N, est, bound, exact}));
      ok = ok && est <= bound;
      worst = std::max(worst, est / bound);
    }
  }
  out.files["rademacher.csv"] = t.render(hash);
  out.check("rademacher_bound", ok, worst, 1.0);

  const ProblemSpec& gp = s.gap_problem;
  const System sys = System::first_order;
  const int p = FieldBundle::width_for(sys, gp.n, gp.d);
  const double B = barron_norm(gp.u_star, barron_order_for(sys, gp.n));
  const ShallowNetwork net = init_network(s.gap_width, gp.d, p, activation_for(sys), B,
                                          derive_seed(c.seed, 0, 14));
  const FieldBundle bundle = network_bundle(sys, gp.n, net);
  const QuadGrid grid = gp.d <= 2 ? quad_grid(gp.d, 8, gp.d == 1 ? 64 : 16) : quad_grid(gp.d, 4, 6);
  const auto gap = generalization_gap_study(bundle, problem_data(gp), s.N, s.gap_resamples,
                                            derive_seed(c.seed, 1, 14), grid);
  CsvTable g({"N", "rms_gap", "median_gap"});
  for (const auto& r : gap.rows) g.add_row(row({r.N, r.rms_gap, r.median_gap}));
  out.files["gap.csv"] = g.render(hash);
  out.results = {{"max_estimate_over_bound", worst},
                 {"gap_expected_loss", gap.expected},
                 {"gap_slope", gap.slope}};
  if (gap.rows.size() >= 2) {
    out.check("gap_slope", std::abs(gap.slope + 0.5) <= 0.15, gap.slope, -0.5);
  }
}

void cmd_inequalities(const ExperimentConfig& c, const std::string& hash, Output& out) {
  const auto& s = c.inequalities;
  std::vector<double> grid;
  for (int i = 0; i < s.ab_points; ++i) grid.push_back(i * s.ab_step);
  CsvTable t({"delta", "n", "k", "points", "violations"});
  long total = 0;
  for (double delta : s.delta) {
    const PerturbationWeights w(delta, 2 * *std::max_element(s.n.begin(), s.n.end()) + 1);
    for (int n : s.n) {
      for (int k = 2; k <= 2 * n; ++k) {
        long fails = 0;
        for (double a : grid) {
          for (double b : grid) fails += !young_holds(w, n, k, a, b);
        }
        t.add_row(row({delta, n, k, static_cast<long>(grid.size() * grid.size()), fails}));
        total += fails;
      }
    }
  }
  out.files["young.csv"] = t.render(hash);
  out.results = {{"violations", total}};
  out.check("young_violations", total == 0, static_cast<double>(total), 0.0);
}

}  // namespace

RunResult run_command(const std::string& command, const ExperimentConfig& cfg,
                      const std::filesystem::path& out_dir) {
  RunResult result;
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    result.exit_code = 2;
    result.error = "unknown command: " + command;
    return result;
  }
  const std::string canonical = config_json(cfg);
  const std::string hash = hash_hex(command + "\n" + canonical);
  set_threads(cfg.jobs);
  Output out;
  try {
    if (command == "train") cmd_train(cfg, hash, out);
    else if (command == "study-convergence") cmd_convergence(cfg, hash, out);
    else if (command == "verify-derivatives") cmd_derivatives(cfg, hash, out);
    else if (command == "verify-coercivity") cmd_coercivity(cfg, hash, out);
    else if (command == "verify-approximation") cmd_approximation(cfg, hash, out);
    else if (command == "estimate-rademacher") cmd_rademacher(cfg, hash, out);
    else cmd_inequalities(cfg, hash, out);

    ojson report;
    report["command"] = command;
    report["build"] = kBuildId;
    report["config_hash"] = hash;
    report["config"] = ojson::parse(canonical);
    report["results"] = out.results;
    report["checks"] = out.checks;
    report["passed"] = out.checks_ok;
    result.report_json = report.dump(2) + "\n";
    out.files["report.json"] = result.report_json;

    std::filesystem::create_directories(out_dir);
    for (const auto& [name, content] : out.files) write_file_atomic(out_dir / name, content);
    result.files = std::move(out.files);
    result.exit_code = out.checks_ok ? 0 : 3;
    if (!out.checks_ok) result.error = "verification check failed";
  } catch (const std::invalid_argument& e) {
    result.exit_code = 2;
    result.error = e.what();
  } catch (const std::exception& e) {
    result.exit_code = 1;
    result.error = e.what();
  }
  return result;
}

}  // namespace mim

// maxop — command-line front end for the maximal-operator toolkit.
// Thin wrappers only: every subcommand loads inputs, calls one library
// entry point, and serializes the result (GRIDFN v1 grids, JSON reports,
// flat CSV tables). Exit codes: 0 success / verdict pass, 1 verdict fail,
// 2 usage error, 3 I/O or format error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <maxop/maxop.hpp>

namespace {

using nlohmann::ordered_json;

maxop::BasisKind parse_basis(const std::string& token) {
  if (token == "dyadic") return maxop::BasisKind::Dyadic;
  if (token == "cubes") return maxop::BasisKind::Cubes;
  if (token == "rects") return maxop::BasisKind::Rectangles;
  throw std::invalid_argument("unknown basis '" + token + "' (expected dyadic|cubes|rects)");
}

maxop::GridFunction load_required(const std::string& path, const char* flag) {
  if (path.empty()) throw std::invalid_argument(std::string("missing required ") + flag);
  return maxop::load_grid(path);
}

void emit_json(const ordered_json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw maxop::IoError("cannot open '" + out_path + "' for writing");
  out << text;
  if (!out) throw maxop::IoError("failed writing '" + out_path + "'");
}

void emit_text(const std::string& text, const std::string& out_path) {
  std::ofstream out(out_path);
  if (!out) throw maxop::IoError("cannot open '" + out_path + "' for writing");
  out << text;
  if (!out) throw maxop::IoError("failed writing '" + out_path + "'");
}

maxop::Domain make_domain(int dim, std::int64_t n, double h) {
  if (dim == 1) return maxop::Domain::line(n, h);
  if (dim == 2) return maxop::Domain::square(n, n, h);
  if (dim == 3) return maxop::Domain::cube3(n, n, n, h);
  throw std::invalid_argument("dim must be 1, 2 or 3");
}

// ---- compute ------------------------------------------------------------------

struct ComputeArgs {
  std::string op, basis = "dyadic", in, sigma, out;
  double r = 0.0;
  bool r_given = false;
};

int run_compute(const ComputeArgs& a) {
  const maxop::GridFunction f = load_required(a.in, "--in");
  std::optional<maxop::GridFunction> sigma;
  if (!a.sigma.empty()) sigma = maxop::load_grid(a.sigma);
  const maxop::Basis basis{parse_basis(a.basis), f.domain};

  maxop::GridFunction field(f.domain);
  if (a.op == "min") {
    if (sigma) throw std::invalid_argument("--sigma is not accepted with --op min");
    field = maxop::minimal_operator(basis, f);
  } else {
    maxop::MeanKind kind = maxop::MeanKind::arithmetic();
    if (a.op == "m") {
      kind = maxop::MeanKind::arithmetic();
    } else if (a.op == "m-1") {
      kind = maxop::MeanKind::harmonic();
    } else if (a.op == "m0") {
      kind = maxop::MeanKind::geometric();
    } else if (a.op == "m-r") {
      if (!a.r_given || !(a.r > 0.0)) throw std::invalid_argument("--op m-r requires --r > 0");
      kind = maxop::MeanKind::power(-a.r);
    } else {
      throw std::invalid_argument("unknown --op '" + a.op + "' (expected m|m-1|m0|m-r|min)");
    }
    field = maxop::maximal_auto(kind, basis, f, sigma ? &*sigma : nullptr);
  }
  maxop::save_grid(field, a.out);
  return 0;
}

// ---- constants ------------------------------------------------------------------

struct ConstantsArgs {
  std::string which, w, u, sigma, v, basis = "dyadic", out;
  double p = 2.0, r = 0.5, alpha = 0.5;
  std::int64_t trials = 200, max_scale = 0;
  std::uint64_t seed = 1;
  bool exhaustive = false;
};

int run_constants(const ConstantsArgs& a) {
  auto basis_for = [&](const maxop::Domain& d) { return maxop::Basis{parse_basis(a.basis), d}; };
  maxop::ConstantReport rep;
  if (a.which == "ap") {
    const auto w = load_required(a.w, "--w");
    rep = maxop::ap_constant(w, basis_for(w.domain), a.p);
  } else if (a.which == "ainfty") {
    const auto w = load_required(a.w, "--w");
    rep = maxop::ainfty_constant(w, basis_for(w.domain));
  } else if (a.which == "doubling") {
    const auto w = load_required(a.w, "--w");
    rep = maxop::doubling_constant(w, a.max_scale);
  } else if (a.which == "cond-a") {
    const auto w = load_required(a.w, "--w");
    rep = maxop::condition_a_estimate(w, basis_for(w.domain), a.alpha, a.trials, a.seed,
                                      a.exhaustive ? maxop::ConditionAMode::Exhaustive
                                                   : maxop::ConditionAMode::Sampled);
  } else if (a.which == "joint") {
    const auto u = load_required(a.u, "--u");
    const auto s = load_required(a.sigma, "--sigma");
    rep = maxop::joint_harmonic_constant(u, s, basis_for(u.domain), a.p);
  } else if (a.which == "bump-harmonic") {
    const auto u = load_required(a.u, "--u");
    const auto s = load_required(a.sigma, "--sigma");
    rep = maxop::bump_harmonic_constant(u, s, basis_for(u.domain), a.p, a.r);
  } else if (a.which == "bump-arith") {
    const auto u = load_required(a.u, "--u");
    const auto s = load_required(a.sigma, "--sigma");
    rep = maxop::bump_arithmetic_constant(u, s, basis_for(u.domain), a.p, a.r);
  } else if (a.which == "tw-ainfty") {
    const auto u = load_required(a.u, "--u");
    const std::string vpath = !a.v.empty() ? a.v : a.sigma;
    const auto v = load_required(vpath, "--v");
    rep = maxop::twoweight_ainfty_constant(u, v, basis_for(u.domain));
  } else {
    throw std::invalid_argument(
        "unknown --which '" + a.which +
        "' (expected ap|ainfty|doubling|cond-a|joint|bump-harmonic|bump-arith|tw-ainfty)");
  }
  emit_json(rep.to_json(), a.out);
  return 0;
}

// ---- testing --------------------------------------------------------------------

struct TestingArgs {
  std::string op, u, sigma, v, basis = "dyadic", out;
  double p = 1.0;
  std::int64_t budget = 64;
  std::uint64_t seed = 1;
};

int run_testing(const TestingArgs& a) {
  const auto u = load_required(a.u, "--u");
  const maxop::Basis basis{parse_basis(a.basis), u.domain};
  maxop::TestingReport rep;
  if (a.op == "m-1") {
    const auto s = load_required(!a.sigma.empty() ? a.sigma : a.v, "--sigma");
    rep = maxop::testing_constant_harmonic(u, s, basis, a.p, a.budget, a.seed);
  } else if (a.op == "m0") {
    const auto v = load_required(!a.v.empty() ? a.v : a.sigma, "--v");
    rep = maxop::testing_constant_geometric(u, v, basis, a.p, a.budget, a.seed);
  } else {
    throw std::invalid_argument("unknown --op '" + a.op + "' (expected m-1|m0)");
  }
  emit_json(rep.to_json(), a.out);
  return 0;
}

// ---- normest --------------------------------------------------------------------

struct NormestArgs {
  std::string op, u, sigma, basis = "dyadic", out;
  double p = 2.0, r = 0.0;
  bool r_given = false;
  std::int64_t trials = 200;
  std::uint64_t seed = 1;
};

int run_normest(const NormestArgs& a) {
  const auto u = load_required(a.u, "--u");
  const auto sigma = load_required(a.sigma, "--sigma");
  const maxop::Basis basis{parse_basis(a.basis), u.domain};
  maxop::MeanKind kind = maxop::MeanKind::arithmetic();
  if (a.op == "m") {
    kind = maxop::MeanKind::arithmetic();
  } else if (a.op == "m-1") {
    kind = maxop::MeanKind::harmonic();
  } else if (a.op == "m0") {
    kind = maxop::MeanKind::geometric();
  } else if (a.op == "m-r") {
    if (!a.r_given || !(a.r > 0.0)) throw std::invalid_argument("--op m-r requires --r > 0");
    kind = maxop::MeanKind::power(-a.r);
  } else {
    throw std::invalid_argument("unknown --op '" + a.op + "' (expected m|m-1|m0|m-r)");
  }
  const maxop::NormEstimate est =
      maxop::estimate_operator_norm(kind, u, sigma, basis, a.p, a.trials, a.seed);
  emit_json(est.to_json(), a.out);
  return 0;
}

// ---- experiment -------------------------------------------------------------------

struct ExperimentArgs {
  std::string name, basis, out, csv;
  int dim = 1;
  double p = 2.0, r = 0.5, alpha = 0.5;
  std::vector<std::int64_t> ladder;
  std::uint64_t seed = 1;
  std::int64_t trials = 0, budget = 32;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  maxop::ExperimentConfig cfg;
  cfg.name = a.name;
  cfg.dim = a.dim;
  if (!a.basis.empty()) cfg.basis = parse_basis(a.basis);
  cfg.p = a.p;
  cfg.r = a.r;
  cfg.alpha = a.alpha;
  cfg.ladder = a.ladder;
  cfg.seed = a.seed;
  cfg.trials = a.trials;
  cfg.union_budget = a.budget;

  const maxop::ExperimentResult res = maxop::run_experiment(cfg);
  emit_json(res.to_json(), a.out);
  if (!a.csv.empty()) emit_text(res.csv(), a.csv);
  return res.pass ? 0 : 1;
}

// ---- gen ------------------------------------------------------------------------

struct GenArgs {
  std::string family, out;
  int dim = 1;
  std::int64_t n = 0;
  double h = 1.0;
  double value = 1.0, a = 0.5, left = 1.0, right = 1.0, sigma_log = 1.0, eps = -1.0;
  std::vector<double> center;
  std::uint64_t seed = 1;
};

int run_gen(const GenArgs& g) {
  if (g.n < 1) throw std::invalid_argument("--n must be >= 1");
  const maxop::Domain d = make_domain(g.dim, g.n, g.h);
  ordered_json params = ordered_json::object();
  maxop::GridFunction w(d);
  if (g.family == "constant") {
    w = maxop::constant_weight(d, g.value);
    params["value"] = g.value;
  } else if (g.family == "power") {
    std::array<double, 3> center = maxop::domain_midpoint(d);
    if (!g.center.empty()) {
      if (g.center.size() != static_cast<std::size_t>(g.dim))
        throw std::invalid_argument("--center needs one coordinate per dimension");
      for (std::size_t i = 0; i < g.center.size(); ++i) center[i] = g.center[i];
    }
    w = maxop::power_weight(d, g.a, center);
    params["a"] = g.a;
    params["center"] = std::vector<double>(center.begin(), center.begin() + g.dim);
  } else if (g.family == "step") {
    w = maxop::step_weight(d, g.left, g.right);
    params["left"] = g.left;
    params["right"] = g.right;
  } else if (g.family == "lognormal") {
    w = maxop::lognormal_weight(d, g.sigma_log, g.seed);
    params["sigma_log"] = g.sigma_log;
    params["seed"] = g.seed;
  } else if (g.family == "non-ainfty") {
    const double eps =
        g.eps >= 0.0 ? g.eps : 1.0 / (static_cast<double>(g.n) * static_cast<double>(g.n));
    w = maxop::non_ainfty_weight(d, eps);
    params["eps"] = eps;
  } else {
    throw std::invalid_argument("unknown --family '" + g.family +
                                "' (expected constant|power|step|lognormal|non-ainfty)");
  }
  if (g.out.empty()) throw std::invalid_argument("missing required --out");
  maxop::save_grid(w, g.out);

  ordered_json meta;
  meta["family"] = g.family;
  meta["dim"] = g.dim;
  meta["n"] = g.n;
  meta["h"] = g.h;
  meta["params"] = params;
  std::vector<std::int64_t> shape(d.shape.begin(), d.shape.begin() + d.dim);
  meta["shape"] = shape;
  emit_json(meta, g.out + ".meta.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maxop: maximal operators, weight constants, testing conditions and experiments "
               "on power-of-two lattices"};
  app.require_subcommand(1);
  app.fallthrough();  // let subcommands hand --threads back to the main app
  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (default: MAXOP_THREADS or 1)");

  ComputeArgs ca;
  CLI::App* compute = app.add_subcommand("compute", "evaluate a maximal/minimal operator field");
  compute->add_option("--op", ca.op, "operator: m|m-1|m0|m-r|min")->required();
  CLI::Option* compute_r = compute->add_option("--r", ca.r, "exponent for --op m-r");
  compute->add_option("--basis", ca.basis, "dyadic|cubes|rects");
  compute->add_option("--in", ca.in, "input grid (GRIDFN v1 or CSV)")->required();
  compute->add_option("--sigma", ca.sigma, "weight grid for sigma-averages");
  compute->add_option("--out", ca.out, "output grid path")->required();

  ConstantsArgs ka;
  CLI::App* constants = app.add_subcommand("constants", "weight-condition constants");
  constants->add_option("--which", ka.which,
                        "ap|ainfty|doubling|cond-a|joint|bump-harmonic|bump-arith|tw-ainfty")
      ->required();
  constants->add_option("--w", ka.w, "weight grid (one-weight constants)");
  constants->add_option("--u", ka.u, "left weight grid");
  constants->add_option("--sigma", ka.sigma, "right weight grid");
  constants->add_option("--v", ka.v, "right weight grid (tw-ainfty)");
  constants->add_option("--basis", ka.basis, "dyadic|cubes|rects");
  constants->add_option("--p", ka.p, "integrability exponent");
  constants->add_option("--r", ka.r, "bump exponent");
  constants->add_option("--alpha", ka.alpha, "condition-A level in (0,1)");
  constants->add_option("--trials", ka.trials, "condition-A sample count");
  constants->add_option("--seed", ka.seed, "random seed");
  constants->add_option("--max-scale", ka.max_scale, "doubling: cap on the inner box side");
  constants->add_flag("--exhaustive", ka.exhaustive, "condition-A: enumerate all cell subsets");
  constants->add_option("--out", ka.out, "write JSON here instead of stdout");

  TestingArgs ta;
  CLI::App* testing = app.add_subcommand("testing", "testing-condition constants");
  testing->add_option("--op", ta.op, "m-1|m0")->required();
  testing->add_option("--u", ta.u, "left weight grid")->required();
  testing->add_option("--sigma", ta.sigma, "right weight grid (m-1)");
  testing->add_option("--v", ta.v, "right weight grid (m0)");
  testing->add_option("--p", ta.p, "integrability exponent");
  testing->add_option("--basis", ta.basis, "dyadic|cubes|rects");
  testing->add_option("--budget", ta.budget, "sampled unions beyond all single sets");
  testing->add_option("--seed", ta.seed, "random seed");
  testing->add_option("--out", ta.out, "write JSON here instead of stdout");

  NormestArgs na;
  CLI::App* normest = app.add_subcommand("normest", "empirical operator-norm lower bounds");
  normest->add_option("--op", na.op, "m|m-1|m0|m-r")->required();
  CLI::Option* normest_r = normest->add_option("--r", na.r, "exponent for --op m-r");
  normest->add_option("--u", na.u, "left weight grid")->required();
  normest->add_option("--sigma", na.sigma, "right weight grid")->required();
  normest->add_option("--p", na.p, "integrability exponent");
  normest->add_option("--basis", na.basis, "dyadic|cubes|rects");
  normest->add_option("--trials", na.trials, "candidate count");
  normest->add_option("--seed", na.seed, "random seed");
  normest->add_option("--out", na.out, "write JSON here instead of stdout");

  ExperimentArgs ea;
  CLI::App* experiment = app.add_subcommand("experiment", "resolution-ladder experiments");
  experiment->add_option("--name", ea.name, "experiment name")->required();
  experiment->add_option("--dim", ea.dim, "domain dimension (1-3)");
  experiment->add_option("--basis", ea.basis, "dyadic|cubes|rects (default per experiment)");
  experiment->add_option("--p", ea.p, "integrability exponent");
  experiment->add_option("--r", ea.r, "bump/ordering exponent in (0,1)");
  experiment->add_option("--alpha", ea.alpha, "condition-A level");
  experiment->add_option("--ladder", ea.ladder, "comma-separated grid sizes, powers of two")
      ->delimiter(',');
  experiment->add_option("--seed", ea.seed, "random seed");
  experiment->add_option("--trials", ea.trials, "candidates per estimate (0: default)");
  experiment->add_option("--budget", ea.budget, "testing-constant union budget");
  experiment->add_option("--out", ea.out, "write JSON here instead of stdout");
  experiment->add_option("--csv", ea.csv, "also write the flat CSV table here");

  GenArgs ga;
  CLI::App* gen = app.add_subcommand("gen", "generate gallery weights");
  gen->add_option("--family", ga.family, "constant|power|step|lognormal|non-ainfty")->required();
  gen->add_option("--n", ga.n, "cells per axis")->required();
  gen->add_option("--dim", ga.dim, "domain dimension (1-3)");
  gen->add_option("--mesh", ga.h, "mesh size");
  gen->add_option("--value", ga.value, "constant: the value");
  gen->add_option("--a", ga.a, "power: exponent of the distance");
  gen->add_option("--center", ga.center, "power: center coordinates (default: domain midpoint)")
      ->delimiter(',');
  gen->add_option("--left", ga.left, "step: value on the lower half");
  gen->add_option("--right", ga.right, "step: value on the upper half");
  gen->add_option("--sigma-log", ga.sigma_log, "lognormal: spread of log values");
  gen->add_option("--eps", ga.eps, "non-ainfty: value on the lower half (default 1/n^2)");
  gen->add_option("--seed", ga.seed, "random seed");
  gen->add_option("--out", ga.out, "output grid path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (threads > 0) maxop::set_thread_count(threads);
  ca.r_given = compute_r->count() > 0;
  na.r_given = normest_r->count() > 0;

  try {
    if (compute->parsed()) return run_compute(ca);
    if (constants->parsed()) return run_constants(ka);
    if (testing->parsed()) return run_testing(ta);
    if (normest->parsed()) return run_normest(na);
    if (experiment->parsed()) return run_experiment_cmd(ea);
    if (gen->parsed()) return run_gen(ga);
  } catch (const maxop::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const maxop::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

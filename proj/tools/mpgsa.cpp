// mpgsa: command-line front end.
//
//   mpgsa gen   --kind {critical,sgep,sfda} --out inst.mpgs
//   mpgsa solve --instance inst.mpgs --solver empgsa --out log.csv
//   mpgsa check --instance inst.mpgs --point x.mpgs
//   mpgsa exp1  --trials 10 --out exp1.csv
//   mpgsa exp2  --trials 50 --seed 7 --out exp2.csv
//
// Exit codes: 0 tolerance reached, 2 iteration cap, 3 solver failure,
// 1 usage or input error. Wall-clock timings go to <out>.meta.json so the
// reports themselves are reproducible byte for byte.

#include "mpgsa/experiments.hpp"
#include "mpgsa/instances.hpp"
#include "mpgsa/io.hpp"
#include "mpgsa/manifold.hpp"
#include "mpgsa/parallel.hpp"
#include "mpgsa/stationarity.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>

using namespace mpgsa;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitMaxIter = 2;
constexpr int kExitFailure = 3;

struct RunConfig {
  std::uint64_t seed = 0;
  int trials = 0;  // 0: per-command default
  std::string solver = "empgsa";
  std::string out;
  std::string format = "csv";
  std::optional<double> lambda;
  std::optional<long long> topk;
  int max_iter = 10000;
  double eta = 1e-8;
  double gamma = 0.5;
  double vtol_scale = 1e-8;
  std::size_t piece_cap = 0;  // 0: per-command default
  double sparsity_threshold = 1e-5;
  std::string instance;
  std::string point;
  std::string kind = "critical";
  long long n = 0;
  long long p = 0;
  double tol = 0.0;  // check: 0 means the solver's termination scale
};

// Config file values first; flags given on the command line override them.
struct Flags {
  CLI::Option* seed = nullptr;
  CLI::Option* trials = nullptr;
  CLI::Option* solver = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* format = nullptr;
  CLI::Option* max_iter = nullptr;
  CLI::Option* eta = nullptr;
  CLI::Option* instance = nullptr;
  CLI::Option* point = nullptr;
  CLI::Option* kind = nullptr;
  CLI::Option* n = nullptr;
  CLI::Option* p = nullptr;
  CLI::Option* tol = nullptr;
  CLI::Option* lambda = nullptr;
  CLI::Option* topk = nullptr;
};

void apply_config_file(const std::string& path, RunConfig& cfg,
                       const Flags& flags) {
  const KeyValueConfig kv = KeyValueConfig::load(path);
  auto unset = [](CLI::Option* o) { return o == nullptr || o->count() == 0; };
  for (const auto& [key, _] : kv.entries()) {
    static const char* known[] = {
        "seed",       "trials",     "solver", "out",       "format",
        "lambda",     "topk",       "max_iter", "eta",     "gamma",
        "vtol_scale", "piece_cap",  "sparsity_threshold",  "instance",
        "point",      "kind",       "n",      "p",         "tol"};
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw FormatError("unknown config key '" + key + "'");
  }
  if (auto v = kv.get_int("seed"); v && unset(flags.seed)) cfg.seed = *v;
  if (auto v = kv.get_int("trials"); v && unset(flags.trials)) cfg.trials = *v;
  if (auto v = kv.get_string("solver"); v && unset(flags.solver)) cfg.solver = *v;
  if (auto v = kv.get_string("out"); v && unset(flags.out)) cfg.out = *v;
  if (auto v = kv.get_string("format"); v && unset(flags.format)) cfg.format = *v;
  if (auto v = kv.get_double("lambda"); v && unset(flags.lambda)) cfg.lambda = *v;
  if (auto v = kv.get_int("topk"); v && unset(flags.topk)) cfg.topk = *v;
  if (auto v = kv.get_int("max_iter"); v && unset(flags.max_iter))
    cfg.max_iter = static_cast<int>(*v);
  if (auto v = kv.get_double("eta"); v && unset(flags.eta)) cfg.eta = *v;
  if (auto v = kv.get_double("gamma")) cfg.gamma = *v;
  if (auto v = kv.get_double("vtol_scale")) cfg.vtol_scale = *v;
  if (auto v = kv.get_int("piece_cap")) cfg.piece_cap = *v;
  if (auto v = kv.get_double("sparsity_threshold")) cfg.sparsity_threshold = *v;
  if (auto v = kv.get_string("instance"); v && unset(flags.instance))
    cfg.instance = *v;
  if (auto v = kv.get_string("point"); v && unset(flags.point)) cfg.point = *v;
  if (auto v = kv.get_string("kind"); v && unset(flags.kind)) cfg.kind = *v;
  if (auto v = kv.get_int("n"); v && unset(flags.n)) cfg.n = *v;
  if (auto v = kv.get_int("p"); v && unset(flags.p)) cfg.p = *v;
  if (auto v = kv.get_double("tol"); v && unset(flags.tol)) cfg.tol = *v;
}

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig s;
  s.gamma = cfg.gamma;
  s.max_iter = cfg.max_iter;
  s.eta = cfg.eta;
  s.vtol_scale = cfg.vtol_scale;
  s.seed = cfg.seed;
  if (cfg.piece_cap > 0) s.piece_cap = cfg.piece_cap;
  s.validate();
  return s;
}

int exit_code(Termination reason) {
  switch (reason) {
    case Termination::Tolerance: return kExitOk;
    case Termination::MaxIter: return kExitMaxIter;
    case Termination::LineSearchFailure: return kExitFailure;
  }
  return kExitFailure;
}

void emit(const RunConfig& cfg, const Table& table) {
  const std::string text = render_table(table, parse_table_format(cfg.format));
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    write_text(cfg.out, text);
  }
}

void emit_meta(const RunConfig& cfg, const json& meta) {
  if (cfg.out.empty()) return;
  write_text(cfg.out + ".meta.json", meta.dump(2) + "\n");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

Matrix load_point(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
    return read_matrix_csv(path);
  }
  const auto recs = read_records(path);
  for (const char* role : {"X", "XBAR", "X0"}) {
    if (const Record* r = find_record(recs, role)) return r->data;
  }
  throw FormatError(path + ": no X, XBAR or X0 record");
}

InstanceFile load_instance(const RunConfig& cfg) {
  if (cfg.instance.empty()) throw FormatError("--instance is required");
  InstanceFile file = read_instance(cfg.instance);
  if (cfg.lambda) file.instance.lambda = *cfg.lambda;
  if (cfg.topk) file.instance.K = *cfg.topk > 0 ? std::optional<Index>(*cfg.topk)
                                                : std::nullopt;
  file.instance.validate();
  return file;
}

// --- gen -------------------------------------------------------------------

int cmd_gen(const RunConfig& cfg) {
  if (cfg.out.empty()) throw FormatError("gen requires --out");
  InstanceFile file;
  file.seed = cfg.seed;
  json meta;
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.kind == "critical") {
    const Index n = cfg.n > 0 ? cfg.n : 100;
    const Index K = cfg.topk ? *cfg.topk : 3;
    const auto bundle =
        gen_critical_instance(n, K, cfg.lambda.value_or(1.2), cfg.seed);
    file.instance = bundle.instance();
    file.global_opt = bundle.global_opt;
    file.xbar = Matrix(bundle.xbar);
    file.x0 = perturbed_start(bundle, cfg.seed);
    meta["nnls_residual"] = bundle.nnls_residual;
    meta["attempts"] = bundle.attempts;
  } else if (cfg.kind == "sgep") {
    const Index n = cfg.n > 0 ? cfg.n : 30;
    const Index p = cfg.p > 0 ? cfg.p : 1;
    std::optional<Index> K;
    if (cfg.topk && *cfg.topk > 0) K = *cfg.topk;
    file.instance = random_sgep(n, p, cfg.lambda.value_or(0.0), K, cfg.seed);
    file.x0 = Stiefel(n, p).random_point(mix_seed(cfg.seed, 1));
  } else if (cfg.kind == "sfda") {
    const SfdaDataset data = gen_sfda(cfg.seed);
    file.instance.A = data.A;
    file.instance.B = data.B;
    file.instance.lambda = cfg.lambda.value_or(0.21);
    if (cfg.topk && *cfg.topk > 0) file.instance.K = *cfg.topk;
    file.instance.p = cfg.p > 0 ? cfg.p : 3;
    file.instance.validate();
    file.x0 = Stiefel(data.A.rows(), file.instance.p)
                  .random_point(mix_seed(cfg.seed, 1));
    if (cfg.format == "csv") {
      auto labelled = [](const Matrix& x, const std::vector<int>& labels) {
        Matrix m(x.rows(), x.cols() + 1);
        for (Index i = 0; i < x.rows(); ++i) m(i, 0) = labels[i];
        m.rightCols(x.cols()) = x;
        return m;
      };
      write_matrix_csv(cfg.out + ".train.csv",
                       labelled(data.train, data.train_labels));
      write_matrix_csv(cfg.out + ".test.csv",
                       labelled(data.test, data.test_labels));
    }
  } else {
    throw FormatError("unknown --kind '" + cfg.kind + "'");
  }
  write_instance(cfg.out, file);
  if (cfg.format == "csv") {
    write_matrix_csv(cfg.out + ".A.csv", file.instance.A);
    write_matrix_csv(cfg.out + ".B.csv", file.instance.B);
  }
  meta["generation_seconds"] = seconds_since(t0);
  emit_meta(cfg, meta);
  return kExitOk;
}

// --- solve -----------------------------------------------------------------

int cmd_solve(const RunConfig& cfg) {
  const InstanceFile file = load_instance(cfg);
  const SgepInstance& inst = file.instance;
  const Index n = inst.A.rows();
  const Matrix x0 = file.x0 && file.x0->cols() == inst.p
                        ? *file.x0
                        : Stiefel(n, inst.p).random_point(mix_seed(cfg.seed, 1));
  SolverConfig sc = solver_config(cfg);
  sc.t_rule = sgep_stepsize_rule(inst);
  const CompositeProblem problem = build_sgep(inst);

  const bool enhanced = cfg.solver == "empgsa";
  if (!enhanced && cfg.solver != "mpgsa") {
    throw FormatError("unknown --solver '" + cfg.solver + "'");
  }
  if (enhanced && !inst.K) {
    throw FormatError("empgsa needs a top-K term (--topk)");
  }
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult res;
  try {
    res = enhanced ? empgsa_solve(problem, x0, sc) : mpgsa_solve(problem, x0, sc);
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitFailure;
  }
  const double solve_seconds = seconds_since(t0);
  emit(cfg, iterate_table(res.log));

  json meta;
  meta["solve_seconds"] = solve_seconds;
  json per_iter = json::array();
  for (const IterateRecord& r : res.log) per_iter.push_back(r.seconds);
  meta["iteration_seconds"] = per_iter;
  emit_meta(cfg, meta);
  if (!cfg.out.empty()) {
    write_records(cfg.out + ".x.mpgs", {{"X", res.x}});
  }

  std::ostream& os = cfg.out.empty() ? std::cerr : std::cout;
  char line[256];
  std::snprintf(line, sizeof line,
                "%s: F=%.12g iterations=%d reason=%s time=%.3fs sparsity=%.4f "
                "residual=%.3e",
                enhanced ? "EMPGSA" : "MPGSA", res.F, res.iterations,
                to_string(res.reason).c_str(), solve_seconds,
                sparsity(res.x, cfg.sparsity_threshold), res.stationarity);
  os << line;
  if (file.global_opt) {
    std::snprintf(line, sizeof line, " gap=%.3e", res.F - *file.global_opt);
    os << line;
  }
  os << "\n";
  return exit_code(res.reason);
}

// --- check -----------------------------------------------------------------

int cmd_check(const RunConfig& cfg) {
  const InstanceFile file = load_instance(cfg);
  const SgepInstance& inst = file.instance;
  if (cfg.point.empty()) throw FormatError("check requires --point");
  const Matrix x = load_point(cfg.point);
  if (x.rows() != inst.A.rows() || x.cols() != inst.p) {
    throw FormatError("point has shape " + std::to_string(x.rows()) + "x" +
                      std::to_string(x.cols()) + ", instance expects " +
                      std::to_string(inst.A.rows()) + "x" +
                      std::to_string(inst.p));
  }
  const CompositeProblem problem = build_sgep(inst);
  const double t = std::clamp(sgep_stepsize_rule(inst)(x), 1e-6, 1e6);
  StationarityOptions opts;
  opts.eta = cfg.eta;
  opts.piece_cap = cfg.piece_cap > 0 ? cfg.piece_cap : 10000;
  const auto t0 = std::chrono::steady_clock::now();
  const StationarityReport rep = check_stationarity(problem, x, t, opts);
  const double tol = cfg.tol > 0.0
                         ? cfg.tol
                         : std::sqrt(cfg.vtol_scale * double(x.size()));

  const bool critical = rep.critical_residual <= tol;
  std::cout << "critical: " << (critical ? "yes" : "no");
  if (rep.lifted_b_residual) {
    std::cout << ", lifted-B: " << (*rep.lifted_b_residual <= tol ? "yes" : "no");
  }
  std::cout << "\n";
  char line[160];
  std::snprintf(line, sizeof line,
                "critical_residual=%.6e lifted_b_residual=%s t=%.6g "
                "active_pieces=%zu tol=%.3e\n",
                rep.critical_residual,
                rep.lifted_b_residual
                    ? format_double(*rep.lifted_b_residual).c_str()
                    : "n/a",
                rep.t, rep.active_pieces, tol);
  std::cout << line;

  json report;
  report["critical_residual"] = rep.critical_residual;
  report["lifted_b_residual"] =
      rep.lifted_b_residual ? json(*rep.lifted_b_residual) : json(nullptr);
  report["t"] = rep.t;
  report["active_pieces"] = rep.active_pieces;
  report["tolerance"] = tol;
  report["critical"] = critical;
  if (rep.lifted_b_residual) {
    report["lifted_b_stationary"] = *rep.lifted_b_residual <= tol;
  }
  if (!cfg.out.empty()) {
    write_text(cfg.out, report.dump(2) + "\n");
    emit_meta(cfg, json{{"check_seconds", seconds_since(t0)}});
  }
  return kExitOk;
}

// --- experiments -----------------------------------------------------------

int cmd_exp1(const RunConfig& cfg) {
  Exp1Config ec;
  ec.solver = solver_config(cfg);
  if (cfg.lambda) ec.lambda_partial = *cfg.lambda;
  if (cfg.topk) ec.K = *cfg.topk;
  if (cfg.p > 0) ec.p = cfg.p;
  ec.sparsity_threshold = cfg.sparsity_threshold;
  const int trials = cfg.trials > 0 ? cfg.trials : 10;

  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_exp1(ec, cfg.seed, trials);
  const double total = seconds_since(t0);

  Table t;
  t.columns = {"trial", "seed", "algorithm", "F", "accuracy", "sparsity",
               "iterations", "reason", "descent_ok"};
  json meta;
  meta["total_seconds"] = total;
  json per = json::array();
  int failures = 0;
  struct Acc { double F = 0, acc = 0, sp = 0, it = 0; };
  Acc acc[3];
  const char* names[3] = {"MPGSA-l1", "MPGSA-partial", "EMPGSA-partial"};
  for (const Exp1Trial& tr : rows) {
    const AlgoOutcome* outs[3] = {&tr.mpgsa_l1, &tr.mpgsa_partial,
                                  &tr.empgsa_partial};
    json tm;
    tm["trial"] = tr.trial;
    tm["generation_seconds"] = tr.generation_seconds;
    for (int a = 0; a < 3; ++a) {
      const AlgoOutcome& o = *outs[a];
      t.rows.push_back({(long long)tr.trial, (long long)tr.seed, o.name, o.F,
                        o.accuracy, o.sparsity, (long long)o.iterations,
                        o.failed() ? std::string("error") : to_string(o.reason),
                        o.descent_ok});
      acc[a].F += o.F;
      acc[a].acc += o.accuracy;
      acc[a].sp += o.sparsity;
      acc[a].it += o.iterations;
      tm[o.name + "_seconds"] = o.seconds;
      if (o.failed()) tm[o.name + "_error"] = o.error;
      if (o.failed() || o.reason == Termination::LineSearchFailure) ++failures;
    }
    per.push_back(tm);
  }
  const double m = double(std::max<std::size_t>(rows.size(), 1));
  for (int a = 0; a < 3; ++a) {
    t.rows.push_back({std::string("mean"), std::string(""),
                      std::string(names[a]), acc[a].F / m, acc[a].acc / m,
                      acc[a].sp / m, acc[a].it / m, std::string(""),
                      std::string("")});
  }
  meta["trials"] = per;
  emit(cfg, t);
  emit_meta(cfg, meta);
  return failures > 0 ? kExitFailure : kExitOk;
}

int cmd_exp2(const RunConfig& cfg) {
  const Index n = cfg.n > 0 ? cfg.n : 100;
  const Index K = cfg.topk ? *cfg.topk : 3;
  Exp2Config ec = default_exp2_config(n, K, cfg.lambda.value_or(1.2));
  const std::size_t cap = ec.solver.piece_cap;
  ec.solver = solver_config(cfg);
  ec.solver.piece_cap = cfg.piece_cap > 0 ? cfg.piece_cap : cap;
  ec.sparsity_threshold = cfg.sparsity_threshold;
  const int trials = cfg.trials > 0 ? cfg.trials : 50;

  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_exp2(ec, cfg.seed, trials);
  const double total = seconds_since(t0);

  Table t;
  t.columns = {"trial",          "seed",           "global_opt",
               "F_mpgsa",        "F_empgsa",       "optimum_mpgsa",
               "optimum_empgsa", "iter_mpgsa",     "iter_empgsa",
               "sparsity_mpgsa", "sparsity_empgsa", "descent_ok"};
  json meta;
  meta["total_seconds"] = total;
  json per = json::array();
  double sums[9] = {};
  int failures = 0;
  for (const Exp2Trial& tr : rows) {
    t.rows.push_back({(long long)tr.trial, (long long)tr.seed, tr.global_opt,
                      tr.mpgsa.F, tr.empgsa.F, tr.mpgsa_optimal,
                      tr.empgsa_optimal, (long long)tr.mpgsa.iterations,
                      (long long)tr.empgsa.iterations, tr.mpgsa.sparsity,
                      tr.empgsa.sparsity,
                      tr.mpgsa.descent_ok && tr.empgsa.descent_ok});
    const double vals[9] = {tr.global_opt,
                            tr.mpgsa.F,
                            tr.empgsa.F,
                            tr.mpgsa_optimal ? 1.0 : 0.0,
                            tr.empgsa_optimal ? 1.0 : 0.0,
                            double(tr.mpgsa.iterations),
                            double(tr.empgsa.iterations),
                            tr.mpgsa.sparsity,
                            tr.empgsa.sparsity};
    for (int j = 0; j < 9; ++j) sums[j] += vals[j];
    for (const AlgoOutcome* o : {&tr.mpgsa, &tr.empgsa}) {
      if (o->failed() || o->reason == Termination::LineSearchFailure)
        ++failures;
    }
    per.push_back(json{{"trial", tr.trial},
                       {"generation_seconds", tr.generation_seconds},
                       {"mpgsa_seconds", tr.mpgsa.seconds},
                       {"empgsa_seconds", tr.empgsa.seconds}});
  }
  const double m = double(std::max<std::size_t>(rows.size(), 1));
  std::vector<Cell> mean = {std::string("mean"), std::string("")};
  for (double s : sums) mean.push_back(s / m);
  mean.push_back(std::string(""));
  t.rows.push_back(mean);
  meta["trials"] = per;
  emit(cfg, t);
  emit_meta(cfg, meta);
  return failures > 0 ? kExitFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manifold proximal-gradient-subgradient solvers"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  RunConfig cfg;
  Flags flags;
  app.add_option("--config", config_path, "typed key-value config file")
      ->check(CLI::ExistingFile);
  flags.seed = app.add_option("--seed", cfg.seed, "base seed");
  flags.trials = app.add_option("--trials", cfg.trials, "number of trials")
                     ->check(CLI::PositiveNumber);
  flags.solver = app.add_option("--solver", cfg.solver)
                     ->check(CLI::IsMember({"mpgsa", "empgsa"}));
  flags.out = app.add_option("--out", cfg.out, "report path");
  flags.format = app.add_option("--format", cfg.format)
                     ->check(CLI::IsMember({"csv", "json"}));
  flags.lambda = app.add_option_function<double>(
      "--lambda", [&](double v) { cfg.lambda = v; }, "regularization weight");
  flags.topk = app.add_option_function<long long>(
      "--topk", [&](long long v) { cfg.topk = v; }, "K of the top-K norm");
  flags.max_iter = app.add_option("--max-iter", cfg.max_iter)
                       ->check(CLI::PositiveNumber);
  flags.eta = app.add_option("--eta", cfg.eta, "active-piece tolerance");
  flags.instance = app.add_option("--instance", cfg.instance, "MPGS1 file");
  flags.point = app.add_option("--point", cfg.point, "point file (MPGS1 or csv)");
  flags.kind = app.add_option("--kind", cfg.kind)
                   ->check(CLI::IsMember({"critical", "sgep", "sfda"}));
  flags.n = app.add_option("--n", cfg.n, "dimension");
  flags.p = app.add_option("--p", cfg.p, "columns");
  flags.tol = app.add_option("--tol", cfg.tol, "check: residual tolerance");

  auto* gen = app.add_subcommand("gen", "generate an instance file");
  auto* solve = app.add_subcommand("solve", "run MPGSA or EMPGSA");
  auto* check = app.add_subcommand("check", "stationarity residuals");
  auto* exp1 = app.add_subcommand("exp1", "discriminant-analysis trials");
  auto* exp2 = app.add_subcommand("exp2", "critical-point trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!config_path.empty()) {
      // Re-apply flags over the file.
      RunConfig from_file = cfg;
      apply_config_file(config_path, from_file, flags);
      cfg = from_file;
    }
    if (gen->parsed()) return cmd_gen(cfg);
    if (solve->parsed()) return cmd_solve(cfg);
    if (check->parsed()) return cmd_check(cfg);
    if (exp1->parsed()) return cmd_exp1(cfg);
    if (exp2->parsed()) return cmd_exp2(cfg);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidInstance& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

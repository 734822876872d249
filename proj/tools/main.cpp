#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eot/eot.h"
#include "output.hpp"

namespace {

using eot_cli::fmt;
using eot_cli::JsonObject;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitMaxIters = 3;

struct RunConfig {
  std::string instance;
  double epsilon = 0.0;
  std::string eps_list;
  double tol = 1e-10;
  double tol_marginal = 1e-9;
  std::size_t max_iters = 10000;
  std::string out = ".";
  std::uint64_t seed = 42;
  std::size_t n = 50;
  unsigned threads = 1;
  bool timing = false;
  std::string config;

  std::string cost = "step-example";
  double exponent = 1.0;
  std::string points;
  std::size_t samples = 10000;
  double eta = 1e-3;

  std::string alpha = "1";
  double M = 0.0;
  double K = 0.0;
};

/// Carries a library status up to main, which maps it to an exit code.
struct StatusError : std::runtime_error {
  eot_status status;
  StatusError(eot_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(eot_status s) {
  if (s != EOT_OK) throw StatusError(s, eot_last_error());
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("bad number in ") + what + ": '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string(what) + " is empty");
  return out;
}

struct InstanceHandle {
  eot_instance* p = nullptr;
  ~InstanceHandle() { eot_instance_free(p); }
};

struct ReportHandle {
  eot_report* p = nullptr;
  ~ReportHandle() { eot_report_free(p); }
};

struct StudyHandle {
  eot_study* p = nullptr;
  ~StudyHandle() { eot_study_free(p); }
};

void load_instance(const RunConfig& cfg, InstanceHandle& h) {
  if (cfg.instance.empty()) throw UsageError("--instance is required");
  check(eot_instance_from_file(cfg.instance.c_str(), &h.p));
}

eot_solve_options solve_options(const RunConfig& cfg) {
  eot_solve_options o;
  eot_solve_options_default(&o);
  o.tol_potential = cfg.tol;
  o.tol_marginal = cfg.tol_marginal;
  o.max_iters = cfg.max_iters;
  o.threads = cfg.threads;
  return o;
}

eot_ctilde_options ctilde_options(const RunConfig& cfg) {
  eot_ctilde_options o;
  eot_ctilde_options_default(&o);
  o.samples = cfg.samples;
  o.eta = cfg.eta;
  o.seed = cfg.seed;
  return o;
}

std::string digest_of_text(const std::string& text) {
  char hex[65];
  check(eot_sha256_hex(text.data(), text.size(), hex));
  return hex;
}

std::string plan_csv(const eot_report* r) {
  std::size_t rank = 0, len = 0;
  const std::size_t* shape = eot_report_plan_shape(r, &rank);
  const double* w = eot_report_plan(r, &len);
  std::string out;
  if (rank == 2) {
    out = "i,j,weight\n";
  } else {
    for (std::size_t a = 0; a < rank; ++a) out += "i" + std::to_string(a + 1) + ",";
    out += "weight\n";
  }
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t k = 0; k < len; ++k) {
    for (std::size_t a = 0; a < rank; ++a) out += std::to_string(idx[a]) + ",";
    out += fmt(w[k]) + "\n";
    for (std::size_t a = rank; a-- > 0;) {
      if (++idx[a] < shape[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

std::string trace_csv(const eot_report* r, bool timing) {
  std::string out = "iter,dual,primal,gap,marginal_residual,elapsed_ms\n";
  for (std::size_t k = 0; k < eot_report_trace_length(r); ++k) {
    eot_trace_row t;
    check(eot_report_trace_row(r, k, &t));
    out += std::to_string(t.iter) + "," + fmt(t.dual) + "," + fmt(t.primal) + "," + fmt(t.gap) + "," +
           fmt(t.marginal_residual) + "," + (timing ? fmt(t.elapsed_ms) : "") + "\n";
  }
  return out;
}

JsonObject solve_json(const std::string& command, const eot_instance* inst, const eot_report* r,
                      const RunConfig& cfg) {
  const double eps = eot_report_epsilon(r);
  JsonObject j;
  j.string("command", command)
      .string("digest", eot_instance_digest(inst))
      .integer("marginals", static_cast<long long>(eot_instance_num_marginals(inst)))
      .number("epsilon", eps)
      .boolean("converged", eot_report_converged(r) != 0)
      .integer("iterations", static_cast<long long>(eot_report_iterations(r)))
      .integer("total_iterations", static_cast<long long>(eot_report_total_iterations(r)))
      .number("dual", eot_report_dual(r))
      .number("primal", eot_report_primal(r))
      .number("primal_entropy_minus_one", eot_report_primal(r) - eps)
      .number("gap", eot_report_gap(r))
      .number("marginal_residual", eot_report_marginal_residual(r))
      .number("K", eot_report_K(r))
      .number("tol_potential", cfg.tol)
      .number("tol_marginal", cfg.tol_marginal)
      .integer("max_iters", static_cast<long long>(cfg.max_iters));
  std::string pots = "[";
  for (std::size_t i = 0; i < eot_report_num_potentials(r); ++i) {
    std::size_t len = 0;
    const double* p = eot_report_potential(r, i, &len);
    if (i) pots += ",\n    ";
    pots += eot_cli::json_array(p, len);
  }
  j.raw("potentials", pots + "]");
  return j;
}

int finish_solve(const std::string& command, const eot_instance* inst, const eot_report* r,
                 eot_status status, const RunConfig& cfg, JsonObject* extra = nullptr) {
  JsonObject j = solve_json(command, inst, r, cfg);
  if (extra) j.object("extra", *extra);
  eot_cli::write_file(cfg.out, "report.json", j.dump(2));
  eot_cli::write_file(cfg.out, "trace.csv", trace_csv(r, cfg.timing));
  eot_cli::write_file(cfg.out, "plan.csv", plan_csv(r));
  if (status == EOT_ERR_MAX_ITERS) {
    std::cerr << "eot: " << command << ": " << eot_last_error() << " (" << cfg.max_iters
              << " iterations)\n";
    return kExitMaxIters;
  }
  return kExitOk;
}

int run_solve(const RunConfig& cfg, bool multi) {
  InstanceHandle inst;
  load_instance(cfg, inst);
  const eot_solve_options o = solve_options(cfg);
  ReportHandle r;
  const eot_status s = multi ? eot_mm_solve(inst.p, cfg.epsilon, &o, &r.p)
                             : eot_solve(inst.p, cfg.epsilon, &o, &r.p);
  if (s != EOT_OK && s != EOT_ERR_MAX_ITERS) check(s);
  return finish_solve(multi ? "mm-solve" : "solve", inst.p, r.p, s, cfg);
}

int write_study(const std::string& command, const eot_instance* inst, const eot_study* st,
                const RunConfig& cfg, JsonObject* extra = nullptr) {
  std::string csv = "epsilon,dual,primal,gap,oracle_gap,kantorovich_residual\n";
  std::vector<JsonObject> rows;
  bool all_converged = true;
  for (std::size_t k = 0; k < eot_study_length(st); ++k) {
    eot_study_row row;
    check(eot_study_row_at(st, k, &row));
    csv += fmt(row.epsilon) + "," + fmt(row.dual) + "," + fmt(row.primal) + "," + fmt(row.gap) + "," +
           fmt(row.oracle_gap) + "," + fmt(row.kantorovich_residual) + "\n";
    rows.push_back(JsonObject()
                       .number("epsilon", row.epsilon)
                       .number("dual", row.dual)
                       .number("primal", row.primal)
                       .number("gap", row.gap)
                       .number("oracle_gap", row.oracle_gap)
                       .number("kantorovich_residual", row.kantorovich_residual)
                       .integer("iterations", static_cast<long long>(row.iterations))
                       .boolean("converged", row.converged != 0));
    all_converged = all_converged && row.converged;
  }
  JsonObject j;
  j.string("command", command)
      .string("digest", eot_instance_digest(inst))
      .number("oracle_value", eot_study_oracle_value(st))
      .string("oracle_cost", eot_study_uses_ctilde(st) ? "ctilde" : "original")
      .boolean("converged", all_converged);
  if (extra) j.object("extra", *extra);
  j.objects("rows", rows);
  eot_cli::write_file(cfg.out, "study.csv", csv);
  eot_cli::write_file(cfg.out, "report.json", j.dump(2));
  if (!all_converged) {
    std::cerr << "eot: " << command << ": some epsilon stages hit --max-iters " << cfg.max_iters << "\n";
    return kExitMaxIters;
  }
  return kExitOk;
}

int run_eps_study(const RunConfig& cfg) {
  InstanceHandle inst;
  load_instance(cfg, inst);
  if (cfg.eps_list.empty()) throw UsageError("--eps-list is required");
  const std::vector<double> eps = parse_list(cfg.eps_list, "--eps-list");
  const eot_solve_options o = solve_options(cfg);
  StudyHandle st;
  check(eot_eps_study(inst.p, eps.data(), eps.size(), &o, nullptr, &st.p));
  return write_study("eps-study", inst.p, st.p, cfg);
}

int run_oracle(const RunConfig& cfg) {
  InstanceHandle inst;
  load_instance(cfg, inst);
  std::size_t len = 0;
  eot_instance_cost(inst.p, &len);
  std::vector<double> plan(len);
  double value = 0.0;
  check(eot_exact_oracle(inst.p, &value, plan.data()));

  const std::size_t rank = eot_instance_num_marginals(inst.p);
  std::string csv = rank == 2 ? "i,j,weight\n" : "";
  if (rank != 2) {
    for (std::size_t a = 0; a < rank; ++a) csv += "i" + std::to_string(a + 1) + ",";
    csv += "weight\n";
  }
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t k = 0; k < len; ++k) {
    for (std::size_t a = 0; a < rank; ++a) csv += std::to_string(idx[a]) + ",";
    csv += fmt(plan[k]) + "\n";
    for (std::size_t a = rank; a-- > 0;) {
      if (++idx[a] < eot_instance_marginal_size(inst.p, a)) break;
      idx[a] = 0;
    }
  }
  JsonObject j;
  j.string("command", "oracle")
      .string("digest", eot_instance_digest(inst.p))
      .integer("marginals", static_cast<long long>(rank))
      .number("value", value);
  eot_cli::write_file(cfg.out, "report.json", j.dump(2));
  eot_cli::write_file(cfg.out, "plan.csv", csv);
  return kExitOk;
}

std::vector<std::vector<double>> read_points(const std::string& path, std::string& raw) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw StatusError(EOT_ERR_IO, "cannot open points file " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  raw = buf.str();
  std::vector<std::vector<double>> rows;
  std::stringstream lines(raw);
  std::string line;
  bool first = true;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    try {
      rows.push_back(parse_list(line, "points row"));
    } catch (const UsageError&) {
      if (!first) throw;
    }
    first = false;
  }
  if (rows.empty()) throw UsageError("points file has no rows");
  for (const auto& r : rows) {
    if (r.size() != rows[0].size() || r.size() % 2 != 0) {
      throw UsageError("points rows need the same even number of columns (x coordinates, then y)");
    }
  }
  return rows;
}

int run_ctilde(const RunConfig& cfg) {
  eot_ctilde_options o = ctilde_options(cfg);
  JsonObject j;
  j.string("command", "ctilde");
  std::string csv;
  if (!cfg.instance.empty()) {
    InstanceHandle inst;
    load_instance(cfg, inst);
    if (eot_instance_num_marginals(inst.p) != 2) throw UsageError("ctilde tables need two marginals");
    const std::size_t n = eot_instance_marginal_size(inst.p, 0), m = eot_instance_marginal_size(inst.p, 1);
    std::vector<double> table(n * m);
    check(eot_ctilde_tabulate(inst.p, &o, table.data()));
    csv = "i,j,ctilde\n";
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < m; ++k) {
        csv += std::to_string(i) + "," + std::to_string(k) + "," + fmt(table[i * m + k]) + "\n";
      }
    }
    j.string("digest", eot_instance_digest(inst.p));
  } else {
    if (cfg.points.empty()) throw UsageError("ctilde needs --points or --instance");
    std::string raw;
    const auto rows = read_points(cfg.points, raw);
    const std::size_t dim = rows[0].size() / 2;
    if (dim == 1) {
      csv = "x,y,ctilde\n";
    } else {
      for (std::size_t d = 0; d < dim; ++d) csv += "x" + std::to_string(d + 1) + ",";
      for (std::size_t d = 0; d < dim; ++d) csv += "y" + std::to_string(d + 1) + ",";
      csv += "ctilde\n";
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
      o.seed = eot_derive_seed(cfg.seed, k, 0);
      double value = 0.0;
      check(eot_ctilde_estimate(cfg.cost.c_str(), cfg.exponent, dim, rows[k].data(), rows[k].data() + dim,
                                &o, &value));
      for (double x : rows[k]) csv += fmt(x) + ",";
      csv += fmt(value) + "\n";
    }
    j.string("digest", digest_of_text(cfg.cost + "\n" + fmt(cfg.exponent) + "\n" + raw))
        .string("cost", cfg.cost)
        .number("exponent", cfg.exponent)
        .integer("points", static_cast<long long>(rows.size()));
  }
  j.integer("samples", static_cast<long long>(cfg.samples))
      .number("eta", cfg.eta)
      .integer("seed", static_cast<long long>(cfg.seed));
  eot_cli::write_file(cfg.out, "ctilde.csv", csv);
  eot_cli::write_file(cfg.out, "report.json", j.dump(2));
  return kExitOk;
}

constexpr std::size_t kMaxCtildeOracleGrid = 64;
constexpr std::size_t kMaxDiscreteOracleGrid = 200;

int run_counterexample(const RunConfig& cfg) {
  InstanceHandle inst;
  check(eot_instance_counterexample(cfg.n, &inst.p));
  const eot_solve_options o = solve_options(cfg);
  JsonObject extra;
  extra.integer("n", static_cast<long long>(cfg.n));

  if (!cfg.eps_list.empty()) {
    const std::vector<double> eps = parse_list(cfg.eps_list, "--eps-list");
    std::vector<double> table;
    if (cfg.n <= kMaxCtildeOracleGrid) {
      table.resize(cfg.n * cfg.n);
      const eot_ctilde_options co = ctilde_options(cfg);
      check(eot_ctilde_tabulate(inst.p, &co, table.data()));
    }
    StudyHandle st;
    check(eot_eps_study(inst.p, eps.data(), eps.size(), &o, table.empty() ? nullptr : table.data(), &st.p));
    return write_study("counterexample", inst.p, st.p, cfg, &extra);
  }

  if (cfg.n <= kMaxDiscreteOracleGrid) {
    double value = 0.0;
    check(eot_exact_oracle(inst.p, &value, nullptr));
    extra.number("discrete_oracle_value", value);
  }
  ReportHandle r;
  const eot_status s = eot_solve(inst.p, cfg.epsilon, &o, &r.p);
  if (s != EOT_OK && s != EOT_ERR_MAX_ITERS) check(s);
  return finish_solve("counterexample", inst.p, r.p, s, cfg, &extra);
}

int run_bounds(const RunConfig& cfg) {
  const std::vector<double> alphas = parse_list(cfg.alpha, "--alpha");
  const std::vector<double> eps = parse_list(cfg.eps_list.empty() ? "0.25,0.5,1,2" : cfg.eps_list, "--eps-list");
  double K = cfg.K;
  std::string digest;
  InstanceHandle inst;
  if (!cfg.instance.empty()) {
    load_instance(cfg, inst);
    K = eot_instance_K(inst.p);
    digest = eot_instance_digest(inst.p);
  }
  std::string csv = "alpha,epsilon,M,K,L,transform_lipschitz\n";
  std::vector<JsonObject> rows;
  for (double a : alphas) {
    for (double e : eps) {
      double L = 0.0, T = 0.0;
      check(eot_coulomb_lipschitz_bound(cfg.M, a, e, K, &L, &T));
      csv += fmt(a) + "," + fmt(e) + "," + fmt(cfg.M) + "," + fmt(K) + "," + fmt(L) + "," + fmt(T) + "\n";
      rows.push_back(JsonObject()
                         .number("alpha", a)
                         .number("epsilon", e)
                         .number("L", L)
                         .number("transform_lipschitz", T));
    }
  }
  if (digest.empty()) digest = digest_of_text(csv);
  JsonObject j;
  j.string("command", "bounds").string("digest", digest).number("M", cfg.M).number("K", K).objects("rows", rows);
  eot_cli::write_file(cfg.out, "bounds.csv", csv);
  eot_cli::write_file(cfg.out, "report.json", j.dump(2));
  return kExitOk;
}

std::string config_value(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.dump();
  if (v.is_number()) return fmt(v.get<double>());
  if (v.is_array()) {
    std::string out;
    for (const auto& e : v) out += (out.empty() ? "" : ",") + config_value(e);
    return out;
  }
  throw UsageError("unsupported config value " + v.dump());
}

/// Turns config-file entries into flags placed before the command-line
/// flags; options keep their last value, so explicit flags win.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  const CLI::App* sub = app.get_subcommand_no_throw(args[0]);
  if (!sub) return args;

  std::ifstream f(path);
  if (!f) throw UsageError("cannot open config file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config file must hold a JSON object");

  std::vector<std::string> injected;
  for (const auto& [key, value] : doc.items()) {
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt || key == "config") throw UsageError("config key '" + key + "' is not an option of " + args[0]);
    if (opt->get_expected_min() == 0) {
      if (!value.is_boolean()) throw UsageError("config key '" + key + "' must be true or false");
      if (value.get<bool>()) injected.push_back("--" + key);
    } else {
      injected.push_back("--" + key);
      injected.push_back(config_value(value));
    }
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--out", cfg.out, "Output directory");
  sub->add_option("--config", cfg.config, "JSON file of option values; flags win");
  sub->add_option("--seed", cfg.seed, "Seed for sampling estimators");
}

void add_solver(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--tol", cfg.tol, "Sup-norm tolerance on potential updates");
  sub->add_option("--tol-marginal", cfg.tol_marginal, "Tolerance on the plan's marginal residual");
  sub->add_option("--max-iters", cfg.max_iters, "Iteration limit per epsilon");
  sub->add_option("--threads", cfg.threads, "Worker threads (results do not depend on it)");
  sub->add_flag("--timing", cfg.timing, "Fill the elapsed_ms trace column");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Entropic optimal transport solver and limit studies", "eot"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "Two-marginal Sinkhorn");
  auto* mm = app.add_subcommand("mm-solve", "Multi-marginal Sinkhorn");
  auto* study = app.add_subcommand("eps-study", "Decreasing-epsilon study against the exact optimum");
  auto* ctilde = app.add_subcommand("ctilde", "Pointwise c~ estimates");
  auto* oracle = app.add_subcommand("oracle", "Exact unregularized transport");
  auto* counter = app.add_subcommand("counterexample", "Step-cost grid example");
  auto* bounds = app.add_subcommand("bounds", "Coulomb transform Lipschitz bounds");

  for (auto* sub : {solve, mm, study, ctilde, oracle, counter, bounds}) add_common(sub, cfg);
  for (auto* sub : {solve, mm, study, ctilde, oracle, bounds}) {
    sub->add_option("--instance", cfg.instance, "Instance JSON file");
  }
  for (auto* sub : {solve, mm, study, counter}) add_solver(sub, cfg);
  for (auto* sub : {solve, mm, counter}) sub->add_option("--epsilon", cfg.epsilon, "Regularization strength");
  for (auto* sub : {study, counter, bounds}) sub->add_option("--eps-list", cfg.eps_list, "Comma-separated epsilons");
  counter->add_option("--n", cfg.n, "Grid size");
  for (auto* sub : {ctilde, counter}) {
    sub->add_option("--samples", cfg.samples, "Ball samples per radius");
    sub->add_option("--eta", cfg.eta, "Quantile standing in for the essential infimum");
  }
  ctilde->add_option("--cost", cfg.cost, "step-example, abs-diff, squared-distance or power-distance");
  ctilde->add_option("--exponent", cfg.exponent, "Exponent of power-distance");
  ctilde->add_option("--points", cfg.points, "CSV rows x..., y...");
  bounds->add_option("--alpha", cfg.alpha, "Comma-separated exponents");
  bounds->add_option("--M", cfg.M, "Sup-norm of the potential");
  bounds->add_option("--K", cfg.K, "Conditional cost bound (taken from --instance if given)");

  try {
    std::vector<std::string> args = expand_config(app, std::vector<std::string>(argv + 1, argv + argc));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  } catch (const UsageError& e) {
    std::cerr << "eot: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*solve) {
      if (solve->count("--epsilon") == 0) throw UsageError("--epsilon is required");
      return run_solve(cfg, false);
    }
    if (*mm) {
      if (mm->count("--epsilon") == 0) throw UsageError("--epsilon is required");
      return run_solve(cfg, true);
    }
    if (*study) return run_eps_study(cfg);
    if (*ctilde) return run_ctilde(cfg);
    if (*oracle) return run_oracle(cfg);
    if (*counter) {
      if (counter->count("--epsilon") == 0 && cfg.eps_list.empty()) {
        throw UsageError("--epsilon or --eps-list is required");
      }
      return run_counterexample(cfg);
    }
    if (*bounds) return run_bounds(cfg);
  } catch (const UsageError& e) {
    std::cerr << "eot: " << e.what() << "\n";
    return kExitValidation;
  } catch (const StatusError& e) {
    std::cerr << "eot: " << eot_status_string(e.status) << ": " << e.what() << "\n";
    return eot_status_is_validation(e.status) ? kExitValidation : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "eot: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

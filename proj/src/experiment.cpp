#include "fracopt/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracopt/eigensolver.hpp"
#include "fracopt/optimizer.hpp"
#include "fracopt/stiffness.hpp"

namespace fracopt {

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmtg(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

double parse_num(const std::string& tok, const char* where) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  if (end != begin + tok.size() || tok.empty() || errno == ERANGE)
    throw UsageError(std::string("bad number '") + tok + "' in " + where);
  return v;
}

long parse_count(const std::string& tok, const char* where) {
  double v = parse_num(tok, where);
  long n = static_cast<long>(v);
  if (static_cast<double>(n) != v)
    throw UsageError(std::string("bad integer '") + tok + "' in " + where);
  return n;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::shared_ptr<const Grid> make_grid(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw UsageError("domain '" + spec + "' is missing its parameter list");
  std::string kind = spec.substr(0, colon);
  auto parts = split(spec.substr(colon + 1), ',');
  try {
    if (kind == "interval") {
      if (parts.size() != 3)
        throw UsageError("domain '" + spec + "' expects interval:a,b,n");
      return Grid::interval(parse_num(parts[0], "domain"),
                            parse_num(parts[1], "domain"),
                            static_cast<int>(parse_count(parts[2], "domain")));
    }
    if (kind == "rect") {
      if (parts.size() != 4)
        throw UsageError("domain '" + spec + "' expects rect:wx,wy,nx,ny");
      return Grid::rectangle(parse_num(parts[0], "domain"),
                             parse_num(parts[1], "domain"),
                             static_cast<int>(parse_count(parts[2], "domain")),
                             static_cast<int>(parse_count(parts[3], "domain")));
    }
    if (kind == "disk") {
      if (parts.size() != 2)
        throw UsageError("domain '" + spec + "' expects disk:r,n");
      return Grid::disk(parse_num(parts[0], "domain"),
                        static_cast<int>(parse_count(parts[1], "domain")));
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError("domain '" + spec + "': " + e.what());
  }
  throw UsageError("unknown domain kind '" + kind + "' in '" + spec + "'");
}

std::vector<std::pair<double, double>> parse_weight_entries(
    const std::string& spec) {
  if (spec.rfind("w:", 0) != 0)
    throw UsageError("weights '" + spec + "' must start with 'w:'");
  std::vector<std::pair<double, double>> entries;
  double sum = 0.0;
  for (const auto& item : split(spec.substr(2), ',')) {
    auto at = item.find('@');
    if (at == std::string::npos || at == 0 || at + 1 == item.size())
      throw UsageError("bad weight entry '" + item + "', expected value@fraction");
    double v = parse_num(item.substr(0, at), "weights");
    double f = parse_num(item.substr(at + 1), "weights");
    if (f < 0.0)
      throw UsageError("bad weight entry '" + item + "', fraction is negative");
    entries.emplace_back(v, f);
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw UsageError("weights '" + spec + "': fractions sum " + fmtg(sum) +
                     ", expected 1");
  return entries;
}

ExperimentConfig parse_config(const std::vector<std::string>& args) {
  ExperimentConfig cfg;
  std::string config_path;

  CLI::App app{"fractional weighted eigenvalue experiments"};
  app.add_option("--config", config_path, "JSON file with default settings");
  auto* o_domain = app.add_option("--domain", cfg.domain,
                                  "interval:a,b,n | rect:wx,wy,nx,ny | disk:r,n");
  auto* o_s = app.add_option("--s", cfg.s, "fractional order in (0,1)");
  auto* o_weights = app.add_option("--weights", cfg.weights,
                                   "weight class, w:v1@f1,v2@f2,...");
  auto* o_mode = app.add_option("--mode", cfg.mode,
                                "solve | minimize | maximize | verify-suite");
  auto* o_tol = app.add_option("--tol", cfg.tol, "convergence tolerance");
  auto* o_maxit = app.add_option("--max-iter", cfg.max_iter, "iteration cap");
  auto* o_restarts = app.add_option("--restarts", cfg.restarts,
                                    "optimizer restarts");
  auto* o_seed = app.add_option("--seed", cfg.seed, "random seed");
  auto* o_out = app.add_option("--out", cfg.out_dir, "output directory");
  auto* o_dump = app.add_flag("--dump-matrix", cfg.dump_matrix,
                              "write the assembled matrix to A.bin");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    cfg.help_requested = true;
    cfg.help_text = app.help();
    return cfg;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  bool have_s = o_s->count() > 0;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw UsageError("cannot open config file '" + config_path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw UsageError("config file '" + config_path + "': " + e.what());
    }
    if (!j.is_object())
      throw UsageError("config file '" + config_path +
                       "' must hold a JSON object");
    try {
      for (const auto& [key, val] : j.items()) {
        if (key == "domain") {
          if (o_domain->count() == 0) cfg.domain = val.get<std::string>();
        } else if (key == "s") {
          if (!have_s) {
            cfg.s = val.get<double>();
            have_s = true;
          }
        } else if (key == "weights") {
          if (o_weights->count() == 0) cfg.weights = val.get<std::string>();
        } else if (key == "mode") {
          if (o_mode->count() == 0) cfg.mode = val.get<std::string>();
        } else if (key == "tol") {
          if (o_tol->count() == 0) cfg.tol = val.get<double>();
        } else if (key == "max_iter") {
          if (o_maxit->count() == 0) cfg.max_iter = val.get<int>();
        } else if (key == "restarts") {
          if (o_restarts->count() == 0) cfg.restarts = val.get<int>();
        } else if (key == "seed") {
          if (o_seed->count() == 0)
            cfg.seed = val.get<unsigned long long>();
        } else if (key == "out") {
          if (o_out->count() == 0) cfg.out_dir = val.get<std::string>();
        } else if (key == "dump_matrix") {
          if (o_dump->count() == 0) cfg.dump_matrix = val.get<bool>();
        } else {
          throw UsageError("unknown config key '" + key + "'");
        }
      }
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      throw UsageError("config file '" + config_path + "': " + e.what());
    }
  }

  if (cfg.domain.empty()) throw UsageError("missing --domain");
  if (!have_s) throw UsageError("missing --s");
  if (cfg.weights.empty()) throw UsageError("missing --weights");
  if (cfg.mode.empty()) throw UsageError("missing --mode");
  if (cfg.mode != "solve" && cfg.mode != "minimize" && cfg.mode != "maximize" &&
      cfg.mode != "verify-suite")
    throw UsageError("unknown mode '" + cfg.mode + "'");
  if (!(cfg.s > 0.0 && cfg.s < 1.0))
    throw UsageError("bad --s value '" + fmtg(cfg.s) + "', need 0 < s < 1");
  if (cfg.tol <= 0.0) throw UsageError("bad --tol value, must be positive");
  if (cfg.max_iter < 1) throw UsageError("bad --max-iter value, must be >= 1");
  if (cfg.restarts < 1) throw UsageError("bad --restarts value, must be >= 1");

  make_grid(cfg.domain);            // validate early so errors name the token
  parse_weight_entries(cfg.weights);
  return cfg;
}

namespace {

// ---------------------------------------------------------------------------
// output helpers

struct CsvRow {
  std::vector<std::pair<std::string, std::string>> cols;
  void add(const std::string& name, const std::string& raw) {
    cols.emplace_back(name, raw);
  }
  void add_quoted(const std::string& name, const std::string& text) {
    cols.emplace_back(name, "\"" + text + "\"");
  }
  void add(const std::string& name, double v) { add(name, fmt17(v)); }
  void add(const std::string& name, long v) { add(name, std::to_string(v)); }
  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);  // '\n' endings on every host
    for (std::size_t i = 0; i < cols.size(); ++i)
      out << (i ? "," : "") << cols[i].first;
    out << "\n";
    for (std::size_t i = 0; i < cols.size(); ++i)
      out << (i ? "," : "") << cols[i].second;
    out << "\n";
  }
};

void write_trace_csv(const std::string& path, const OptimizerTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  out << "iter,mu1,lambda1,lin_obj,cells_changed,rho_sym_err,u_sym_err\n";
  for (const auto& r : trace.rows) {
    out << r.iter << ',' << fmt17(r.mu1) << ',' << fmt17(r.lambda1) << ','
        << fmt17(r.lin_obj) << ',' << r.cells_changed << ','
        << fmt17(r.rho_sym_err) << ',' << fmt17(r.u_sym_err) << "\n";
  }
}

void dump_matrix_bin(const std::string& path, const StiffnessOperator& op) {
  const auto& A = op.matrix();
  std::ofstream out(path, std::ios::binary);
  std::uint64_t n = static_cast<std::uint64_t>(A.rows());
  double s = op.params().s;
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&s), sizeof s);
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < n; ++j) {
      double v = A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

std::string config_echo(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "# config\n";
  out << "domain = " << cfg.domain << "\n";
  out << "s = " << fmtg(cfg.s) << "\n";
  out << "weights = " << cfg.weights << "\n";
  out << "mode = " << cfg.mode << "\n";
  out << "tol = " << fmtg(cfg.tol) << "\n";
  out << "max_iter = " << cfg.max_iter << "\n";
  out << "restarts = " << cfg.restarts << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "out = " << cfg.out_dir << "\n";
  out << "dump_matrix = " << (cfg.dump_matrix ? 1 : 0) << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// shared run state

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RunState {
  std::shared_ptr<const Grid> grid;
  WeightClass cls;
  StiffnessOperator op;
  std::ostringstream report;
  bool any_fail = false;

  RunState(const ExperimentConfig& cfg)
      : grid(make_grid(cfg.domain)),
        cls(WeightClass::from_fractions(parse_weight_entries(cfg.weights),
                                        grid->active_count(),
                                        grid->cell_measure())),
        op(grid, KernelParams{cfg.s, grid->dim(), 1.0}) {}

  void check(const std::string& name, bool ok, const std::string& detail = "") {
    report << name << ": " << (ok ? "PASS" : "FAIL");
    if (!detail.empty()) report << " (" << detail << ")";
    report << "\n";
    if (!ok) any_fail = true;
  }
  void info(const std::string& line) { report << line << "\n"; }
};

struct SymmetrySummary {
  double rho_sym = kNaN;
  double u_sym = kNaN;
  double radial_defect = kNaN;
};

SymmetrySummary summarize_symmetry(const CellFunction& rho,
                                   const CellFunction& u) {
  SymmetrySummary s;
  if (!rho.grid->steiner()) return s;
  SteinerReport rep = steiner_report(rho, u);
  s.rho_sym = rep.rho_symmetry;
  s.u_sym = rep.u_symmetry;
  if (rep.radial_defect) s.radial_defect = *rep.radial_defect;
  return s;
}

CellFunction random_permutation_of_class(const WeightClass& cls,
                                         const std::shared_ptr<const Grid>& g,
                                         std::mt19937_64& rng) {
  std::vector<double> vals = cls.expanded_desc();
  std::shuffle(vals.begin(), vals.end(), rng);
  Eigen::VectorXd v(g->active_count());
  for (int i = 0; i < g->active_count(); ++i) v[i] = vals[i];
  return CellFunction(g, std::move(v));
}

CellFunction random_nonneg(const std::shared_ptr<const Grid>& g,
                           std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Eigen::VectorXd v(g->active_count());
  for (int i = 0; i < g->active_count(); ++i) v[i] = uni(rng);
  return CellFunction(g, std::move(v));
}

double dot_m(const CellFunction& a, const CellFunction& b) {
  return a.grid->cell_measure() * a.values.dot(b.values);
}

// ---------------------------------------------------------------------------
// per-mode drivers; each fills the results row and report body

void run_solve(const ExperimentConfig& cfg, RunState& st, CsvRow& row) {
  CellFunction rho = canonical_layout(st.grid, st.cls);
  PencilSolver solver(st.op);
  EigenResult eig = solver.solve_mu1(rho, cfg.tol, cfg.max_iter);
  EigenResult neg = solver.solve_lambda_neg1(rho, cfg.tol, cfg.max_iter);
  SymmetrySummary sym = summarize_symmetry(rho, eig.eigenfunction);

  row.add("mu1", eig.mu1_tilde);
  row.add("lambda1", eig.lambda ? *eig.lambda : kNaN);
  row.add("lambda_neg1", neg.lambda ? *neg.lambda : kNaN);
  row.add("residual", eig.residual);
  row.add("iterations", static_cast<long>(eig.iterations));
  row.add_quoted("status", "solved");
  row.add("characterization", kNaN);
  row.add("rho_sym_err", sym.rho_sym);
  row.add("u_sym_err", sym.u_sym);
  row.add("radial_defect", sym.radial_defect);
  row.add("bound", kNaN);
  row.add("bound_satisfied", kNaN);
  row.add("duality_gap", kNaN);
  row.add_quoted("distinct_lambdas", "");

  st.info("mu1 = " + fmt17(eig.mu1_tilde));
  st.info("lambda1 = " + (eig.lambda ? fmt17(*eig.lambda) : "nan"));
  st.info("lambda_neg1 = " + (neg.lambda ? fmt17(*neg.lambda) : "nan"));
  st.info("residual = " + fmtg(eig.residual));
  st.info("iterations = " + std::to_string(eig.iterations));
}

const char* status_name(OptStatus s) {
  switch (s) {
    case OptStatus::fixed_point: return "fixed-point";
    case OptStatus::iteration_cap: return "iteration-cap";
    case OptStatus::degenerate_class: return "degenerate-class";
  }
  return "unknown";
}

bool trace_monotone(const OptimizerTrace& trace) {
  for (std::size_t i = 1; i < trace.rows.size(); ++i) {
    double prev = trace.rows[i - 1].mu1;
    if (trace.rows[i].mu1 < prev - 1e-12 * std::max(1.0, std::abs(prev)))
      return false;
  }
  return true;
}

void run_minimize(const ExperimentConfig& cfg, RunState& st, CsvRow& row) {
  OptimizeResult res = minimize_lambda1(st.op, st.cls, cfg.tol, cfg.max_iter,
                                        cfg.restarts, cfg.seed);
  write_trace_csv(cfg.out_dir + "/trace.csv", res.trace);

  bool characterized = verify_characterization(res.rho, res.eig.eigenfunction);
  bool monotone = trace_monotone(res.trace);
  SymmetrySummary sym = summarize_symmetry(res.rho, res.eig.eigenfunction);

  double bound = kNaN, bound_ok = kNaN;
  std::string bound_detail;
  if (st.cls.mass() > 0.0) {
    BoundReport rep = check_upper_bound(st.op, st.cls, res.eig);
    bound = rep.bound;
    bound_ok = rep.satisfied ? 1.0 : 0.0;
    bound_detail = "lambda1 = " + fmtg(res.eig.lambda ? *res.eig.lambda : kNaN) +
                   ", bound = " + fmtg(rep.bound);
  }

  std::string lambdas;
  for (std::size_t i = 0; i < res.fixed_point_lambdas.size(); ++i)
    lambdas += (i ? ";" : "") + fmt17(res.fixed_point_lambdas[i]);

  row.add("mu1", res.eig.mu1_tilde);
  row.add("lambda1", res.eig.lambda ? *res.eig.lambda : kNaN);
  row.add("lambda_neg1", kNaN);
  row.add("residual", res.eig.residual);
  row.add("iterations", static_cast<long>(res.trace.rows.size()));
  row.add_quoted("status", status_name(res.trace.status));
  row.add("characterization", characterized ? 1.0 : 0.0);
  row.add("rho_sym_err", sym.rho_sym);
  row.add("u_sym_err", sym.u_sym);
  row.add("radial_defect", sym.radial_defect);
  row.add("bound", bound);
  row.add("bound_satisfied", bound_ok);
  row.add("duality_gap", kNaN);
  row.add_quoted("distinct_lambdas", lambdas);

  st.info("mu1 = " + fmt17(res.eig.mu1_tilde));
  st.info("lambda1 = " + (res.eig.lambda ? fmt17(*res.eig.lambda) : "nan"));
  st.info("status = " + std::string(status_name(res.trace.status)));
  st.info("restarts_used = " + std::to_string(res.restarts_used));
  if (!lambdas.empty()) st.info("distinct fixed-point lambdas = " + lambdas);
  st.check("characterization", characterized);
  st.check("monotone ascent", monotone);
  if (st.cls.mass() > 0.0)
    st.check("upper-bound estimate", bound_ok == 1.0, bound_detail);
  else
    st.info("upper-bound estimate: not-applicable (class mass <= 0)");
  if (st.grid->steiner())
    st.info("symmetry: rho_sym_err = " + fmtg(sym.rho_sym) +
            ", u_sym_err = " + fmtg(sym.u_sym));
}

void run_maximize(const ExperimentConfig& cfg, RunState& st, CsvRow& row) {
  OptimizeResult res = maximize_lambda1_fw(st.op, st.cls, cfg.tol, cfg.max_iter);
  write_trace_csv(cfg.out_dir + "/trace.csv", res.trace);

  double gap = kNaN;
  if (!res.trace.rows.empty()) {
    const TraceRow& last = res.trace.rows.back();
    gap = last.mu1 - last.lin_obj;  // mu1 minus its linear minorant value
  }
  SymmetrySummary sym = summarize_symmetry(res.rho, res.eig.eigenfunction);
  bool converged = res.trace.status != OptStatus::iteration_cap;

  row.add("mu1", res.eig.mu1_tilde);
  row.add("lambda1", res.eig.lambda ? *res.eig.lambda : kNaN);
  row.add("lambda_neg1", kNaN);
  row.add("residual", res.eig.residual);
  row.add("iterations", static_cast<long>(res.trace.rows.size()));
  row.add_quoted("status", status_name(res.trace.status));
  row.add("characterization", kNaN);
  row.add("rho_sym_err", sym.rho_sym);
  row.add("u_sym_err", sym.u_sym);
  row.add("radial_defect", sym.radial_defect);
  row.add("bound", kNaN);
  row.add("bound_satisfied", kNaN);
  row.add("duality_gap", gap);
  row.add_quoted("distinct_lambdas", "");

  st.info("mu1 = " + fmt17(res.eig.mu1_tilde));
  st.info("lambda1 = " + (res.eig.lambda ? fmt17(*res.eig.lambda) : "nan"));
  st.info("status = " + std::string(status_name(res.trace.status)));
  st.check("duality gap", converged,
           "gap = " + fmtg(gap) + ", tol = " + fmtg(cfg.tol));
}

void run_verify_suite(const ExperimentConfig& cfg, RunState& st, CsvRow& row) {
  std::mt19937_64 rng(cfg.seed);
  PencilSolver solver(st.op);
  const auto& g = st.grid;
  const double m = g->cell_measure();
  const int draws = 20;

  // convexity of mu1 along segments between class permutations
  {
    bool ok = true;
    std::string detail;
    for (int k = 0; k < draws && ok; ++k) {
      CellFunction rho = random_permutation_of_class(st.cls, g, rng);
      CellFunction eta = random_permutation_of_class(st.cls, g, rng);
      double mr = solver.solve_mu1(rho, cfg.tol, cfg.max_iter).mu1_tilde;
      double me = solver.solve_mu1(eta, cfg.tol, cfg.max_iter).mu1_tilde;
      for (double t : {0.25, 0.5, 0.75}) {
        CellFunction mix(g, t * rho.values + (1.0 - t) * eta.values);
        double mm = solver.solve_mu1(mix, cfg.tol, cfg.max_iter).mu1_tilde;
        double slack = mm - (t * mr + (1.0 - t) * me);
        if (slack > 1e-9) {
          ok = false;
          detail = "slack " + fmtg(slack) + " at draw " + std::to_string(k);
          break;
        }
      }
    }
    st.check("convexity", ok, detail);
  }

  bool have_axis = static_cast<bool>(g->steiner());

  // sum u v <= sum u# v# for nonnegative u, v
  if (have_axis) {
    bool ok = true;
    std::string detail;
    for (int k = 0; k < draws && ok; ++k) {
      CellFunction u = random_nonneg(g, rng);
      CellFunction v = random_nonneg(g, rng);
      double lhs = dot_m(u, v);
      double rhs = dot_m(steiner_symmetrize(u), steiner_symmetrize(v));
      if (lhs > rhs + 1e-12 * std::abs(rhs)) {
        ok = false;
        detail = "lhs " + fmtg(lhs) + " > rhs " + fmtg(rhs);
      }
    }
    st.check("Hardy-Littlewood inequality", ok, detail);
  } else {
    st.info("Hardy-Littlewood inequality: not-applicable (no symmetry axis)");
  }

  // quadratic form does not increase under symmetrization
  if (have_axis) {
    bool ok = true;
    std::string detail;
    for (int k = 0; k < draws && ok; ++k) {
      CellFunction u = random_nonneg(g, rng);
      double before = st.op.norm_sq(u);
      double after = st.op.norm_sq(steiner_symmetrize(u));
      if (after > before * (1.0 + 1e-6)) {
        ok = false;
        detail = "before " + fmtg(before) + ", after " + fmtg(after);
      }
    }
    st.check("Polya-Szego inequality", ok, detail);
  } else {
    st.info("Polya-Szego inequality: not-applicable (no symmetry axis)");
  }

  // minimized lambda1 against the flat-weight scaling bound
  if (st.cls.mass() > 0.0) {
    OptimizeResult res = minimize_lambda1(st.op, st.cls, cfg.tol, cfg.max_iter,
                                          cfg.restarts, cfg.seed);
    BoundReport rep = check_upper_bound(st.op, st.cls, res.eig);
    st.check("upper-bound estimate", rep.satisfied,
             "lambda1 = " + fmtg(res.eig.lambda ? *res.eig.lambda : kNaN) +
                 ", bound = " + fmtg(rep.bound));
  } else {
    st.info("upper-bound estimate: not-applicable (class mass <= 0)");
  }

  // extreme rearrangements bracket every linear pairing over the class
  {
    bool ok = true;
    std::string detail;
    for (int k = 0; k < draws && ok; ++k) {
      CellFunction rho = random_permutation_of_class(st.cls, g, rng);
      CellFunction u = random_nonneg(g, rng);
      CellFunction usq(g, u.values.array().square().matrix());
      double mid = dot_m(rho, usq);
      double lo = m * linear_minimize(st.cls, usq).values.dot(usq.values);
      double hi = m * linear_maximize(st.cls, usq).values.dot(usq.values);
      double scale = std::max({std::abs(lo), std::abs(hi), 1.0});
      if (mid < lo - 1e-12 * scale || mid > hi + 1e-12 * scale) {
        ok = false;
        detail = fmtg(lo) + " <= " + fmtg(mid) + " <= " + fmtg(hi) +
                 " violated";
      }
    }
    st.check("two-sided rearrangement bound", ok, detail);
  }

  // lambda_{-1}(rho) = -lambda_1(-rho)
  {
    bool ok = true;
    std::string detail;
    for (int k = 0; k < draws && ok; ++k) {
      CellFunction rho = random_permutation_of_class(st.cls, g, rng);
      EigenResult neg = solver.solve_lambda_neg1(rho, cfg.tol, cfg.max_iter);
      CellFunction flipped(g, (-rho.values).eval());
      EigenResult ref = solver.solve_mu1(flipped, cfg.tol, cfg.max_iter);
      bool lhs_defined = neg.lambda.has_value();
      bool rhs_defined = ref.mu1_tilde > 0.0;
      if (lhs_defined != rhs_defined) {
        ok = false;
        detail = "definedness mismatch at draw " + std::to_string(k);
        break;
      }
      if (lhs_defined) {
        double a = *neg.lambda;
        double b = -1.0 / ref.mu1_tilde;
        if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), 1.0)) {
          ok = false;
          detail = fmtg(a) + " vs " + fmtg(b);
        }
      }
    }
    st.check("duality", ok, detail);
  }

  // the results row reports the canonical layout solve
  CellFunction rho = canonical_layout(g, st.cls);
  EigenResult eig = solver.solve_mu1(rho, cfg.tol, cfg.max_iter);
  SymmetrySummary sym = summarize_symmetry(rho, eig.eigenfunction);
  row.add("mu1", eig.mu1_tilde);
  row.add("lambda1", eig.lambda ? *eig.lambda : kNaN);
  row.add("lambda_neg1", kNaN);
  row.add("residual", eig.residual);
  row.add("iterations", static_cast<long>(eig.iterations));
  row.add_quoted("status", st.any_fail ? "fail" : "pass");
  row.add("characterization", kNaN);
  row.add("rho_sym_err", sym.rho_sym);
  row.add("u_sym_err", sym.u_sym);
  row.add("radial_defect", sym.radial_defect);
  row.add("bound", kNaN);
  row.add("bound_satisfied", kNaN);
  row.add("duality_gap", kNaN);
  row.add_quoted("distinct_lambdas", "");
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  RunState st(cfg);

  CsvRow row;
  row.add_quoted("mode", cfg.mode);
  row.add_quoted("domain", cfg.domain);
  row.add("s", cfg.s);
  row.add_quoted("weights", cfg.weights);
  row.add("tol", cfg.tol);
  row.add("max_iter", static_cast<long>(cfg.max_iter));
  row.add("restarts", static_cast<long>(cfg.restarts));
  row.add("seed", std::to_string(cfg.seed));
  row.add("n_active", static_cast<long>(st.grid->active_count()));
  row.add("h", st.grid->h());
  row.add("domain_measure", st.grid->domain_measure());

  if (cfg.mode == "solve")
    run_solve(cfg, st, row);
  else if (cfg.mode == "minimize")
    run_minimize(cfg, st, row);
  else if (cfg.mode == "maximize")
    run_maximize(cfg, st, row);
  else
    run_verify_suite(cfg, st, row);

  row.write(cfg.out_dir + "/results.csv");
  if (cfg.dump_matrix) dump_matrix_bin(cfg.out_dir + "/A.bin", st.op);

  std::ofstream report(cfg.out_dir + "/report.txt", std::ios::binary);
  report << config_echo(cfg) << "\n" << st.report.str();

  return st.any_fail ? 2 : 0;
}

int experiment_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    ExperimentConfig cfg = parse_config(args);
    if (cfg.help_requested) {
      std::cout << cfg.help_text;
      return 0;
    }
    return run_experiment(cfg);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fracopt

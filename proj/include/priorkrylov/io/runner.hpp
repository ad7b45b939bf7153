#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include "priorkrylov/analysis/spectra.hpp"
#include "priorkrylov/io/config.hpp"
#include "priorkrylov/io/output.hpp"
#include "priorkrylov/solvers/fgk.hpp"
#include "priorkrylov/solvers/psgkb.hpp"
#include "priorkrylov/solvers/psgks.hpp"
#include "priorkrylov/solvers/sgks.hpp"

namespace priorkrylov::io {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kInvalidConfig = 2, kSolverFailure = 3 };

struct RunOutcome {
  SolveResult result;
  double wall_time = 0.0;
  bool failed = false;
  std::string reason;
};

inline SolveResult run_method(const std::string& method, const SolverConfig& cfg, const ProblemInstance& p,
                              const Monitor& monitor) {
  const Vector x0 = Vector::Zero(p.A.cols());
  if (method == "gks" || method == "s-gks" || method == "res-s-gks" || method == "rec-s-gks") {
    return sgks_solve(p.A, p.psi, p.b, x0, cfg, monitor);
  }
  if (method == "ps-gks" || method == "res-ps-gks" || method == "rec-ps-gks") {
    return psgks_solve(p.A, p.psi, p.b, x0, cfg, monitor);
  }
  if (method == "ps-gkb") return psgkb_solve(p.A, p.psi, p.b, cfg, monitor);
  if (method == "fgk") return fgk_solve(p.A, p.psi, p.b, cfg, monitor);
  throw ConfigError("unknown method '" + method + "'");
}

/// Runs one configuration against an existing problem instance. Breakdowns
/// and numerical failures end up in the outcome rather than propagating.
inline RunOutcome execute(const RunConfig& cfg, const ProblemInstance& p) {
  RunOutcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    out.result = run_method(cfg.method, cfg.solver, p, p.monitor());
    if (out.result.termination == Termination::breakdown) {
      out.failed = true;
      out.reason = out.result.breakdown_reason;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    out.failed = true;
    out.reason = e.what();
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline Json summary_json(const RunConfig& cfg, const RunOutcome& o) {
  Json j;
  j["method"] = cfg.method;
  j["weights"] = cfg.weights_label;
  j["problem"] = {{"kind", cfg.problem.kind}, {"n", cfg.problem.n}, {"noise_level", cfg.problem.noise_level}};
  if (cfg.problem.kind == "dct1d") j["problem"]["m"] = cfg.problem.m;
  else j["problem"]["angles"] = cfg.problem.angles;
  j["seed"] = cfg.seed;
  std::string term = to_string(o.result.termination);
  if (o.failed && o.result.termination != Termination::breakdown) term = "error";
  j["termination"] = term;
  j["reason"] = o.reason;
  j["final"] = final_metrics(o.result.history);
  j["wall_time_s"] = o.wall_time;
  return j;
}

inline void write_run(const fs::path& dir, const RunConfig& cfg, const RunOutcome& o) {
  fs::create_directories(dir);
  write_history_csv(dir / "history.csv", o.result.history);
  write_json(dir / "summary.json", summary_json(cfg, o));
}

/// Worker count for batch commands, capped by PRIORKRYLOV_THREADS.
inline std::size_t thread_budget(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PRIORKRYLOV_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) n = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      // unparsable values leave the default in place
    }
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

template <class Fn>
void parallel_for(std::size_t jobs, Fn&& fn) {
  const std::size_t workers = thread_budget(jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline RunConfig load_run_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ConfigError("config file not found: " + path.string());
  return parse_run_config(read_json_file(path.string()));
}

inline int cmd_run(const fs::path& config_path, std::ostream& log = std::cerr) {
  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kInvalidConfig;
  }
  ProblemInstance p = build_problem(cfg.problem, cfg.seed);
  const RunOutcome o = execute(cfg, p);
  write_run(cfg.output_dir, cfg, o);
  if (o.failed) {
    log << "solver stopped: " << o.reason << '\n';
    return kSolverFailure;
  }
  return kOk;
}

/// Runs every *.json config in a directory on one shared problem instance.
inline int cmd_compare(const fs::path& dir, const fs::path& out_dir, std::ostream& log = std::cerr) {
  std::vector<fs::path> files;
  std::vector<RunConfig> cfgs;
  try {
    if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError("no .json configs in " + dir.string());
    for (const auto& f : files) cfgs.push_back(load_run_config(f));
    for (std::size_t i = 1; i < cfgs.size(); ++i) {
      if (!(cfgs[i].problem == cfgs[0].problem) || cfgs[i].seed != cfgs[0].seed) {
        throw ConfigError("problem or seed of " + files[i].filename().string() + " differs from " +
                          files[0].filename().string());
      }
    }
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kInvalidConfig;
  }

  const ProblemInstance p = build_problem(cfgs[0].problem, cfgs[0].seed);
  std::vector<RunOutcome> outcomes(cfgs.size());
  parallel_for(cfgs.size(), [&](std::size_t i) {
    outcomes[i] = execute(cfgs[i], p);
    write_run(cfgs[i].output_dir, cfgs[i], outcomes[i]);
  });

  std::map<std::string, int> seen;
  for (const auto& c : cfgs) ++seen[c.method];
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    labels.push_back(seen[cfgs[i].method] > 1 ? cfgs[i].method + "@" + files[i].stem().string() : cfgs[i].method);
  }

  fs::create_directories(out_dir);
  {
    std::ofstream m(out_dir / "compare_matrix.csv", std::ios::binary);
    m << "method,iterations,termination,rre,ssim,gini,kappa,mu,n_A,n_Psi,n_Psidag\n";
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
      const auto& h = outcomes[i].result.history;
      m << labels[i] << ',' << h.size() << ',' << to_string(outcomes[i].result.termination);
      if (h.empty()) {
        m << ",nan,nan,nan,nan,nan,0,0,0\n";
        continue;
      }
      const auto& r = h.back();
      m << ',' << fmt17(r.rre) << ',' << fmt17(r.ssim) << ',' << fmt17(r.gini) << ',' << fmt17(r.kappa) << ','
        << fmt17(r.mu) << ',' << r.n_A << ',' << r.n_Psi << ',' << r.n_Psidag << '\n';
    }
  }
  {
    std::ofstream l(out_dir / "compare_long.csv", std::ios::binary);
    l << "method,iter,metric,value\n";
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
      for (const auto& r : outcomes[i].result.history) {
        const std::pair<const char*, double> rows[] = {{"rre", r.rre},     {"ssim", r.ssim}, {"gini", r.gini},
                                                       {"kappa", r.kappa}, {"mu", r.mu}};
        for (const auto& [name, v] : rows) l << labels[i] << ',' << r.iter << ',' << name << ',' << fmt17(v) << '\n';
      }
    }
  }
  bool any_failed = false;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    if (outcomes[i].failed) {
      log << labels[i] << ": " << outcomes[i].reason << '\n';
      any_failed = true;
    }
  }
  return any_failed ? kSolverFailure : kOk;
}

inline std::vector<double> default_epsilon_grid() { return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

/// Final RRE and Gini for every (method, epsilon) pair. Methods default to the
/// one named in the base config.
inline int cmd_sweep_epsilon(const fs::path& base_path, const std::vector<double>& eps,
                             std::vector<std::string> methods, std::ostream& log = std::cerr) {
  RunConfig base;
  try {
    base = load_run_config(base_path);
    if (eps.empty()) throw ConfigError("empty epsilon list");
    for (double e : eps) {
      if (!(e > 0.0)) throw ConfigError("epsilon values must be positive");
    }
    if (!std::holds_alternative<MmWeights>(base.solver.weights)) {
      throw ConfigError("sweep-epsilon needs an MM weight scheme (mm1..mm4 or mm)");
    }
    if (methods.empty()) methods.push_back(base.method);
    for (const auto& m : methods) {
      if (!known_methods().count(m)) throw ConfigError("unknown method '" + m + "'");
      if (m == "gks") throw ConfigError("gks uses equal weights; epsilon has no effect");
    }
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kInvalidConfig;
  }

  const double p_exp = std::get<MmWeights>(base.solver.weights).p;
  struct Job {
    RunConfig cfg;
    double eps;
    fs::path dir;
  };
  std::vector<Job> jobs;
  for (const auto& m : methods) {
    for (std::size_t k = 0; k < eps.size(); ++k) {
      RunConfig c = base;
      c.method = m;
      c.solver.basis_mode = m.rfind("res-", 0) == 0   ? BasisMode::restart
                            : m.rfind("rec-", 0) == 0 ? BasisMode::recycle
                                                      : BasisMode::none;
      c.solver.weights = MmWeights{p_exp, eps[k]};
      c.weights_label = "mm(eps=" + fmt17(eps[k]) + ")";
      jobs.push_back({c, eps[k], fs::path(base.output_dir) / (m + "_eps" + std::to_string(k))});
    }
  }
  const ProblemInstance p = build_problem(base.problem, base.seed);
  std::vector<RunOutcome> outcomes(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    outcomes[i] = execute(jobs[i].cfg, p);
    write_run(jobs[i].dir, jobs[i].cfg, outcomes[i]);
  });
  fs::create_directories(base.output_dir);
  std::ofstream out(fs::path(base.output_dir) / "sweep_epsilon.csv", std::ios::binary);
  out << "method,epsilon,final_rre,final_gini\n";
  bool any_failed = false;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& h = outcomes[i].result.history;
    const double r = h.empty() ? std::nan("") : h.back().rre;
    const double g = h.empty() ? std::nan("") : h.back().gini;
    out << jobs[i].cfg.method << ',' << fmt17(jobs[i].eps) << ',' << fmt17(r) << ',' << fmt17(g) << '\n';
    if (outcomes[i].failed) {
      any_failed = true;
      log << jobs[i].cfg.method << " eps=" << jobs[i].eps << ": " << outcomes[i].reason << '\n';
    }
  }
  return any_failed ? kSolverFailure : kOk;
}

struct SpectraConfig {
  Index rows = 20;
  Index cols = 15;
  std::string transform = "neumann1d";
  Index nx = 0;
  Index ny = 0;
  std::string weight_kind = "log_uniform";
  double low = 1e-3;
  double high = 1e3;
  Index count_small = 3;
  double mu = 1.0;
  std::vector<std::string> theorems{"standard", "priorconditioned"};
  std::uint64_t seed = 0;
  std::string output_dir;
};

inline SpectraConfig parse_spectra_config(const Json& j) {
  detail::reject_unknown(j, {"spectra", "seed", "output_dir"}, "config");
  if (!j.contains("spectra")) throw ConfigError("config.spectra is required");
  const Json& s = j.at("spectra");
  detail::reject_unknown(s, {"rows", "cols", "transform", "grid", "weights", "mu", "theorems"}, "spectra");
  SpectraConfig c;
  c.rows = detail::get_or<Index>(s, "rows", 20);
  c.transform = detail::get_or<std::string>(s, "transform", "neumann1d");
  if (c.transform == "aniso2d") {
    if (!s.contains("grid") || !s.at("grid").is_array() || s.at("grid").size() != 2) {
      throw ConfigError("spectra.grid = [nx, ny] is required for aniso2d");
    }
    c.nx = s.at("grid")[0].get<Index>();
    c.ny = s.at("grid")[1].get<Index>();
    if (c.nx < 2 || c.ny < 2) throw ConfigError("spectra.grid entries must be >= 2");
    c.cols = c.nx * c.ny;
    if (s.contains("cols") && s.at("cols").get<Index>() != c.cols) throw ConfigError("spectra.cols must equal nx*ny");
  } else if (c.transform == "neumann1d" || c.transform == "dirichlet1d") {
    c.cols = detail::get_or<Index>(s, "cols", 15);
    if (s.contains("grid")) throw ConfigError("spectra.grid applies to aniso2d only");
  } else {
    throw ConfigError("spectra.transform must be neumann1d, dirichlet1d or aniso2d");
  }
  if (c.rows < 1 || c.cols < 2 || c.cols > 512) throw ConfigError("spectra sizes must satisfy rows >= 1, 2 <= cols <= 512");
  c.mu = detail::positive(detail::get_or<double>(s, "mu", 1.0), "spectra.mu");
  if (s.contains("weights")) {
    const Json& w = s.at("weights");
    detail::reject_unknown(w, {"kind", "low", "high", "count_small"}, "spectra.weights");
    c.weight_kind = detail::get_or<std::string>(w, "kind", "log_uniform");
    c.low = detail::positive(detail::get_or<double>(w, "low", 1e-3), "weights.low");
    c.high = detail::positive(detail::get_or<double>(w, "high", 1e3), "weights.high");
    c.count_small = detail::get_or<Index>(w, "count_small", 3);
    if (c.weight_kind != "log_uniform" && c.weight_kind != "two_scale") {
      throw ConfigError("spectra.weights.kind must be log_uniform or two_scale");
    }
    if (!(c.low <= c.high)) throw ConfigError("spectra.weights.low must not exceed high");
    if (c.count_small < 0) throw ConfigError("spectra.weights.count_small must be >= 0");
  }
  if (s.contains("theorems")) {
    c.theorems = detail::get_or<std::vector<std::string>>(s, "theorems", {});
    if (c.theorems.empty()) throw ConfigError("spectra.theorems must be non-empty");
    for (const auto& t : c.theorems) {
      if (t != "standard" && t != "priorconditioned") throw ConfigError("unknown theorem '" + t + "'");
    }
  }
  c.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
  c.output_dir = detail::get_or<std::string>(j, "output_dir", "");
  if (c.output_dir.empty()) throw ConfigError("config.output_dir is required");
  return c;
}

inline int cmd_spectra(const fs::path& config_path, std::ostream& log = std::cerr) {
  SpectraConfig c;
  try {
    if (!fs::is_regular_file(config_path)) throw ConfigError("config file not found: " + config_path.string());
    c = parse_spectra_config(read_json_file(config_path.string()));
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kInvalidConfig;
  }
  const SparsifyingTransform psi = c.transform == "aniso2d"     ? d2_aniso_neumann(c.nx, c.ny)
                                   : c.transform == "dirichlet1d" ? d1_dirichlet(c.cols)
                                                                  : d1_neumann(c.cols);
  CounterRng rng(c.seed, 0);
  const Matrix A = rng.normal_matrix(c.rows, c.cols);
  Vector w;
  if (c.weight_kind == "log_uniform") {
    w = rng.log_uniform_vector(psi.rows, c.low, c.high);
  } else {
    w = Vector::Constant(psi.rows, c.high);
    w.head(std::min(c.count_small, psi.rows)).setConstant(c.low);
  }
  fs::create_directories(c.output_dir);
  Json all = Json::object();
  for (const auto& t : c.theorems) {
    const BoundReport r =
        verify_theorem_bounds(t == "standard" ? Theorem::standard : Theorem::priorconditioned, A, psi, w, c.mu);
    all[t] = report_json(r);
    write_report_csv(fs::path(c.output_dir) / ("bounds_" + t + ".csv"), r);
    log << t << ": " << (r.pass ? "pass" : "FAIL") << " (" << r.violations << " violations)\n";
  }
  write_json(fs::path(c.output_dir) / "bounds.json", all);
  return kOk;
}

}  // namespace priorkrylov::io

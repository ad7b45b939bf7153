#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"
#include "priorkrylov/problems/problems.hpp"
#include "priorkrylov/solvers/types.hpp"

namespace priorkrylov::io {

using Json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemSpec {
  std::string kind = "dct1d";
  Index n = 1000;
  Index m = 50;
  Index angles = 28;
  double noise_level = 0.03;

  bool operator==(const ProblemSpec&) const = default;
};

struct RunConfig {
  ProblemSpec problem;
  std::string method = "ps-gks";
  SolverConfig solver;
  bool weights_given = false;
  std::string weights_label;
  std::uint64_t seed = 0;
  std::string output_dir;
  Json raw;
};

inline const std::set<std::string>& known_methods() {
  static const std::set<std::string> m{"gks",        "s-gks",     "res-s-gks", "rec-s-gks", "ps-gks",
                                       "res-ps-gks", "rec-ps-gks", "ps-gkb",    "fgk"};
  return m;
}

namespace detail {

inline void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
T get_or(const Json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("invalid value for '") + key + "'");
  }
}

inline double positive(double v, const char* what) {
  if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be positive");
  return v;
}

}  // namespace detail

/// Weight preset mirroring the method defaults of the reference comparison.
inline std::pair<WeightScheme, std::string> default_weights(const std::string& method, const std::string& kind) {
  if (method == "gks") return {EqualWeights{}, "equal"};
  if (method == "s-gks" || method == "rec-s-gks") return {mm_preset(2), "mm2"};
  if (method == "res-s-gks") return {mm_preset(1), "mm1"};
  if (method == "fgk") return kind == "ct2d" ? std::pair{mm_preset(2), std::string("mm2")} : std::pair{mm_preset(4), std::string("mm4")};
  return {mm_preset(3), "mm3"};
}

inline std::pair<WeightScheme, std::string> parse_weights(const Json& j) {
  detail::reject_unknown(j, {"scheme", "p", "epsilon", "tau1", "tau2", "r", "beta"}, "weights");
  if (!j.contains("scheme")) throw ConfigError("weights.scheme is required");
  const std::string s = detail::get_or<std::string>(j, "scheme", "");
  const double p = detail::get_or<double>(j, "p", 1.0);
  if (!(p > 0.0 && p < 2.0) && s != "equal" && s != "ias") throw ConfigError("weights.p must lie in (0, 2)");
  if (s == "equal") return {EqualWeights{}, s};
  if (s.size() == 3 && s.rfind("mm", 0) == 0 && s[2] >= '1' && s[2] <= '5') {
    if (j.contains("epsilon")) throw ConfigError("preset schemes fix epsilon; use scheme 'mm'");
    WeightScheme w = mm_preset(s[2] - '0');
    if (auto* mm = std::get_if<MmWeights>(&w)) mm->p = p;
    if (auto* m5 = std::get_if<Mm5Weights>(&w)) m5->p = p;
    return {w, s};
  }
  if (s == "mm") {
    const double eps = detail::positive(detail::get_or<double>(j, "epsilon", 1e-2), "weights.epsilon");
    return {MmWeights{p, eps}, "mm"};
  }
  if (s == "mm5") {
    return {Mm5Weights{p, detail::get_or<double>(j, "tau1", 1e-10), detail::get_or<double>(j, "tau2", 1e-16)}, s};
  }
  if (s == "ias") {
    const double r = detail::get_or<double>(j, "r", -1.0);
    const double beta = detail::positive(detail::get_or<double>(j, "beta", 1.0), "weights.beta");
    if (r == 0.0) throw ConfigError("weights.r must be nonzero");
    return {IasWeights{r, beta}, "ias"};
  }
  throw ConfigError("unknown weight scheme '" + s + "'");
}

inline ProblemSpec parse_problem(const Json& j) {
  detail::reject_unknown(j, {"kind", "n", "m", "angles", "noise_level"}, "problem");
  ProblemSpec p;
  p.kind = detail::get_or<std::string>(j, "kind", "");
  if (p.kind == "dct1d") {
    p.n = detail::get_or<Index>(j, "n", 1000);
    p.m = detail::get_or<Index>(j, "m", 50);
    p.noise_level = detail::get_or<double>(j, "noise_level", 0.03);
    if (j.contains("angles")) throw ConfigError("problem.angles applies to ct2d only");
    if (p.n < 2 || p.m < 1 || p.m > p.n) throw ConfigError("dct1d requires 1 <= m <= n, n >= 2");
  } else if (p.kind == "ct2d") {
    p.n = detail::get_or<Index>(j, "n", 64);
    p.angles = detail::get_or<Index>(j, "angles", 28);
    p.noise_level = detail::get_or<double>(j, "noise_level", 0.01);
    p.m = 0;
    if (j.contains("m")) throw ConfigError("problem.m applies to dct1d only");
    if (p.n < 16 || p.angles < 1) throw ConfigError("ct2d requires n >= 16 and angles >= 1");
  } else {
    throw ConfigError("problem.kind must be 'dct1d' or 'ct2d'");
  }
  detail::positive(p.noise_level, "problem.noise_level");
  return p;
}

inline PinvStrategy parse_pinv(const Json& j) {
  detail::reject_unknown(j, {"strategy", "delta", "tol", "max_iters"}, "method.pinv");
  const std::string s = detail::get_or<std::string>(j, "strategy", "dense");
  try {
    if (s == "dense") return PinvStrategy::dense();
    if (s == "delta") return PinvStrategy::delta_regularized(detail::get_or<double>(j, "delta", 1e-10));
    if (s == "pcg_dct")
      return PinvStrategy::pcg_dct(detail::get_or<double>(j, "tol", 1e-8), detail::get_or<int>(j, "max_iters", 500));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown pinv strategy '" + s + "'");
}

inline RunConfig parse_run_config(const Json& j) {
  detail::reject_unknown(j, {"problem", "method", "weights", "seed", "output_dir"}, "config");
  RunConfig c;
  c.raw = j;
  if (!j.contains("problem")) throw ConfigError("config.problem is required");
  if (!j.contains("method")) throw ConfigError("config.method is required");
  c.problem = parse_problem(j.at("problem"));
  const Json& m = j.at("method");
  detail::reject_unknown(m, {"name", "max_iter", "h", "reorthogonalize", "stop_tol", "d_min", "d_max", "pinv", "dp"},
                         "method");
  c.method = detail::get_or<std::string>(m, "name", "");
  if (!known_methods().count(c.method)) throw ConfigError("unknown method '" + c.method + "'");
  SolverConfig& s = c.solver;
  s.max_iter = detail::get_or<int>(m, "max_iter", c.problem.kind == "ct2d" ? 100 : 150);
  s.h = detail::get_or<Index>(m, "h", 5);
  s.reorthogonalize = detail::get_or<bool>(m, "reorthogonalize", true);
  s.stop_tol = detail::get_or<double>(m, "stop_tol", 0.0);
  s.d_min = detail::get_or<Index>(m, "d_min", 15);
  s.d_max = detail::get_or<Index>(m, "d_max", 25);
  if (s.max_iter < 1) throw ConfigError("method.max_iter must be >= 1");
  if (s.h < 1) throw ConfigError("method.h must be >= 1");
  if (s.stop_tol < 0.0) throw ConfigError("method.stop_tol must be >= 0");
  if (c.method.rfind("res-", 0) == 0) s.basis_mode = BasisMode::restart;
  if (c.method.rfind("rec-", 0) == 0) s.basis_mode = BasisMode::recycle;
  if (s.basis_mode != BasisMode::none && !(1 <= s.d_min && s.d_min < s.d_max)) {
    throw ConfigError("method requires 1 <= d_min < d_max");
  }
  if (m.contains("dp")) {
    const Json& d = m.at("dp");
    detail::reject_unknown(d, {"tau", "mu_min", "mu_max", "fallback"}, "method.dp");
    s.dp.tau = detail::positive(detail::get_or<double>(d, "tau", 1.01), "dp.tau");
    s.dp.mu_min = detail::positive(detail::get_or<double>(d, "mu_min", 1e-7), "dp.mu_min");
    s.dp.mu_max = detail::positive(detail::get_or<double>(d, "mu_max", 1e7), "dp.mu_max");
    if (!(s.dp.mu_min < s.dp.mu_max)) throw ConfigError("dp.mu_min must be below dp.mu_max");
    const auto fb = detail::get_or<std::string>(d, "fallback", "mu_min");
    if (fb == "mu_min") {
      s.dp.fallback = DpFallback::mu_min;
    } else if (fb == "split") {
      s.dp.fallback = DpFallback::split;
    } else {
      throw ConfigError("dp.fallback must be mu_min or split");
    }
  }
  const Index n_unknowns = c.problem.kind == "ct2d" ? c.problem.n * c.problem.n : c.problem.n;
  if (m.contains("pinv")) {
    s.pinv = parse_pinv(m.at("pinv"));
  } else if (c.problem.kind == "ct2d" && n_unknowns > 2000) {
    // Strongly varying weights need far more than 500 PCG steps on the CT grid.
    s.pinv = PinvStrategy::pcg_dct(1e-8, 5000);
  }
  if (s.pinv.kind == PinvStrategy::Kind::PcgDct && c.problem.kind != "ct2d") {
    throw ConfigError("pcg_dct requires the 2D gradient (ct2d)");
  }
  if (j.contains("weights")) {
    auto [w, label] = parse_weights(j.at("weights"));
    s.weights = w;
    c.weights_label = label;
    c.weights_given = true;
  } else {
    auto [w, label] = default_weights(c.method, c.problem.kind);
    s.weights = w;
    c.weights_label = label;
  }
  c.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
  s.seed = c.seed;
  if (!j.contains("output_dir")) throw ConfigError("config.output_dir is required");
  c.output_dir = detail::get_or<std::string>(j, "output_dir", "");
  if (c.output_dir.empty()) throw ConfigError("config.output_dir must be non-empty");
  return c;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed JSON in ") + path + ": " + e.what());
  }
}

inline ProblemInstance build_problem(const ProblemSpec& p, std::uint64_t seed) {
  if (p.kind == "dct1d") return make_1d_dct_problem(p.n, p.m, p.noise_level, seed);
  return make_ct_problem(p.n, p.angles, p.noise_level, seed);
}

}  // namespace priorkrylov::io

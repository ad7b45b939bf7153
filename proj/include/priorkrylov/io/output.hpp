#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "priorkrylov/analysis/spectra.hpp"
#include "priorkrylov/solvers/types.hpp"

namespace priorkrylov::io {

/// Shortest text that round-trips a double: 17 significant digits.
inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const std::vector<std::string>& history_columns() {
  static const std::vector<std::string> cols{"iter",  "mu",  "basis_dim", "rre",      "ssim",         "gini",
                                             "kappa", "n_A", "n_Psi",     "n_Psidag", "dp_root_found"};
  return cols;
}

inline void write_history_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& history) {
  std::ofstream out(path, std::ios::binary);
  const auto& cols = history_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const IterationRecord& h : history) {
    out << h.iter << ',' << fmt17(h.mu) << ',' << h.basis_dim << ',' << fmt17(h.rre) << ',' << fmt17(h.ssim) << ','
        << fmt17(h.gini) << ',' << fmt17(h.kappa) << ',' << h.n_A << ',' << h.n_Psi << ',' << h.n_Psidag << ','
        << (h.dp_root_found ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

/// JSON null for non-finite values, which JSON cannot represent.
inline nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

inline nlohmann::json final_metrics(const std::vector<IterationRecord>& history) {
  nlohmann::json j = nlohmann::json::object();
  if (history.empty()) return j;
  const IterationRecord& h = history.back();
  j["iterations"] = h.iter;
  j["mu"] = num(h.mu);
  j["rre"] = num(h.rre);
  j["ssim"] = num(h.ssim);
  j["gini"] = num(h.gini);
  j["kappa"] = num(h.kappa);
  j["basis_dim"] = h.basis_dim;
  j["n_A"] = h.n_A;
  j["n_Psi"] = h.n_Psi;
  j["n_Psidag"] = h.n_Psidag;
  j["dp_root_found"] = h.dp_root_found;
  return j;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

inline nlohmann::json report_json(const BoundReport& r) {
  nlohmann::json j;
  j["theorem"] = r.which;
  j["pass"] = r.pass;
  j["violations"] = r.violations;
  j["R"] = r.R;
  j["c1"] = num(r.c1);
  j["c2"] = num(r.c2);
  j["scale"] = num(r.scale);
  j["slack"] = r.slack;
  auto& e = j["entries"] = nlohmann::json::array();
  for (const BoundEntry& b : r.entries) e.push_back({{"i", b.i}, {"lambda", b.lambda}, {"lower", b.lower}, {"upper", b.upper}});
  return j;
}

inline void write_report_csv(const std::filesystem::path& path, const BoundReport& r) {
  std::ofstream out(path, std::ios::binary);
  out << "i,lambda,lower,upper\n";
  for (const BoundEntry& b : r.entries) {
    out << b.i << ',' << fmt17(b.lambda) << ',' << fmt17(b.lower) << ',' << fmt17(b.upper) << '\n';
  }
}

}  // namespace priorkrylov::io

#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "priorkrylov/io/runner.hpp"

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument(item);
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  namespace pio = priorkrylov::io;
  CLI::App app{"Priorconditioned generalized Krylov solvers for sparse reconstruction"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "Run one configuration, writing history.csv and summary.json");
  run->add_option("config", config, "JSON run configuration")->required();

  std::string dir;
  std::string out_dir;
  auto* compare = app.add_subcommand("compare", "Run every config in a directory on a shared problem");
  compare->add_option("dir", dir, "Directory of JSON run configurations")->required();
  compare->add_option("--out", out_dir, "Where the comparison CSVs go (default: <dir>/compare)");

  std::string eps_text = "1e-1,1e-2,1e-3,1e-4,1e-5,1e-6";
  std::string methods_text;
  auto* sweep = app.add_subcommand("sweep-epsilon", "Final RRE and Gini index across MM epsilon values");
  sweep->add_option("config", config, "Base JSON run configuration (MM weights)")->required();
  sweep->add_option("--eps", eps_text, "Comma-separated epsilon values");
  sweep->add_option("--methods", methods_text, "Comma-separated method tags (default: the config's method)");

  auto* spectra = app.add_subcommand("spectra", "Check the eigenvalue bounds on a random dense instance");
  spectra->add_option("config", config, "JSON spectra configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pio::kInvalidConfig;
  }

  try {
    if (*run) return pio::cmd_run(config);
    if (*compare) return pio::cmd_compare(dir, out_dir.empty() ? std::filesystem::path(dir) / "compare" : std::filesystem::path(out_dir));
    if (*sweep) {
      std::vector<double> eps;
      try {
        eps = parse_list(eps_text);
      } catch (const std::exception&) {
        std::cerr << "error: malformed --eps list\n";
        return pio::kInvalidConfig;
      }
      return pio::cmd_sweep_epsilon(config, eps, split(methods_text));
    }
    if (*spectra) return pio::cmd_spectra(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pio::kSolverFailure;
  }
  return 0;
}

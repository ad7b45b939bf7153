#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "priorkrylov/core/types.hpp"

namespace fixtures {

inline std::string path(const std::string& name) { return std::string(PRIORKRYLOV_FIXTURE_DIR) + "/" + name; }

// Reads a numeric CSV (comma or newline separated) row by row into a flat vector.
inline priorkrylov::Vector read_flat(const std::string& name) {
  std::ifstream in(path(name));
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::vector<double> vals;
  std::string line;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty()) vals.push_back(std::stod(cell));
    }
  }
  return Eigen::Map<priorkrylov::Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace fixtures

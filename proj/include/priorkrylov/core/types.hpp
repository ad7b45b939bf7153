#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace priorkrylov {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class ZeroSeed : public Error {
 public:
  using Error::Error;
};

class SingularKernelImage : public Error {
 public:
  using Error::Error;
};

class DegenerateUpdate : public Error {
 public:
  using Error::Error;
};

class ZeroTruth : public Error {
 public:
  using Error::Error;
};

class ZeroVector : public Error {
 public:
  using Error::Error;
};

/// Raised by the PCG pseudoinverse when the iteration budget is exhausted.
class CgNoConvergence : public Error {
 public:
  CgNoConvergence(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Loss of a new independent direction inside an expansion step.
class Breakdown : public Error {
 public:
  using Error::Error;
};

class BasisStagnation : public Breakdown {
 public:
  using Breakdown::Breakdown;
};

class GkbBreakdown : public Breakdown {
 public:
  using Breakdown::Breakdown;
};

class FgkBreakdown : public Breakdown {
 public:
  using Breakdown::Breakdown;
};

}  // namespace priorkrylov

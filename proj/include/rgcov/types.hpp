#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace rgcov {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error taxonomy. Each kind maps onto a CLI exit-code class:
//   Domain/Data/Config -> bad input (exit 2, or 1 when the CLI parser itself rejects),
//   NearSingular/UnitRoot/NotDiagonalizable/ZeroVariance/Estimation -> numerical (exit 3),
//   Internal -> exit 4.
enum class ErrorKind {
  Domain,
  Data,
  Config,
  NearSingular,
  UnitRoot,
  NotDiagonalizable,
  ZeroVariance,
  Estimation,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  const char* kind_name() const noexcept {
    switch (kind_) {
      case ErrorKind::Domain:            return "domain";
      case ErrorKind::Data:              return "data";
      case ErrorKind::Config:            return "config";
      case ErrorKind::NearSingular:      return "near_singular";
      case ErrorKind::UnitRoot:          return "unit_root";
      case ErrorKind::NotDiagonalizable: return "not_diagonalizable";
      case ErrorKind::ZeroVariance:      return "zero_variance";
      case ErrorKind::Estimation:        return "estimation";
      case ErrorKind::Internal:          return "internal";
    }
    return "internal";
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw_error(kind, message);
}

}  // namespace rgcov

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mpgsa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised when a numerical routine cannot produce a meaningful result
/// (rank-deficient retraction, singular systems, non-converged iterations).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a problem violates a standing assumption, e.g. g(x) <= 0.
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_shape(const Matrix& m, Index rows, Index cols,
                          const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw std::invalid_argument(std::string(what) + ": expected " +
                                std::to_string(rows) + "x" +
                                std::to_string(cols) + ", got " +
                                std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
  }
}

/// Symmetric part (M + M^T) / 2.
inline Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// splitmix64 finaliser; derives independent RNG streams from (seed, salt).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace mpgsa

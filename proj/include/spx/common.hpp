#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace spx {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Bad caller input: out-of-range argument, missing record, violated precondition.
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shape mismatch between matrices that must conform.
class DimensionError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

/// Numerical failure inside an optimization routine (singular system that
/// survives the ridge retry, non-finite gradient).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// splitmix64 finalizer. Used to derive independent sub-stream seeds from a
// root seed so that per-restart / per-image / per-episode streams never
// depend on execution order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(root) ^ a) ^ b);
}

}  // namespace spx

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vecext {

// Invalid parameter values (exponents outside (0,2], negative times, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Circulant embedding produced a significantly negative eigenvalue and no
// fallback applies.
class EmbeddingError : public std::runtime_error {
 public:
  EmbeddingError(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

// Error raised while preparing one coordinate of a vector process.
class CoordinateError : public std::runtime_error {
 public:
  CoordinateError(std::size_t index, const std::string& what)
      : std::runtime_error("coordinate " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// Orthant-union integral requested in a dimension/size the exact algorithms
// cannot handle.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vecext

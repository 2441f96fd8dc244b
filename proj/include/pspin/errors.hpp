#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pspin {

// Parameter outside its admissible range.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical evaluation produced a non-finite value.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hilbert-space dimension above the configured cap.
class capacity_error : public std::length_error {
 public:
  capacity_error(const std::string& what, std::size_t dimension, std::size_t cap)
      : std::length_error(what), dimension_(dimension), cap_(cap) {}
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t dimension_;
  std::size_t cap_;
};

// Iterative eigensolver gave up before reaching the residual target.
class solver_error : public std::runtime_error {
 public:
  solver_error(const std::string& what, int iterations, double residual)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}
  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

}  // namespace pspin

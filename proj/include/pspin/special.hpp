#pragma once

// Overflow-safe elementary pieces shared by the free-energy evaluators.

#include <cmath>
#include <limits>
#include <numbers>

namespace pspin {

// ln(2 cosh z) without overflow.
inline double log2cosh(double z) {
  const double a = std::fabs(z);
  return a + std::log1p(std::exp(-2.0 * a));
}

// (1/beta) ln(2 cosh(beta r)) for r >= 0; beta = inf gives r.
inline double thermal_amplitude(double r, double beta) {
  if (std::isinf(beta)) return r;
  return r + std::log1p(std::exp(-2.0 * beta * r)) / beta;
}

// tanh(beta r); beta = inf gives sign(r).
inline double thermal_polarization(double r, double beta) {
  if (std::isinf(beta)) return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
  return std::tanh(beta * r);
}

namespace detail {

// Power series is used below this argument, the Hankel expansion above it.
// At 30 the smallest asymptotic term is ~e^-60, far below double epsilon.
inline constexpr double bessel_switch = 30.0;

inline double bessel_series(double z, int order) {
  const double q = 0.25 * z * z;
  double term = order == 0 ? 1.0 : 0.5 * z;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (double(k) * double(k + order));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum * std::exp(-z);
}

inline double bessel_asymptotic(double z, int order) {
  const double mu = 4.0 * order * order;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * k * z);
    if (std::fabs(next) > std::fabs(term)) break;
    term = next;
    sum += term;
    if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

}  // namespace detail

// e^{-z} I0(z), z >= 0.
inline double bessel_i0_scaled(double z) {
  z = std::fabs(z);
  return z <= detail::bessel_switch ? detail::bessel_series(z, 0)
                                    : detail::bessel_asymptotic(z, 0);
}

// e^{-z} I1(z), z >= 0.
inline double bessel_i1_scaled(double z) {
  const double a = std::fabs(z);
  const double v = a <= detail::bessel_switch ? detail::bessel_series(a, 1)
                                              : detail::bessel_asymptotic(a, 1);
  return z < 0 ? -v : v;
}

// (1/beta) ln(2 pi I0(beta r)) for r >= 0.
inline double rotor_amplitude(double r, double beta) {
  const double z = beta * r;
  return (std::log(2.0 * std::numbers::pi) + z + std::log(bessel_i0_scaled(z))) / beta;
}

// I1(beta r)/I0(beta r).
inline double rotor_polarization(double r, double beta) {
  const double z = beta * r;
  if (z == 0.0) return 0.0;
  return bessel_i1_scaled(z) / bessel_i0_scaled(z);
}

}  // namespace pspin

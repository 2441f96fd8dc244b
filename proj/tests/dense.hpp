#pragma once

// Full 2^N Hamiltonian, diagonalized densely with LAPACK. Only for tests.

#include <lapacke.h>

#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dense {

// Two lowest eigenvalues of -s N (sum sigma^z / N)^p - sum_i gamma_i sigma^x_i.
inline std::array<double, 2> lowest_two(const std::vector<double>& gamma, double s, int p) {
  const int n = static_cast<int>(gamma.size());
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> h(dim * dim, 0.0);
  for (std::size_t a = 0; a < dim; ++a) {
    const int up = std::popcount(a);
    const double mz = double(2 * up - n) / n;
    h[a * dim + a] = -s * n * std::pow(mz, p);
    for (int i = 0; i < n; ++i) {
      const std::size_t b = a ^ (std::size_t{1} << i);
      h[a * dim + b] -= gamma[i];
    }
  }
  int found = 0;
  std::vector<double> w(dim);
  std::vector<lapack_int> support(2 * dim);
  const lapack_int info = LAPACKE_dsyevr(LAPACK_ROW_MAJOR, 'N', 'I', 'U', static_cast<lapack_int>(dim), h.data(),
                                         static_cast<lapack_int>(dim), 0.0, 0.0, 1, dim > 1 ? 2 : 1, 0.0, &found,
                                         w.data(), nullptr, 1, support.data());
  if (info != 0) throw std::runtime_error("dsyevr failed");
  return {w[0], dim > 1 ? w[1] : w[0]};
}

}  // namespace dense

#include "rst_kernel.hpp"

#include <cmath>

namespace topocmp::detail {

double rst_log_partition(const double* base, double alpha, const double* log_kde,
                         const double* dist, const double* theta, std::size_t K,
                         std::size_t count, double* scratch) {
  for (std::size_t q = 0; q < count; ++q) scratch[q] = base[q] + alpha * log_kde[q];
  for (std::size_t k = 0; k < K; ++k) {
    const double t = theta[k];
    const double* d = dist + k * count;
    for (std::size_t q = 0; q < count; ++q) scratch[q] -= t * d[q];
  }
  double m = scratch[0];
  for (std::size_t q = 1; q < count; ++q) m = scratch[q] > m ? scratch[q] : m;
  double sum = 0.0;
  for (std::size_t q = 0; q < count; ++q) sum += std::exp(scratch[q] - m);
  return m + std::log(sum);
}

}  // namespace topocmp::detail

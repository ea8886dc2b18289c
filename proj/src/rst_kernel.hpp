#pragma once

#include <cstddef>

namespace topocmp::detail {

// log sum_q exp(base[q] + alpha * log_kde[q] - sum_k theta[k] * dist[k * count + q])
// with all inputs finite. `scratch` has room for `count` values and receives
// the exponents. Compiled with value-unsafe math flags so the exp loop
// vectorizes; callers must not pass infinities or NaNs.
double rst_log_partition(const double* base, double alpha, const double* log_kde,
                         const double* dist, const double* theta, std::size_t K,
                         std::size_t count, double* scratch);

}  // namespace topocmp::detail

#include "gridlock/kernels/idm_batch.hpp"

namespace gridlock::kernels {

void idm_batch_scalar(const double* v, const double* dv, const double* gap,
                      double* accel, std::size_t n, const IdmCoefficients& k) {
  for (std::size_t i = 0; i < n; ++i) {
    accel[i] = idm_acceleration_unchecked(v[i], dv[i], gap[i], k);
  }
}

}  // namespace gridlock::kernels

#pragma once

#include <cstddef>

#include "gridlock/idm.hpp"

// Batch evaluation of the car-following acceleration over per-lane arrays.
// This is the arithmetic inner loop of the simulator: one call per lane per
// time step. A scalar reference kernel always exists; on x86-64 an AVX2
// variant is selected at runtime. Both variants perform the same IEEE
// operation sequence (no FMA), so their outputs are bit-identical; the test
// suite asserts exact equality.

namespace gridlock::kernels {

using IdmBatchFn = void (*)(const double* v, const double* dv, const double* gap,
                            double* accel, std::size_t n, const IdmCoefficients& k);

/// Reference implementation; one idm_acceleration_unchecked per element.
void idm_batch_scalar(const double* v, const double* dv, const double* gap,
                      double* accel, std::size_t n, const IdmCoefficients& k);

#if defined(__x86_64__) || defined(_M_X64)
/// 4-wide AVX2 variant with a scalar tail. Only call when avx2_supported().
void idm_batch_avx2(const double* v, const double* dv, const double* gap,
                    double* accel, std::size_t n, const IdmCoefficients& k);
#endif

bool avx2_supported();

/// Kernel chosen once per process: AVX2 when the CPU has it, else scalar.
/// GRIDLOCK_KERNEL=scalar|avx2 overrides the choice (an unsupported request
/// falls back to scalar with a warning).
IdmBatchFn active_idm_batch();

/// Name of the kernel active_idm_batch() returns ("scalar" or "avx2").
const char* active_idm_batch_name();

}  // namespace gridlock::kernels

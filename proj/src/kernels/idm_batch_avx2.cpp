#include "gridlock/kernels/idm_batch.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace gridlock::kernels {

// Mirrors idm_acceleration_unchecked operation for operation. No FMA: the
// scalar path compiles with contraction off, and keeping plain mul/add here
// is what makes the two kernels bit-identical.
void idm_batch_avx2(const double* v, const double* dv, const double* gap,
                    double* accel, std::size_t n, const IdmCoefficients& k) {
  const __m256d va = _mm256_set1_pd(k.a);
  const __m256d vs0 = _mm256_set1_pd(k.s0);
  const __m256d vT = _mm256_set1_pd(k.T);
  const __m256d vinv_v0 = _mm256_set1_pd(k.inv_v0);
  const __m256d vinv_ab = _mm256_set1_pd(k.inv_2_sqrt_ab);
  const __m256d one = _mm256_set1_pd(1.0);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vv = _mm256_loadu_pd(v + i);
    const __m256d vdv = _mm256_loadu_pd(dv + i);
    const __m256d vgap = _mm256_loadu_pd(gap + i);

    // s* = s0 + v*T + (v*dv) * inv_2_sqrt_ab, floored at s0
    __m256d s_star = _mm256_add_pd(vs0, _mm256_mul_pd(vv, vT));
    s_star = _mm256_add_pd(s_star, _mm256_mul_pd(_mm256_mul_pd(vv, vdv), vinv_ab));
    s_star = _mm256_max_pd(s_star, vs0);

    const __m256d vr = _mm256_mul_pd(vv, vinv_v0);
    const __m256d vr2 = _mm256_mul_pd(vr, vr);
    const __m256d vr4 = _mm256_mul_pd(vr2, vr2);
    const __m256d sr = _mm256_div_pd(s_star, vgap);

    __m256d out = _mm256_sub_pd(_mm256_sub_pd(one, vr4), _mm256_mul_pd(sr, sr));
    out = _mm256_mul_pd(va, out);
    _mm256_storeu_pd(accel + i, out);
  }
  for (; i < n; ++i) {
    accel[i] = idm_acceleration_unchecked(v[i], dv[i], gap[i], k);
  }
}

}  // namespace gridlock::kernels

#endif  // x86-64

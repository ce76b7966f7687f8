#include <cstdlib>
#include <cstring>

#include "gridlock/kernels/idm_batch.hpp"
#include "gridlock/log.hpp"

namespace gridlock::kernels {

bool avx2_supported() {
#if defined(GRIDLOCK_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

namespace {

struct Selection {
  IdmBatchFn fn;
  const char* name;
};

Selection select() {
  const char* request = std::getenv("GRIDLOCK_KERNEL");
  if (request != nullptr) {
    if (std::strcmp(request, "scalar") == 0) {
      return {idm_batch_scalar, "scalar"};
    }
#if defined(GRIDLOCK_HAVE_AVX2_TU)
    if (std::strcmp(request, "avx2") == 0) {
      if (avx2_supported()) return {idm_batch_avx2, "avx2"};
      log_warn("GRIDLOCK_KERNEL=avx2 requested but CPU lacks AVX2; using scalar");
      return {idm_batch_scalar, "scalar"};
    }
#endif
    log_warn(std::string("unknown GRIDLOCK_KERNEL value '") + request +
             "'; using automatic selection");
  }
#if defined(GRIDLOCK_HAVE_AVX2_TU)
  if (avx2_supported()) return {idm_batch_avx2, "avx2"};
#endif
  return {idm_batch_scalar, "scalar"};
}

const Selection& cached() {
  static const Selection selection = select();
  return selection;
}

}  // namespace

IdmBatchFn active_idm_batch() { return cached().fn; }

const char* active_idm_batch_name() { return cached().name; }

}  // namespace gridlock::kernels

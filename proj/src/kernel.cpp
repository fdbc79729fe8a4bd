#include "clf/kernel.hpp"

#include <cstring>
#include <stdexcept>

namespace clf {

bool avx2_available() {
#if defined(__x86_64__) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

CorrelateFn correlate_kernel(Kernel k) {
  switch (k) {
    case Kernel::scalar:
      return &correlate_scalar;
    case Kernel::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      if (avx2_available()) return &correlate_avx2;
#endif
      throw std::runtime_error("avx2 kernel requested but the CPU does not support it");
    case Kernel::auto_detect:
    default:
#if defined(__x86_64__) || defined(_M_X64)
      if (avx2_available()) return &correlate_avx2;
#endif
      return &correlate_scalar;
  }
}

const char* kernel_name(CorrelateFn fn) {
#if defined(__x86_64__) || defined(_M_X64)
  if (fn == &correlate_avx2) return "avx2";
#endif
  if (fn == &correlate_scalar) return "scalar";
  return "unknown";
}

Kernel kernel_from_name(const char* name) {
  if (!std::strcmp(name, "scalar")) return Kernel::scalar;
  if (!std::strcmp(name, "avx2")) return Kernel::avx2;
  if (!std::strcmp(name, "auto")) return Kernel::auto_detect;
  throw std::runtime_error(std::string("unknown kernel name: ") + name);
}

}  // namespace clf

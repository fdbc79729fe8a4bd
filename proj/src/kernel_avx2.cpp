// Compiled with -mavx2 only; callers must gate on avx2_available().

#include "clf/kernel.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <bit>

namespace clf {

namespace {

// AVX2 has no unsigned 64-bit compare; flip the sign bit and use the signed one.
inline __m256i cmpgt_u64(__m256i a, __m256i b) {
  const __m256i sign = _mm256_set1_epi64x(std::int64_t(0x8000000000000000ull));
  return _mm256_cmpgt_epi64(_mm256_xor_si256(a, sign), _mm256_xor_si256(b, sign));
}

}  // namespace

std::uint32_t correlate_avx2(const std::uint64_t* coords, const std::uint64_t* tqs,
                             std::size_t n, std::uint64_t coord_ref, std::uint64_t d_th,
                             std::uint64_t tq_now, std::uint64_t tq_mask,
                             std::uint64_t tth_ticks) {
  const std::uint64_t lo = coord_ref - d_th;
  const __m256i vlo = _mm256_set1_epi64x(std::int64_t(lo));
  const __m256i vspan = _mm256_set1_epi64x(std::int64_t(2 * d_th));
  const __m256i vnow = _mm256_set1_epi64x(std::int64_t(tq_now));
  const __m256i vmask = _mm256_set1_epi64x(std::int64_t(tq_mask));
  const __m256i vtth = _mm256_set1_epi64x(std::int64_t(tth_ticks));

  std::uint32_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i vc = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(coords + i));
    const __m256i vt = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(tqs + i));
    const __m256i sdiff = _mm256_sub_epi64(vc, vlo);
    const __m256i tdiff = _mm256_and_si256(_mm256_sub_epi64(vnow, vt), vmask);
    // A lane fails if either difference exceeds its bound.
    const __m256i bad = _mm256_or_si256(cmpgt_u64(sdiff, vspan), cmpgt_u64(tdiff, vtth));
    const int keep = ~_mm256_movemask_pd(_mm256_castsi256_pd(bad)) & 0xf;
    count += std::uint32_t(std::popcount(unsigned(keep)));
  }
  if (i < n) count += correlate_scalar(coords + i, tqs + i, n - i, coord_ref, d_th, tq_now, tq_mask, tth_ticks);
  return count;
}

}  // namespace clf

#endif  // x86_64

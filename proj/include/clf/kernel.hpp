#pragma once

#include <cstddef>
#include <cstdint>

namespace clf {

// Inner loop of the correlation count. Counts slots i in [0, n) with
//
//   (coords[i] - coord_ref + d_th) mod 2^64  <=  2*d_th          (spatial)
//   (tq_now - tqs[i]) & tq_mask              <=  tth_ticks       (temporal)
//
// The spatial form is the branch-free |coords[i] - coord_ref| <= d_th for
// values far below 2^63; empty slots carry a sentinel coordinate (2^40) that
// can never satisfy it. tq_mask folds the stored-timestamp bitwidth into the
// subtraction so wraparound behaves like the reduced-width hardware counter.
using CorrelateFn = std::uint32_t (*)(const std::uint64_t* coords, const std::uint64_t* tqs,
                                      std::size_t n, std::uint64_t coord_ref, std::uint64_t d_th,
                                      std::uint64_t tq_now, std::uint64_t tq_mask,
                                      std::uint64_t tth_ticks);

enum class Kernel { auto_detect, scalar, avx2 };

std::uint32_t correlate_scalar(const std::uint64_t* coords, const std::uint64_t* tqs,
                               std::size_t n, std::uint64_t coord_ref, std::uint64_t d_th,
                               std::uint64_t tq_now, std::uint64_t tq_mask,
                               std::uint64_t tth_ticks);

#if defined(__x86_64__) || defined(_M_X64)
std::uint32_t correlate_avx2(const std::uint64_t* coords, const std::uint64_t* tqs,
                             std::size_t n, std::uint64_t coord_ref, std::uint64_t d_th,
                             std::uint64_t tq_now, std::uint64_t tq_mask,
                             std::uint64_t tth_ticks);
#endif

bool avx2_available();

// Resolves a kernel choice to a callable; auto_detect picks the widest
// variant the CPU supports. Requesting avx2 on a CPU without it throws.
CorrelateFn correlate_kernel(Kernel k = Kernel::auto_detect);

const char* kernel_name(CorrelateFn fn);

Kernel kernel_from_name(const char* name);  // "auto" | "scalar" | "avx2"

}  // namespace clf

#include "clf/kernel.hpp"

namespace clf {

std::uint32_t correlate_scalar(const std::uint64_t* coords, const std::uint64_t* tqs,
                               std::size_t n, std::uint64_t coord_ref, std::uint64_t d_th,
                               std::uint64_t tq_now, std::uint64_t tq_mask,
                               std::uint64_t tth_ticks) {
  const std::uint64_t lo = coord_ref - d_th;  // wraps; the <= 2*d_th test absorbs it
  const std::uint64_t span = 2 * d_th;
  std::uint32_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool spatial = coords[i] - lo <= span;
    const bool temporal = ((tq_now - tqs[i]) & tq_mask) <= tth_ticks;
    count += std::uint32_t(spatial & temporal);
  }
  return count;
}

}  // namespace clf

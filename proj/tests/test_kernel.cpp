#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <vector>

#include "clf/filters.hpp"
#include "clf/kernel.hpp"
#include "clf/rng.hpp"
#include "doctest.h"

using namespace clf;

namespace {

// Plain-arithmetic reference: the predicate as written, no modular tricks.
std::uint32_t reference_count(const std::vector<std::uint64_t>& coords,
                              const std::vector<std::uint64_t>& tqs, std::uint64_t coord_ref,
                              std::uint64_t d_th, std::uint64_t tq_now, std::uint64_t tq_mask,
                              std::uint64_t tth_ticks) {
  std::uint32_t n = 0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const std::uint64_t hi = std::max(coords[i], coord_ref);
    const std::uint64_t lo = std::min(coords[i], coord_ref);
    const bool spatial = hi - lo <= d_th;
    const bool temporal = ((tq_now - tqs[i]) & tq_mask) <= tth_ticks;
    n += spatial && temporal;
  }
  return n;
}

struct Case {
  std::vector<std::uint64_t> coords, tqs;
  std::uint64_t coord_ref, d_th, tq_now, tq_mask, tth;
};

Case random_case(SplitMix64& rng) {
  Case c;
  const std::size_t n = rng.below(40);
  const std::uint32_t bw = 1 + std::uint32_t(rng.below(64));
  c.tq_mask = bw >= 64 ? ~0ull : (1ull << bw) - 1;
  c.d_th = rng.below(4) + 1;
  c.tth = rng.below(c.tq_mask < 4096 ? c.tq_mask + 1 : 4096);
  c.coord_ref = rng.below(2048) | (rng.coin() ? 1ull << 20 : 0);
  c.tq_now = rng.next() & c.tq_mask;
  for (std::size_t i = 0; i < n; ++i) {
    // Mix nearby coordinates, distant ones, polarity-offset keys and empty slots.
    const auto kind = rng.below(4);
    if (kind == 0) c.coords.push_back(ModuleMemory::kEmptyCoord);
    else if (kind == 1) c.coords.push_back((c.coord_ref & 0xffff) + rng.below(2 * c.d_th + 2));
    else c.coords.push_back(rng.below(2048) | (rng.coin() ? 1ull << 20 : 0));
    c.tqs.push_back(rng.next() & c.tq_mask);
  }
  return c;
}

}  // namespace

TEST_CASE("scalar kernel matches the plain predicate") {
  SplitMix64 rng(7);
  for (int iter = 0; iter < 2000; ++iter) {
    const Case c = random_case(rng);
    const std::uint32_t expect =
        reference_count(c.coords, c.tqs, c.coord_ref, c.d_th, c.tq_now, c.tq_mask, c.tth);
    const std::uint32_t got = correlate_scalar(c.coords.data(), c.tqs.data(), c.coords.size(),
                                               c.coord_ref, c.d_th, c.tq_now, c.tq_mask, c.tth);
    REQUIRE(got == expect);
  }
}

TEST_CASE("avx2 kernel matches scalar") {
  if (!avx2_available()) {
    MESSAGE("avx2 not available on this host; skipping");
    return;
  }
  SplitMix64 rng(11);
  for (int iter = 0; iter < 2000; ++iter) {
    const Case c = random_case(rng);
    const std::uint32_t scalar = correlate_scalar(c.coords.data(), c.tqs.data(), c.coords.size(),
                                                  c.coord_ref, c.d_th, c.tq_now, c.tq_mask, c.tth);
    const std::uint32_t vec = correlate_avx2(c.coords.data(), c.tqs.data(), c.coords.size(),
                                             c.coord_ref, c.d_th, c.tq_now, c.tq_mask, c.tth);
    REQUIRE(vec == scalar);
  }
}

TEST_CASE("kernel dispatch") {
  CHECK(correlate_kernel(Kernel::scalar) == &correlate_scalar);
  const CorrelateFn best = correlate_kernel();
  CHECK(kernel_name(best) == (avx2_available() ? doctest::String("avx2") : doctest::String("scalar")));
  CHECK(kernel_from_name("scalar") == Kernel::scalar);
  CHECK_THROWS(kernel_from_name("mmx"));
}

TEST_CASE("empty slots never match") {
  const std::vector<std::uint64_t> coords(8, ModuleMemory::kEmptyCoord);
  const std::vector<std::uint64_t> tqs(8, 0);
  // tq_now = 0 makes the temporal test pass for every slot; the sentinel must
  // still reject all of them.
  CHECK(correlate_scalar(coords.data(), tqs.data(), 8, 5, 1, 0, 0xff, 50) == 0);
}

TEST_CASE("reference coordinate at the sensor border") {
  // coord_ref 0 with d_th 1 makes the internal lower bound wrap below zero;
  // only coords 0 and 1 may match.
  const std::vector<std::uint64_t> coords{0, 1, 2, 2047, ModuleMemory::kEmptyCoord};
  const std::vector<std::uint64_t> tqs(coords.size(), 0);
  CHECK(correlate_scalar(coords.data(), tqs.data(), coords.size(), 0, 1, 0, 0xff, 10) == 2);
}

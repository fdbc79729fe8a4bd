#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "clf/events.hpp"
#include "clf/kernel.hpp"

namespace clf {

// ---------------------------------------------------------------------------
// Parameters

struct FilterParams {
  std::uint16_t d_th = 1;     // spatial threshold, pixels (Chebyshev radius)
  std::int64_t t_th_us = 200; // temporal threshold, microseconds
  std::uint32_t n_cr = 1;     // correlated-event count needed to pass
};

struct ClfConfig {
  FilterParams params;
  std::uint32_t n_rm = 4;   // row bank count (pipeline port model only)
  std::uint32_t n_cm = 4;   // column bank count
  std::uint32_t s_rm = 4;   // events per row block
  std::uint32_t s_cm = 4;   // events per column block
  std::uint32_t bw_t = 32;  // stored-timestamp bitwidth, 1..64
  std::int64_t quant_unit_us = 1;
  bool enable_rdm = true;
  bool enable_cdm = true;
  bool pipelined = false;
  bool same_polarity_only = false;

  std::uint64_t tq_mask() const { return bw_t >= 64 ? ~0ull : (1ull << bw_t) - 1; }
  // Tick threshold: ceil(t_th / quant_unit) admits every true difference <= t_th.
  std::uint64_t tth_ticks() const {
    return (std::uint64_t(params.t_th_us) + std::uint64_t(quant_unit_us) - 1) / std::uint64_t(quant_unit_us);
  }
  // Representable time span before the stored timestamp wraps (saturates at INT64_MAX).
  std::int64_t ts_span_us() const {
    const __int128 span = __int128(quant_unit_us) << (bw_t >= 63 ? 63 : bw_t);
    return span > INT64_MAX || bw_t >= 63 ? INT64_MAX : std::int64_t(span);
  }

  void validate() const;  // throws Error{config_invalid}, message names the invariant

  // Smallest power-of-two unit keeping t_th within a quarter of the wrap span,
  // so false positives from wraparound stay rare.
  static std::int64_t default_quant_unit(std::int64_t t_th_us, std::uint32_t bw_t);

  static ClfConfig rcf(FilterParams p);  // degenerate 1-bank, 1-slot configuration
};

// ---------------------------------------------------------------------------
// Address helpers (bank decomposition is a layout bijection: row = block*N + bank)

inline std::uint32_t bank_index(std::uint32_t line, std::uint32_t banks) { return line % banks; }
inline std::uint32_t block_index(std::uint32_t line, std::uint32_t banks) { return line / banks; }

// Bank count for an s-wide window: next power of two, so the bank id is just
// the low bits of the coordinate.
inline std::uint32_t required_banks(std::uint32_t window_side) { return std::bit_ceil(window_side); }

inline std::uint32_t ceil_log2(std::uint64_t v) {
  return v <= 1 ? 0u : std::uint32_t(std::bit_width(v - 1));
}

inline std::uint64_t quantize_ts(std::int64_t t_us, std::int64_t quant_unit_us, std::uint32_t bw_t) {
  const std::uint64_t mask = bw_t >= 64 ? ~0ull : (1ull << bw_t) - 1;
  return (std::uint64_t(t_us) / std::uint64_t(quant_unit_us)) & mask;
}

inline std::uint64_t wrapped_diff(std::uint64_t tq_now, std::uint64_t tq_stored, std::uint32_t bw_t) {
  const std::uint64_t mask = bw_t >= 64 ? ~0ull : (1ull << bw_t) - 1;
  return (tq_now - tq_stored) & mask;
}

// ---------------------------------------------------------------------------
// Storage

// One denoising module's memory: `lines` blocks (one per sensor row or column)
// of `slots` stored events each, FIFO-replaced via a per-block write pointer.
// Stored events are kept as parallel arrays so a window scan is one contiguous
// pass for the kernels; an empty slot holds kEmptyCoord, which no spatial test
// can match.
class ModuleMemory {
 public:
  static constexpr std::uint64_t kEmptyCoord = 1ull << 40;

  ModuleMemory() = default;
  ModuleMemory(std::uint32_t lines, std::uint32_t slots) { reset(lines, slots); }

  void reset(std::uint32_t lines, std::uint32_t slots);
  void clear();

  void write(std::uint32_t line, std::uint64_t coord_key, std::uint64_t tq) {
    const std::size_t at = std::size_t(line) * slots_ + wpt_[line];
    coords_[at] = coord_key;
    tqs_[at] = tq;
    wpt_[line] = wpt_[line] + 1 == slots_ ? 0 : wpt_[line] + 1;
  }

  std::uint32_t lines() const { return lines_; }
  std::uint32_t slots() const { return slots_; }
  std::uint32_t wpt(std::uint32_t line) const { return wpt_[line]; }

  std::span<const std::uint64_t> coords(std::uint32_t line_lo, std::uint32_t line_hi) const {
    return {coords_.data() + std::size_t(line_lo) * slots_, std::size_t(line_hi - line_lo + 1) * slots_};
  }
  std::span<const std::uint64_t> tqs(std::uint32_t line_lo, std::uint32_t line_hi) const {
    return {tqs_.data() + std::size_t(line_lo) * slots_, std::size_t(line_hi - line_lo + 1) * slots_};
  }

 private:
  std::vector<std::uint64_t> coords_;
  std::vector<std::uint64_t> tqs_;
  std::vector<std::uint32_t> wpt_;
  std::uint32_t lines_ = 0;
  std::uint32_t slots_ = 0;
};

// View of one memory block, as handed to the decision logic.
struct BlockView {
  std::span<const std::uint64_t> coords;
  std::span<const std::uint64_t> tqs;
};

// Polarity folded into the coordinate key: with an offset far above any pixel
// distance, opposite polarities can never be spatially close.
inline std::uint64_t coord_key(std::uint16_t coord, Polarity p, bool same_polarity_only) {
  return std::uint64_t(coord) | (same_polarity_only && p == Polarity::on ? 1ull << 20 : 0ull);
}

// Correlated-slot count for one block.
std::uint32_t edu_count(const BlockView& block, std::uint64_t coord_ref, std::uint64_t tq_now,
                        std::uint64_t d_th, std::uint64_t tth_ticks, std::uint32_t bw_t,
                        CorrelateFn kernel = nullptr);

// ---------------------------------------------------------------------------
// Decisions and the common streaming interface

struct Decision {
  bool is_signal = false;
  std::uint32_t count = 0;  // correlated events found

  friend bool operator==(const Decision&, const Decision&) = default;
};

class StreamFilter {
 public:
  virtual ~StreamFilter() = default;
  virtual Decision process(const Event& e) = 0;
  virtual void reset() = 0;
};

std::vector<Decision> run_filter(StreamFilter& filter, const EventStream& stream);

// ---------------------------------------------------------------------------
// The cache-like filter

class ClfFilter final : public StreamFilter {
 public:
  ClfFilter(SensorGeometry geometry, ClfConfig config, Kernel kernel = Kernel::auto_detect);

  Decision process(const Event& e) override;
  void reset() override;

  // Per-module window sums and block writes, exposed for the pipeline model.
  std::uint32_t scan_row_block(std::uint32_t row, const Event& e) const;
  std::uint32_t scan_col_block(std::uint32_t col, const Event& e) const;
  void commit(const Event& e);  // FIFO write into own row and column blocks

  const ClfConfig& config() const { return cfg_; }
  const SensorGeometry& geometry() const { return geo_; }
  const ModuleMemory& row_memory() const { return row_; }
  const ModuleMemory& col_memory() const { return col_; }
  const char* kernel() const;

 private:
  std::uint32_t scan_span(const ModuleMemory& mem, std::uint32_t center, std::uint32_t line_count,
                          std::uint64_t key, std::uint64_t tq) const;
  void check_range(const Event& e) const;

  SensorGeometry geo_;
  ClfConfig cfg_;
  ModuleMemory row_;  // blocks indexed by row, stores x
  ModuleMemory col_;  // blocks indexed by column, stores y
  std::uint64_t tq_mask_;
  std::uint64_t tth_ticks_;
  CorrelateFn kern_;
};

// ---------------------------------------------------------------------------
// Baseline filters

// Per-pixel timestamp map; an event passes if its own cell is fresh, then
// stamps its whole (2*d_th+1)^2 neighborhood.
class BafFilter final : public StreamFilter {
 public:
  BafFilter(SensorGeometry geometry, FilterParams params);
  Decision process(const Event& e) override;
  void reset() override;

 private:
  SensorGeometry geo_;
  FilterParams params_;
  std::vector<std::int64_t> last_t_;  // -1 = never written
};

// Per-pixel map with a count criterion: counts fresh cells over the whole
// neighborhood (center included), writes the own cell only.
class StcfFilter final : public StreamFilter {
 public:
  StcfFilter(SensorGeometry geometry, FilterParams params);
  Decision process(const Event& e) override;
  void reset() override;

 private:
  SensorGeometry geo_;
  FilterParams params_;
  std::vector<std::int64_t> last_t_;
};

// BafFilter on a subsampled grid: r x r pixels share one cell.
class SsmFilter final : public StreamFilter {
 public:
  SsmFilter(SensorGeometry geometry, FilterParams params, std::uint32_t r);
  Decision process(const Event& e) override;
  void reset() override;
  std::uint32_t cell_count() const;

 private:
  SensorGeometry geo_;
  std::uint32_t shift_;
  BafFilter coarse_;
};

// Reference implementation over the full event history. Counts every strictly
// earlier event (stream order breaks timestamp ties) within the window.
class OracleFilter final : public StreamFilter {
 public:
  OracleFilter(SensorGeometry geometry, FilterParams params, bool same_polarity_only = false);
  Decision process(const Event& e) override;
  void reset() override;

 private:
  SensorGeometry geo_;
  FilterParams params_;
  bool same_polarity_only_;
  std::vector<Event> history_;
};

inline ClfFilter make_rcf(SensorGeometry geometry, FilterParams params,
                          Kernel kernel = Kernel::auto_detect) {
  return ClfFilter(geometry, ClfConfig::rcf(params), kernel);
}

// ---------------------------------------------------------------------------
// Storage accounting

// Total stored bits: per line, s slots of (coordinate + timestamp + valid)
// plus the FIFO pointer; row terms use the column-coordinate width and vice
// versa. Disabled modules contribute nothing.
std::uint64_t memory_footprint_bits(const ClfConfig& config, const SensorGeometry& geometry);

}  // namespace clf

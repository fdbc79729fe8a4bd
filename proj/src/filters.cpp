#include "clf/filters.hpp"

#include <algorithm>
#include <string>

namespace clf {

// ---------------------------------------------------------------------------
// ClfConfig

void ClfConfig::validate() const {
  if (params.d_th < 1) throw Error(Errc::config_invalid, "D_th must be >= 1");
  if (params.t_th_us < 1) throw Error(Errc::config_invalid, "T_th must be >= 1 microsecond");
  if (params.n_cr < 1) throw Error(Errc::config_invalid, "N_CR must be >= 1");
  if (!enable_rdm && !enable_cdm)
    throw Error(Errc::config_invalid, "at least one of the row/column modules must be enabled");
  if (enable_rdm && s_rm < 1) throw Error(Errc::config_invalid, "s_RM must be >= 1 when the row module is enabled");
  if (enable_cdm && s_cm < 1)
    throw Error(Errc::config_invalid, "s_CM must be >= 1 when the column module is enabled");
  if (n_rm < 1 || n_cm < 1) throw Error(Errc::config_invalid, "bank counts must be >= 1");
  if (bw_t < 1 || bw_t > 64) throw Error(Errc::config_invalid, "BW_T must be in 1..64");
  if (quant_unit_us < 1) throw Error(Errc::config_invalid, "quant_unit must be >= 1 microsecond");
  if (bw_t < 64 && tth_ticks() > tq_mask())
    throw Error(Errc::config_invalid,
                "ceil(T_th/quant_unit) must be < 2^BW_T (correlation window not representable)");
  if (pipelined && params.n_cr != 1)
    throw Error(Errc::config_invalid, "pipelined mode requires N_CR = 1");
  if (pipelined && params.d_th != 1)
    throw Error(Errc::config_invalid, "pipelined mode requires D_th = 1");
}

std::int64_t ClfConfig::default_quant_unit(std::int64_t t_th_us, std::uint32_t bw_t) {
  if (bw_t >= 64) return 1;
  const std::uint64_t budget = bw_t >= 2 ? (1ull << (bw_t - 2)) : 1;
  std::int64_t unit = 1;
  while (std::uint64_t(t_th_us + unit - 1) / std::uint64_t(unit) > budget) unit <<= 1;
  return unit;
}

ClfConfig ClfConfig::rcf(FilterParams p) {
  ClfConfig c;
  c.params = p;
  c.n_rm = c.n_cm = 1;
  c.s_rm = c.s_cm = 1;
  c.bw_t = 64;
  c.quant_unit_us = 1;
  return c;
}

// ---------------------------------------------------------------------------
// ModuleMemory

void ModuleMemory::reset(std::uint32_t lines, std::uint32_t slots) {
  lines_ = lines;
  slots_ = slots;
  coords_.assign(std::size_t(lines) * slots, kEmptyCoord);
  tqs_.assign(std::size_t(lines) * slots, 0);
  wpt_.assign(lines, 0);
}

void ModuleMemory::clear() {
  std::fill(coords_.begin(), coords_.end(), kEmptyCoord);
  std::fill(tqs_.begin(), tqs_.end(), 0);
  std::fill(wpt_.begin(), wpt_.end(), 0u);
}

std::uint32_t edu_count(const BlockView& block, std::uint64_t coord_ref, std::uint64_t tq_now,
                        std::uint64_t d_th, std::uint64_t tth_ticks, std::uint32_t bw_t,
                        CorrelateFn kernel) {
  if (!kernel) kernel = correlate_kernel();
  const std::uint64_t mask = bw_t >= 64 ? ~0ull : (1ull << bw_t) - 1;
  return kernel(block.coords.data(), block.tqs.data(), block.coords.size(), coord_ref, d_th, tq_now,
                mask, tth_ticks);
}

// ---------------------------------------------------------------------------
// ClfFilter

ClfFilter::ClfFilter(SensorGeometry geometry, ClfConfig config, Kernel kernel)
    : geo_(geometry), cfg_(config) {
  validate_geometry(geo_);
  cfg_.validate();
  tq_mask_ = cfg_.tq_mask();
  tth_ticks_ = cfg_.tth_ticks();
  kern_ = correlate_kernel(kernel);
  if (cfg_.enable_rdm) row_.reset(geo_.height, cfg_.s_rm);
  if (cfg_.enable_cdm) col_.reset(geo_.width, cfg_.s_cm);
}

void ClfFilter::reset() {
  if (cfg_.enable_rdm) row_.clear();
  if (cfg_.enable_cdm) col_.clear();
}

const char* ClfFilter::kernel() const { return kernel_name(kern_); }

void ClfFilter::check_range(const Event& e) const {
  if (!geo_.contains(e.x, e.y))
    throw Error(Errc::event_out_of_range, "event at (" + std::to_string(e.x) + "," + std::to_string(e.y) +
                                              ") outside " + std::to_string(geo_.width) + "x" +
                                              std::to_string(geo_.height));
}

std::uint32_t ClfFilter::scan_span(const ModuleMemory& mem, std::uint32_t center,
                                   std::uint32_t line_count, std::uint64_t key, std::uint64_t tq) const {
  const std::uint32_t d = cfg_.params.d_th;
  const std::uint32_t lo = center >= d ? center - d : 0;             // out-of-range lines are
  const std::uint32_t hi = std::min(center + d, line_count - 1);     // skipped, not clamped
  const auto coords = mem.coords(lo, hi);
  const auto tqs = mem.tqs(lo, hi);
  return kern_(coords.data(), tqs.data(), coords.size(), key, d, tq, tq_mask_, tth_ticks_);
}

std::uint32_t ClfFilter::scan_row_block(std::uint32_t row, const Event& e) const {
  const std::uint64_t tq = quantize_ts(e.t, cfg_.quant_unit_us, cfg_.bw_t);
  const std::uint64_t key = coord_key(e.x, e.p, cfg_.same_polarity_only);
  const BlockView block{row_.coords(row, row), row_.tqs(row, row)};
  return kern_(block.coords.data(), block.tqs.data(), block.coords.size(), key, cfg_.params.d_th, tq,
               tq_mask_, tth_ticks_);
}

std::uint32_t ClfFilter::scan_col_block(std::uint32_t col, const Event& e) const {
  const std::uint64_t tq = quantize_ts(e.t, cfg_.quant_unit_us, cfg_.bw_t);
  const std::uint64_t key = coord_key(e.y, e.p, cfg_.same_polarity_only);
  const BlockView block{col_.coords(col, col), col_.tqs(col, col)};
  return kern_(block.coords.data(), block.tqs.data(), block.coords.size(), key, cfg_.params.d_th, tq,
               tq_mask_, tth_ticks_);
}

void ClfFilter::commit(const Event& e) {
  const std::uint64_t tq = quantize_ts(e.t, cfg_.quant_unit_us, cfg_.bw_t);
  if (cfg_.enable_rdm) row_.write(e.y, coord_key(e.x, e.p, cfg_.same_polarity_only), tq);
  if (cfg_.enable_cdm) col_.write(e.x, coord_key(e.y, e.p, cfg_.same_polarity_only), tq);
}

Decision ClfFilter::process(const Event& e) {
  check_range(e);
  const std::uint64_t tq = quantize_ts(e.t, cfg_.quant_unit_us, cfg_.bw_t);
  std::uint32_t count = 0;
  if (cfg_.enable_rdm)
    count += scan_span(row_, e.y, geo_.height, coord_key(e.x, e.p, cfg_.same_polarity_only), tq);
  if (cfg_.enable_cdm)
    count += scan_span(col_, e.x, geo_.width, coord_key(e.y, e.p, cfg_.same_polarity_only), tq);
  commit(e);  // unconditional FIFO replacement, signal or noise
  return {count >= cfg_.params.n_cr, count};
}

// ---------------------------------------------------------------------------
// BafFilter

BafFilter::BafFilter(SensorGeometry geometry, FilterParams params) : geo_(geometry), params_(params) {
  validate_geometry(geo_);
  if (params_.d_th < 1) throw Error(Errc::config_invalid, "D_th must be >= 1");
  if (params_.t_th_us < 1) throw Error(Errc::config_invalid, "T_th must be >= 1 microsecond");
  last_t_.assign(std::size_t(geo_.width) * geo_.height, -1);
}

void BafFilter::reset() { std::fill(last_t_.begin(), last_t_.end(), std::int64_t(-1)); }

Decision BafFilter::process(const Event& e) {
  if (!geo_.contains(e.x, e.y)) throw Error(Errc::event_out_of_range, "event outside geometry");
  const std::size_t own = std::size_t(e.y) * geo_.width + e.x;
  const std::int64_t seen = last_t_[own];
  const bool pass = seen >= 0 && e.t - seen <= params_.t_th_us;

  const int d = params_.d_th;
  const int x0 = std::max(0, int(e.x) - d), x1 = std::min(int(geo_.width) - 1, int(e.x) + d);
  const int y0 = std::max(0, int(e.y) - d), y1 = std::min(int(geo_.height) - 1, int(e.y) + d);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) last_t_[std::size_t(y) * geo_.width + x] = e.t;

  return {pass, pass ? 1u : 0u};
}

// ---------------------------------------------------------------------------
// StcfFilter

StcfFilter::StcfFilter(SensorGeometry geometry, FilterParams params) : geo_(geometry), params_(params) {
  validate_geometry(geo_);
  if (params_.n_cr < 1) throw Error(Errc::config_invalid, "N_CR must be >= 1");
  last_t_.assign(std::size_t(geo_.width) * geo_.height, -1);
}

void StcfFilter::reset() { std::fill(last_t_.begin(), last_t_.end(), std::int64_t(-1)); }

Decision StcfFilter::process(const Event& e) {
  if (!geo_.contains(e.x, e.y)) throw Error(Errc::event_out_of_range, "event outside geometry");
  const int d = params_.d_th;
  const int x0 = std::max(0, int(e.x) - d), x1 = std::min(int(geo_.width) - 1, int(e.x) + d);
  const int y0 = std::max(0, int(e.y) - d), y1 = std::min(int(geo_.height) - 1, int(e.y) + d);
  std::uint32_t count = 0;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const std::int64_t seen = last_t_[std::size_t(y) * geo_.width + x];
      count += seen >= 0 && e.t - seen <= params_.t_th_us;
    }
  last_t_[std::size_t(e.y) * geo_.width + e.x] = e.t;
  return {count >= params_.n_cr, count};
}

// ---------------------------------------------------------------------------
// SsmFilter

namespace {

SensorGeometry subsampled(SensorGeometry g, std::uint32_t r) {
  return {std::uint16_t((g.width + r - 1) / r), std::uint16_t((g.height + r - 1) / r)};
}

}  // namespace

SsmFilter::SsmFilter(SensorGeometry geometry, FilterParams params, std::uint32_t r)
    : geo_(geometry), shift_(0), coarse_(subsampled(geometry, std::has_single_bit(r) ? r : 1), params) {
  if (!std::has_single_bit(r)) throw Error(Errc::config_invalid, "subsample factor r must be a power of two");
  shift_ = std::uint32_t(std::countr_zero(r));
}

void SsmFilter::reset() { coarse_.reset(); }

std::uint32_t SsmFilter::cell_count() const {
  const auto g = subsampled(geo_, 1u << shift_);
  return g.pixels();
}

Decision SsmFilter::process(const Event& e) {
  if (!geo_.contains(e.x, e.y)) throw Error(Errc::event_out_of_range, "event outside geometry");
  Event sub = e;
  sub.x = std::uint16_t(e.x >> shift_);
  sub.y = std::uint16_t(e.y >> shift_);
  return coarse_.process(sub);
}

// ---------------------------------------------------------------------------
// OracleFilter

OracleFilter::OracleFilter(SensorGeometry geometry, FilterParams params, bool same_polarity_only)
    : geo_(geometry), params_(params), same_polarity_only_(same_polarity_only) {
  validate_geometry(geo_);
}

void OracleFilter::reset() { history_.clear(); }

Decision OracleFilter::process(const Event& e) {
  if (!geo_.contains(e.x, e.y)) throw Error(Errc::event_out_of_range, "event outside geometry");
  std::uint32_t count = 0;
  // History is time-ordered, so the scan can stop at the first event older
  // than t_th; everything before it is older still.
  for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
    if (e.t - it->t > params_.t_th_us) break;
    if (std::abs(int(e.x) - int(it->x)) > params_.d_th) continue;
    if (std::abs(int(e.y) - int(it->y)) > params_.d_th) continue;
    if (same_polarity_only_ && it->p != e.p) continue;
    ++count;
  }
  history_.push_back(e);
  return {count >= params_.n_cr, count};
}

// ---------------------------------------------------------------------------

std::vector<Decision> run_filter(StreamFilter& filter, const EventStream& stream) {
  std::vector<Decision> out;
  out.reserve(stream.size());
  for (const Event& e : stream.events) out.push_back(filter.process(e));
  return out;
}

std::uint64_t memory_footprint_bits(const ClfConfig& config, const SensorGeometry& geometry) {
  config.validate();
  validate_geometry(geometry);
  const std::uint64_t bw_x = ceil_log2(geometry.width);
  const std::uint64_t bw_y = ceil_log2(geometry.height);
  std::uint64_t bits = 0;
  if (config.enable_rdm) {
    bits += std::uint64_t(geometry.height) * config.s_rm * (bw_x + config.bw_t + 1);
    bits += std::uint64_t(geometry.height) * ceil_log2(config.s_rm);
  }
  if (config.enable_cdm) {
    bits += std::uint64_t(geometry.width) * config.s_cm * (bw_y + config.bw_t + 1);
    bits += std::uint64_t(geometry.width) * ceil_log2(config.s_cm);
  }
  return bits;
}

}  // namespace clf

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "clf/filters.hpp"
#include "clf/pipeline.hpp"

namespace clf {

// ---------------------------------------------------------------------------
// Classification metrics (signal is the positive class)

struct MetricsReport {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  // A zero denominator reports the metric as 0 and raises the matching flag.
  bool precision_undefined = false;
  bool recall_undefined = false;

  std::uint64_t total() const { return tp + fp + tn + fn; }
};

MetricsReport compute_metrics(std::span<const Decision> decisions, std::span<const Label> labels);
MetricsReport compute_metrics(std::span<const Decision> decisions, const EventStream& stream);

// ---------------------------------------------------------------------------
// Wraparound false-positive study

// Probability that the first arrival of a Poisson process with the given rate
// lands in one of the wrap windows [k*t_s, k*t_s + t_th], k >= 1, truncated at
// `horizon_us`: sum of exp(-l*k*t_s) - exp(-l*(k*t_s + t_th)).
double fp_rate_analytic(double lambda_hz, double t_th_us, double t_s_us, double horizon_us);

struct McEstimate {
  double p = 0.0;
  double stderr_ = 0.0;  // binomial, sqrt(p*(1-p)/trials)
};

// Draws one first-arrival time per trial and tests the same window predicate.
McEstimate fp_rate_montecarlo(double lambda_hz, double t_th_us, double t_s_us, std::uint64_t trials,
                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Time-gap statistics

// Per event: time since the most recent earlier event inside the
// (2*d_th+1)^2 window centered on it; events with no predecessor count as
// infinite. Binned logarithmically over [1us, 1s].
struct GapHistogram {
  static constexpr int kBins = 64;
  static constexpr double kLoUs = 1.0;
  static constexpr double kHiUs = 1e6;

  std::vector<std::uint64_t> bins = std::vector<std::uint64_t>(kBins, 0);
  std::uint64_t infinite_count = 0;
  std::vector<std::int64_t> finite_gaps_us;  // sorted ascending

  double quantile(double q) const;  // over finite gaps; NaN when empty
  static int bin_of(std::int64_t gap_us);
};

GapHistogram time_gap_stats(const EventStream& stream, std::uint16_t d_th);

// ---------------------------------------------------------------------------
// Parameter sweeps

struct DatasetRef {
  std::string name;
  std::string path;
  SensorGeometry geometry{};  // 0x0 = take from the file's geometry comment
};

struct SweepSpec {
  ClfConfig base;
  // Empty axis = keep the base value. s pairs follow the paper-style notation
  // where 0 disables the module.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> s_axis;  // (s_rm, s_cm)
  std::vector<std::int64_t> tth_axis;
  std::vector<std::uint16_t> dth_axis;
  std::vector<std::uint32_t> ncr_axis;
  std::vector<DatasetRef> datasets;
};

struct SweepRow {
  std::string dataset;
  ClfConfig config;
  MetricsReport metrics;
  std::uint64_t reads = 0;
  std::uint64_t cancelled = 0;
  std::uint64_t writes = 0;
  std::uint64_t cycles = 0;
};

// Cartesian product datasets x s x t_th x d_th x n_cr, evaluated with the
// cycle model (pipelined when the base config says so and the row allows it).
// Row order is deterministic and independent of `jobs`.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned jobs = 1);

// Header + one line per row:
// dataset,N_RM,N_CM,s_RM,s_CM,D_th,T_th_us,N_CR,BW_T,precision,recall,accuracy,reads,cancelled,writes,cycles
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace clf

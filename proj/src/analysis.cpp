#include "clf/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "clf/events.hpp"
#include "clf/rng.hpp"

namespace clf {

// ---------------------------------------------------------------------------
// Metrics

MetricsReport compute_metrics(std::span<const Decision> decisions, std::span<const Label> labels) {
  if (decisions.size() != labels.size())
    throw Error(Errc::length_mismatch, "decision and label sequences differ in length");
  MetricsReport r;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (labels[i] == Label::unknown)
      throw Error(Errc::unlabeled_event, "metrics need labeled events (event " + std::to_string(i) + ")");
    const bool truth = labels[i] == Label::signal;
    const bool said = decisions[i].is_signal;
    if (truth && said) ++r.tp;
    else if (!truth && said) ++r.fp;
    else if (truth && !said) ++r.fn;
    else ++r.tn;
  }
  if (r.tp + r.fp > 0) r.precision = double(r.tp) / double(r.tp + r.fp);
  else r.precision_undefined = true;
  if (r.tp + r.fn > 0) r.recall = double(r.tp) / double(r.tp + r.fn);
  else r.recall_undefined = true;
  if (r.total() > 0) r.accuracy = double(r.tp + r.tn) / double(r.total());
  return r;
}

MetricsReport compute_metrics(std::span<const Decision> decisions, const EventStream& stream) {
  std::vector<Label> labels;
  labels.reserve(stream.size());
  for (const Event& e : stream.events) labels.push_back(e.label);
  return compute_metrics(decisions, labels);
}

// ---------------------------------------------------------------------------
// Wraparound study

double fp_rate_analytic(double lambda_hz, double t_th_us, double t_s_us, double horizon_us) {
  if (lambda_hz < 0 || t_th_us < 0 || t_s_us <= 0 || horizon_us < 0)
    throw Error(Errc::invalid_params, "rates and times must be non-negative, t_s positive");
  if (t_th_us >= t_s_us)
    throw Error(Errc::invalid_params, "t_th must be smaller than the representable span t_s");
  if (lambda_hz == 0 || t_th_us == 0) return 0.0;
  const double rate_per_us = lambda_hz / 1e6;
  // Terms exp(-l*k*t_s) - exp(-l*(k*t_s + t_th)) form a geometric sequence;
  // one multiply per term instead of two exp calls.
  const double ratio = std::exp(-rate_per_us * t_s_us);
  const double window = 1.0 - std::exp(-rate_per_us * t_th_us);
  double a = ratio;  // exp(-l * k * t_s) at k = 1
  double sum = 0.0;
  for (double start = t_s_us; start <= horizon_us && a >= 1e-18; start += t_s_us) {
    sum += a * window;
    a *= ratio;
  }
  return sum;
}

McEstimate fp_rate_montecarlo(double lambda_hz, double t_th_us, double t_s_us, std::uint64_t trials,
                              std::uint64_t seed) {
  if (trials < 1) throw Error(Errc::invalid_params, "trials must be >= 1");
  if (t_th_us >= t_s_us)
    throw Error(Errc::invalid_params, "t_th must be smaller than the representable span t_s");
  if (lambda_hz <= 0) return {0.0, 0.0};
  const double rate_per_us = lambda_hz / 1e6;
  SplitMix64 rng(seed);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    const double t = rng.exponential(rate_per_us);
    const double k = std::floor(t / t_s_us);
    if (k >= 1.0 && t - k * t_s_us <= t_th_us) ++hits;
  }
  const double p = double(hits) / double(trials);
  return {p, std::sqrt(p * (1.0 - p) / double(trials))};
}

// ---------------------------------------------------------------------------
// Time gaps

int GapHistogram::bin_of(std::int64_t gap_us) {
  if (gap_us < std::int64_t(kLoUs)) return 0;
  const double r = std::log(double(gap_us) / kLoUs) / std::log(kHiUs / kLoUs);
  return std::min(kBins - 1, int(r * kBins));
}

double GapHistogram::quantile(double q) const {
  if (finite_gaps_us.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * double(finite_gaps_us.size() - 1);
  const std::size_t lo = std::size_t(pos);
  const std::size_t hi = std::min(lo + 1, finite_gaps_us.size() - 1);
  const double frac = pos - double(lo);
  return double(finite_gaps_us[lo]) * (1 - frac) + double(finite_gaps_us[hi]) * frac;
}

GapHistogram time_gap_stats(const EventStream& stream, std::uint16_t d_th) {
  validate_geometry(stream.geometry);
  GapHistogram h;
  std::vector<std::int64_t> last(std::size_t(stream.geometry.width) * stream.geometry.height, -1);
  for (const Event& e : stream.events) {
    const int x0 = std::max(0, int(e.x) - d_th), x1 = std::min(int(stream.geometry.width) - 1, int(e.x) + d_th);
    const int y0 = std::max(0, int(e.y) - d_th), y1 = std::min(int(stream.geometry.height) - 1, int(e.y) + d_th);
    std::int64_t newest = -1;
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        newest = std::max(newest, last[std::size_t(y) * stream.geometry.width + x]);
    if (newest < 0) {
      ++h.infinite_count;
    } else {
      const std::int64_t gap = e.t - newest;
      h.finite_gaps_us.push_back(gap);
      ++h.bins[std::size_t(GapHistogram::bin_of(gap))];
    }
    last[std::size_t(e.y) * stream.geometry.width + e.x] = e.t;
  }
  std::sort(h.finite_gaps_us.begin(), h.finite_gaps_us.end());
  return h;
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

ClfConfig row_config(const SweepSpec& spec, std::size_t is, std::size_t it, std::size_t id,
                     std::size_t in) {
  ClfConfig c = spec.base;
  if (!spec.s_axis.empty()) {
    const auto [s_rm, s_cm] = spec.s_axis[is];
    c.s_rm = s_rm;
    c.s_cm = s_cm;
    c.enable_rdm = s_rm > 0;
    c.enable_cdm = s_cm > 0;
  }
  if (!spec.tth_axis.empty()) c.params.t_th_us = spec.tth_axis[it];
  if (!spec.dth_axis.empty()) c.params.d_th = spec.dth_axis[id];
  if (!spec.ncr_axis.empty()) c.params.n_cr = spec.ncr_axis[in];
  return c;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned jobs) {
  if (spec.datasets.empty()) throw Error(Errc::invalid_params, "sweep needs at least one dataset");
  const std::size_t ns = std::max<std::size_t>(1, spec.s_axis.size());
  const std::size_t nt = std::max<std::size_t>(1, spec.tth_axis.size());
  const std::size_t nd = std::max<std::size_t>(1, spec.dth_axis.size());
  const std::size_t nn = std::max<std::size_t>(1, spec.ncr_axis.size());

  // Load each dataset once; rows share the immutable streams.
  std::vector<EventStream> streams;
  streams.reserve(spec.datasets.size());
  for (const DatasetRef& d : spec.datasets) {
    const SensorGeometry* g = d.geometry.width > 0 ? &d.geometry : nullptr;
    streams.push_back(read_event_file(d.path, g));
  }

  struct Job {
    std::size_t dataset, is, it, id, in;
  };
  std::vector<Job> order;
  for (std::size_t ds = 0; ds < spec.datasets.size(); ++ds)
    for (std::size_t is = 0; is < ns; ++is)
      for (std::size_t it = 0; it < nt; ++it)
        for (std::size_t id = 0; id < nd; ++id)
          for (std::size_t in = 0; in < nn; ++in) order.push_back({ds, is, it, id, in});

  std::vector<SweepRow> rows(order.size());
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mu;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= order.size() || failed.load()) return;
      const Job& job = order[i];
      try {
        const ClfConfig cfg = row_config(spec, job.is, job.it, job.id, job.in);
        const EventStream& stream = streams[job.dataset];
        SweepRow& row = rows[i];
        row.dataset = spec.datasets[job.dataset].name;
        row.config = cfg;
        std::vector<Decision> decisions;
        PipelineStats stats;
        if (cfg.pipelined && cfg.params.n_cr == 1 && cfg.params.d_th == 1) {
          auto result = run_pipelined(stream.geometry, cfg, stream);
          decisions = std::move(result.decisions);
          stats = std::move(result.stats);
        } else {
          ClfConfig plain = cfg;
          plain.pipelined = false;
          auto [d, s] = run_unpipelined(stream.geometry, plain, stream);
          decisions = std::move(d);
          stats = std::move(s);
        }
        row.metrics = compute_metrics(decisions, stream);
        row.reads = stats.reads_issued;
        row.cancelled = stats.reads_cancelled;
        row.writes = stats.writes;
        row.cycles = stats.total_cycles;
      } catch (const std::exception& ex) {
        std::scoped_lock lk(err_mu);
        if (!failed.exchange(true))
          first_error = "sweep row " + std::to_string(i) + " (dataset " +
                        spec.datasets[job.dataset].name + "): " + ex.what();
        return;
      }
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw Error(Errc::invalid_params, first_error);
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "dataset,N_RM,N_CM,s_RM,s_CM,D_th,T_th_us,N_CR,BW_T,precision,recall,accuracy,reads,cancelled,"
         "writes,cycles\n";
  char buf[64];
  for (const SweepRow& r : rows) {
    out << r.dataset << ',' << r.config.n_rm << ',' << r.config.n_cm << ','
        << (r.config.enable_rdm ? r.config.s_rm : 0) << ',' << (r.config.enable_cdm ? r.config.s_cm : 0)
        << ',' << r.config.params.d_th << ',' << r.config.params.t_th_us << ',' << r.config.params.n_cr
        << ',' << r.config.bw_t;
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f", r.metrics.precision, r.metrics.recall,
                  r.metrics.accuracy);
    out << buf << ',' << r.reads << ',' << r.cancelled << ',' << r.writes << ',' << r.cycles << '\n';
  }
}

}  // namespace clf

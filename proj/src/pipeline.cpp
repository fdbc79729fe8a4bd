#include "clf/pipeline.hpp"

#include <algorithm>
#include <map>
#include <ostream>

namespace clf {

namespace {

struct Access {
  std::uint32_t event;
  std::uint8_t stage;  // 1 or 2
  std::uint8_t prio;   // within (event, stage): write=0, then reads in fixed order
  ModuleSide module;
  std::uint32_t bank;
  std::uint32_t block;
  AccessKind kind;
};

struct EventPlan {
  std::vector<Access> stage1;
  std::vector<Access> stage2;             // performed accesses only
  std::vector<AccessEvent> cancelled;     // cycle filled in when stage 2 is released
  Decision decision;
};

}  // namespace

PipelineResult run_pipelined(SensorGeometry geometry, const ClfConfig& config,
                             const EventStream& stream, Kernel kernel) {
  ClfConfig cfg = config;
  cfg.validate();
  if (cfg.params.n_cr != 1)
    throw Error(Errc::config_unsupported, "read cancellation is unsound for N_CR > 1");
  if (cfg.params.d_th != 1)
    throw Error(Errc::config_unsupported, "the two-stage pipeline model covers D_th = 1 only");

  ClfFilter filter(geometry, cfg, kernel);
  const std::uint32_t n = std::uint32_t(stream.size());

  // Functional pass, in event order: window counts, cancellation, FIFO commit.
  std::vector<EventPlan> plan(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const Event& e = stream.events[i];
    if (!geometry.contains(e.x, e.y)) throw Error(Errc::event_out_of_range, "event outside geometry");
    EventPlan& p = plan[i];
    std::uint32_t count = 0;

    auto add_module = [&](ModuleSide side, std::uint32_t center, std::uint32_t line_count,
                          std::uint32_t banks) {
      const auto scan = [&](std::uint32_t line) {
        return side == ModuleSide::row ? filter.scan_row_block(line, e) : filter.scan_col_block(line, e);
      };
      const std::uint32_t own = scan(center);
      count += own;
      p.stage1.push_back({i, 1, 0, side, bank_index(center, banks), block_index(center, banks),
                          AccessKind::read});
      p.stage2.push_back({i, 2, 0, side, bank_index(center, banks), block_index(center, banks),
                          AccessKind::write});
      std::uint8_t prio = 1;
      for (int delta : {-1, +1}) {
        const std::int64_t line = std::int64_t(center) + delta;
        if (line < 0 || line >= std::int64_t(line_count)) continue;  // border: skip, not clamp
        const std::uint32_t bk = bank_index(std::uint32_t(line), banks);
        const std::uint32_t bl = block_index(std::uint32_t(line), banks);
        if (own > 0) {
          p.cancelled.push_back({0, side, bk, bl, AccessKind::cancelled_read});
        } else {
          count += scan(std::uint32_t(line));
          p.stage2.push_back({i, 2, prio, side, bk, bl, AccessKind::read});
        }
        ++prio;
      }
    };

    if (cfg.enable_rdm) add_module(ModuleSide::row, e.y, geometry.height, cfg.n_rm);
    if (cfg.enable_cdm) add_module(ModuleSide::col, e.x, geometry.width, cfg.n_cm);

    p.decision = {count >= 1, count};
    filter.commit(e);
  }

  // Cycle pass: dual-ported banks, older accesses win, denied accesses retry.
  PipelineResult result;
  result.stats.per_event_latency.assign(n, 0);
  for (auto& p : plan) result.decisions.push_back(p.decision);

  std::vector<Access> pending;
  std::vector<std::uint64_t> attempt(n, 0), last_grant(n, 0);
  std::vector<std::uint32_t> s1_left(n, 0);
  std::uint64_t last_decision_cycle = 0;

  auto release_stage1 = [&](std::uint32_t ev, std::uint64_t cycle, std::vector<Access>& into) {
    attempt[ev] = cycle;
    s1_left[ev] = std::uint32_t(plan[ev].stage1.size());
    into.insert(into.end(), plan[ev].stage1.begin(), plan[ev].stage1.end());
  };

  if (n > 0) release_stage1(0, 0, pending);

  for (std::uint64_t cycle = 0; !pending.empty(); ++cycle) {
    std::stable_sort(pending.begin(), pending.end(), [](const Access& a, const Access& b) {
      if (a.event != b.event) return a.event < b.event;
      if (a.stage != b.stage) return a.stage < b.stage;
      return a.prio < b.prio;
    });
    std::map<std::pair<int, std::uint32_t>, int> ports;
    std::vector<Access> next_cycle;
    for (const Access& a : pending) {
      int& used = ports[{int(a.module), a.bank}];
      if (used >= 2) {
        next_cycle.push_back(a);
        ++result.stats.stalls;
        continue;
      }
      ++used;
      result.trace.push_back({cycle, a.module, a.bank, a.block, a.kind});
      if (a.kind == AccessKind::read) {
        ++result.stats.reads_issued;
        if (a.stage == 2) ++result.stats.neighbor_reads;
      } else {
        ++result.stats.writes;
      }
      last_grant[a.event] = std::max(last_grant[a.event], cycle);
      if (a.stage == 1 && --s1_left[a.event] == 0) {
        // Stage 2 of this event and stage 1 of the next both start next cycle.
        next_cycle.insert(next_cycle.end(), plan[a.event].stage2.begin(), plan[a.event].stage2.end());
        for (AccessEvent c : plan[a.event].cancelled) {
          c.cycle = cycle + 1;
          result.trace.push_back(c);
          ++result.stats.reads_cancelled;
        }
        if (a.event + 1 < n) release_stage1(a.event + 1, cycle + 1, next_cycle);
      }
    }
    pending = std::move(next_cycle);
  }

  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint64_t decision_cycle = last_grant[i] + 3;
    result.stats.per_event_latency[i] = std::uint32_t(decision_cycle - attempt[i] + 1);
    last_decision_cycle = std::max(last_decision_cycle, decision_cycle);
  }
  result.stats.total_cycles = n > 0 ? last_decision_cycle + 1 : 0;

  std::stable_sort(result.trace.begin(), result.trace.end(),
                   [](const AccessEvent& a, const AccessEvent& b) { return a.cycle < b.cycle; });
  return result;
}

std::pair<std::vector<Decision>, PipelineStats> run_unpipelined(SensorGeometry geometry,
                                                                const ClfConfig& config,
                                                                const EventStream& stream,
                                                                Kernel kernel) {
  ClfConfig cfg = config;
  cfg.validate();
  ClfFilter filter(geometry, cfg, kernel);
  std::vector<Decision> decisions;
  decisions.reserve(stream.size());
  PipelineStats stats;
  stats.per_event_latency.assign(stream.size(), 4);

  const std::uint32_t d = cfg.params.d_th;
  auto window_lines = [&](std::uint32_t center, std::uint32_t line_count) {
    const std::uint32_t lo = center >= d ? center - d : 0;
    const std::uint32_t hi = std::min(center + d, line_count - 1);
    return std::uint64_t(hi - lo + 1);
  };

  for (const Event& e : stream.events) {
    decisions.push_back(filter.process(e));
    if (cfg.enable_rdm) {
      const std::uint64_t lines = window_lines(e.y, geometry.height);
      stats.reads_issued += lines;
      stats.neighbor_reads += lines - 1;
      ++stats.writes;
    }
    if (cfg.enable_cdm) {
      const std::uint64_t lines = window_lines(e.x, geometry.width);
      stats.reads_issued += lines;
      stats.neighbor_reads += lines - 1;
      ++stats.writes;
    }
  }
  stats.total_cycles = 4 * std::uint64_t(stream.size());
  return {std::move(decisions), std::move(stats)};
}

ActivityReport activity_report(const PipelineStats& stats, const EnergyWeights& weights) {
  if (weights.read < 0 || weights.write < 0 || weights.cancelled < 0)
    throw Error(Errc::invalid_params, "energy weights must be non-negative");
  ActivityReport r;
  r.energy = weights.read * double(stats.reads_issued) + weights.write * double(stats.writes) +
             weights.cancelled * double(stats.reads_cancelled);
  r.cancellation_savings = weights.read * double(stats.reads_cancelled);
  const double denom = double(stats.reads_cancelled) + double(stats.neighbor_reads);
  r.cancelled_fraction = denom > 0 ? double(stats.reads_cancelled) / denom : 0.0;
  return r;
}

void write_trace_csv(std::ostream& out, std::span<const AccessEvent> trace) {
  out << "cycle,module,bank,block,kind\n";
  for (const AccessEvent& a : trace) {
    out << a.cycle << ',' << (a.module == ModuleSide::row ? "row" : "col") << ',' << a.bank << ','
        << a.block << ',';
    switch (a.kind) {
      case AccessKind::read: out << "read"; break;
      case AccessKind::write: out << "write"; break;
      case AccessKind::cancelled_read: out << "cancelled_read"; break;
    }
    out << '\n';
  }
}

}  // namespace clf

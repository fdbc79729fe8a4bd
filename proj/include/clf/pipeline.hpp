#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "clf/filters.hpp"

namespace clf {

enum class ModuleSide : std::uint8_t { row = 0, col = 1 };
enum class AccessKind : std::uint8_t { read = 0, write = 1, cancelled_read = 2 };

struct AccessEvent {
  std::uint64_t cycle = 0;
  ModuleSide module = ModuleSide::row;
  std::uint32_t bank = 0;
  std::uint32_t block = 0;
  AccessKind kind = AccessKind::read;
};

struct PipelineStats {
  std::uint64_t total_cycles = 0;
  std::uint64_t reads_issued = 0;     // performed reads, own-block and neighbor
  std::uint64_t neighbor_reads = 0;   // performed neighbor reads only
  std::uint64_t reads_cancelled = 0;
  std::uint64_t writes = 0;
  std::uint64_t stalls = 0;           // access-cycles spent waiting for a port
  std::vector<std::uint32_t> per_event_latency;
};

struct PipelineResult {
  std::vector<Decision> decisions;
  PipelineStats stats;
  std::vector<AccessEvent> trace;
};

// Two-stage model: stage 1 reads the event's own row/column blocks; stage 2
// (next cycle) writes the event into them and reads the neighbor blocks of
// every module whose stage-1 count was zero. A stage-1 hit cancels that
// module's neighbor reads, which is sound only for N_CR = 1. Consecutive
// events overlap (stage 1 of e+1 runs with stage 2 of e); each (module, bank)
// grants at most two non-cancelled accesses per cycle and a denied access
// retries next cycle, counting one stall per waited cycle (older event, then
// write before reads, wins the port). The decision is ready 3 cycles after an
// event's last granted access: 5 cycles end to end when nothing stalls.
//
// Decisions match the unpipelined filter event for event; Decision.count sums
// performed reads only, so a cancelled event reports its stage-1 count.
PipelineResult run_pipelined(SensorGeometry geometry, const ClfConfig& config,
                             const EventStream& stream, Kernel kernel = Kernel::auto_detect);

// Sequential reference timing: read every window block, decide, write; four
// cycles per event, no overlap, nothing cancelled.
std::pair<std::vector<Decision>, PipelineStats> run_unpipelined(SensorGeometry geometry,
                                                                const ClfConfig& config,
                                                                const EventStream& stream,
                                                                Kernel kernel = Kernel::auto_detect);

struct EnergyWeights {
  double read = 1.0;
  double write = 1.0;
  double cancelled = 0.0;
};

struct ActivityReport {
  double energy = 0.0;                 // weighted access count
  double cancellation_savings = 0.0;   // read weight times cancelled reads
  double cancelled_fraction = 0.0;     // cancelled / (cancelled + performed neighbor reads)
};

ActivityReport activity_report(const PipelineStats& stats, const EnergyWeights& weights);

// One line per access: `cycle,module,bank,block,kind`.
void write_trace_csv(std::ostream& out, std::span<const AccessEvent> trace);

}  // namespace clf

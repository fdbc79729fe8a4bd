#pragma once

#include <cstdint>
#include <vector>

#include "clf/events.hpp"

namespace clf {

struct NoiseModel {
  double rate_hz = 1.0;    // per-pixel background rate
  std::uint64_t seed = 0;
};

enum class ShapeKind : std::uint8_t { box, edge, pendulum };

// One moving object. A box slides horizontally (velocity sign gives the
// direction) emitting ON events on its leading column boundary and OFF events
// on its trailing one at every pixel crossing; an edge is a full-height
// vertical front emitting ON crossings only; a pendulum is a full-height
// front at x0 + amplitude*sin(2*pi*t/period), ON while moving right and OFF
// while moving left.
struct MotionScene {
  ShapeKind shape = ShapeKind::box;
  std::uint16_t box_w = 2;
  std::uint16_t box_h = 2;
  std::uint16_t x0 = 0;  // box/edge start column; pendulum center
  std::uint16_t y0 = 0;  // box top row
  double velocity_px_s = 1000.0;
  double amplitude = 0.0;    // pendulum, pixels
  double period_us = 0.0;    // pendulum
  std::int64_t duration_us = 0;
  std::uint32_t events_per_crossing = 1;
};

// Deterministic object stream, all events labeled signal, time ordered.
// Crossings happen at t = k * 1e6 / |v| rounded to whole microseconds and
// only instants strictly before duration_us are emitted. Throws
// Error{scene_out_of_bounds} if the trajectory leaves the geometry.
EventStream gen_signal(const SensorGeometry& geometry, const MotionScene& scene, std::uint64_t seed = 0);

// Per-pixel Poisson background: exponential inter-arrival times at rate_hz,
// uniform random polarity, labeled noise, merged in (t, pixel) order.
// Bit-identical for a fixed seed.
EventStream gen_noise(const SensorGeometry& geometry, const NoiseModel& model, std::int64_t duration_us);

// Label-preserving stable merge of already-ordered streams (multi-object scenes).
EventStream merge_signals(const std::vector<EventStream>& streams);

// Adds exactly round(ratio * |signal|) noise events, uniformly distributed
// over the signal's time span and the sensor (a Poisson process conditioned
// on its count), and merges. model.rate_hz is ignored; the count pins the
// achieved ratio to the target.
EventStream mix_to_ratio(const EventStream& signal, const NoiseModel& model, double target_ratio);

}  // namespace clf

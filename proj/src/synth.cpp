#include "clf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "clf/rng.hpp"

namespace clf {

namespace {

void emit(std::vector<Event>& out, std::int64_t t, int x, int y, Polarity p, std::uint32_t repeat) {
  for (std::uint32_t i = 0; i < repeat; ++i)
    out.push_back({t, std::uint16_t(x), std::uint16_t(y), p, Label::signal});
}

std::int64_t crossing_time(std::int64_t k, double speed_px_s) {
  return std::llround(double(k) * 1e6 / speed_px_s);
}

EventStream gen_box_or_edge(const SensorGeometry& geo, const MotionScene& sc) {
  const bool is_edge = sc.shape == ShapeKind::edge;
  const double speed = std::abs(sc.velocity_px_s);
  if (speed <= 0) throw Error(Errc::scene_out_of_bounds, "scene velocity must be nonzero");
  const int dir = sc.velocity_px_s >= 0 ? 1 : -1;
  const int w = is_edge ? 1 : sc.box_w;
  const int h = is_edge ? geo.height : sc.box_h;
  const int y_top = is_edge ? 0 : sc.y0;
  if (w < 1 || h < 1) throw Error(Errc::scene_out_of_bounds, "box must be at least 1x1");
  if (y_top + h > geo.height) throw Error(Errc::scene_out_of_bounds, "object rows leave the sensor");
  if (int(sc.x0) + w > geo.width) throw Error(Errc::scene_out_of_bounds, "object starts outside the sensor");

  EventStream out;
  out.geometry = geo;
  // Edges emit their k=0 crossing (the front is on a boundary at t=0); a box
  // at rest has not changed anything yet, so its first crossing is k=1.
  for (std::int64_t k = is_edge ? 0 : 1;; ++k) {
    const std::int64_t t = crossing_time(k, speed);
    if (t >= sc.duration_us) break;
    int on_col, off_col;
    if (dir > 0) {
      on_col = int(sc.x0) + w - 1 + int(k);
      off_col = int(sc.x0) + int(k) - 1;
    } else {
      on_col = int(sc.x0) - int(k);
      off_col = int(sc.x0) + w - int(k);
    }
    if (on_col < 0 || on_col >= geo.width)
      throw Error(Errc::scene_out_of_bounds, "object leaves the sensor before duration ends");
    for (int y = y_top; y < y_top + h; ++y) emit(out.events, t, on_col, y, Polarity::on, sc.events_per_crossing);
    if (!is_edge)
      for (int y = y_top; y < y_top + h; ++y) emit(out.events, t, off_col, y, Polarity::off, sc.events_per_crossing);
  }
  return out;
}

EventStream gen_pendulum(const SensorGeometry& geo, const MotionScene& sc) {
  if (sc.period_us <= 0 || sc.amplitude <= 0)
    throw Error(Errc::scene_out_of_bounds, "pendulum needs positive amplitude and period");
  const double center = sc.x0;
  if (center - sc.amplitude < 0 || center + sc.amplitude > geo.width - 1)
    throw Error(Errc::scene_out_of_bounds, "pendulum swing leaves the sensor");

  EventStream out;
  out.geometry = geo;
  const double half = sc.period_us / 2.0;
  const double two_pi = 2.0 * std::numbers::pi;
  // Front position x(t) = center + A*sin(2*pi*t/period). Each half period is
  // monotone, so crossings of integer column boundaries invert in closed form:
  //   rising half (even n, centered at n*P/2):  t = n*P/2 + asin(s)*P/(2*pi)
  //   falling half (odd n):                     t = (n-1)*P/2 + (pi - asin(s))*P/(2*pi)
  // with s = (c - center)/A. Turnaround columns belong to one half only
  // (s = +1 to rising, s = -1 to falling) so they are emitted once.
  for (std::int64_t n = 0; double(n) * half - sc.period_us / 4.0 < double(sc.duration_us); ++n) {
    const bool rising = n % 2 == 0;
    const int c_min = int(std::ceil(center - sc.amplitude));
    const int c_max = int(std::floor(center + sc.amplitude));
    for (int c = c_min; c <= c_max; ++c) {
      const double s = std::clamp((double(c) - center) / sc.amplitude, -1.0, 1.0);
      if (rising && s == -1.0) continue;
      if (!rising && s == 1.0) continue;
      const double t_abs = rising
                               ? double(n) * half + std::asin(s) * sc.period_us / two_pi
                               : double(n - 1) * half + (std::numbers::pi - std::asin(s)) * sc.period_us / two_pi;
      if (t_abs < 0 || t_abs >= double(sc.duration_us)) continue;
      const std::int64_t t = std::llround(t_abs);
      if (t >= sc.duration_us) continue;
      for (int y = 0; y < geo.height; ++y)
        emit(out.events, t, c, y, rising ? Polarity::on : Polarity::off, sc.events_per_crossing);
    }
  }
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  return out;
}

}  // namespace

EventStream gen_signal(const SensorGeometry& geometry, const MotionScene& scene, std::uint64_t) {
  validate_geometry(geometry);
  switch (scene.shape) {
    case ShapeKind::box:
    case ShapeKind::edge:
      return gen_box_or_edge(geometry, scene);
    case ShapeKind::pendulum:
      return gen_pendulum(geometry, scene);
  }
  throw Error(Errc::config_invalid, "unknown scene shape");
}

EventStream gen_noise(const SensorGeometry& geometry, const NoiseModel& model, std::int64_t duration_us) {
  validate_geometry(geometry);
  if (model.rate_hz < 0) throw Error(Errc::invalid_params, "noise rate must be >= 0");
  EventStream out;
  out.geometry = geometry;
  if (model.rate_hz == 0 || duration_us <= 0) return out;

  const double rate_per_us = model.rate_hz / 1e6;
  struct Tagged {
    std::int64_t t;
    std::uint32_t pixel;
    Polarity p;
  };
  std::vector<Tagged> all;
  for (std::uint32_t pixel = 0; pixel < geometry.pixels(); ++pixel) {
    SplitMix64 rng(SplitMix64::mix(model.seed, pixel));
    double t = rng.exponential(rate_per_us);
    while (t < double(duration_us)) {
      all.push_back({std::int64_t(t), pixel, rng.coin() ? Polarity::on : Polarity::off});
      t += rng.exponential(rate_per_us);
    }
  }
  // Global (t, pixel) order keeps the merge deterministic however the
  // per-pixel streams were produced.
  std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) {
    return a.t != b.t ? a.t < b.t : a.pixel < b.pixel;
  });
  out.events.reserve(all.size());
  for (const Tagged& v : all)
    out.events.push_back({v.t, std::uint16_t(v.pixel % geometry.width),
                          std::uint16_t(v.pixel / geometry.width), v.p, Label::noise});
  return out;
}

EventStream merge_signals(const std::vector<EventStream>& streams) {
  if (streams.empty()) return {};
  EventStream out;
  out.geometry = streams.front().geometry;
  std::size_t total = 0;
  for (const auto& s : streams) {
    if (s.geometry != out.geometry) throw Error(Errc::geometry_mismatch, "merge_signals: geometry differs");
    total += s.size();
  }
  out.events.reserve(total);
  std::vector<std::size_t> idx(streams.size(), 0);
  while (out.events.size() < total) {
    std::size_t best = streams.size();
    for (std::size_t i = 0; i < streams.size(); ++i) {
      if (idx[i] >= streams[i].size()) continue;
      if (best == streams.size() || streams[i].events[idx[i]].t < streams[best].events[idx[best]].t)
        best = i;
    }
    out.events.push_back(streams[best].events[idx[best]++]);
  }
  return out;
}

EventStream mix_to_ratio(const EventStream& signal, const NoiseModel& model, double target_ratio) {
  if (signal.empty()) throw Error(Errc::empty_signal, "mix_to_ratio needs a non-empty signal stream");
  if (target_ratio < 0) throw Error(Errc::invalid_params, "noise ratio must be >= 0");
  if (target_ratio == 0) {
    EventStream out = signal;
    for (auto& e : out.events) e.label = Label::signal;
    return out;
  }

  const std::uint64_t want = std::uint64_t(std::llround(target_ratio * double(signal.size())));
  const std::int64_t horizon = signal.events.back().t;
  SplitMix64 rng(model.seed);
  EventStream noise;
  noise.geometry = signal.geometry;
  noise.events.reserve(want);
  struct Tagged {
    std::int64_t t;
    std::uint32_t pixel;
    Polarity p;
  };
  std::vector<Tagged> all;
  all.reserve(want);
  for (std::uint64_t i = 0; i < want; ++i) {
    const std::int64_t t = std::int64_t(rng.below(std::uint64_t(horizon) + 1));
    const std::uint32_t pixel = std::uint32_t(rng.below(signal.geometry.pixels()));
    all.push_back({t, pixel, rng.coin() ? Polarity::on : Polarity::off});
  }
  std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) {
    return a.t != b.t ? a.t < b.t : a.pixel < b.pixel;
  });
  for (const Tagged& v : all)
    noise.events.push_back({v.t, std::uint16_t(v.pixel % signal.geometry.width),
                            std::uint16_t(v.pixel / signal.geometry.width), v.p, Label::noise});
  return merge_streams(signal, noise);
}

}  // namespace clf

#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace clf {

enum class Errc {
  malformed_record,
  coordinate_out_of_range,
  non_monotonic_timestamp,
  io_failure,
  geometry_mismatch,
  event_out_of_range,
  config_invalid,
  config_unsupported,
  length_mismatch,
  unlabeled_event,
  invalid_params,
  scene_out_of_bounds,
  empty_signal,
};

// Single error type for the whole library; `code` discriminates, `line` is
// 1-based where a text source is involved (0 otherwise).
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string msg, std::size_t line = 0)
      : std::runtime_error(std::move(msg)), code(code), line(line) {}
  Errc code;
  std::size_t line;
};

enum class Polarity : std::uint8_t { off = 0, on = 1 };

enum class Label : std::uint8_t { noise = 0, signal = 1, unknown = 2 };

struct Event {
  std::int64_t t = 0;  // microseconds, non-negative
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  Polarity p = Polarity::on;
  Label label = Label::unknown;

  friend bool operator==(const Event&, const Event&) = default;
};

struct SensorGeometry {
  std::uint16_t width = 0;
  std::uint16_t height = 0;

  bool contains(std::uint16_t x, std::uint16_t y) const { return x < width && y < height; }
  std::uint32_t pixels() const { return std::uint32_t(width) * height; }
  friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

// Throws Error{config_invalid} unless 1 <= dim <= 2048 on both axes.
void validate_geometry(const SensorGeometry& g);

struct EventStream {
  SensorGeometry geometry;
  std::vector<Event> events;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
  friend bool operator==(const EventStream&, const EventStream&) = default;
};

// Records are `t_us,x,y,p[,label]` with p and label in {0,1}; `#` lines and
// blank lines are skipped. Timestamps must be non-decreasing and coordinates
// inside `geometry`. Label column maps 1 -> signal, 0 -> noise, absent -> unknown.
EventStream parse_csv(std::istream& in, const SensorGeometry& geometry);

// Inverse of parse_csv: the label column is emitted per line iff the label is
// known, so parse(write(s)) == s for any valid stream. `comments` are written
// first as `# ...` lines.
void write_csv(const EventStream& stream, std::ostream& out,
               const std::vector<std::string>& comments = {});

// File wrappers. read_event_file falls back to a `# geometry: WxH` comment in
// the file when `geometry` is not supplied.
EventStream read_event_file(const std::string& path, const SensorGeometry* geometry = nullptr);
void write_event_file(const EventStream& stream, const std::string& path,
                      const std::vector<std::string>& extra_comments = {});

// Stable time-ordered merge; events of `signal` are relabeled signal, events
// of `noise` relabeled noise, and a signal event precedes a noise event with
// equal timestamp.
EventStream merge_streams(const EventStream& signal, const EventStream& noise);

}  // namespace clf

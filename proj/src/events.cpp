#include "clf/events.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace clf {

void validate_geometry(const SensorGeometry& g) {
  if (g.width < 1 || g.height < 1)
    throw Error(Errc::config_invalid, "geometry: width and height must be >= 1");
  if (g.width > 2048 || g.height > 2048)
    throw Error(Errc::config_invalid, "geometry: at most 2048x2048 supported");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Splits `line` at commas into at most `max_fields` pieces.
std::size_t split_fields(std::string_view line, std::string_view* out, std::size_t max_fields) {
  std::size_t n = 0;
  while (n < max_fields) {
    auto comma = line.find(',');
    if (comma == std::string_view::npos) {
      out[n++] = line;
      return n;
    }
    out[n++] = line.substr(0, comma);
    line.remove_prefix(comma + 1);
  }
  return max_fields + 1;  // too many fields
}

}  // namespace

EventStream parse_csv(std::istream& in, const SensorGeometry& geometry) {
  validate_geometry(geometry);
  EventStream stream;
  stream.geometry = geometry;

  std::string raw;
  std::size_t line_no = 0;
  std::int64_t prev_t = -1;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::string_view f[6];
    std::size_t n = split_fields(line, f, 5);
    if (n < 4 || n > 5)
      throw Error(Errc::malformed_record, "line " + std::to_string(line_no) + ": expected t,x,y,p[,label]", line_no);

    std::uint64_t t, x, y, p, lab = 0;
    if (!parse_u64(f[0], t) || !parse_u64(f[1], x) || !parse_u64(f[2], y) || !parse_u64(f[3], p) ||
        (n == 5 && !parse_u64(f[4], lab)))
      throw Error(Errc::malformed_record, "line " + std::to_string(line_no) + ": non-numeric field", line_no);
    if (p > 1)
      throw Error(Errc::malformed_record, "line " + std::to_string(line_no) + ": polarity must be 0 or 1", line_no);
    if (n == 5 && lab > 1)
      throw Error(Errc::malformed_record, "line " + std::to_string(line_no) + ": label must be 0 or 1", line_no);
    if (t > std::uint64_t(INT64_MAX))
      throw Error(Errc::malformed_record, "line " + std::to_string(line_no) + ": timestamp out of range", line_no);
    if (x >= geometry.width || y >= geometry.height)
      throw Error(Errc::coordinate_out_of_range,
                  "line " + std::to_string(line_no) + ": coordinate outside " + std::to_string(geometry.width) +
                      "x" + std::to_string(geometry.height),
                  line_no);
    if (std::int64_t(t) < prev_t)
      throw Error(Errc::non_monotonic_timestamp,
                  "line " + std::to_string(line_no) + ": timestamp decreases", line_no);
    prev_t = std::int64_t(t);

    Event e;
    e.t = std::int64_t(t);
    e.x = std::uint16_t(x);
    e.y = std::uint16_t(y);
    e.p = p ? Polarity::on : Polarity::off;
    e.label = n == 5 ? (lab ? Label::signal : Label::noise) : Label::unknown;
    stream.events.push_back(e);
  }
  return stream;
}

void write_csv(const EventStream& stream, std::ostream& out, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  char buf[96];
  for (const Event& e : stream.events) {
    int len;
    if (e.label == Label::unknown)
      len = std::snprintf(buf, sizeof buf, "%lld,%u,%u,%u\n", static_cast<long long>(e.t), unsigned(e.x),
                          unsigned(e.y), unsigned(e.p == Polarity::on));
    else
      len = std::snprintf(buf, sizeof buf, "%lld,%u,%u,%u,%u\n", static_cast<long long>(e.t), unsigned(e.x),
                          unsigned(e.y), unsigned(e.p == Polarity::on), unsigned(e.label == Label::signal));
    out.write(buf, len);
  }
  if (!out) throw Error(Errc::io_failure, "write failed");
}

EventStream read_event_file(const std::string& path, const SensorGeometry* geometry) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_failure, "cannot open " + path);
  SensorGeometry g{};
  if (geometry) {
    g = *geometry;
  } else {
    // Peek leading comment lines for `# geometry: WxH`.
    std::string line;
    auto pos = in.tellg();
    while (std::getline(in, line)) {
      std::string_view v = trim(line);
      if (v.empty()) continue;
      if (v.front() != '#') break;
      auto key = v.find("geometry:");
      if (key != std::string_view::npos) {
        std::string_view rest = trim(v.substr(key + 9));
        auto xpos = rest.find('x');
        std::uint64_t w = 0, h = 0;
        if (xpos != std::string_view::npos && parse_u64(rest.substr(0, xpos), w) &&
            parse_u64(rest.substr(xpos + 1), h)) {
          g = SensorGeometry{std::uint16_t(w), std::uint16_t(h)};
          break;
        }
      }
    }
    if (g.width == 0)
      throw Error(Errc::config_invalid, path + ": geometry not given and no '# geometry: WxH' comment found");
    in.clear();
    in.seekg(pos);
  }
  return parse_csv(in, g);
}

void write_event_file(const EventStream& stream, const std::string& path,
                      const std::vector<std::string>& extra_comments) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_failure, "cannot open " + path + " for writing");
  std::vector<std::string> comments;
  comments.push_back("geometry: " + std::to_string(stream.geometry.width) + "x" +
                     std::to_string(stream.geometry.height));
  comments.insert(comments.end(), extra_comments.begin(), extra_comments.end());
  write_csv(stream, out, comments);
}

EventStream merge_streams(const EventStream& signal, const EventStream& noise) {
  if (signal.geometry != noise.geometry)
    throw Error(Errc::geometry_mismatch, "merge_streams: geometry differs");
  EventStream out;
  out.geometry = signal.geometry;
  out.events.reserve(signal.size() + noise.size());
  std::size_t i = 0, j = 0;
  while (i < signal.size() && j < noise.size()) {
    // Signal wins ties so that a simultaneous noise event sees the signal event as history.
    if (signal.events[i].t <= noise.events[j].t) {
      Event e = signal.events[i++];
      e.label = Label::signal;
      out.events.push_back(e);
    } else {
      Event e = noise.events[j++];
      e.label = Label::noise;
      out.events.push_back(e);
    }
  }
  for (; i < signal.size(); ++i) {
    Event e = signal.events[i];
    e.label = Label::signal;
    out.events.push_back(e);
  }
  for (; j < noise.size(); ++j) {
    Event e = noise.events[j];
    e.label = Label::noise;
    out.events.push_back(e);
  }
  return out;
}

}  // namespace clf

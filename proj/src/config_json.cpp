#include "clf/config_json.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace clf {

using nlohmann::json;

const char* const kToolVersion = "0.1.0";

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_failure, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_or_throw(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::config_invalid, std::string(what) + ": not valid JSON");
  return j;
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* what) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) { ok = true; break; }
    if (!ok) throw Error(Errc::config_invalid, std::string(what) + ": unknown key \"" + key + "\"");
  }
}

}  // namespace

SensorGeometry parse_geometry_string(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos || x == 0 || x + 1 >= s.size())
    throw Error(Errc::config_invalid, "geometry must be WxH, got \"" + s + "\"");
  unsigned long w = 0, h = 0;
  try {
    std::size_t used = 0;
    w = std::stoul(s.substr(0, x), &used);
    if (used != x) throw std::invalid_argument("");
    h = std::stoul(s.substr(x + 1), &used);
    if (used != s.size() - x - 1) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw Error(Errc::config_invalid, "geometry must be WxH, got \"" + s + "\"");
  }
  SensorGeometry g{std::uint16_t(w), std::uint16_t(h)};
  if (w == 0 || h == 0 || w > 2048 || h > 2048)
    throw Error(Errc::config_invalid, "geometry out of range: " + s);
  return g;
}

ConfigDoc parse_config_json(const std::string& text) {
  const json j = parse_or_throw(text, "config");
  reject_unknown(j,
                 {"D_th", "T_th_us", "N_CR", "N_RM", "N_CM", "s_RM", "s_CM", "BW_T", "quant_unit_us",
                  "enable_rdm", "enable_cdm", "pipelined", "same_polarity_only", "geometry", "ssm_r"},
                 "config");
  ConfigDoc doc;
  ClfConfig& c = doc.config;
  c.params.d_th = j.value("D_th", 1);
  c.params.t_th_us = j.value("T_th_us", 200);
  c.params.n_cr = j.value("N_CR", 1u);
  c.s_rm = j.value("s_RM", 4u);
  c.s_cm = j.value("s_CM", 4u);
  c.enable_rdm = j.value("enable_rdm", c.s_rm > 0);
  c.enable_cdm = j.value("enable_cdm", c.s_cm > 0);
  if (c.s_rm == 0) c.enable_rdm = false;
  if (c.s_cm == 0) c.enable_cdm = false;
  const std::uint32_t banks = required_banks(2u * c.params.d_th + 1u);
  c.n_rm = j.value("N_RM", banks);
  c.n_cm = j.value("N_CM", banks);
  c.bw_t = j.value("BW_T", 32u);
  c.quant_unit_us = j.value("quant_unit_us", ClfConfig::default_quant_unit(c.params.t_th_us, c.bw_t));
  c.pipelined = j.value("pipelined", false);
  c.same_polarity_only = j.value("same_polarity_only", false);
  if (j.contains("geometry")) doc.geometry = parse_geometry_string(j.at("geometry").get<std::string>());
  doc.ssm_r = j.value("ssm_r", 2u);
  c.validate();
  return doc;
}

ConfigDoc load_config_file(const std::string& path) { return parse_config_json(slurp(path)); }

std::string config_to_json(const ClfConfig& c, const std::optional<SensorGeometry>& geometry) {
  json j;
  j["D_th"] = c.params.d_th;
  j["T_th_us"] = c.params.t_th_us;
  j["N_CR"] = c.params.n_cr;
  j["N_RM"] = c.n_rm;
  j["N_CM"] = c.n_cm;
  j["s_RM"] = c.s_rm;
  j["s_CM"] = c.s_cm;
  j["BW_T"] = c.bw_t;
  j["quant_unit_us"] = c.quant_unit_us;
  j["enable_rdm"] = c.enable_rdm;
  j["enable_cdm"] = c.enable_cdm;
  j["pipelined"] = c.pipelined;
  j["same_polarity_only"] = c.same_polarity_only;
  if (geometry)
    j["geometry"] = std::to_string(geometry->width) + "x" + std::to_string(geometry->height);
  return j.dump(2);
}

namespace {

MotionScene scene_from_json(const json& j) {
  reject_unknown(j,
                 {"shape", "w", "h", "x0", "y0", "velocity_px_s", "amplitude", "period_us",
                  "duration_us", "events_per_crossing"},
                 "scene");
  MotionScene s;
  const std::string shape = j.value("shape", "box");
  if (shape == "box") s.shape = ShapeKind::box;
  else if (shape == "edge") s.shape = ShapeKind::edge;
  else if (shape == "pendulum") s.shape = ShapeKind::pendulum;
  else throw Error(Errc::config_invalid, "scene: unknown shape \"" + shape + "\"");
  s.box_w = j.value("w", 2);
  s.box_h = j.value("h", 2);
  s.x0 = j.value("x0", 0);
  s.y0 = j.value("y0", 0);
  s.velocity_px_s = j.value("velocity_px_s", 1000.0);
  s.amplitude = j.value("amplitude", 0.0);
  s.period_us = j.value("period_us", 0.0);
  s.duration_us = j.value("duration_us", 0);
  s.events_per_crossing = j.value("events_per_crossing", 1u);
  return s;
}

}  // namespace

std::vector<MotionScene> parse_scene_json(const std::string& text) {
  const json j = parse_or_throw(text, "scene");
  std::vector<MotionScene> scenes;
  if (j.is_array()) {
    for (const auto& item : j) scenes.push_back(scene_from_json(item));
  } else {
    scenes.push_back(scene_from_json(j));
  }
  if (scenes.empty()) throw Error(Errc::config_invalid, "scene: empty array");
  return scenes;
}

std::vector<MotionScene> load_scene_file(const std::string& path) { return parse_scene_json(slurp(path)); }

SweepSpec parse_sweep_json(const std::string& text) {
  const json j = parse_or_throw(text, "sweep spec");
  reject_unknown(j, {"base", "axes", "datasets", "geometry"}, "sweep spec");
  SweepSpec spec;
  if (j.contains("base")) spec.base = parse_config_json(j.at("base").dump()).config;
  if (j.contains("axes")) {
    const json& axes = j.at("axes");
    reject_unknown(axes, {"s", "T_th_us", "D_th", "N_CR"}, "sweep axes");
    if (axes.contains("s"))
      for (const auto& pair : axes.at("s"))
        spec.s_axis.emplace_back(pair.at(0).get<std::uint32_t>(), pair.at(1).get<std::uint32_t>());
    if (axes.contains("T_th_us"))
      for (const auto& v : axes.at("T_th_us")) spec.tth_axis.push_back(v.get<std::int64_t>());
    if (axes.contains("D_th"))
      for (const auto& v : axes.at("D_th")) spec.dth_axis.push_back(v.get<std::uint16_t>());
    if (axes.contains("N_CR"))
      for (const auto& v : axes.at("N_CR")) spec.ncr_axis.push_back(v.get<std::uint32_t>());
  }
  SensorGeometry default_geometry{};
  if (j.contains("geometry")) default_geometry = parse_geometry_string(j.at("geometry").get<std::string>());
  if (!j.contains("datasets")) throw Error(Errc::config_invalid, "sweep spec: \"datasets\" is required");
  for (const auto& d : j.at("datasets")) {
    DatasetRef ref;
    if (d.is_string()) {
      ref.path = d.get<std::string>();
    } else {
      reject_unknown(d, {"name", "path", "geometry"}, "dataset");
      ref.path = d.at("path").get<std::string>();
      if (d.contains("name")) ref.name = d.at("name").get<std::string>();
      if (d.contains("geometry")) ref.geometry = parse_geometry_string(d.at("geometry").get<std::string>());
    }
    if (ref.name.empty()) {
      const auto slash = ref.path.find_last_of('/');
      ref.name = slash == std::string::npos ? ref.path : ref.path.substr(slash + 1);
    }
    if (ref.geometry.width == 0) ref.geometry = default_geometry;
    spec.datasets.push_back(std::move(ref));
  }
  return spec;
}

SweepSpec load_sweep_file(const std::string& path) { return parse_sweep_json(slurp(path)); }

std::string metrics_to_json(const MetricsReport& m, const PipelineStats* stats) {
  json j;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["accuracy"] = m.accuracy;
  j["precision_undefined"] = m.precision_undefined;
  j["recall_undefined"] = m.recall_undefined;
  if (stats) {
    json p;
    p["total_cycles"] = stats->total_cycles;
    p["reads_issued"] = stats->reads_issued;
    p["neighbor_reads"] = stats->neighbor_reads;
    p["reads_cancelled"] = stats->reads_cancelled;
    p["writes"] = stats->writes;
    p["stalls"] = stats->stalls;
    if (!stats->per_event_latency.empty()) {
      std::uint64_t sum = 0;
      std::uint32_t mx = 0;
      for (auto v : stats->per_event_latency) {
        sum += v;
        mx = std::max(mx, v);
      }
      p["max_latency"] = mx;
      p["mean_latency"] = double(sum) / double(stats->per_event_latency.size());
    }
    j["pipeline"] = p;
  }
  return j.dump(2);
}

void write_manifest(const RunManifest& m, const std::string& output_path) {
  json j;
  j["tool"] = "clf";
  j["version"] = kToolVersion;
  j["command"] = m.command;
  j["args"] = m.args;
  if (!m.config_json.empty()) j["config"] = json::parse(m.config_json);
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["seed"] = m.seed;
  j["rng"] = "splitmix64";
  j["wall_ms"] = m.wall_ms;
  for (const auto& [k, v] : m.extras) j[k] = v;
  std::ofstream out(output_path);
  if (!out) throw Error(Errc::io_failure, "cannot write manifest " + output_path);
  out << j.dump(2) << '\n';
}

}  // namespace clf

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "clf/analysis.hpp"
#include "clf/filters.hpp"
#include "clf/synth.hpp"

namespace clf {

// Filter configuration document. Keys mirror the config fields (D_th, T_th_us,
// N_CR, N_RM, N_CM, s_RM, s_CM, BW_T, quant_unit_us, enable_rdm, enable_cdm,
// pipelined, same_polarity_only) plus optional "geometry": "WxH" and
// "ssm_r". Omitted bank counts default to the window rule, an omitted
// quant_unit to the power-of-two default for (T_th, BW_T); an s of 0 disables
// that module. Unknown keys are rejected.
struct ConfigDoc {
  ClfConfig config;
  std::optional<SensorGeometry> geometry;
  std::uint32_t ssm_r = 2;
};

ConfigDoc parse_config_json(const std::string& text);
ConfigDoc load_config_file(const std::string& path);
std::string config_to_json(const ClfConfig& config,
                           const std::optional<SensorGeometry>& geometry = std::nullopt);

SensorGeometry parse_geometry_string(const std::string& s);  // "WxH"

// Scene document: a single shape object or an array of them.
std::vector<MotionScene> parse_scene_json(const std::string& text);
std::vector<MotionScene> load_scene_file(const std::string& path);

SweepSpec parse_sweep_json(const std::string& text);
SweepSpec load_sweep_file(const std::string& path);

std::string metrics_to_json(const MetricsReport& m, const PipelineStats* stats = nullptr);

// Every CLI run writes one of these next to its primary output.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  std::string config_json;  // empty when the command takes no config
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
  std::vector<std::pair<std::string, std::string>> extras;
};

void write_manifest(const RunManifest& manifest, const std::string& output_path);

extern const char* const kToolVersion;

}  // namespace clf

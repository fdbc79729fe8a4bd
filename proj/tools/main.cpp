// clf: event-stream denoising toolkit.
//
// Subcommands: denoise (run a filter over a CSV stream), synth (generate a
// labeled synthetic stream), sweep (parameter grid -> metrics CSV), bitwidth
// (timestamp-wraparound false-positive study). All randomness flows from the
// explicit --seed; reruns with identical arguments produce identical bytes.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "clf/analysis.hpp"
#include "clf/config_json.hpp"
#include "clf/events.hpp"
#include "clf/filters.hpp"
#include "clf/pipeline.hpp"
#include "clf/synth.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitConfig = 3;

int exit_code_for(const clf::Error& e) {
  switch (e.code) {
    case clf::Errc::io_failure:
      return kExitIo;
    case clf::Errc::malformed_record:
    case clf::Errc::coordinate_out_of_range:
    case clf::Errc::non_monotonic_timestamp:
      return kExitIo;
    default:
      return kExitConfig;
  }
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
};

std::vector<std::string> capture_args(int argc, char** argv) {
  return {argv + 1, argv + argc};
}

// ---------------------------------------------------------------------------

struct DenoiseOpts {
  std::string input, config_path, filter = "clf", output, metrics_path, kernel = "auto";
  std::string geometry, trace_path;
  bool pipelined = false;
};

int cmd_denoise(const DenoiseOpts& o, const std::vector<std::string>& raw_args) {
  Timer timer;
  clf::ConfigDoc doc = clf::load_config_file(o.config_path);
  if (!o.geometry.empty()) doc.geometry = clf::parse_geometry_string(o.geometry);

  clf::EventStream stream = doc.geometry ? clf::read_event_file(o.input, &*doc.geometry)
                                         : clf::read_event_file(o.input);
  const clf::SensorGeometry geo = stream.geometry;
  const clf::Kernel kern = clf::kernel_from_name(o.kernel.c_str());

  std::vector<clf::Decision> decisions;
  clf::PipelineStats pipeline_stats;
  bool have_pipeline = false;

  if (o.pipelined) {
    if (o.filter != "clf")
      throw clf::Error(clf::Errc::config_unsupported, "--pipelined applies to the clf filter only");
    clf::ClfConfig cfg = doc.config;
    cfg.pipelined = true;
    cfg.validate();
    auto result = clf::run_pipelined(geo, cfg, stream, kern);
    decisions = std::move(result.decisions);
    pipeline_stats = std::move(result.stats);
    have_pipeline = true;
    if (!o.trace_path.empty()) {
      std::ofstream tout(o.trace_path);
      if (!tout) throw clf::Error(clf::Errc::io_failure, "cannot open " + o.trace_path + " for writing");
      clf::write_trace_csv(tout, result.trace);
    }
  } else if (!o.trace_path.empty()) {
    throw clf::Error(clf::Errc::config_unsupported, "--trace needs --pipelined");
  } else if (o.filter == "clf") {
    auto [d, s] = clf::run_unpipelined(geo, doc.config, stream, kern);
    decisions = std::move(d);
    pipeline_stats = std::move(s);
    have_pipeline = true;
  } else if (o.filter == "rcf") {
    clf::ClfFilter f = clf::make_rcf(geo, doc.config.params, kern);
    decisions = clf::run_filter(f, stream);
  } else if (o.filter == "baf") {
    clf::BafFilter f(geo, doc.config.params);
    decisions = clf::run_filter(f, stream);
  } else if (o.filter == "stcf") {
    clf::StcfFilter f(geo, doc.config.params);
    decisions = clf::run_filter(f, stream);
  } else if (o.filter == "ssm") {
    clf::SsmFilter f(geo, doc.config.params, doc.ssm_r);
    decisions = clf::run_filter(f, stream);
  } else if (o.filter == "oracle") {
    clf::OracleFilter f(geo, doc.config.params, doc.config.same_polarity_only);
    decisions = clf::run_filter(f, stream);
  } else {
    throw clf::Error(clf::Errc::config_invalid, "unknown filter \"" + o.filter + "\"");
  }

  // Input columns plus a decision column.
  std::ofstream out(o.output);
  if (!out) throw clf::Error(clf::Errc::io_failure, "cannot open " + o.output + " for writing");
  out << "# geometry: " << geo.width << "x" << geo.height << "\n";
  out << "# columns: t_us,x,y,p" << (stream.events.empty() || stream.events[0].label == clf::Label::unknown ? "" : ",label")
      << ",decision\n";
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const clf::Event& e = stream.events[i];
    out << e.t << ',' << e.x << ',' << e.y << ',' << unsigned(e.p == clf::Polarity::on);
    if (e.label != clf::Label::unknown) out << ',' << unsigned(e.label == clf::Label::signal);
    out << ',' << unsigned(decisions[i].is_signal) << '\n';
  }
  if (!out) throw clf::Error(clf::Errc::io_failure, "write failed: " + o.output);
  out.close();

  std::vector<std::string> outputs{o.output};
  if (!o.trace_path.empty()) outputs.push_back(o.trace_path);
  if (!o.metrics_path.empty()) {
    for (const clf::Event& e : stream.events)
      if (e.label == clf::Label::unknown)
        throw clf::Error(clf::Errc::unlabeled_event, "labels required for --metrics");
    const clf::MetricsReport report = clf::compute_metrics(decisions, stream);
    std::ofstream mout(o.metrics_path);
    if (!mout) throw clf::Error(clf::Errc::io_failure, "cannot open " + o.metrics_path + " for writing");
    mout << clf::metrics_to_json(report, have_pipeline ? &pipeline_stats : nullptr) << '\n';
    outputs.push_back(o.metrics_path);
  }

  clf::RunManifest manifest;
  manifest.command = "denoise";
  manifest.args = raw_args;
  manifest.config_json = clf::config_to_json(doc.config, geo);
  manifest.inputs = {o.input, o.config_path};
  manifest.outputs = outputs;
  manifest.wall_ms = timer.ms();
  manifest.extras.emplace_back("filter", o.filter);
  manifest.extras.emplace_back("kernel", o.kernel);
  clf::write_manifest(manifest, o.output + ".manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------

struct SynthOpts {
  std::string geometry, scene_path, output;
  double noise_ratio = 0.0;
  std::uint64_t seed = 0;
};

int cmd_synth(const SynthOpts& o, const std::vector<std::string>& raw_args) {
  Timer timer;
  const clf::SensorGeometry geo = clf::parse_geometry_string(o.geometry);
  const std::vector<clf::MotionScene> scenes = clf::load_scene_file(o.scene_path);

  std::vector<clf::EventStream> parts;
  for (const clf::MotionScene& scene : scenes) parts.push_back(clf::gen_signal(geo, scene, o.seed));
  clf::EventStream signal = clf::merge_signals(parts);

  clf::EventStream mixed;
  double achieved = 0.0;
  if (o.noise_ratio > 0) {
    mixed = clf::mix_to_ratio(signal, clf::NoiseModel{0.0, o.seed}, o.noise_ratio);
    const double noise = double(mixed.size() - signal.size());
    achieved = signal.empty() ? 0.0 : noise / double(signal.size());
  } else {
    mixed = std::move(signal);
  }
  clf::write_event_file(mixed, o.output, {"rng: splitmix64", "seed: " + std::to_string(o.seed)});

  clf::RunManifest manifest;
  manifest.command = "synth";
  manifest.args = raw_args;
  manifest.inputs = {o.scene_path};
  manifest.outputs = {o.output};
  manifest.seed = o.seed;
  manifest.wall_ms = timer.ms();
  manifest.extras.emplace_back("target_ratio", std::to_string(o.noise_ratio));
  manifest.extras.emplace_back("achieved_ratio", std::to_string(achieved));
  manifest.extras.emplace_back("events", std::to_string(mixed.size()));
  clf::write_manifest(manifest, o.output + ".manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepOpts {
  std::string spec_path, output;
  unsigned jobs = 1;
};

int cmd_sweep(const SweepOpts& o, const std::vector<std::string>& raw_args) {
  Timer timer;
  const clf::SweepSpec spec = clf::load_sweep_file(o.spec_path);
  const std::vector<clf::SweepRow> rows = clf::run_sweep(spec, o.jobs);
  std::ofstream out(o.output);
  if (!out) throw clf::Error(clf::Errc::io_failure, "cannot open " + o.output + " for writing");
  clf::write_sweep_csv(out, rows);
  if (!out) throw clf::Error(clf::Errc::io_failure, "write failed: " + o.output);
  out.close();

  clf::RunManifest manifest;
  manifest.command = "sweep";
  manifest.args = raw_args;
  manifest.config_json = clf::config_to_json(spec.base);
  manifest.inputs = {o.spec_path};
  manifest.outputs = {o.output};
  manifest.wall_ms = timer.ms();
  manifest.extras.emplace_back("rows", std::to_string(rows.size()));
  clf::write_manifest(manifest, o.output + ".manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------

struct BitwidthOpts {
  double lambda_hz = 0.0;
  double t_th_us = 200.0;
  std::string bwt_list = "4,6,8,10,12";
  std::int64_t quant_us = 0;  // 0 = derive from t_th and the smallest bitwidth
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_bitwidth(const BitwidthOpts& o, const std::vector<std::string>& raw_args) {
  Timer timer;
  std::vector<std::uint32_t> bws;
  std::stringstream ss(o.bwt_list);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (tok.empty()) continue;
    bws.push_back(std::uint32_t(std::stoul(tok)));
  }
  if (bws.empty()) throw clf::Error(clf::Errc::config_invalid, "--bwt-list is empty");
  std::uint32_t min_bw = bws[0];
  for (auto b : bws) min_bw = std::min(min_bw, b);

  std::int64_t quant = o.quant_us;
  if (quant <= 0) {
    // Smallest power of two keeping t_th inside the narrowest span.
    quant = 1;
    while (double(quant) * double(1ull << min_bw) <= o.t_th_us) quant <<= 1;
  }

  std::ofstream out(o.output);
  if (!out) throw clf::Error(clf::Errc::io_failure, "cannot open " + o.output + " for writing");
  out << "BW_T,T_s_us,fp_analytic,fp_montecarlo,stderr\n";
  char buf[128];
  for (std::size_t i = 0; i < bws.size(); ++i) {
    const double t_s = double(quant) * double(1ull << bws[i]);
    const double horizon = 64.0 * t_s + 1e9 / std::max(o.lambda_hz, 1.0);
    const double analytic = clf::fp_rate_analytic(o.lambda_hz, o.t_th_us, t_s, horizon);
    const clf::McEstimate mc = clf::fp_rate_montecarlo(o.lambda_hz, o.t_th_us, t_s, o.trials,
                                                       o.seed + i);
    std::snprintf(buf, sizeof buf, "%u,%.0f,%.9g,%.9g,%.9g\n", bws[i], t_s, analytic, mc.p, mc.stderr_);
    out << buf;
  }
  if (!out) throw clf::Error(clf::Errc::io_failure, "write failed: " + o.output);
  out.close();

  clf::RunManifest manifest;
  manifest.command = "bitwidth";
  manifest.args = raw_args;
  manifest.outputs = {o.output};
  manifest.seed = o.seed;
  manifest.wall_ms = timer.ms();
  manifest.extras.emplace_back("quant_unit_us", std::to_string(quant));
  clf::write_manifest(manifest, o.output + ".manifest.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-camera stream denoising toolkit"};
  app.require_subcommand(1);
  const std::vector<std::string> raw_args = capture_args(argc, argv);

  // Malformed geometry strings are usage errors, caught at parse time.
  const CLI::Validator geometry_validator(
      [](std::string& s) -> std::string {
        try {
          clf::parse_geometry_string(s);
          return {};
        } catch (const clf::Error& e) {
          return e.what();
        }
      },
      "WxH");

  DenoiseOpts dn;
  CLI::App* denoise = app.add_subcommand("denoise", "Classify a CSV event stream");
  denoise->add_option("--input", dn.input, "input CSV")->required();
  denoise->add_option("--config", dn.config_path, "filter config JSON")->required();
  denoise->add_option("--filter", dn.filter, "clf|baf|stcf|rcf|ssm|oracle")
      ->check(CLI::IsMember({"clf", "baf", "stcf", "rcf", "ssm", "oracle"}));
  denoise->add_option("--output", dn.output, "decision CSV")->required();
  denoise->add_option("--metrics", dn.metrics_path, "metrics JSON (input must be labeled)");
  denoise->add_option("--geometry", dn.geometry, "WxH override")->check(geometry_validator);
  denoise->add_option("--kernel", dn.kernel, "auto|scalar|avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  denoise->add_flag("--pipelined", dn.pipelined, "use the two-stage memory pipeline model");
  denoise->add_option("--trace", dn.trace_path, "access-trace CSV (needs --pipelined)");

  SynthOpts sy;
  CLI::App* synth = app.add_subcommand("synth", "Generate a labeled synthetic stream");
  synth->add_option("--geometry", sy.geometry, "WxH")->required()->check(geometry_validator);
  synth->add_option("--scene", sy.scene_path, "scene JSON (object or array)")->required();
  synth->add_option("--noise-ratio", sy.noise_ratio, "target #noise/#signal");
  synth->add_option("--seed", sy.seed, "RNG seed");
  synth->add_option("--output", sy.output, "output CSV")->required();

  SweepOpts sw;
  CLI::App* sweep = app.add_subcommand("sweep", "Evaluate a parameter grid");
  sweep->add_option("--spec", sw.spec_path, "sweep spec JSON")->required();
  sweep->add_option("--output", sw.output, "output CSV")->required();
  sweep->add_option("--jobs", sw.jobs, "worker threads")->check(CLI::Range(1u, 64u));

  BitwidthOpts bw;
  CLI::App* bitwidth = app.add_subcommand("bitwidth", "Timestamp wraparound false-positive study");
  bitwidth->add_option("--lambda", bw.lambda_hz, "window-aggregate noise rate, Hz")->required();
  bitwidth->add_option("--tth", bw.t_th_us, "correlation time threshold, us");
  bitwidth->add_option("--bwt-list", bw.bwt_list, "comma-separated bitwidths");
  bitwidth->add_option("--quant", bw.quant_us, "quantization unit, us (default: derived)");
  bitwidth->add_option("--trials", bw.trials, "Monte-Carlo trials per point");
  bitwidth->add_option("--seed", bw.seed, "RNG seed");
  bitwidth->add_option("--output", bw.output, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*denoise) return cmd_denoise(dn, raw_args);
    if (*synth) return cmd_synth(sy, raw_args);
    if (*sweep) return cmd_sweep(sw, raw_args);
    if (*bitwidth) return cmd_bitwidth(bw, raw_args);
  } catch (const clf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitUsage;
}

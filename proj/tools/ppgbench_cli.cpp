// Command-line front end for the bench: synthesize, encode, decode,
// estimate, run suites and post-process reports.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "ppgbench/bench.hpp"
#include "ppgbench/error.hpp"
#include "ppgbench/metrics.hpp"
#include "ppgbench/parallel.hpp"
#include "ppgbench/random.hpp"

using namespace ppgbench;

namespace {

struct SynthOptions {
  SynthConfig cfg;
  std::optional<double> snr_db;
};

void add_synth_options(CLI::App* app, SynthOptions& o) {
  app->add_option("--hr", o.cfg.heart_rate_bpm, "Heart rate in bpm");
  app->add_option("--duration", o.cfg.duration_s, "Duration in seconds");
  app->add_option("--fs", o.cfg.sample_rate_hz, "Sample rate in Hz");
  app->add_option("--rsa-freq", o.cfg.rsa_freq_hz, "Respiratory modulation frequency in Hz");
  app->add_option("--rsa-depth", o.cfg.rsa_depth, "Relative heart-rate modulation depth");
  app->add_option("--drift-freq", o.cfg.drift_freq_hz, "Baseline drift frequency in Hz");
  app->add_option("--drift-amp", o.cfg.drift_amplitude, "Baseline drift amplitude");
  app->add_option("--powerline-freq", o.cfg.powerline_freq_hz, "Mains interference frequency in Hz");
  app->add_option("--powerline-amp", o.cfg.powerline_amplitude, "Mains interference amplitude");
  app->add_option("--motion-rate", o.cfg.motion_burst_rate_per_min, "Motion bursts per minute");
  app->add_option("--motion-amp", o.cfg.motion_burst_amplitude, "Motion burst amplitude");
  app->add_option("--snr", o.snr_db, "Add white noise at this SNR in dB");
}

PpgWaveform make_waveform(const SynthOptions& o, std::uint64_t seed) {
  SynthConfig cfg = o.cfg;
  cfg.seed = seed;
  PpgWaveform w = synthesize_ppg(cfg);
  if (o.snr_db) w = add_noise(w, *o.snr_db, derive_seed(seed, {static_cast<std::uint64_t>(Stream::Noise)}));
  return w;
}

struct DutOptions {
  std::string drops = "none";
  double drop_p = 0.0;
  double drop_base = 0.05;
  double drop_slope = 0.005;
  double jitter_ms = 0.0;
  double sensor_noise = 0.0;
  std::optional<double> motion_freq;
  double motion_amp = 1.0;
};

void add_dut_options(CLI::App* app, DutOptions& o) {
  app->add_option("--drops", o.drops, "Frame drop mode")->check(CLI::IsMember({"none", "uniform", "hr_dependent"}));
  app->add_option("--drop-p", o.drop_p, "Drop probability for uniform drops");
  app->add_option("--drop-base", o.drop_base, "Base probability for hr_dependent drops");
  app->add_option("--drop-slope", o.drop_slope, "Probability increase per bpm above 120");
  app->add_option("--jitter-ms", o.jitter_ms, "Timestamp jitter standard deviation in ms");
  app->add_option("--sensor-noise", o.sensor_noise, "Additive sensor noise standard deviation");
  app->add_option("--motion-freq", o.motion_freq, "Sinusoidal motion contamination frequency in Hz");
  app->add_option("--motion-amp", o.motion_amp, "Motion contamination amplitude in pixel units");
}

DegradationConfig make_dut(const DutOptions& o, std::uint64_t seed) {
  DegradationConfig cfg;
  if (o.drops == "uniform") cfg.drop_mode = UniformDrops{o.drop_p};
  if (o.drops == "hr_dependent") cfg.drop_mode = HrDependentDrops{o.drop_base, o.drop_slope};
  cfg.jitter_std_ms = o.jitter_ms;
  cfg.sensor_noise_std = o.sensor_noise;
  if (o.motion_freq) cfg.motion = MotionContamination{*o.motion_freq, o.motion_amp};
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

struct EstimatorOptions {
  std::string method = "spectral";
  double band_low = 30.0;
  double band_high = 240.0;
  std::string channel = "G";
  std::optional<double> resample_fps;
  bool naive = false;
};

void add_estimator_options(CLI::App* app, EstimatorOptions& o) {
  app->add_option("--method", o.method, "spectral or peak")->check(CLI::IsMember({"spectral", "peak"}));
  app->add_option("--band-low", o.band_low, "Lower band edge in bpm");
  app->add_option("--band-high", o.band_high, "Upper band edge in bpm");
  app->add_option("--channel", o.channel, "Colour channel (R, G or B)");
  app->add_option("--resample-fps", o.resample_fps, "Uniform grid rate before estimation");
  app->add_flag("--naive", o.naive, "Ignore timestamps and assume nominal frame spacing");
}

EstimatorConfig make_estimator(const EstimatorOptions& o) {
  EstimatorConfig cfg;
  cfg.method = parse_hr_method(o.method);
  cfg.band_low_bpm = o.band_low;
  cfg.band_high_bpm = o.band_high;
  cfg.channel = parse_channel(o.channel);
  cfg.resample_fps = o.resample_fps;
  cfg.timestamp_aware = !o.naive;
  cfg.validate();
  return cfg;
}

ChannelProfile pick_profile(const std::string& name) {
  const auto profiles = standard_profiles();
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (name == profiles[i].name || name == std::to_string(i + 1)) return profiles[i];
  }
  throw Error(ErrorKind::Config, "unknown profile `" + name + "` (use 1-4 or a standard profile name)");
}

void write_text(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file || !(file << text)) throw Error(ErrorKind::Write, "cannot write " + out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale bench for camera-based heart-rate apps"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  std::string out;
  app.add_option("--seed", seed, "Master seed")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize a PPG waveform to CSV");
  SynthOptions synth_opts;
  add_synth_options(synth, synth_opts);
  synth->add_option("--out", out, "Output CSV (default stdout)");

  // encode
  auto* encode = app.add_subcommand("encode", "Render a waveform into a PPGV video");
  SynthOptions encode_synth;
  add_synth_options(encode, encode_synth);
  std::string encode_input;
  std::string profile_name = "1";
  FrameSpec spec;
  double sigma = kDefaultDitherSigma;
  unsigned workers = 0;
  std::string png_dir;
  encode->add_option("--input", encode_input, "Waveform CSV; synthesize from flags when omitted");
  encode->add_option("--profile", profile_name, "Signal strength profile (1-4 or name)");
  encode->add_option("--width", spec.width, "Frame width");
  encode->add_option("--height", spec.height, "Frame height");
  encode->add_option("--fps", spec.fps, "Frame rate");
  encode->add_option("--sigma", sigma, "Dither standard deviation in pixel units");
  encode->add_option("--workers", workers, "Render threads (0 = all cores)");
  encode->add_option("--png-dir", png_dir, "Also dump every frame as PNG here");
  encode->add_option("--out", out, "Output PPGV file")->required();

  // decode
  auto* decode = app.add_subcommand("decode", "Decode a PPGV video into per-frame channel means");
  std::string decode_input;
  DutOptions decode_dut;
  std::optional<double> decode_hr;
  decode->add_option("--input", decode_input, "PPGV file")->required();
  add_dut_options(decode, decode_dut);
  decode->add_option("--hr", decode_hr, "Heart rate driving hr_dependent drops");
  decode->add_option("--out", out, "Output CSV")->required();

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Estimate heart rate from a recovered CSV");
  std::string estimate_input;
  std::optional<double> estimate_fps;
  std::string estimate_format = "text";
  EstimatorOptions estimate_opts;
  estimate->add_option("--input", estimate_input, "Recovered signal CSV")->required();
  estimate->add_option("--fps", estimate_fps, "Nominal frame rate (default: inferred)");
  add_estimator_options(estimate, estimate_opts);
  estimate->add_option("--format", estimate_format, "text or json")->check(CLI::IsMember({"text", "json"}));
  estimate->add_option("--out", out, "Output file (default stdout)");

  // suite
  auto* suite = app.add_subcommand("suite", "Build or run test suites");
  suite->require_subcommand(1);
  auto* suite_build = suite->add_subcommand("build", "Write the standard 20-case suite as JSON");
  suite_build->add_option("--out", out, "Output suite JSON (default stdout)");
  auto* suite_run = suite->add_subcommand("run", "Run a suite and write a report");
  std::string suite_file;
  std::size_t reps = 20;
  RunOptions run_opts;
  std::string materialize_dir;
  std::string run_format = "json";
  DutOptions run_dut;
  EstimatorOptions run_est;
  suite_run->add_option("--suite", suite_file, "Suite JSON (default: standard suite)");
  suite_run->add_option("--reps", reps, "Repetitions")->capture_default_str();
  suite_run->add_flag("--fixed-videos", run_opts.fixed_videos, "Replay identical videos in every repetition");
  suite_run->add_option("--workers", run_opts.workers, "Worker threads (0 = all cores)");
  suite_run->add_option("--materialize-dir", materialize_dir, "Write PPGV files here instead of streaming");
  suite_run->add_option("--sigma", run_opts.dither_sigma, "Dither standard deviation in pixel units");
  suite_run->add_option("--max-lag", run_opts.xcorr_max_lag_s, "Cross-correlation lag search range in s");
  suite_run->add_option("--format", run_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  suite_run->add_option("--out", out, "Report file (default stdout)");
  add_dut_options(suite_run, run_dut);
  add_estimator_options(suite_run, run_est);

  // report
  auto* report = app.add_subcommand("report", "Convert a JSON report to CSV or a summary");
  std::string report_input;
  std::string report_format = "summary";
  report->add_option("--input", report_input, "JSON report")->required();
  report->add_option("--format", report_format, "csv or summary")->check(CLI::IsMember({"csv", "summary"}));
  report->add_option("--out", out, "Output file (default stdout)");

  // accel
  auto* accel = app.add_subcommand("accel", "Check whether a motion trace explains a heart-rate reading");
  std::string accel_input;
  double accel_bpm = 0.0;
  double accel_lo = 0.5;
  double accel_hi = 4.0;
  double accel_tol = 0.1;
  accel->add_option("--input", accel_input, "Accelerometer CSV (t_s,magnitude)")->required();
  accel->add_option("--bpm", accel_bpm, "Reported heart rate")->required();
  accel->add_option("--band-low", accel_lo, "Search band lower edge in Hz");
  accel->add_option("--band-high", accel_hi, "Search band upper edge in Hz");
  accel->add_option("--tol", accel_tol, "Match tolerance in Hz");
  accel->add_option("--format", estimate_format, "text or json")->check(CLI::IsMember({"text", "json"}));
  accel->add_option("--out", out, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const PpgWaveform w = make_waveform(synth_opts, seed);
      if (out.empty()) {
        std::printf("t_s,value\n");
        for (std::size_t i = 0; i < w.size(); ++i) {
          std::printf("%.12g,%.17g\n", static_cast<double>(i) / w.sample_rate_hz(), w.samples()[i]);
        }
      } else {
        save_waveform(w, out);
      }
    } else if (encode->parsed()) {
      const PpgWaveform w = encode_input.empty() ? make_waveform(encode_synth, seed) : load_waveform(encode_input);
      const ChannelProfile profile = pick_profile(profile_name);
      const MappedSignal mapped = map_ppg_to_rgb(w, profile, spec.fps, sigma);
      const VideoClip clip = encode_video(mapped, spec, sigma, derive_seed(seed, {static_cast<std::uint64_t>(Stream::Video)}),
                                          resolve_workers(workers));
      write_video(clip, out);
      if (!png_dir.empty()) dump_png_frames(clip, png_dir);
      std::fprintf(stderr, "wrote %zu frames (%dx%d @ %g fps) to %s\n", clip.frames.size(), spec.width, spec.height,
                   spec.fps, out.c_str());
    } else if (decode->parsed()) {
      const RecoveredSignal decoded = decode_video(read_video(decode_input), resolve_workers(0));
      const RecoveredSignal observed = apply_degradation(decoded, make_dut(decode_dut, seed), decode_hr);
      write_recovered_csv(observed, out);
    } else if (estimate->parsed()) {
      const RecoveredSignal signal = read_recovered_csv(estimate_input, estimate_fps);
      const HrEstimate est = estimate_hr(signal, make_estimator(estimate_opts));
      char buf[256];
      if (estimate_format == "json") {
        nlohmann::ordered_json j{{"bpm", est.bpm}, {"method", std::string(to_string(est.method))}, {"quality", est.quality}};
        write_text(j.dump(2) + "\n", out);
      } else {
        std::snprintf(buf, sizeof buf, "%.3f bpm (%s, quality %.3f)\n", est.bpm, std::string(to_string(est.method)).c_str(),
                      est.quality);
        write_text(buf, out);
      }
    } else if (suite_build->parsed()) {
      write_text(suite_to_json(build_standard_suite(seed)) + "\n", out);
    } else if (suite_run->parsed()) {
      const TestSuite cases = suite_file.empty() ? build_standard_suite(seed) : load_suite(suite_file);
      if (!materialize_dir.empty()) run_opts.materialize_dir = materialize_dir;
      const RunResult result =
          run_suite(cases, make_dut(run_dut, 0), make_estimator(run_est), reps, seed, run_opts);
      const ReportFormat format = parse_report_format(run_format);
      if (out.empty()) {
        std::cout << (format == ReportFormat::Json ? report_json(result) : report_csv(result));
      } else {
        generate_report(result, format, out);
      }
      std::cerr << report_summary(result);
      return result.pass ? 0 : 2;
    } else if (report->parsed()) {
      const RunResult result = read_report_json(report_input);
      write_text(report_format == "csv" ? report_csv(result) : report_summary(result), out);
    } else if (accel->parsed()) {
      const DominantFrequency dom = dominant_frequency(read_accel_csv(accel_input), accel_lo, accel_hi);
      const bool match = dom.matches_bpm(accel_bpm, accel_tol);
      if (estimate_format == "json") {
        nlohmann::ordered_json j{{"dominant_hz", dom.freq_hz}, {"reading_hz", accel_bpm / 60.0}, {"match", match}};
        write_text(j.dump(2) + "\n", out);
      } else {
        char buf[256];
        std::snprintf(buf, sizeof buf, "motion %.3f Hz vs reading %.3f Hz: %s\n", dom.freq_hz, accel_bpm / 60.0,
                      match ? "motion artifact likely" : "no match");
        write_text(buf, out);
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "ppgbench: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ppgbench: %s\n", e.what());
    return 1;
  }
  return 0;
}

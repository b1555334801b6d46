#include "ppgbench/waveform.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ppgbench/dsp.hpp"
#include "ppgbench/error.hpp"
#include "ppgbench/random.hpp"

namespace ppgbench {

namespace {

constexpr double kSystolicCenter = 0.30;
constexpr double kSystolicWidth = 0.12;
constexpr double kSystolicAmplitude = 1.0;
constexpr double kDicroticCenter = 0.65;
constexpr double kDicroticWidth = 0.18;
constexpr double kDicroticAmplitude = 0.35;
constexpr double kMotionBurstDuration_s = 0.5;

double lobes(double x) {
  const double ds = (x - kSystolicCenter) / kSystolicWidth;
  const double dd = (x - kDicroticCenter) / kDicroticWidth;
  return kSystolicAmplitude * std::exp(-0.5 * ds * ds) + kDicroticAmplitude * std::exp(-0.5 * dd * dd);
}

void require_finite_nonnegative(double value, const char* name) {
  if (!std::isfinite(value) || value < 0.0) {
    throw Error(ErrorKind::Config, std::string(name) + " must be finite and nonnegative");
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

}  // namespace

PpgWaveform::PpgWaveform(std::vector<double> samples, double sample_rate_hz, std::string label)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz), label_(std::move(label)) {
  if (samples_.empty()) throw Error(ErrorKind::Input, "waveform has no samples");
  if (!std::isfinite(sample_rate_hz_) || sample_rate_hz_ <= 0.0) {
    throw Error(ErrorKind::Config, "waveform sample rate must be positive");
  }
  if (!std::all_of(samples_.begin(), samples_.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorKind::Input, "waveform samples must be finite");
  }
}

void SynthConfig::validate() const {
  if (!std::isfinite(heart_rate_bpm) || heart_rate_bpm < 30.0 || heart_rate_bpm > 240.0) {
    throw Error(ErrorKind::Config, "heart rate must lie in [30, 240] bpm");
  }
  if (!std::isfinite(duration_s) || duration_s <= 0.0) {
    throw Error(ErrorKind::Config, "duration must be positive");
  }
  if (!std::isfinite(sample_rate_hz) || sample_rate_hz <= 0.0) {
    throw Error(ErrorKind::Config, "sample rate must be positive");
  }
  if (sample_rate_hz < 4.0 * heart_rate_bpm / 60.0) {
    throw Error(ErrorKind::Config, "sample rate must be at least 4x the heart-rate frequency");
  }
  require_finite_nonnegative(rsa_freq_hz, "rsa_freq_hz");
  require_finite_nonnegative(rsa_depth, "rsa_depth");
  if (rsa_depth >= 1.0) throw Error(ErrorKind::Config, "rsa_depth must be below 1");
  require_finite_nonnegative(drift_freq_hz, "drift_freq_hz");
  require_finite_nonnegative(drift_amplitude, "drift_amplitude");
  require_finite_nonnegative(powerline_freq_hz, "powerline_freq_hz");
  require_finite_nonnegative(powerline_amplitude, "powerline_amplitude");
  require_finite_nonnegative(motion_burst_rate_per_min, "motion_burst_rate_per_min");
  require_finite_nonnegative(motion_burst_amplitude, "motion_burst_amplitude");
  if (std::llround(duration_s * sample_rate_hz) < 2) {
    throw Error(ErrorKind::Config, "duration x sample rate must give at least 2 samples");
  }
}

double beat_template(double phase) {
  const double within = phase - std::floor(phase);
  double value = 0.0;
  for (int k = -2; k <= 2; ++k) value += lobes(within + k);
  return value;
}

PpgWaveform synthesize_ppg(const SynthConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(std::llround(config.duration_s * config.sample_rate_hz));
  const double fs = config.sample_rate_hz;
  const double f0 = config.heart_rate_bpm / 60.0;
  const bool rsa = config.rsa_depth > 0.0 && config.rsa_freq_hz > 0.0;
  const double two_pi = 2.0 * std::numbers::pi;

  Rng rng(config.seed, Stream::Synth);
  const double drift_phase = two_pi * rng.uniform();
  const double powerline_phase = two_pi * rng.uniform();
  std::vector<double> burst_onsets;
  if (config.motion_burst_rate_per_min > 0.0 && config.motion_burst_amplitude > 0.0) {
    const double rate_hz = config.motion_burst_rate_per_min / 60.0;
    for (double t = rng.exponential(rate_hz); t < config.duration_s; t += rng.exponential(rate_hz)) {
      burst_onsets.push_back(t);
    }
  }

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    double phase = f0 * t;
    if (rsa) {
      const double w = two_pi * config.rsa_freq_hz;
      phase += f0 * config.rsa_depth * (1.0 - std::cos(w * t)) / w;
    }
    double v = beat_template(phase);
    v += config.drift_amplitude * std::sin(two_pi * config.drift_freq_hz * t + drift_phase);
    v += config.powerline_amplitude * std::sin(two_pi * config.powerline_freq_hz * t + powerline_phase);
    for (double onset : burst_onsets) {
      const double dt = t - onset;
      if (dt >= 0.0 && dt <= kMotionBurstDuration_s) {
        v += config.motion_burst_amplitude * 0.5 * (1.0 - std::cos(two_pi * dt / kMotionBurstDuration_s));
      }
    }
    x[i] = v;
  }

  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) throw Error(ErrorKind::DegenerateSignal, "synthesized waveform is constant");
  for (double& v : x) v = (v - lo) / range;

  std::ostringstream label;
  label << "synth:hr=" << config.heart_rate_bpm << ",seed=" << config.seed;
  return PpgWaveform(std::move(x), fs, label.str());
}

PpgWaveform add_noise(const PpgWaveform& waveform, double snr_db, std::uint64_t seed) {
  if (!std::isfinite(snr_db)) throw Error(ErrorKind::Config, "snr_db must be finite");
  const auto x = waveform.samples();
  const double m = dsp::mean(x);
  double signal_power = 0.0;
  for (double v : x) signal_power += (v - m) * (v - m);
  signal_power /= static_cast<double>(x.size());
  const bool constant = x.empty() || std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
  if (constant || !(signal_power > 0.0)) throw Error(ErrorKind::DegenerateSignal, "cannot set an SNR on a constant signal");

  Rng rng(seed, Stream::Noise);
  std::vector<double> noise(x.size());
  for (double& z : noise) z = rng.normal();
  const double noise_mean = dsp::mean(noise);
  double raw_power = 0.0;
  for (double& z : noise) {
    z -= noise_mean;
    raw_power += z * z;
  }
  raw_power /= static_cast<double>(noise.size());
  const double target_power = signal_power / std::pow(10.0, snr_db / 10.0);
  const double scale = raw_power > 0.0 ? std::sqrt(target_power / raw_power) : 0.0;

  std::vector<double> y(x.begin(), x.end());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += scale * noise[i];
  return PpgWaveform(std::move(y), waveform.sample_rate_hz(), waveform.label() + "+noise");
}

PpgWaveform resample(const PpgWaveform& waveform, double target_rate_hz) {
  if (!std::isfinite(target_rate_hz) || target_rate_hz <= 0.0) {
    throw Error(ErrorKind::Config, "target rate must be positive");
  }
  const double fs = waveform.sample_rate_hz();
  if (target_rate_hz == fs) return waveform;

  const double cutoff = 0.45 * std::min(fs, target_rate_hz) / fs;
  const auto kernel = dsp::design_lowpass(cutoff, dsp::kLowpassHalfWidth);
  const auto filtered = dsp::filter_symmetric(waveform.samples(), kernel);

  const auto n_in = filtered.size();
  const auto n_out = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(n_in) * target_rate_hz / fs)));
  std::vector<double> out(n_out);
  for (std::size_t j = 0; j < n_out; ++j) {
    const double pos = static_cast<double>(j) * fs / target_rate_hz;
    const auto i0 = static_cast<std::size_t>(std::floor(pos));
    if (i0 + 1 >= n_in) {
      out[j] = filtered.back();
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    out[j] = filtered[i0] + frac * (filtered[i0 + 1] - filtered[i0]);
  }
  return PpgWaveform(std::move(out), target_rate_hz, waveform.label());
}

PpgWaveform load_waveform(const std::filesystem::path& path, WaveformFormat format) {
  (void)format;
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open waveform file " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "waveform file is empty");
  std::string_view header = trim(line);
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
  if (header != "t_s,value") throw Error(ErrorKind::Parse, "expected header `t_s,value`");

  std::vector<double> times;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    double t = 0.0;
    double v = 0.0;
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos ||
        !parse_double(row.substr(0, comma), t) || !parse_double(row.substr(comma + 1), v)) {
      throw Error(ErrorKind::Parse, "malformed row at line " + std::to_string(line_no));
    }
    if (!times.empty() && t <= times.back()) {
      throw Error(ErrorKind::Parse, "time column not strictly increasing at line " + std::to_string(line_no));
    }
    times.push_back(t);
    values.push_back(v);
  }
  if (times.size() < 2) throw Error(ErrorKind::Parse, "need at least 2 samples to infer the sample rate");

  const double mean_dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double dt = times[i] - times[i - 1];
    if (std::abs(dt - mean_dt) > 0.01 * mean_dt) {
      throw Error(ErrorKind::Parse, "inconsistent sampling interval at row " + std::to_string(i + 1));
    }
  }
  double fs = 1.0 / mean_dt;
  // Timestamps are printed with finite precision; snap to the micro-hertz grid
  // when the file is consistent with it.
  const double snapped = std::round(fs * 1e6) / 1e6;
  if (std::abs(snapped - fs) <= 1e-7 * fs) fs = snapped;
  return PpgWaveform(std::move(values), fs, path.filename().string());
}

void save_waveform(const PpgWaveform& waveform, const std::filesystem::path& path, WaveformFormat format) {
  (void)format;
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Write, "cannot open " + path.string() + " for writing");
  out << "t_s,value\n";
  char buf[64];
  const auto x = waveform.samples();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / waveform.sample_rate_hz();
    std::snprintf(buf, sizeof buf, "%.12g,%.17g\n", t, x[i]);
    out << buf;
  }
  if (!out) throw Error(ErrorKind::Write, "failed writing " + path.string());
}

}  // namespace ppgbench

#include "ppgbench/dut.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include "ppgbench/dsp.hpp"
#include "ppgbench/error.hpp"
#include "ppgbench/parallel.hpp"
#include "ppgbench/random.hpp"

namespace ppgbench {

namespace {

void check_probability(double p, const char* what) {
  if (!std::isfinite(p) || p < 0.0 || p >= 1.0) {
    throw Error(ErrorKind::Config, std::string(what) + " must lie in [0, 1)");
  }
}

}  // namespace

std::vector<double> RecoveredSignal::channel(Channel c) const {
  std::vector<double> out(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) out[i] = means[i][index(c)];
  return out;
}

void RecoveredSignal::validate() const {
  if (timestamps_s.size() != means.size()) throw Error(ErrorKind::Input, "timestamp and mean counts differ");
  if (!std::isfinite(nominal_fps) || nominal_fps <= 0.0) throw Error(ErrorKind::Input, "nominal fps must be positive");
  for (std::size_t i = 0; i < timestamps_s.size(); ++i) {
    if (!std::isfinite(timestamps_s[i])) throw Error(ErrorKind::Input, "non-finite timestamp");
    if (i > 0 && !(timestamps_s[i] > timestamps_s[i - 1])) {
      throw Error(ErrorKind::Input, "timestamps must strictly increase");
    }
    for (double v : means[i]) {
      if (!std::isfinite(v)) throw Error(ErrorKind::Input, "non-finite channel mean");
    }
  }
}

Rgb spatial_mean(const Frame& frame) {
  const std::size_t pixels = static_cast<std::size_t>(frame.width) * static_cast<std::size_t>(frame.height);
  const std::uint8_t* p = frame.rgb.data();
  std::uint64_t totals[3] = {0, 0, 0};
  // Four pixels per 12-byte step so the inner loop vectorizes; 32-bit lanes
  // are flushed before they could overflow.
  constexpr std::size_t kBlockPixels = std::size_t{1} << 22;
  std::size_t done = 0;
  while (pixels - done >= 4) {
    const std::size_t quads = std::min(pixels - done, kBlockPixels) / 4;
    std::uint32_t acc[12] = {};
    for (std::size_t q = 0; q < quads; ++q) {
      const std::uint8_t* s = p + (done + 4 * q) * 3;
      for (std::size_t j = 0; j < 12; ++j) acc[j] += s[j];
    }
    for (std::size_t j = 0; j < 12; ++j) totals[j % 3] += acc[j];
    done += 4 * quads;
  }
  for (; done < pixels; ++done) {
    for (std::size_t c = 0; c < 3; ++c) totals[c] += p[done * 3 + c];
  }
  const auto n = static_cast<double>(pixels);
  return {static_cast<double>(totals[0]) / n, static_cast<double>(totals[1]) / n,
          static_cast<double>(totals[2]) / n};
}

RecoveredSignal decode_video(const VideoClip& clip, unsigned workers) {
  if (clip.frames.empty()) throw Error(ErrorKind::Input, "cannot decode an empty clip");
  clip.validate();
  RecoveredSignal out;
  out.nominal_fps = clip.spec.fps;
  out.timestamps_s = clip.timestamps_s;
  out.means.resize(clip.frames.size());
  parallel_for(clip.frames.size(), workers, [&](std::size_t i) { out.means[i] = spatial_mean(clip.frames[i]); });
  return out;
}

void DegradationConfig::validate() const {
  if (const auto* u = std::get_if<UniformDrops>(&drop_mode)) check_probability(u->p, "drop probability");
  if (const auto* h = std::get_if<HrDependentDrops>(&drop_mode)) {
    check_probability(h->base_p, "base drop probability");
    if (!std::isfinite(h->slope_per_bpm) || h->slope_per_bpm < 0.0) {
      throw Error(ErrorKind::Config, "drop slope must be nonnegative");
    }
  }
  if (!std::isfinite(jitter_std_ms) || jitter_std_ms < 0.0) throw Error(ErrorKind::Config, "jitter must be >= 0");
  if (!std::isfinite(sensor_noise_std) || sensor_noise_std < 0.0) {
    throw Error(ErrorKind::Config, "sensor noise must be >= 0");
  }
  if (motion) {
    if (!std::isfinite(motion->freq_hz) || motion->freq_hz <= 0.0 || !std::isfinite(motion->amplitude_px) ||
        motion->amplitude_px < 0.0) {
      throw Error(ErrorKind::Config, "motion needs a positive frequency and nonnegative amplitude");
    }
  }
}

bool DegradationConfig::is_identity() const noexcept {
  const bool no_drops = std::holds_alternative<NoDrops>(drop_mode) ||
                        (std::holds_alternative<UniformDrops>(drop_mode) && std::get<UniformDrops>(drop_mode).p == 0.0);
  return no_drops && jitter_std_ms == 0.0 && sensor_noise_std == 0.0 && (!motion || motion->amplitude_px == 0.0);
}

double drop_probability(const DropMode& mode, std::optional<double> heart_rate_bpm) {
  if (std::holds_alternative<NoDrops>(mode)) return 0.0;
  if (const auto* u = std::get_if<UniformDrops>(&mode)) return u->p;
  const auto& h = std::get<HrDependentDrops>(mode);
  if (!heart_rate_bpm) throw Error(ErrorKind::Config, "hr_dependent drops need the heart rate");
  return std::min(0.95, h.base_p + h.slope_per_bpm * std::max(0.0, *heart_rate_bpm - 120.0));
}

RecoveredSignal apply_degradation(const RecoveredSignal& signal, const DegradationConfig& config,
                                  std::optional<double> heart_rate_bpm) {
  config.validate();
  signal.validate();
  if (signal.size() == 0) throw Error(ErrorKind::Input, "cannot degrade an empty signal");
  if (config.is_identity() && !std::holds_alternative<HrDependentDrops>(config.drop_mode)) return signal;

  const double p = drop_probability(config.drop_mode, heart_rate_bpm);
  RecoveredSignal out;
  out.nominal_fps = signal.nominal_fps;
  std::vector<double> capture_times;
  {
    Rng rng(config.seed, Stream::Drops);
    for (std::size_t i = 0; i < signal.size(); ++i) {
      if (p > 0.0 && rng.bernoulli(p)) continue;
      capture_times.push_back(signal.timestamps_s[i]);
      out.means.push_back(signal.means[i]);
    }
  }
  if (capture_times.empty()) throw Error(ErrorKind::DegenerateOutput, "every frame was dropped");

  out.timestamps_s = capture_times;
  if (config.jitter_std_ms > 0.0) {
    Rng rng(config.seed, Stream::Jitter);
    for (double& t : out.timestamps_s) t += rng.normal() * config.jitter_std_ms * 1e-3;
    std::sort(out.timestamps_s.begin(), out.timestamps_s.end());
    for (std::size_t i = 1; i < out.timestamps_s.size(); ++i) {
      if (out.timestamps_s[i] < out.timestamps_s[i - 1] + kMinTimestampGap_s) {
        out.timestamps_s[i] = out.timestamps_s[i - 1] + kMinTimestampGap_s;
      }
    }
  }

  if (config.motion && config.motion->amplitude_px > 0.0) {
    const double w = 2.0 * std::numbers::pi * config.motion->freq_hz;
    for (std::size_t i = 0; i < out.means.size(); ++i) {
      const double m = config.motion->amplitude_px * std::sin(w * capture_times[i]);
      for (double& v : out.means[i]) v += m;
    }
  }

  if (config.sensor_noise_std > 0.0) {
    Rng rng(config.seed, Stream::SensorNoise);
    for (auto& rgb : out.means) {
      for (double& v : rgb) v += rng.normal() * config.sensor_noise_std;
    }
  }
  return out;
}

void write_recovered_csv(const RecoveredSignal& signal, const std::filesystem::path& path) {
  signal.validate();
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Write, "cannot open " + path.string() + " for writing");
  out << "t_s,r_mean,g_mean,b_mean\n";
  char buf[128];
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const auto& m = signal.means[i];
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g\n", signal.timestamps_s[i], m[0], m[1], m[2]);
    out << buf;
  }
  if (!out) throw Error(ErrorKind::Write, "failed writing " + path.string());
}

RecoveredSignal read_recovered_csv(const std::filesystem::path& path, std::optional<double> nominal_fps) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t_s,r_mean,g_mean,b_mean") throw Error(ErrorKind::Parse, "expected header `t_s,r_mean,g_mean,b_mean`");

  RecoveredSignal signal;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double fields[4];
    const char* cursor = line.data();
    const char* end = line.data() + line.size();
    for (int f = 0; f < 4; ++f) {
      const auto [ptr, ec] = std::from_chars(cursor, end, fields[f]);
      const bool last = f == 3;
      if (ec != std::errc() || (last ? ptr != end : (ptr == end || *ptr != ','))) {
        throw Error(ErrorKind::Parse, "malformed row at line " + std::to_string(line_no));
      }
      cursor = last ? ptr : ptr + 1;
    }
    signal.timestamps_s.push_back(fields[0]);
    signal.means.push_back({fields[1], fields[2], fields[3]});
  }
  if (signal.size() < 2) throw Error(ErrorKind::Parse, "recovered signal needs at least 2 rows");
  if (nominal_fps) {
    signal.nominal_fps = *nominal_fps;
  } else {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < signal.size(); ++i) gaps.push_back(signal.timestamps_s[i] - signal.timestamps_s[i - 1]);
    const double gap = dsp::median(gaps);
    signal.nominal_fps = gap > 0.0 ? 1.0 / gap : 0.0;
  }
  try {
    signal.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  return signal;
}

}  // namespace ppgbench

#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"
#include "ppgbench/error.hpp"

#include "ppgbench/dut.hpp"
#include "ppgbench/random.hpp"
#include "ppgbench/video.hpp"
#include "ppgbench/waveform.hpp"

#define CHECK_THROWS_KIND(expr, expected_kind)                                  \
  do {                                                                          \
    bool caught_ = false;                                                       \
    try {                                                                       \
      (void)(expr);                                                             \
    } catch (const ppgbench::Error& e_) {                                       \
      caught_ = true;                                                           \
      CHECK_MESSAGE(e_.kind() == (expected_kind), "wrong kind: ", e_.what());  \
    }                                                                           \
    CHECK_MESSAGE(caught_, #expr " did not throw");                             \
  } while (0)

namespace support {

inline ppgbench::PpgWaveform sine(double freq_hz, double fs, double duration_s, double amplitude = 1.0,
                                  double offset = 0.0) {
  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = offset + amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / fs);
  }
  return ppgbench::PpgWaveform(std::move(x), fs, "sine");
}

/// Recovered signal whose channels all carry `values` at `fps`.
inline ppgbench::RecoveredSignal recovered(const std::vector<double>& values, double fps) {
  ppgbench::RecoveredSignal s;
  s.nominal_fps = fps;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s.timestamps_s.push_back(static_cast<double>(i) / fps);
    s.means.push_back({values[i], values[i], values[i]});
  }
  return s;
}

inline ppgbench::PpgWaveform synth(double hr, double duration_s, std::uint64_t seed = 1) {
  ppgbench::SynthConfig cfg;
  cfg.heart_rate_bpm = hr;
  cfg.duration_s = duration_s;
  cfg.seed = seed;
  return ppgbench::synthesize_ppg(cfg);
}

/// Synthesize, map, render and decode one clip without keeping frames.
inline ppgbench::RecoveredSignal through_video(const ppgbench::PpgWaveform& w, const ppgbench::ChannelProfile& profile,
                                               std::uint64_t clip_seed, double sigma = 2.0,
                                               ppgbench::FrameSpec spec = {}) {
  const auto mapped = ppgbench::map_ppg_to_rgb(w, profile, spec.fps, sigma);
  ppgbench::RecoveredSignal out;
  out.nominal_fps = spec.fps;
  ppgbench::stream_video(mapped, spec, sigma, clip_seed, [&](std::size_t i, const ppgbench::Frame& f) {
    out.timestamps_s.push_back(static_cast<double>(i) / spec.fps);
    out.means.push_back(ppgbench::spatial_mean(f));
  });
  return out;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ppgbench_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace support

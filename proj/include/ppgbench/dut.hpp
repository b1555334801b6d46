#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include "ppgbench/video.hpp"

namespace ppgbench {

/// Per-frame spatial means as seen by a device under test. Timestamps may be
/// irregular once frames have been dropped or jittered.
struct RecoveredSignal {
  std::vector<double> timestamps_s;
  std::vector<Rgb> means;
  double nominal_fps = 30.0;

  std::size_t size() const noexcept { return timestamps_s.size(); }
  std::vector<double> channel(Channel c) const;
  /// Throws Error(Input) when lengths differ, timestamps do not strictly
  /// increase, means are non-finite or the nominal rate is not positive.
  void validate() const;

  friend bool operator==(const RecoveredSignal&, const RecoveredSignal&) = default;
};

/// Exact spatial mean per channel: integer accumulation, one division.
Rgb spatial_mean(const Frame& frame);

RecoveredSignal decode_video(const VideoClip& clip, unsigned workers = 1);

struct NoDrops {
  friend bool operator==(const NoDrops&, const NoDrops&) = default;
};
struct UniformDrops {
  double p = 0.0;
  friend bool operator==(const UniformDrops&, const UniformDrops&) = default;
};
/// p(HR) = min(0.95, base_p + slope_per_bpm * max(0, HR - 120)).
struct HrDependentDrops {
  double base_p = 0.0;
  double slope_per_bpm = 0.0;
  friend bool operator==(const HrDependentDrops&, const HrDependentDrops&) = default;
};
using DropMode = std::variant<NoDrops, UniformDrops, HrDependentDrops>;

/// Sinusoidal motion coupling into the optical path, added to every channel
/// at the frame's capture time.
struct MotionContamination {
  double freq_hz = 1.0;
  double amplitude_px = 0.0;
  friend bool operator==(const MotionContamination&, const MotionContamination&) = default;
};

struct DegradationConfig {
  DropMode drop_mode = NoDrops{};
  double jitter_std_ms = 0.0;
  double sensor_noise_std = 0.0;
  std::optional<MotionContamination> motion;
  std::uint64_t seed = 0;

  /// Throws Error(Config).
  void validate() const;
  bool is_identity() const noexcept;

  friend bool operator==(const DegradationConfig&, const DegradationConfig&) = default;
};

/// Frame-drop probability for `mode`; hr_dependent needs the heart rate.
double drop_probability(const DropMode& mode, std::optional<double> heart_rate_bpm);

/// Minimum gap enforced between jittered timestamps.
inline constexpr double kMinTimestampGap_s = 1e-4;

/// Drops, then jitters timestamps (re-sorted, minimum-gap repaired), then adds
/// motion and sensor noise. Each effect draws from its own seeded stream.
/// `heart_rate_bpm` is required by the hr_dependent drop mode only.
RecoveredSignal apply_degradation(const RecoveredSignal& signal, const DegradationConfig& config,
                                  std::optional<double> heart_rate_bpm = std::nullopt);

/// Header `t_s,r_mean,g_mean,b_mean`, 9 significant digits.
void write_recovered_csv(const RecoveredSignal& signal, const std::filesystem::path& path);
/// When `nominal_fps` is absent it is inferred as 1 / median interval.
RecoveredSignal read_recovered_csv(const std::filesystem::path& path,
                                   std::optional<double> nominal_fps = std::nullopt);

}  // namespace ppgbench

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ppgbench/waveform.hpp"

namespace ppgbench {

enum class Channel : std::size_t { R = 0, G = 1, B = 2 };

constexpr std::size_t index(Channel c) noexcept { return static_cast<std::size_t>(c); }

/// Parses "R"/"G"/"B" (case-insensitive); throws Error(Config) otherwise.
Channel parse_channel(std::string_view name);
char channel_name(Channel c) noexcept;

using Rgb = std::array<double, 3>;

inline constexpr double kDefaultDitherSigma = 2.0;

/// Brightness centre and peak-to-trough pulse excursion per colour channel,
/// in 8-bit pixel units. Together they model one "signal strength".
struct ChannelProfile {
  Rgb mean{};
  Rgb pulse_amplitude{};
  std::string name;

  /// Checks mean -/+ amplitude/2 -/+ 4*dither_sigma stays inside [0, 255].
  /// Throws Error(Profile).
  void validate(double dither_sigma = kDefaultDitherSigma) const;

  friend bool operator==(const ChannelProfile&, const ChannelProfile&) = default;
};

/// The four standard strengths, strongest first. Blue carries
/// (220, 4), (180, 2), (120, 1), (60, 0.5); red is fixed at (230, 6); green
/// keeps mean 150 and scales its amplitude 3 by the blue strength factor
/// (1, 1/2, 1/4, 1/8).
std::vector<ChannelProfile> standard_profiles();

struct FrameSpec {
  int width = 320;
  int height = 240;
  double fps = 30.0;

  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  /// width*height >= 1024, fps > 0. Throws Error(Config).
  void validate() const;

  friend bool operator==(const FrameSpec&, const FrameSpec&) = default;
};

/// Per-frame spatial-mean targets produced by map_ppg_to_rgb.
struct MappedSignal {
  std::vector<Rgb> targets;
  double fps = 30.0;
};

/// One RGB24 frame, rows top to bottom, pixels interleaved R,G,B.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  std::uint8_t at(int x, int y, Channel c) const noexcept {
    return rgb[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3 +
               index(c)];
  }

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct VideoClip {
  FrameSpec spec;
  std::vector<Frame> frames;
  std::vector<double> timestamps_s;

  /// Frame/timestamp counts agree, frames match spec, timestamps increase.
  /// Throws Error(Input).
  void validate() const;

  friend bool operator==(const VideoClip&, const VideoClip&) = default;
};

/// Resamples to `fps`, min-max normalizes to p in [0, 1] and maps each
/// channel to mean + amplitude * (0.5 - p): more blood volume, darker pixel.
MappedSignal map_ppg_to_rgb(const PpgWaveform& waveform, const ChannelProfile& profile, double fps,
                            double dither_sigma = kDefaultDitherSigma);

/// Seed for frame `frame_index` of a clip; a pure function of its inputs.
std::uint64_t frame_seed(std::uint64_t clip_seed, std::size_t frame_index) noexcept;

/// Every pixel of channel c is round(Normal(target_c, sigma^2)) clamped to
/// [0, 255]. Pixels are drawn by inverting the exact CDF of that discrete
/// distribution, one 32-bit uniform per pixel.
Frame render_frame(const Rgb& target, const FrameSpec& spec, double dither_sigma, std::uint64_t frame_seed);

/// As render_frame, reusing `frame`'s storage.
void render_frame_into(Frame& frame, const Rgb& target, const FrameSpec& spec, double dither_sigma,
                       std::uint64_t frame_seed);

/// Renders one frame per target; timestamps are i / fps. The result does not
/// depend on `workers` (0 = hardware concurrency).
VideoClip encode_video(const MappedSignal& mapped, const FrameSpec& spec, double dither_sigma,
                       std::uint64_t clip_seed, unsigned workers = 1);

/// Renders the same frames as encode_video one at a time into a reused
/// buffer and hands each to `sink` with its index, so long clips never need
/// to be held in memory.
void stream_video(const MappedSignal& mapped, const FrameSpec& spec, double dither_sigma, std::uint64_t clip_seed,
                  const std::function<void(std::size_t, const Frame&)>& sink);

inline constexpr std::uint16_t kPpgvVersion = 1;

/// PPGV container: "PPGV", u16 LE version, u32 LE header length, JSON
/// header, then raw RGB24 frames back to back.
void write_video(const VideoClip& clip, const std::filesystem::path& path);
VideoClip read_video(const std::filesystem::path& path);

/// Debug dump: one PNG per frame named 000000.png, 000001.png, ...
void dump_png_frames(const VideoClip& clip, const std::filesystem::path& directory);

}  // namespace ppgbench

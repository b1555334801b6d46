#include "ppgbench/video.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <numbers>

#include "json.hpp"

#include "ppgbench/error.hpp"
#include "ppgbench/parallel.hpp"
#include "ppgbench/random.hpp"

namespace ppgbench {

namespace {

/// Inverse-CDF sampler for round(Normal(target, sigma^2)) clamped to [0, 255],
/// driven by 32-bit uniforms. upper[k] is P(value <= k) scaled to 2^32; the
/// guide table indexed by the top 8 bits makes a draw one lookup plus a short
/// walk.
class DitherSampler {
 public:
  DitherSampler(double target, double sigma) {
    if (sigma == 0.0) {
      const auto v = static_cast<std::uint8_t>(std::clamp<long>(std::lround(target), 0, 255));
      for (int k = 0; k < 256; ++k) upper_[static_cast<std::size_t>(k)] = k < v ? 0 : kOne;
    } else {
      for (int k = 0; k < 255; ++k) {
        const double z = (k + 0.5 - target) / sigma;
        const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
        upper_[static_cast<std::size_t>(k)] =
            std::min<std::uint64_t>(kOne, static_cast<std::uint64_t>(std::llround(cdf * 0x1.0p32)));
      }
      upper_[255] = kOne;
    }
    std::size_t k = 0;
    for (std::size_t g = 0; g < 256; ++g) {
      const std::uint64_t bucket_start = static_cast<std::uint64_t>(g) << 24;
      while (upper_[k] <= bucket_start) ++k;
      guide_[g] = static_cast<std::uint8_t>(k);
    }
  }

  std::uint8_t operator()(std::uint32_t u) const noexcept {
    std::size_t k = guide_[u >> 24];
    while (u >= upper_[k]) ++k;
    return static_cast<std::uint8_t>(k);
  }

 private:
  static constexpr std::uint64_t kOne = 1ULL << 32;
  std::array<std::uint64_t, 256> upper_{};
  std::array<std::uint8_t, 256> guide_{};
};

void check_feasible(const Rgb& target, double sigma) {
  const double lo = 4.0 * sigma;
  const double hi = 255.0 - 4.0 * sigma;
  for (std::size_t c = 0; c < 3; ++c) {
    if (!(target[c] >= lo && target[c] <= hi)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "target %.4f on channel %c outside the dither-safe band [%.2f, %.2f]",
                    target[c], channel_name(static_cast<Channel>(c)), lo, hi);
      throw Error(ErrorKind::Range, buf);
    }
  }
}

void check_sigma(double sigma) {
  if (!std::isfinite(sigma) || sigma < 0.0) throw Error(ErrorKind::Config, "dither sigma must be nonnegative");
}

void put_u16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

}  // namespace

Channel parse_channel(std::string_view name) {
  if (name == "R" || name == "r") return Channel::R;
  if (name == "G" || name == "g") return Channel::G;
  if (name == "B" || name == "b") return Channel::B;
  throw Error(ErrorKind::Config, "channel must be one of R, G, B");
}

char channel_name(Channel c) noexcept {
  switch (c) {
    case Channel::R: return 'R';
    case Channel::G: return 'G';
    case Channel::B: return 'B';
  }
  return '?';
}

void ChannelProfile::validate(double dither_sigma) const {
  check_sigma(dither_sigma);
  const double guard = 4.0 * dither_sigma;
  for (std::size_t c = 0; c < 3; ++c) {
    const double m = mean[c];
    const double a = pulse_amplitude[c];
    if (!std::isfinite(m) || !std::isfinite(a) || a < 0.0 || m < 0.0 || m > 255.0) {
      throw Error(ErrorKind::Profile, "profile '" + name + "' has an invalid mean or amplitude");
    }
    if (m - a / 2.0 - guard < 0.0 || m + a / 2.0 + guard > 255.0) {
      throw Error(ErrorKind::Profile, "profile '" + name + "' channel " +
                                          channel_name(static_cast<Channel>(c)) +
                                          " does not fit inside the dither guard band");
    }
  }
}

std::vector<ChannelProfile> standard_profiles() {
  struct Level {
    const char* name;
    double blue_mean;
    double blue_amplitude;
  };
  constexpr Level levels[] = {
      {"strength1-strong", 220.0, 4.0},
      {"strength2-medium", 180.0, 2.0},
      {"strength3-low", 120.0, 1.0},
      {"strength4-weakest", 60.0, 0.5},
  };
  std::vector<ChannelProfile> profiles;
  for (const auto& level : levels) {
    const double factor = level.blue_amplitude / levels[0].blue_amplitude;
    profiles.push_back(ChannelProfile{
        .mean = {230.0, 150.0, level.blue_mean},
        .pulse_amplitude = {6.0, 3.0 * factor, level.blue_amplitude},
        .name = level.name,
    });
  }
  return profiles;
}

void FrameSpec::validate() const {
  if (width <= 0 || height <= 0) throw Error(ErrorKind::Config, "frame dimensions must be positive");
  if (pixel_count() < 1024) throw Error(ErrorKind::Config, "frames need at least 1024 pixels for dither averaging");
  if (!std::isfinite(fps) || fps <= 0.0) throw Error(ErrorKind::Config, "fps must be positive");
}

void VideoClip::validate() const {
  if (frames.size() != timestamps_s.size()) throw Error(ErrorKind::Input, "frame and timestamp counts differ");
  const std::size_t bytes = spec.pixel_count() * 3;
  for (const auto& f : frames) {
    if (f.width != spec.width || f.height != spec.height || f.rgb.size() != bytes) {
      throw Error(ErrorKind::Input, "frame does not match the clip's frame spec");
    }
  }
  for (std::size_t i = 1; i < timestamps_s.size(); ++i) {
    if (!(timestamps_s[i] > timestamps_s[i - 1])) throw Error(ErrorKind::Input, "timestamps must increase");
  }
}

MappedSignal map_ppg_to_rgb(const PpgWaveform& waveform, const ChannelProfile& profile, double fps,
                            double dither_sigma) {
  if (!std::isfinite(fps) || fps <= 0.0) throw Error(ErrorKind::Config, "fps must be positive");
  profile.validate(dither_sigma);
  const PpgWaveform at_fps = resample(waveform, fps);
  const auto x = at_fps.samples();
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) throw Error(ErrorKind::DegenerateSignal, "cannot map a constant waveform");

  MappedSignal mapped;
  mapped.fps = fps;
  mapped.targets.reserve(x.size());
  for (double v : x) {
    const double p = (v - lo) / range;
    Rgb t;
    for (std::size_t c = 0; c < 3; ++c) t[c] = profile.mean[c] + profile.pulse_amplitude[c] * (0.5 - p);
    mapped.targets.push_back(t);
  }
  const double band_lo = 4.0 * dither_sigma;
  const double band_hi = 255.0 - 4.0 * dither_sigma;
  for (const auto& t : mapped.targets) {
    for (double v : t) {
      if (v < band_lo || v > band_hi) throw Error(ErrorKind::Profile, "mapped target outside the feasible band");
    }
  }
  return mapped;
}

std::uint64_t frame_seed(std::uint64_t clip_seed, std::size_t frame_index) noexcept {
  return derive_seed(clip_seed, {static_cast<std::uint64_t>(Stream::Dither), frame_index});
}

void render_frame_into(Frame& frame, const Rgb& target, const FrameSpec& spec, double dither_sigma,
                       std::uint64_t seed) {
  spec.validate();
  check_sigma(dither_sigma);
  check_feasible(target, dither_sigma);
  frame.width = spec.width;
  frame.height = spec.height;
  const std::size_t total = spec.pixel_count() * 3;
  frame.rgb.resize(total);

  if (dither_sigma == 0.0) {
    for (std::size_t c = 0; c < 3; ++c) {
      const auto v = static_cast<std::uint8_t>(std::clamp<long>(std::lround(target[c]), 0, 255));
      for (std::size_t i = c; i < total; i += 3) frame.rgb[i] = v;
    }
    return;
  }

  const std::array<DitherSampler, 3> samplers{DitherSampler(target[0], dither_sigma),
                                              DitherSampler(target[1], dither_sigma),
                                              DitherSampler(target[2], dither_sigma)};
  Rng rng(seed);
  std::uint8_t* out = frame.rgb.data();
  // Two pixels (six bytes) per three 64-bit draws keeps the channel pattern fixed.
  std::size_t i = 0;
  for (; i + 6 <= total; i += 6) {
    const std::uint64_t a = rng();
    const std::uint64_t b = rng();
    const std::uint64_t c = rng();
    out[i + 0] = samplers[0](static_cast<std::uint32_t>(a));
    out[i + 1] = samplers[1](static_cast<std::uint32_t>(a >> 32));
    out[i + 2] = samplers[2](static_cast<std::uint32_t>(b));
    out[i + 3] = samplers[0](static_cast<std::uint32_t>(b >> 32));
    out[i + 4] = samplers[1](static_cast<std::uint32_t>(c));
    out[i + 5] = samplers[2](static_cast<std::uint32_t>(c >> 32));
  }
  for (; i < total; ++i) out[i] = samplers[i % 3](static_cast<std::uint32_t>(rng() >> 32));
}

Frame render_frame(const Rgb& target, const FrameSpec& spec, double dither_sigma, std::uint64_t seed) {
  Frame frame;
  render_frame_into(frame, target, spec, dither_sigma, seed);
  return frame;
}

namespace {

void check_mapped(const MappedSignal& mapped, const FrameSpec& spec, double dither_sigma) {
  spec.validate();
  check_sigma(dither_sigma);
  if (!std::isfinite(mapped.fps) || mapped.fps <= 0.0) throw Error(ErrorKind::Config, "mapped fps must be positive");
  for (const auto& t : mapped.targets) check_feasible(t, dither_sigma);
}

}  // namespace

VideoClip encode_video(const MappedSignal& mapped, const FrameSpec& spec, double dither_sigma,
                       std::uint64_t clip_seed, unsigned workers) {
  check_mapped(mapped, spec, dither_sigma);
  VideoClip clip;
  clip.spec = spec;
  clip.spec.fps = mapped.fps;
  const std::size_t n = mapped.targets.size();
  clip.frames.resize(n);
  clip.timestamps_s.resize(n);
  for (std::size_t i = 0; i < n; ++i) clip.timestamps_s[i] = static_cast<double>(i) / mapped.fps;
  parallel_for(n, workers, [&](std::size_t i) {
    render_frame_into(clip.frames[i], mapped.targets[i], clip.spec, dither_sigma, frame_seed(clip_seed, i));
  });
  return clip;
}

void stream_video(const MappedSignal& mapped, const FrameSpec& spec, double dither_sigma, std::uint64_t clip_seed,
                  const std::function<void(std::size_t, const Frame&)>& sink) {
  check_mapped(mapped, spec, dither_sigma);
  FrameSpec at_fps = spec;
  at_fps.fps = mapped.fps;
  Frame frame;
  for (std::size_t i = 0; i < mapped.targets.size(); ++i) {
    render_frame_into(frame, mapped.targets[i], at_fps, dither_sigma, frame_seed(clip_seed, i));
    sink(i, frame);
  }
}

void write_video(const VideoClip& clip, const std::filesystem::path& path) {
  clip.validate();
  nlohmann::ordered_json header;
  header["width"] = clip.spec.width;
  header["height"] = clip.spec.height;
  header["fps"] = clip.spec.fps;
  header["frames"] = clip.frames.size();
  header["colorspace"] = "RGB24";
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Write, "cannot open " + path.string() + " for writing");
  out.write("PPGV", 4);
  put_u16(out, kPpgvVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& f : clip.frames) {
    out.write(reinterpret_cast<const char*>(f.rgb.data()), static_cast<std::streamsize>(f.rgb.size()));
  }
  if (!out) throw Error(ErrorKind::Write, "failed writing " + path.string());
}

VideoClip read_video(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Format, "cannot open " + path.string());

  unsigned char fixed[10];
  if (!in.read(reinterpret_cast<char*>(fixed), sizeof fixed)) throw Error(ErrorKind::Format, "truncated PPGV preamble");
  if (std::memcmp(fixed, "PPGV", 4) != 0) throw Error(ErrorKind::Format, "bad magic, not a PPGV file");
  const std::uint16_t version = static_cast<std::uint16_t>(fixed[4] | (fixed[5] << 8));
  if (version != kPpgvVersion) throw Error(ErrorKind::Format, "unsupported PPGV version " + std::to_string(version));
  const std::uint32_t header_len = static_cast<std::uint32_t>(fixed[6]) | (static_cast<std::uint32_t>(fixed[7]) << 8) |
                                   (static_cast<std::uint32_t>(fixed[8]) << 16) |
                                   (static_cast<std::uint32_t>(fixed[9]) << 24);
  if (header_len == 0 || header_len > (1u << 20)) throw Error(ErrorKind::Format, "implausible PPGV header length");
  std::string text(header_len, '\0');
  if (!in.read(text.data(), header_len)) throw Error(ErrorKind::Format, "truncated PPGV header");

  VideoClip clip;
  std::size_t frame_count = 0;
  try {
    const auto header = nlohmann::json::parse(text);
    clip.spec.width = header.at("width").get<int>();
    clip.spec.height = header.at("height").get<int>();
    clip.spec.fps = header.at("fps").get<double>();
    frame_count = header.at("frames").get<std::size_t>();
    if (header.at("colorspace").get<std::string>() != "RGB24") {
      throw Error(ErrorKind::Format, "unsupported colorspace");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, std::string("bad PPGV header: ") + e.what());
  }
  try {
    clip.spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Format, e.what());
  }

  const std::size_t bytes = clip.spec.pixel_count() * 3;
  clip.frames.resize(frame_count);
  clip.timestamps_s.resize(frame_count);
  for (std::size_t i = 0; i < frame_count; ++i) {
    auto& f = clip.frames[i];
    f.width = clip.spec.width;
    f.height = clip.spec.height;
    f.rgb.resize(bytes);
    if (!in.read(reinterpret_cast<char*>(f.rgb.data()), static_cast<std::streamsize>(bytes))) {
      throw Error(ErrorKind::Format, "header declares " + std::to_string(frame_count) + " frames but file holds " +
                                         std::to_string(i));
    }
    clip.timestamps_s[i] = static_cast<double>(i) / clip.spec.fps;
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::Format, "trailing bytes after the declared frames");
  }
  return clip;
}

void dump_png_frames(const VideoClip& clip, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  for (std::size_t i = 0; i < clip.frames.size(); ++i) {
    const auto& f = clip.frames[i];
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.png", i);
    const auto file = directory / name;
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(file.c_str(), "wb"), &std::fclose);
    if (!fp) throw Error(ErrorKind::Write, "cannot open " + file.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
      png_destroy_write_struct(&png, &info);
      throw Error(ErrorKind::Write, "libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      throw Error(ErrorKind::Write, "libpng failed writing " + file.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(f.width), static_cast<png_uint_32>(f.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(f.width) * 3;
    for (int y = 0; y < f.height; ++y) {
      png_write_row(png, const_cast<png_bytep>(f.rgb.data() + static_cast<std::size_t>(y) * stride));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  }
}

}  // namespace ppgbench

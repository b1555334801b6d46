#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ppgbench {

/// Uniformly sampled PPG signal in arbitrary units. Immutable once built;
/// the constructor rejects empty, non-finite or non-positive-rate input.
class PpgWaveform {
 public:
  PpgWaveform(std::vector<double> samples, double sample_rate_hz, std::string label = {});

  std::span<const double> samples() const noexcept { return samples_; }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration_s() const noexcept { return static_cast<double>(samples_.size()) / sample_rate_hz_; }

  friend bool operator==(const PpgWaveform&, const PpgWaveform&) = default;

 private:
  std::vector<double> samples_;
  double sample_rate_hz_;
  std::string label_;
};

struct SynthConfig {
  double heart_rate_bpm = 60.0;
  double duration_s = 20.0;
  double sample_rate_hz = 100.0;
  double rsa_freq_hz = 0.25;
  double rsa_depth = 0.0;
  double drift_freq_hz = 0.1;
  double drift_amplitude = 0.0;
  double powerline_freq_hz = 50.0;
  double powerline_amplitude = 0.0;
  double motion_burst_rate_per_min = 0.0;
  double motion_burst_amplitude = 0.0;
  std::uint64_t seed = 0;

  /// Throws Error(Config) on any violated invariant.
  void validate() const;

  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

/// Two-lobe beat shape evaluated at beat phase u (beats since onset). Lobes
/// from neighbouring beats are summed, so the tiled waveform is smooth
/// across onsets and exactly periodic in u.
double beat_template(double phase);

/// Synthesizes a PPG waveform normalized to [0, 1]. The beat phase is the
/// integral of the instantaneous rate HR0 * (1 + depth * sin(2 pi f_rsa t)) / 60.
PpgWaveform synthesize_ppg(const SynthConfig& config);

/// Adds zero-mean white Gaussian noise whose realized power is set exactly to
/// signal_power / 10^(snr_db / 10), with signal_power the mean-removed power
/// of the input.
PpgWaveform add_noise(const PpgWaveform& waveform, double snr_db, std::uint64_t seed);

/// Windowed-sinc low-pass at 0.45 * min(source, target) rate, then linear
/// interpolation at the target sampling instants. Same-rate calls return the
/// input unchanged.
PpgWaveform resample(const PpgWaveform& waveform, double target_rate_hz);

enum class WaveformFormat { Csv };

/// CSV with header `t_s,value`, strictly increasing uniformly spaced times.
PpgWaveform load_waveform(const std::filesystem::path& path, WaveformFormat format = WaveformFormat::Csv);
void save_waveform(const PpgWaveform& waveform, const std::filesystem::path& path,
                   WaveformFormat format = WaveformFormat::Csv);

}  // namespace ppgbench

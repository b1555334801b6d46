#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ppgbench/dut.hpp"
#include "ppgbench/waveform.hpp"

namespace ppgbench {

/// ANSI/CTA consumer heart-rate monitor limit on MAPE.
inline constexpr double kMapeLimitPct = 10.0;
inline constexpr std::size_t kBootstrapResamples = 10000;
inline constexpr std::uint64_t kDefaultBootstrapSeed = 0x5eed'b007'57a9ULL;

struct PairedMeasurements {
  std::vector<double> expected_bpm;
  std::vector<double> measured_bpm;

  /// Equal nonzero lengths, all values positive and finite. Throws Error(Input).
  void validate() const;
};

struct MapeResult {
  double mape_pct = 0.0;
  std::vector<double> ape_pct;
};

MapeResult mape(const PairedMeasurements& pairs);

/// Product-moment correlation. Throws Error(Input) on length mismatch or
/// fewer than 2 points, Error(DegenerateSignal) when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

struct XcorrResult {
  double r = 0.0;
  double lag_s = 0.0;
};

/// Maps the reference through the encoder's invert-and-normalize step,
/// linearly interpolates the recovered channel onto the reference's sample
/// instants, and returns the best Pearson correlation over integer-sample
/// lags in [-max_lag_s, +max_lag_s]. A positive lag means the recovered
/// signal trails the reference.
XcorrResult xcorr_aligned(const PpgWaveform& reference, const RecoveredSignal& recovered, double max_lag_s,
                          Channel channel);

/// 100 x sample standard deviation (n - 1) / mean, in percent.
double coefficient_of_variation(std::span<const double> values);

struct AccuracyClass {
  bool pass = false;
  double mape_pct = 0.0;
  double ci95_upper_pct = 0.0;
};

/// Passes iff the one-sided 95% bootstrap upper bound on the mean APE is
/// strictly below 10%. Needs at least 10 measurements.
AccuracyClass classify_accuracy(std::span<const double> ape_pct, std::uint64_t seed = kDefaultBootstrapSeed,
                                std::size_t resamples = kBootstrapResamples);

struct FrameRateStats {
  double mean_fps = 0.0;
  std::vector<double> instantaneous_fps;
  /// Each gap longer than 1.5 nominal intervals contributes
  /// round(gap * fps) - 1 missing frames.
  std::size_t drop_count = 0;
};

FrameRateStats frame_rate_stats(std::span<const double> timestamps_s, double nominal_fps);

struct AccelTrace {
  std::vector<double> timestamps_s;
  std::vector<double> magnitude;

  void validate() const;
};

struct DominantFrequency {
  double freq_hz = 0.0;

  bool matches_bpm(double bpm, double tol_hz) const noexcept;
};

/// Largest in-band spectral peak of the accelerometer magnitude, after
/// resampling onto a uniform grid at the trace's median rate.
DominantFrequency dominant_frequency(const AccelTrace& trace, double band_low_hz, double band_high_hz);

/// Header `t_s,magnitude`.
AccelTrace read_accel_csv(const std::filesystem::path& path);
void write_accel_csv(const AccelTrace& trace, const std::filesystem::path& path);

/// |1 g + amplitude * sin(2 pi f t) + noise|: a hand-held phone shaken at
/// `motion_freq_hz`.
AccelTrace simulate_accelerometer(double motion_freq_hz, double amplitude, double duration_s, double sample_rate_hz,
                                  double noise_std, std::uint64_t seed);

}  // namespace ppgbench

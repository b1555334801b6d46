#pragma once

#include <optional>
#include <string_view>

#include "ppgbench/dut.hpp"

namespace ppgbench {

enum class HrMethod { Spectral, Peak };

std::string_view to_string(HrMethod method) noexcept;
HrMethod parse_hr_method(std::string_view name);

struct EstimatorConfig {
  HrMethod method = HrMethod::Spectral;
  double band_low_bpm = 30.0;
  double band_high_bpm = 240.0;
  Channel channel = Channel::G;
  /// Uniform analysis grid rate; defaults to the signal's nominal fps.
  std::optional<double> resample_fps;
  /// When false the samples are assumed to sit at t0 + i / nominal_fps,
  /// which is what an estimator ignorant of dropped frames would do.
  bool timestamp_aware = true;

  /// 30 <= low < high <= 300, positive resample rate. Throws Error(Config).
  void validate() const;

  friend bool operator==(const EstimatorConfig&, const EstimatorConfig&) = default;
};

struct HrEstimate {
  double bpm = 0.0;
  HrMethod method = HrMethod::Spectral;
  /// Spectral: energy share of the chosen peak. Peak: share of inter-beat
  /// intervals within 10% of their median.
  double quality = 0.0;
};

/// Interpolates onto a uniform grid, removes the mean, applies a Hann window
/// and takes the largest in-band FFT bin refined by a 3-bin parabola.
HrEstimate estimate_hr_spectral(const RecoveredSignal& signal, const EstimatorConfig& cfg);

/// Moving-average detrend, low-pass at the band's upper edge, inversion,
/// then local maxima with minimum separation 60/high s and prominence of at
/// least 0.3 x the inter-quartile range. bpm = 60 / median inter-beat interval.
HrEstimate estimate_hr_peaks(const RecoveredSignal& signal, const EstimatorConfig& cfg);

/// Dispatches on cfg.method.
HrEstimate estimate_hr(const RecoveredSignal& signal, const EstimatorConfig& cfg);

}  // namespace ppgbench

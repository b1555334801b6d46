#include "ppgbench/hr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ppgbench/dsp.hpp"
#include "ppgbench/error.hpp"

namespace ppgbench {

namespace {

struct UniformSeries {
  std::vector<double> values;
  double fs = 0.0;
};

UniformSeries to_uniform(const RecoveredSignal& signal, const EstimatorConfig& cfg) {
  cfg.validate();
  signal.validate();
  if (signal.size() < 2) throw Error(ErrorKind::InsufficientData, "need at least 2 samples");
  const double span = signal.timestamps_s.back() - signal.timestamps_s.front() + 1.0 / signal.nominal_fps;
  const double needed = 4.0 * 60.0 / cfg.band_low_bpm;
  if (span < needed) {
    throw Error(ErrorKind::InsufficientData, "signal covers " + std::to_string(span) + " s, need " +
                                                 std::to_string(needed) + " s (4 beats at the band's low edge)");
  }

  std::vector<double> times = signal.timestamps_s;
  if (!cfg.timestamp_aware) {
    for (std::size_t i = 0; i < times.size(); ++i) {
      times[i] = signal.timestamps_s.front() + static_cast<double>(i) / signal.nominal_fps;
    }
  }
  UniformSeries series;
  series.fs = cfg.resample_fps.value_or(signal.nominal_fps);
  const auto grid = dsp::uniform_grid(times.front(), times.back(), series.fs);
  series.values = dsp::interp_linear(times, signal.channel(cfg.channel), grid);
  return series;
}

/// Topographic prominence of the local maximum at `i`.
double prominence(const std::vector<double>& y, std::size_t i) {
  double left_min = y[i];
  for (std::size_t j = i; j-- > 0;) {
    if (y[j] > y[i]) break;
    left_min = std::min(left_min, y[j]);
  }
  double right_min = y[i];
  for (std::size_t j = i + 1; j < y.size(); ++j) {
    if (y[j] > y[i]) break;
    right_min = std::min(right_min, y[j]);
  }
  return y[i] - std::max(left_min, right_min);
}

}  // namespace

std::string_view to_string(HrMethod method) noexcept {
  return method == HrMethod::Spectral ? "spectral" : "peak";
}

HrMethod parse_hr_method(std::string_view name) {
  if (name == "spectral") return HrMethod::Spectral;
  if (name == "peak" || name == "peaks") return HrMethod::Peak;
  throw Error(ErrorKind::Config, "estimator method must be `spectral` or `peak`");
}

void EstimatorConfig::validate() const {
  if (!(band_low_bpm >= 30.0 && band_low_bpm < band_high_bpm && band_high_bpm <= 300.0)) {
    throw Error(ErrorKind::Config, "band must satisfy 30 <= low < high <= 300 bpm");
  }
  if (resample_fps && !(std::isfinite(*resample_fps) && *resample_fps > 0.0)) {
    throw Error(ErrorKind::Config, "resample fps must be positive");
  }
}

HrEstimate estimate_hr_spectral(const RecoveredSignal& signal, const EstimatorConfig& cfg) {
  const auto series = to_uniform(signal, cfg);
  const auto peak = dsp::find_spectral_peak(series.values, series.fs, cfg.band_low_bpm / 60.0, cfg.band_high_bpm / 60.0);
  return {.bpm = 60.0 * peak.freq_hz, .method = HrMethod::Spectral, .quality = peak.energy_fraction};
}

HrEstimate estimate_hr_peaks(const RecoveredSignal& signal, const EstimatorConfig& cfg) {
  auto series = to_uniform(signal, cfg);
  const double fs = series.fs;
  auto& x = series.values;

  const auto trend_width = std::max<std::size_t>(3, static_cast<std::size_t>(std::lround(fs * 60.0 / cfg.band_low_bpm)));
  const auto trend = dsp::moving_average(x, trend_width);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] -= trend[i];
  const double cutoff = cfg.band_high_bpm / 60.0 / fs;
  if (cutoff < 0.5) x = dsp::filter_symmetric(x, dsp::design_lowpass(cutoff, dsp::kLowpassHalfWidth));
  // Systolic peaks are pixel-space troughs.
  for (double& v : x) v = -v;

  const double iqr = dsp::quantile(x, 0.75) - dsp::quantile(x, 0.25);
  const double min_prominence = 0.3 * iqr;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (x[i] > x[i - 1] && x[i] >= x[i + 1]) {
      const double prom = prominence(x, i);
      if (prom > 0.0 && prom >= min_prominence) candidates.push_back(i);
    }
  }

  // Keep the tallest peaks first, suppressing neighbours closer than the
  // minimum beat separation.
  const double min_separation = 60.0 / cfg.band_high_bpm * fs;
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[candidates[a]] > x[candidates[b]]; });
  std::vector<bool> keep(candidates.size(), true);
  for (std::size_t oi : order) {
    if (!keep[oi]) continue;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (j != oi && keep[j] &&
          std::abs(static_cast<double>(candidates[j]) - static_cast<double>(candidates[oi])) < min_separation) {
        keep[j] = false;
      }
    }
  }

  std::vector<double> beat_times;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (!keep[j]) continue;
    const std::size_t i = candidates[j];
    const double a = x[i - 1], b = x[i], c = x[i + 1];
    const double denom = a - 2.0 * b + c;
    const double offset = denom < 0.0 ? std::clamp(0.5 * (a - c) / denom, -0.5, 0.5) : 0.0;
    beat_times.push_back((static_cast<double>(i) + offset) / fs);
  }
  if (beat_times.size() < 3) {
    throw Error(ErrorKind::InsufficientData, "detected " + std::to_string(beat_times.size()) + " beats, need 3");
  }

  std::vector<double> ibis;
  for (std::size_t k = 1; k < beat_times.size(); ++k) ibis.push_back(beat_times[k] - beat_times[k - 1]);
  const double median_ibi = dsp::median(ibis);
  const auto consistent = std::count_if(ibis.begin(), ibis.end(), [&](double v) {
    return std::abs(v - median_ibi) <= 0.1 * median_ibi;
  });
  const double bpm = std::clamp(60.0 / median_ibi, cfg.band_low_bpm, cfg.band_high_bpm);
  return {.bpm = bpm,
          .method = HrMethod::Peak,
          .quality = static_cast<double>(consistent) / static_cast<double>(ibis.size())};
}

HrEstimate estimate_hr(const RecoveredSignal& signal, const EstimatorConfig& cfg) {
  return cfg.method == HrMethod::Spectral ? estimate_hr_spectral(signal, cfg) : estimate_hr_peaks(signal, cfg);
}

}  // namespace ppgbench

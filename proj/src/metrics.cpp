#include "ppgbench/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include "ppgbench/dsp.hpp"
#include "ppgbench/error.hpp"
#include "ppgbench/random.hpp"

namespace ppgbench {

void PairedMeasurements::validate() const {
  if (expected_bpm.empty() || expected_bpm.size() != measured_bpm.size()) {
    throw Error(ErrorKind::Input, "expected and measured must have equal nonzero lengths");
  }
  for (std::size_t i = 0; i < expected_bpm.size(); ++i) {
    if (!(std::isfinite(expected_bpm[i]) && expected_bpm[i] > 0.0)) {
      throw Error(ErrorKind::Input, "expected values must be positive");
    }
    if (!(std::isfinite(measured_bpm[i]) && measured_bpm[i] > 0.0)) {
      throw Error(ErrorKind::Input, "measured values must be positive");
    }
  }
}

MapeResult mape(const PairedMeasurements& pairs) {
  pairs.validate();
  MapeResult result;
  result.ape_pct.reserve(pairs.expected_bpm.size());
  for (std::size_t i = 0; i < pairs.expected_bpm.size(); ++i) {
    result.ape_pct.push_back(100.0 * std::abs(pairs.measured_bpm[i] - pairs.expected_bpm[i]) / pairs.expected_bpm[i]);
  }
  result.mape_pct = dsp::mean(result.ape_pct);
  return result;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::Input, "pearson needs two equal-length series (n >= 2)");
  const double mx = dsp::mean(x);
  const double my = dsp::mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error(ErrorKind::DegenerateSignal, "pearson input is constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

XcorrResult xcorr_aligned(const PpgWaveform& reference, const RecoveredSignal& recovered, double max_lag_s,
                          Channel channel) {
  if (!std::isfinite(max_lag_s) || max_lag_s < 0.0) throw Error(ErrorKind::Config, "max lag must be >= 0");
  recovered.validate();
  if (recovered.size() < 2) throw Error(ErrorKind::Input, "recovered signal needs at least 2 points");

  const double fs = reference.sample_rate_hz();
  const auto ref = reference.samples();
  const auto [lo_it, hi_it] = std::minmax_element(ref.begin(), ref.end());
  const double range = *hi_it - *lo_it;
  if (!(range > 0.0)) throw Error(ErrorKind::DegenerateSignal, "reference waveform is constant");

  const double ref_end = static_cast<double>(ref.size() - 1) / fs;
  const double lo = std::max(0.0, recovered.timestamps_s.front());
  const double hi = std::min(ref_end, recovered.timestamps_s.back());
  if (hi - lo < 2.0 * max_lag_s || hi <= lo) {
    throw Error(ErrorKind::Input, "reference and recovered signals overlap by less than 2 x max lag");
  }
  const auto first = static_cast<std::size_t>(std::ceil(lo * fs - 1e-9));
  const auto last = static_cast<std::size_t>(std::floor(hi * fs + 1e-9));
  const std::size_t m = last - first + 1;

  std::vector<double> a(m);
  std::vector<double> times(m);
  for (std::size_t k = 0; k < m; ++k) {
    a[k] = 0.5 - (ref[first + k] - *lo_it) / range;
    times[k] = static_cast<double>(first + k) / fs;
  }
  const auto b = dsp::interp_linear(recovered.timestamps_s, recovered.channel(channel), times);

  const auto max_lag = static_cast<std::ptrdiff_t>(std::llround(max_lag_s * fs));
  XcorrResult best{-2.0, 0.0};
  for (std::ptrdiff_t lag = -max_lag; lag <= max_lag; ++lag) {
    const std::size_t a_begin = lag < 0 ? static_cast<std::size_t>(-lag) : 0;
    const std::size_t b_begin = lag > 0 ? static_cast<std::size_t>(lag) : 0;
    const std::size_t count = m - static_cast<std::size_t>(std::abs(lag));
    if (count < 2) continue;
    double r;
    try {
      r = pearson(std::span(a).subspan(a_begin, count), std::span(b).subspan(b_begin, count));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateSignal) throw;
      continue;
    }
    if (r > best.r) best = {r, static_cast<double>(lag) / fs};
  }
  if (best.r < -1.0) throw Error(ErrorKind::DegenerateSignal, "no lag gives a defined correlation");
  return best;
}

double coefficient_of_variation(std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorKind::InsufficientData, "CoV needs at least 2 values");
  const double m = dsp::mean(values);
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  if (m == 0.0 || std::abs(m) <= 1e-12 * scale) throw Error(ErrorKind::DegenerateSignal, "CoV undefined for zero mean");
  return 100.0 * std::sqrt(dsp::sample_variance(values)) / m;
}

AccuracyClass classify_accuracy(std::span<const double> ape_pct, std::uint64_t seed, std::size_t resamples) {
  if (ape_pct.size() < 10) throw Error(ErrorKind::InsufficientData, "classification needs at least 10 measurements");
  if (resamples == 0) throw Error(ErrorKind::Config, "bootstrap needs at least one resample");
  const std::size_t n = ape_pct.size();
  Rng rng(seed, Stream::Bootstrap);
  std::vector<double> means(resamples);
  for (double& mean : means) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto idx = std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
      sum += ape_pct[idx];
    }
    mean = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(resamples)));
  AccuracyClass out;
  out.mape_pct = dsp::mean(ape_pct);
  out.ci95_upper_pct = means[std::max<std::size_t>(rank, 1) - 1];
  out.pass = out.ci95_upper_pct < kMapeLimitPct;
  return out;
}

FrameRateStats frame_rate_stats(std::span<const double> timestamps_s, double nominal_fps) {
  if (timestamps_s.size() < 2) throw Error(ErrorKind::Input, "frame-rate stats need at least 2 timestamps");
  if (!std::isfinite(nominal_fps) || nominal_fps <= 0.0) throw Error(ErrorKind::Input, "nominal fps must be positive");
  FrameRateStats stats;
  const double nominal_gap = 1.0 / nominal_fps;
  for (std::size_t i = 0; i + 1 < timestamps_s.size(); ++i) {
    const double gap = timestamps_s[i + 1] - timestamps_s[i];
    if (!(gap > 0.0)) throw Error(ErrorKind::Input, "timestamps must strictly increase");
    stats.instantaneous_fps.push_back(1.0 / gap);
    if (gap > 1.5 * nominal_gap) {
      stats.drop_count += static_cast<std::size_t>(std::max(0LL, std::llround(gap * nominal_fps) - 1));
    }
  }
  stats.mean_fps = static_cast<double>(timestamps_s.size() - 1) / (timestamps_s.back() - timestamps_s.front());
  return stats;
}

void AccelTrace::validate() const {
  if (timestamps_s.size() != magnitude.size() || timestamps_s.size() < 2) {
    throw Error(ErrorKind::Input, "accelerometer trace needs equal lengths and at least 2 points");
  }
  for (std::size_t i = 0; i < timestamps_s.size(); ++i) {
    if (!std::isfinite(magnitude[i]) || magnitude[i] < 0.0) {
      throw Error(ErrorKind::Input, "accelerometer magnitude must be finite and nonnegative");
    }
    if (i > 0 && !(timestamps_s[i] > timestamps_s[i - 1])) {
      throw Error(ErrorKind::Input, "accelerometer timestamps must increase");
    }
  }
}

bool DominantFrequency::matches_bpm(double bpm, double tol_hz) const noexcept {
  return std::abs(freq_hz - bpm / 60.0) <= tol_hz;
}

DominantFrequency dominant_frequency(const AccelTrace& trace, double band_low_hz, double band_high_hz) {
  if (!(band_low_hz > 0.0 && band_low_hz < band_high_hz)) {
    throw Error(ErrorKind::Config, "frequency band must satisfy 0 < low < high");
  }
  try {
    trace.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::InsufficientData, e.what());
  }
  std::vector<double> gaps;
  for (std::size_t i = 1; i < trace.timestamps_s.size(); ++i) {
    gaps.push_back(trace.timestamps_s[i] - trace.timestamps_s[i - 1]);
  }
  const double dt = dsp::median(gaps);
  const double span = trace.timestamps_s.back() - trace.timestamps_s.front() + dt;
  if (span < 4.0 / band_low_hz) {
    throw Error(ErrorKind::InsufficientData, "accelerometer trace shorter than 4 periods of the band's low edge");
  }
  const double fs = 1.0 / dt;
  const auto grid = dsp::uniform_grid(trace.timestamps_s.front(), trace.timestamps_s.back(), fs);
  const auto values = dsp::interp_linear(trace.timestamps_s, trace.magnitude, grid);
  return {dsp::find_spectral_peak(values, fs, band_low_hz, band_high_hz).freq_hz};
}

AccelTrace read_accel_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t_s,magnitude") throw Error(ErrorKind::Parse, "expected header `t_s,magnitude`");
  AccelTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double t = 0.0, m = 0.0;
    const char* end = line.data() + line.size();
    bool ok = comma != std::string::npos;
    if (ok) {
      const auto r1 = std::from_chars(line.data(), line.data() + comma, t);
      const auto r2 = std::from_chars(line.data() + comma + 1, end, m);
      ok = r1.ec == std::errc() && r1.ptr == line.data() + comma && r2.ec == std::errc() && r2.ptr == end;
    }
    if (!ok) throw Error(ErrorKind::Parse, "malformed row at line " + std::to_string(line_no));
    trace.timestamps_s.push_back(t);
    trace.magnitude.push_back(m);
  }
  try {
    trace.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  return trace;
}

void write_accel_csv(const AccelTrace& trace, const std::filesystem::path& path) {
  trace.validate();
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Write, "cannot open " + path.string() + " for writing");
  out << "t_s,magnitude\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.timestamps_s.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", trace.timestamps_s[i], trace.magnitude[i]);
    out << buf;
  }
  if (!out) throw Error(ErrorKind::Write, "failed writing " + path.string());
}

AccelTrace simulate_accelerometer(double motion_freq_hz, double amplitude, double duration_s, double sample_rate_hz,
                                  double noise_std, std::uint64_t seed) {
  if (!(duration_s > 0.0 && sample_rate_hz > 0.0 && motion_freq_hz >= 0.0 && amplitude >= 0.0 && noise_std >= 0.0)) {
    throw Error(ErrorKind::Config, "invalid accelerometer simulation parameters");
  }
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  Rng rng(seed, Stream::Motion);
  AccelTrace trace;
  trace.timestamps_s.resize(n);
  trace.magnitude.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate_hz;
    trace.timestamps_s[i] = t;
    trace.magnitude[i] =
        std::abs(1.0 + amplitude * std::sin(2.0 * std::numbers::pi * motion_freq_hz * t) + noise_std * rng.normal());
  }
  return trace;
}

}  // namespace ppgbench

#include "ppgbench/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>

#include "ppgbench/error.hpp"

namespace ppgbench::dsp {

namespace {

// FFTW's planner is not thread-safe; execution on a private plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

std::vector<double> design_lowpass(double cutoff, std::size_t half_width) {
  if (!(cutoff > 0.0 && cutoff < 0.5)) {
    throw Error(ErrorKind::Config, "low-pass cutoff must lie in (0, 0.5) cycles/sample");
  }
  const std::size_t n = 2 * half_width + 1;
  std::vector<double> h(n);
  const double span = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(i) - static_cast<double>(half_width);
    const double w = n == 1 ? 1.0
                            : 0.42 - 0.5 * std::cos(2.0 * std::numbers::pi * i / span) +
                                  0.08 * std::cos(4.0 * std::numbers::pi * i / span);
    h[i] = 2.0 * cutoff * sinc(2.0 * cutoff * k) * w;
  }
  for (std::size_t i = 0; i < half_width; ++i) h[n - 1 - i] = h[i];
  const double sum = std::accumulate(h.begin(), h.end(), 0.0);
  for (double& v : h) v /= sum;
  return h;
}

std::vector<double> filter_symmetric(std::span<const double> x, std::span<const double> kernel) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto half = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  std::vector<double> y(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t k = -half; k <= half; ++k) {
      const std::ptrdiff_t j = std::clamp<std::ptrdiff_t>(i - k, 0, n - 1);
      acc += kernel[static_cast<std::size_t>(k + half)] * x[static_cast<std::size_t>(j)];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

std::vector<double> moving_average(std::span<const double> x, std::size_t width) {
  const std::size_t n = x.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  const std::size_t left = width / 2;
  const std::size_t right = width - left;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= left ? i - left : 0;
    const std::size_t hi = std::min(n, i + right);
    y[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return y;
}

std::vector<double> interp_linear(std::span<const double> times, std::span<const double> values,
                                  std::span<const double> query) {
  std::vector<double> out(query.size());
  if (times.empty()) return out;
  std::size_t j = 0;
  for (std::size_t q = 0; q < query.size(); ++q) {
    const double t = query[q];
    if (t <= times.front()) {
      out[q] = values.front();
      continue;
    }
    if (t >= times.back()) {
      out[q] = values.back();
      continue;
    }
    // Queries are usually sorted; fall back to a search when they are not.
    if (j + 1 >= times.size() || times[j] > t) {
      j = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin()) - 1;
    }
    while (times[j + 1] < t) ++j;
    const double frac = (t - times[j]) / (times[j + 1] - times[j]);
    out[q] = values[j] + frac * (values[j + 1] - values[j]);
  }
  return out;
}

std::vector<double> uniform_grid(double t0, double t1, double rate) {
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) * rate + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = t0 + static_cast<double>(i) / rate;
  return grid;
}

std::vector<std::complex<double>> rfft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  if (n == 0) return out;
  std::vector<double> in(x.begin(), x.end());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return w;
}

SpectralPeak find_spectral_peak(std::span<const double> x, double fs, double f_lo, double f_hi) {
  const std::size_t n = x.size();
  if (n < 4) throw Error(ErrorKind::InsufficientData, "spectral peak needs at least 4 samples");
  const double m = mean(x);
  const auto window = hann_window(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = (x[i] - m) * window[i];
  const auto spectrum = rfft(y);

  const double bin_hz = fs / static_cast<double>(n);
  std::vector<double> mag(spectrum.size());
  double total_energy = 0.0;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    mag[k] = std::abs(spectrum[k]);
    if (k > 0) total_energy += mag[k] * mag[k];
  }

  std::size_t best = 0;
  double best_mag = -1.0;
  for (std::size_t k = 1; k < spectrum.size(); ++k) {
    const double f = bin_hz * static_cast<double>(k);
    if (f < f_lo || f > f_hi) continue;
    if (mag[k] > best_mag) {
      best_mag = mag[k];
      best = k;
    }
  }
  if (best == 0) throw Error(ErrorKind::Band, "no spectral bin inside the search band");
  if (!(best_mag > 0.0) || !(total_energy > 0.0)) {
    throw Error(ErrorKind::Band, "empty spectrum inside the search band");
  }

  double offset = 0.0;
  if (best + 1 < mag.size()) {
    const double a = mag[best - 1];
    const double b = mag[best];
    const double c = mag[best + 1];
    const double numer = a - c;
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) offset = std::clamp(0.5 * numer / denom, -0.5, 0.5);
  }

  SpectralPeak peak;
  peak.bin = best;
  peak.freq_hz = std::clamp(bin_hz * (static_cast<double>(best) + offset), f_lo, f_hi);
  double local = 0.0;
  for (std::size_t k = best - 1; k <= std::min(best + 1, mag.size() - 1); ++k) {
    if (k > 0) local += mag[k] * mag[k];
  }
  peak.energy_fraction = std::clamp(local / total_energy, 0.0, 1.0);
  return peak;
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size() - 1);
}

double quantile(std::vector<double> x, double q) {
  if (x.empty()) return 0.0;
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

}  // namespace ppgbench::dsp

#pragma once

// Signal-processing primitives shared by the synthesizer, the estimators and
// the metrics: FIR low-pass design, linear interpolation onto uniform grids
// and FFT peak picking.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ppgbench::dsp {

/// Blackman-windowed sinc low-pass with unity DC gain.
/// `cutoff` is in cycles per sample and must lie in (0, 0.5).
std::vector<double> design_lowpass(double cutoff, std::size_t half_width);

/// Default half-width: a Blackman main lobe of 5.5/N puts the transition
/// band at about 0.045 cycles/sample.
inline constexpr std::size_t kLowpassHalfWidth = 60;

/// Centered (zero-phase) convolution with a symmetric odd-length kernel;
/// samples beyond the ends are replaced by the nearest edge sample.
std::vector<double> filter_symmetric(std::span<const double> x, std::span<const double> kernel);

/// Centered moving average with a window of `width` samples (shrinking at
/// the edges).
std::vector<double> moving_average(std::span<const double> x, std::size_t width);

/// Piecewise-linear interpolation of (times, values) at `query` times.
/// Times must be strictly increasing; queries outside hold the end values.
std::vector<double> interp_linear(std::span<const double> times, std::span<const double> values,
                                  std::span<const double> query);

/// Uniform grid t0, t0 + 1/rate, ... covering [t0, t1].
std::vector<double> uniform_grid(double t0, double t1, double rate);

/// Real-input DFT; returns bins 0..n/2.
std::vector<std::complex<double>> rfft(std::span<const double> x);

std::vector<double> hann_window(std::size_t n);

struct SpectralPeak {
  double freq_hz = 0.0;
  std::size_t bin = 0;
  /// Share of the total (non-DC) spectral energy held by the peak bin and
  /// its two neighbours.
  double energy_fraction = 0.0;
};

/// Mean-removes and Hann-windows `x` (uniformly sampled at `fs`), then picks
/// the largest-magnitude bin whose frequency lies in [f_lo, f_hi] and refines
/// it by fitting a parabola through the magnitudes of that bin and its
/// neighbours. The refined frequency is clamped to the band.
/// Throws Error(Band) when no bin lies in the band or the spectrum is empty.
SpectralPeak find_spectral_peak(std::span<const double> x, double fs, double f_lo, double f_hi);

double mean(std::span<const double> x);
/// Sample variance with the n-1 denominator.
double sample_variance(std::span<const double> x);
/// Linear-interpolated quantile (type 7), q in [0, 1].
double quantile(std::vector<double> x, double q);
double median(std::vector<double> x);

}  // namespace ppgbench::dsp

#include <cmath>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "ppgbench/error.hpp"
#include "ppgbench/random.hpp"
#include "ppgbench/waveform.hpp"
#include "support.hpp"

using namespace ppgbench;

namespace {

std::vector<double> to_vec(const PpgWaveform& w) { return {w.samples().begin(), w.samples().end()}; }

std::vector<double> beat_intervals(const PpgWaveform& w) {
  const auto x = to_vec(w);
  const auto idx = oracle::peaks(x, static_cast<std::size_t>(0.2 * w.sample_rate_hz()));
  std::vector<double> ibi;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    ibi.push_back(static_cast<double>(idx[i] - idx[i - 1]) / w.sample_rate_hz());
  }
  return ibi;
}

double noise_power(const PpgWaveform& noisy, const PpgWaveform& clean) {
  long double s = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double d = noisy.samples()[i] - clean.samples()[i];
    s += d * d;
  }
  return static_cast<double>(s / clean.size());
}

double signal_power(const PpgWaveform& w) {
  const auto x = to_vec(w);
  const double m = oracle::mean(x);
  long double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return static_cast<double>(s / x.size());
}

void write_file(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_SUITE("waveform") {
  TEST_CASE("example: 60 bpm for 60 s has its fundamental at 1 Hz") {
    SynthConfig cfg;
    cfg.heart_rate_bpm = 60;
    cfg.duration_s = 60;
    cfg.sample_rate_hz = 100;
    const auto w = synthesize_ppg(cfg);
    CHECK(w.size() == 6000);
    const double f = oracle::dtft_peak_hz(to_vec(w), 100.0, 0.3, 5.0, 0.005);
    CHECK(std::abs(f - 1.0) <= 0.02);
  }

  TEST_CASE("example: zero heart rate is a configuration error") {
    SynthConfig cfg;
    cfg.heart_rate_bpm = 0;
    cfg.duration_s = 10;
    CHECK_THROWS_KIND(synthesize_ppg(cfg), ErrorKind::Config);
  }

  TEST_CASE("example: without modulation all beat intervals are one second") {
    const auto w = support::synth(60, 30);
    const auto ibi = beat_intervals(w);
    REQUIRE(ibi.size() >= 28);
    for (double v : ibi) CHECK(std::abs(v - 1.0) <= 0.01 + 1e-12);
  }

  TEST_CASE("example: near-infinite SNR leaves the signal unchanged") {
    const auto w = support::synth(75, 10);
    const auto noisy = add_noise(w, 200.0, 3);
    for (std::size_t i = 0; i < w.size(); ++i) {
      CHECK(std::abs(noisy.samples()[i] - w.samples()[i]) <= 1e-6 * std::max(1.0, std::abs(w.samples()[i])));
    }
  }

  TEST_CASE("example: unit-variance sine at 0 dB gets unit noise variance") {
    const auto w = support::sine(1.3, 100.0, 200.0, std::sqrt(2.0));
    REQUIRE(w.size() >= 10000);
    const auto noisy = add_noise(w, 0.0, 11);
    std::vector<double> d;
    for (std::size_t i = 0; i < w.size(); ++i) d.push_back(noisy.samples()[i] - w.samples()[i]);
    CHECK(oracle::variance(d) == doctest::Approx(1.0).epsilon(0.05));
  }

  TEST_CASE("example: constant input cannot carry a noise level") {
    const PpgWaveform flat(std::vector<double>(500, 0.4), 100.0);
    CHECK_THROWS_KIND(add_noise(flat, 10.0, 1), ErrorKind::DegenerateSignal);
  }

  TEST_CASE("example: resampling to the same rate is the identity") {
    const auto w = support::synth(80, 5);
    CHECK(resample(w, 100.0) == w);
  }

  TEST_CASE("example: 1 Hz sine downsampled to 30 Hz keeps its frequency") {
    const auto w = resample(support::sine(1.0, 100.0, 20.0), 30.0);
    CHECK(w.sample_rate_hz() == 30.0);
    const double f = oracle::dtft_peak_hz(to_vec(w), 30.0, 0.2, 10.0, 0.005);
    CHECK(std::abs(f - 1.0) <= 0.05);
  }

  TEST_CASE("example: resampling to zero rate is rejected") {
    CHECK_THROWS_KIND(resample(support::synth(80, 5), 0.0), ErrorKind::Config);
  }

  TEST_CASE("example: three-row CSV loads at 100 Hz") {
    support::TempDir dir;
    write_file(dir / "w.csv", "t_s,value\n0.00,0.1\n0.01,0.2\n0.02,0.3\n");
    const auto w = load_waveform(dir / "w.csv");
    REQUIRE(w.size() == 3);
    CHECK(w.sample_rate_hz() == doctest::Approx(100.0));
    CHECK(w.samples()[0] == 0.1);
    CHECK(w.samples()[2] == 0.3);
  }

  TEST_CASE("example: backwards time column is a parse error") {
    support::TempDir dir;
    write_file(dir / "w.csv", "t_s,value\n0.00,0.1\n0.01,0.2\n0.00,0.3\n");
    CHECK_THROWS_KIND(load_waveform(dir / "w.csv"), ErrorKind::Parse);
  }

  TEST_CASE("example: synthesized waveform survives a CSV round trip") {
    support::TempDir dir;
    SynthConfig cfg;
    cfg.heart_rate_bpm = 97;
    cfg.rsa_depth = 0.1;
    cfg.drift_amplitude = 0.2;
    cfg.seed = 8;
    const auto w = synthesize_ppg(cfg);
    save_waveform(w, dir / "w.csv");
    const auto back = load_waveform(dir / "w.csv");
    REQUIRE(back.size() == w.size());
    CHECK(back.sample_rate_hz() == doctest::Approx(w.sample_rate_hz()).epsilon(1e-12));
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(back.samples()[i] - w.samples()[i]) <= 1e-9);
  }

  TEST_CASE("CSV parse errors: malformed rows, jittery spacing, wrong header") {
    support::TempDir dir;
    write_file(dir / "a.csv", "t_s,value\n0.00,0.1\n0.01,abc\n0.02,0.3\n");
    CHECK_THROWS_KIND(load_waveform(dir / "a.csv"), ErrorKind::Parse);
    write_file(dir / "b.csv", "t_s,value\n0.00,0.1\n0.01,0.2\n0.025,0.3\n0.03,0.3\n");
    CHECK_THROWS_KIND(load_waveform(dir / "b.csv"), ErrorKind::Parse);
    write_file(dir / "c.csv", "time,value\n0.00,0.1\n0.01,0.2\n");
    CHECK_THROWS_KIND(load_waveform(dir / "c.csv"), ErrorKind::Parse);
    CHECK_THROWS_KIND(load_waveform(dir / "missing.csv"), ErrorKind::Parse);
  }

  TEST_CASE("waveform construction rejects bad samples and rates") {
    CHECK_THROWS_KIND(PpgWaveform({}, 100.0), ErrorKind::Input);
    CHECK_THROWS_KIND(PpgWaveform({1.0, NAN}, 100.0), ErrorKind::Input);
    CHECK_THROWS_KIND(PpgWaveform({1.0, 2.0}, 0.0), ErrorKind::Config);
  }

  TEST_CASE("config validation covers the Nyquist margin and RSA depth") {
    SynthConfig cfg;
    cfg.heart_rate_bpm = 240;
    cfg.sample_rate_hz = 15.9;
    CHECK_THROWS_KIND(cfg.validate(), ErrorKind::Config);
    cfg.sample_rate_hz = 16.0;
    CHECK_NOTHROW(cfg.validate());
    cfg.rsa_depth = 1.0;
    CHECK_THROWS_KIND(cfg.validate(), ErrorKind::Config);
    cfg.rsa_depth = 0.0;
    cfg.heart_rate_bpm = 241;
    CHECK_THROWS_KIND(cfg.validate(), ErrorKind::Config);
    cfg.heart_rate_bpm = 60;
    cfg.duration_s = -1;
    CHECK_THROWS_KIND(cfg.validate(), ErrorKind::Config);
  }

  TEST_CASE("property: synthesis is deterministic for a fixed config") {
    SynthConfig cfg;
    cfg.rsa_depth = 0.05;
    cfg.drift_amplitude = 0.3;
    cfg.powerline_amplitude = 0.05;
    cfg.motion_burst_rate_per_min = 6;
    cfg.motion_burst_amplitude = 0.5;
    cfg.seed = 1234;
    CHECK(synthesize_ppg(cfg) == synthesize_ppg(cfg));
    auto other = cfg;
    other.seed = 1235;
    CHECK_FALSE(synthesize_ppg(cfg) == synthesize_ppg(other));
  }

  TEST_CASE("property: output length and normalization") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
      SynthConfig cfg;
      cfg.heart_rate_bpm = 30 + 210 * rng.uniform();
      cfg.duration_s = 2 + 20 * rng.uniform();
      cfg.sample_rate_hz = 50 + 200 * rng.uniform();
      cfg.drift_amplitude = rng.uniform();
      cfg.seed = rng();
      const auto w = synthesize_ppg(cfg);
      CHECK(w.size() == static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.sample_rate_hz)));
      const auto [lo, hi] = std::minmax_element(w.samples().begin(), w.samples().end());
      CHECK(*lo == doctest::Approx(0.0));
      CHECK(*hi == doctest::Approx(1.0));
    }
  }

  TEST_CASE("property: artifact-free spectrum peaks at HR/60 within one bin") {
    Rng rng(3);
    for (int trial = 0; trial < 12; ++trial) {
      SynthConfig cfg;
      cfg.heart_rate_bpm = 40 + 180 * rng.uniform();
      cfg.duration_s = 10;
      cfg.sample_rate_hz = 50;
      const auto w = synthesize_ppg(cfg);
      const auto k = oracle::dft_peak_bin(to_vec(w));
      const double bin_hz = w.sample_rate_hz() / static_cast<double>(w.size());
      CHECK(std::abs(static_cast<double>(k) * bin_hz - cfg.heart_rate_bpm / 60.0) <= bin_hz);
    }
  }

  TEST_CASE("property: modulation widens the beat interval spread") {
    for (double hr : {60.0, 90.0, 120.0}) {
      SynthConfig cfg;
      cfg.heart_rate_bpm = hr;
      cfg.duration_s = 60;
      cfg.seed = 4;
      const auto steady = beat_intervals(synthesize_ppg(cfg));
      cfg.rsa_depth = 0.1;
      const auto modulated = beat_intervals(synthesize_ppg(cfg));
      CHECK(oracle::variance(modulated) > oracle::variance(steady));
    }
  }

  TEST_CASE("property: realized SNR matches the request within 0.5 dB") {
    const auto w = support::synth(72, 120);
    REQUIRE(w.size() >= 10000);
    for (double snr : {-10.0, 0.0, 6.0, 20.0, 40.0}) {
      const auto noisy = add_noise(w, snr, static_cast<std::uint64_t>(snr + 100));
      const double measured = 10.0 * std::log10(signal_power(w) / noise_power(noisy, w));
      CHECK(std::abs(measured - snr) <= 0.5);
    }
  }

  TEST_CASE("property: resampling preserves duration and in-band amplitude") {
    for (double target : {24.0, 30.0, 60.0, 250.0}) {
      const auto src = support::sine(1.5, 100.0, 20.0);
      const auto out = resample(src, target);
      CHECK(std::abs(out.duration_s() - src.duration_s()) <= 1.0 / target);
      double peak = 0.0;
      for (std::size_t i = out.size() / 4; i < 3 * out.size() / 4; ++i) peak = std::max(peak, std::abs(out.samples()[i]));
      CHECK(peak == doctest::Approx(1.0).epsilon(0.02));
    }
  }

  TEST_CASE("resampling removes content above the new Nyquist rate") {
    const auto out = resample(support::sine(20.0, 100.0, 20.0), 30.0);
    double peak = 0.0;
    for (std::size_t i = out.size() / 4; i < 3 * out.size() / 4; ++i) peak = std::max(peak, std::abs(out.samples()[i]));
    CHECK(peak < 0.01);
  }
}

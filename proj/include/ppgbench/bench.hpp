#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ppgbench/dut.hpp"
#include "ppgbench/hr.hpp"
#include "ppgbench/video.hpp"
#include "ppgbench/waveform.hpp"

namespace ppgbench {

inline constexpr std::array<double, 5> kStandardHeartRates{60.0, 80.0, 100.0, 120.0, 180.0};
inline constexpr double kStandardCaseDuration_s = 20.0;
inline constexpr double kStandardSynthRate_hz = 100.0;

struct WaveformFile {
  std::filesystem::path path;
  friend bool operator==(const WaveformFile&, const WaveformFile&) = default;
};

using WaveformSource = std::variant<SynthConfig, WaveformFile>;

struct TestCase {
  std::string id;
  WaveformSource waveform_source;
  ChannelProfile profile;
  FrameSpec spec;
  double expected_bpm = 0.0;
  double duration_s = 0.0;

  void validate(double dither_sigma = kDefaultDitherSigma) const;
  friend bool operator==(const TestCase&, const TestCase&) = default;
};

struct TestSuite {
  std::string name;
  std::vector<TestCase> cases;

  /// Case ids unique, every case valid. Throws Error(Config).
  void validate(double dither_sigma = kDefaultDitherSigma) const;
  friend bool operator==(const TestSuite&, const TestSuite&) = default;
};

/// The 20-video set: {60, 80, 100, 120, 180} bpm x the four standard
/// profiles, 20 s each, artifact-free synthesis at 100 Hz, 320x240 @ 30 fps.
TestSuite build_standard_suite(std::uint64_t seed);

std::string suite_to_json(const TestSuite& suite);
TestSuite suite_from_json(std::string_view text);
void save_suite(const TestSuite& suite, const std::filesystem::path& path);
TestSuite load_suite(const std::filesystem::path& path);

struct RunOptions {
  double dither_sigma = kDefaultDitherSigma;
  double xcorr_max_lag_s = 0.2;
  /// Replay identical videos in every repetition instead of regenerating.
  bool fixed_videos = false;
  /// Write each video to PPGV here and decode it from disk; otherwise frames
  /// are rendered and decoded in memory.
  std::optional<std::filesystem::path> materialize_dir;
  /// Parallel cases; results do not depend on it. 0 = hardware concurrency.
  unsigned workers = 0;
};

struct CaseRecord {
  std::string id;
  std::size_t repetition = 0;
  double expected_bpm = 0.0;
  std::optional<double> measured_bpm;
  std::optional<double> ape_pct;
  std::optional<double> xcorr_r;
  std::optional<double> lag_s;
  std::size_t drop_count = 0;
  /// "ok", or the error that stopped this case.
  std::string status = "ok";

  bool ok() const noexcept { return status == "ok"; }
  friend bool operator==(const CaseRecord&, const CaseRecord&) = default;
};

struct RepetitionAggregate {
  std::size_t repetition = 0;
  std::optional<double> mape_pct;
  std::optional<double> mean_r;
  friend bool operator==(const RepetitionAggregate&, const RepetitionAggregate&) = default;
};

struct SuiteAggregates {
  double mape_pct = 0.0;
  std::optional<double> mape_cov_pct;
  double mean_r = 0.0;
  std::optional<double> r_cov_pct;
  std::optional<double> ci95_upper_pct;
  std::vector<RepetitionAggregate> per_repetition;
  friend bool operator==(const SuiteAggregates&, const SuiteAggregates&) = default;
};

struct RunResult {
  std::string suite;
  std::string config_digest;
  std::size_t repetitions = 0;
  /// Canonical JSON of everything that determines the numbers.
  std::string run_config;
  /// Ordered by (repetition, case index).
  std::vector<CaseRecord> cases;
  SuiteAggregates aggregates;
  bool pass = false;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// For each repetition x case: source -> map -> encode -> decode -> degrade
/// -> estimate -> score. Case failures are recorded in the case's status;
/// a run where no case succeeds throws Error(Run).
RunResult run_suite(const TestSuite& suite, const DegradationConfig& dut, const EstimatorConfig& estimator,
                    std::size_t repetitions, std::uint64_t seed, const RunOptions& options = {});

/// Recomputes every aggregate from the case records. Throws Error(Run) when
/// no record succeeded.
SuiteAggregates compute_aggregates(const std::vector<CaseRecord>& cases, std::size_t repetitions);

/// The classification verdict implied by the aggregates: a bootstrap upper
/// bound exists and is below the MAPE limit.
bool aggregates_pass(const SuiteAggregates& aggregates) noexcept;

/// Throws Error(Run) when a stored aggregate differs from its recomputation
/// by more than 1e-12 relative.
void verify_aggregates(const RunResult& result);

enum class ReportFormat { Json, Csv };

ReportFormat parse_report_format(std::string_view name);
std::string report_json(const RunResult& result);
std::string report_csv(const RunResult& result);
std::string report_summary(const RunResult& result);
/// Throws Error(Write) on I/O failure.
void generate_report(const RunResult& result, ReportFormat format, const std::filesystem::path& path);
RunResult parse_report_json(std::string_view text);
RunResult read_report_json(const std::filesystem::path& path);

/// JSON forms of the run configuration pieces (also used by the CLI).
std::string degradation_to_json(const DegradationConfig& config);
DegradationConfig degradation_from_json(std::string_view text);
std::string estimator_to_json(const EstimatorConfig& config);
EstimatorConfig estimator_from_json(std::string_view text);

}  // namespace ppgbench

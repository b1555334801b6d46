#include "ppgbench/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ppgbench/dsp.hpp"
#include "ppgbench/error.hpp"
#include "ppgbench/metrics.hpp"
#include "ppgbench/parallel.hpp"
#include "ppgbench/random.hpp"

namespace ppgbench {

using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// JSON conversions

json rgb_to_json(const Rgb& v) { return json::array({v[0], v[1], v[2]}); }

Rgb rgb_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::Parse, "expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json synth_to_json(const SynthConfig& c) {
  return json{{"type", "synth"},
              {"heart_rate_bpm", c.heart_rate_bpm},
              {"duration_s", c.duration_s},
              {"sample_rate_hz", c.sample_rate_hz},
              {"rsa_freq_hz", c.rsa_freq_hz},
              {"rsa_depth", c.rsa_depth},
              {"drift_freq_hz", c.drift_freq_hz},
              {"drift_amplitude", c.drift_amplitude},
              {"powerline_freq_hz", c.powerline_freq_hz},
              {"powerline_amplitude", c.powerline_amplitude},
              {"motion_burst_rate_per_min", c.motion_burst_rate_per_min},
              {"motion_burst_amplitude", c.motion_burst_amplitude},
              {"seed", c.seed}};
}

SynthConfig synth_from_json(const json& j) {
  SynthConfig c;
  c.heart_rate_bpm = j.value("heart_rate_bpm", c.heart_rate_bpm);
  c.duration_s = j.value("duration_s", c.duration_s);
  c.sample_rate_hz = j.value("sample_rate_hz", c.sample_rate_hz);
  c.rsa_freq_hz = j.value("rsa_freq_hz", c.rsa_freq_hz);
  c.rsa_depth = j.value("rsa_depth", c.rsa_depth);
  c.drift_freq_hz = j.value("drift_freq_hz", c.drift_freq_hz);
  c.drift_amplitude = j.value("drift_amplitude", c.drift_amplitude);
  c.powerline_freq_hz = j.value("powerline_freq_hz", c.powerline_freq_hz);
  c.powerline_amplitude = j.value("powerline_amplitude", c.powerline_amplitude);
  c.motion_burst_rate_per_min = j.value("motion_burst_rate_per_min", c.motion_burst_rate_per_min);
  c.motion_burst_amplitude = j.value("motion_burst_amplitude", c.motion_burst_amplitude);
  c.seed = j.value("seed", c.seed);
  return c;
}

json case_to_json(const TestCase& tc) {
  json source;
  if (const auto* synth = std::get_if<SynthConfig>(&tc.waveform_source)) {
    source = synth_to_json(*synth);
  } else {
    source = json{{"type", "file"}, {"path", std::get<WaveformFile>(tc.waveform_source).path.string()}};
  }
  return json{{"id", tc.id},
              {"waveform_source", source},
              {"profile",
               {{"name", tc.profile.name},
                {"mean", rgb_to_json(tc.profile.mean)},
                {"pulse_amplitude", rgb_to_json(tc.profile.pulse_amplitude)}}},
              {"spec", {{"width", tc.spec.width}, {"height", tc.spec.height}, {"fps", tc.spec.fps}}},
              {"expected_bpm", tc.expected_bpm},
              {"duration_s", tc.duration_s}};
}

TestCase case_from_json(const json& j) {
  TestCase tc;
  tc.id = j.at("id").get<std::string>();
  const auto& source = j.at("waveform_source");
  const auto type = source.at("type").get<std::string>();
  if (type == "synth") {
    tc.waveform_source = synth_from_json(source);
  } else if (type == "file") {
    tc.waveform_source = WaveformFile{source.at("path").get<std::string>()};
  } else {
    throw Error(ErrorKind::Parse, "unknown waveform source type `" + type + "`");
  }
  const auto& profile = j.at("profile");
  tc.profile.name = profile.value("name", std::string{});
  tc.profile.mean = rgb_from_json(profile.at("mean"));
  tc.profile.pulse_amplitude = rgb_from_json(profile.at("pulse_amplitude"));
  const FrameSpec defaults;
  if (j.contains("spec")) {
    const auto& spec = j.at("spec");
    tc.spec.width = spec.value("width", defaults.width);
    tc.spec.height = spec.value("height", defaults.height);
    tc.spec.fps = spec.value("fps", defaults.fps);
  }
  tc.expected_bpm = j.at("expected_bpm").get<double>();
  tc.duration_s = j.at("duration_s").get<double>();
  return tc;
}

json suite_json(const TestSuite& suite) {
  json cases = json::array();
  for (const auto& tc : suite.cases) cases.push_back(case_to_json(tc));
  return json{{"name", suite.name}, {"cases", cases}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from_json(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json degradation_json(const DegradationConfig& c) {
  json drop;
  if (std::holds_alternative<NoDrops>(c.drop_mode)) {
    drop = json{{"type", "none"}};
  } else if (const auto* u = std::get_if<UniformDrops>(&c.drop_mode)) {
    drop = json{{"type", "uniform"}, {"p", u->p}};
  } else {
    const auto& h = std::get<HrDependentDrops>(c.drop_mode);
    drop = json{{"type", "hr_dependent"}, {"base_p", h.base_p}, {"slope_per_bpm", h.slope_per_bpm}};
  }
  json motion = nullptr;
  if (c.motion) motion = json{{"freq_hz", c.motion->freq_hz}, {"amplitude_px", c.motion->amplitude_px}};
  return json{{"drop_mode", drop},
              {"jitter_std_ms", c.jitter_std_ms},
              {"sensor_noise_std", c.sensor_noise_std},
              {"motion", motion},
              {"seed", c.seed}};
}

DegradationConfig degradation_from(const json& j) {
  DegradationConfig c;
  if (j.contains("drop_mode")) {
    const auto& drop = j.at("drop_mode");
    const auto type = drop.at("type").get<std::string>();
    if (type == "none") {
      c.drop_mode = NoDrops{};
    } else if (type == "uniform") {
      c.drop_mode = UniformDrops{drop.at("p").get<double>()};
    } else if (type == "hr_dependent") {
      c.drop_mode = HrDependentDrops{drop.at("base_p").get<double>(), drop.at("slope_per_bpm").get<double>()};
    } else {
      throw Error(ErrorKind::Parse, "unknown drop mode `" + type + "`");
    }
  }
  c.jitter_std_ms = j.value("jitter_std_ms", 0.0);
  c.sensor_noise_std = j.value("sensor_noise_std", 0.0);
  if (j.contains("motion") && !j.at("motion").is_null()) {
    c.motion = MotionContamination{j.at("motion").at("freq_hz").get<double>(),
                                   j.at("motion").at("amplitude_px").get<double>()};
  }
  c.seed = j.value("seed", std::uint64_t{0});
  return c;
}

json estimator_json(const EstimatorConfig& c) {
  return json{{"method", std::string(to_string(c.method))},
              {"band_bpm", json::array({c.band_low_bpm, c.band_high_bpm})},
              {"channel", std::string(1, channel_name(c.channel))},
              {"resample_fps", optional_json(c.resample_fps)},
              {"timestamp_aware", c.timestamp_aware}};
}

EstimatorConfig estimator_from(const json& j) {
  EstimatorConfig c;
  if (j.contains("method")) c.method = parse_hr_method(j.at("method").get<std::string>());
  if (j.contains("band_bpm")) {
    c.band_low_bpm = j.at("band_bpm").at(0).get<double>();
    c.band_high_bpm = j.at("band_bpm").at(1).get<double>();
  }
  if (j.contains("channel")) c.channel = parse_channel(j.at("channel").get<std::string>());
  c.resample_fps = optional_from_json(j, "resample_fps");
  c.timestamp_aware = j.value("timestamp_aware", true);
  return c;
}

template <typename Fn>
auto parse_or_throw(std::string_view text, Fn&& fn) {
  try {
    return fn(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// Running

PpgWaveform load_source(const TestCase& tc, std::uint64_t case_seed) {
  if (const auto* synth = std::get_if<SynthConfig>(&tc.waveform_source)) {
    SynthConfig cfg = *synth;
    cfg.seed = derive_seed(case_seed, {static_cast<std::uint64_t>(Stream::Synth), synth->seed});
    return synthesize_ppg(cfg);
  }
  PpgWaveform loaded = load_waveform(std::get<WaveformFile>(tc.waveform_source).path);
  const auto keep = static_cast<std::size_t>(std::llround(tc.duration_s * loaded.sample_rate_hz()));
  if (keep >= 2 && keep < loaded.size()) {
    const auto x = loaded.samples();
    return PpgWaveform(std::vector<double>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(keep)),
                       loaded.sample_rate_hz(), loaded.label());
  }
  return loaded;
}

struct RunContext {
  const DegradationConfig& dut;
  const EstimatorConfig& estimator;
  std::uint64_t seed;
  const RunOptions& options;
};

CaseRecord run_case(const TestCase& tc, std::size_t repetition, const RunContext& ctx) {
  CaseRecord record;
  record.id = tc.id;
  record.repetition = repetition;
  record.expected_bpm = tc.expected_bpm;
  try {
    const std::uint64_t id_hash = hash_string(tc.id);
    const std::uint64_t video_rep = ctx.options.fixed_videos ? 0 : repetition;
    const std::uint64_t case_seed = derive_seed(ctx.seed, {video_rep, id_hash});
    const PpgWaveform source = load_source(tc, case_seed);
    const MappedSignal mapped = map_ppg_to_rgb(source, tc.profile, tc.spec.fps, ctx.options.dither_sigma);
    const std::uint64_t clip_seed = derive_seed(case_seed, {static_cast<std::uint64_t>(Stream::Video)});

    RecoveredSignal decoded;
    if (ctx.options.materialize_dir) {
      const auto path = *ctx.options.materialize_dir / (tc.id + "_r" + std::to_string(repetition) + ".ppgv");
      write_video(encode_video(mapped, tc.spec, ctx.options.dither_sigma, clip_seed, 1), path);
      decoded = decode_video(read_video(path));
    } else {
      decoded.nominal_fps = mapped.fps;
      decoded.timestamps_s.resize(mapped.targets.size());
      decoded.means.resize(mapped.targets.size());
      stream_video(mapped, tc.spec, ctx.options.dither_sigma, clip_seed, [&](std::size_t i, const Frame& frame) {
        decoded.timestamps_s[i] = static_cast<double>(i) / mapped.fps;
        decoded.means[i] = spatial_mean(frame);
      });
    }

    DegradationConfig dut = ctx.dut;
    dut.seed = derive_seed(ctx.seed, {repetition, id_hash, static_cast<std::uint64_t>(Stream::Degrade), ctx.dut.seed});
    const RecoveredSignal observed = apply_degradation(decoded, dut, tc.expected_bpm);
    record.drop_count = frame_rate_stats(observed.timestamps_s, observed.nominal_fps).drop_count;

    const HrEstimate estimate = estimate_hr(observed, ctx.estimator);
    const XcorrResult xc = xcorr_aligned(source, observed, ctx.options.xcorr_max_lag_s, ctx.estimator.channel);
    record.measured_bpm = estimate.bpm;
    record.ape_pct = 100.0 * std::abs(estimate.bpm - tc.expected_bpm) / tc.expected_bpm;
    record.xcorr_r = xc.r;
    record.lag_s = xc.lag_s;
  } catch (const std::exception& e) {
    record.status = e.what();
    record.measured_bpm.reset();
    record.ape_pct.reset();
    record.xcorr_r.reset();
    record.lag_s.reset();
  }
  return record;
}

std::optional<double> cov_or_null(const std::vector<double>& values) {
  if (values.size() < 2) return std::nullopt;
  try {
    return coefficient_of_variation(values);
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool close_rel(double a, double b) {
  if (a == b) return true;
  return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

bool close_rel(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || close_rel(*a, *b);
}

}  // namespace

// ---------------------------------------------------------------------------

void TestCase::validate(double dither_sigma) const {
  if (id.empty()) throw Error(ErrorKind::Config, "test case id must not be empty");
  profile.validate(dither_sigma);
  spec.validate();
  if (!(std::isfinite(expected_bpm) && expected_bpm > 0.0)) {
    throw Error(ErrorKind::Config, "case " + id + ": expected bpm must be positive");
  }
  if (!(std::isfinite(duration_s) && duration_s > 0.0)) {
    throw Error(ErrorKind::Config, "case " + id + ": duration must be positive");
  }
  if (const auto* synth = std::get_if<SynthConfig>(&waveform_source)) {
    synth->validate();
    if (std::abs(synth->heart_rate_bpm - expected_bpm) > 1e-9 * expected_bpm) {
      throw Error(ErrorKind::Config, "case " + id + ": expected bpm disagrees with the synthesizer heart rate");
    }
    if (std::abs(synth->duration_s - duration_s) > 1e-9 * duration_s) {
      throw Error(ErrorKind::Config, "case " + id + ": duration disagrees with the synthesizer duration");
    }
  }
}

void TestSuite::validate(double dither_sigma) const {
  std::set<std::string> seen;
  for (const auto& tc : cases) {
    if (!seen.insert(tc.id).second) throw Error(ErrorKind::Config, "duplicate case id `" + tc.id + "`");
    tc.validate(dither_sigma);
  }
}

TestSuite build_standard_suite(std::uint64_t seed) {
  TestSuite suite;
  suite.name = "standard-20";
  const auto profiles = standard_profiles();
  std::uint64_t index = 0;
  for (double hr : kStandardHeartRates) {
    for (const auto& profile : profiles) {
      SynthConfig cfg;
      cfg.heart_rate_bpm = hr;
      cfg.duration_s = kStandardCaseDuration_s;
      cfg.sample_rate_hz = kStandardSynthRate_hz;
      cfg.seed = derive_seed(seed, {index++});
      char id[64];
      std::snprintf(id, sizeof id, "hr%03d_%s", static_cast<int>(hr), profile.name.c_str());
      suite.cases.push_back(TestCase{.id = id,
                                     .waveform_source = cfg,
                                     .profile = profile,
                                     .spec = FrameSpec{},
                                     .expected_bpm = hr,
                                     .duration_s = kStandardCaseDuration_s});
    }
  }
  return suite;
}

std::string suite_to_json(const TestSuite& suite) { return suite_json(suite).dump(2); }

TestSuite suite_from_json(std::string_view text) {
  return parse_or_throw(text, [](const json& j) {
    TestSuite suite;
    suite.name = j.value("name", std::string{});
    for (const auto& c : j.at("cases")) suite.cases.push_back(case_from_json(c));
    return suite;
  });
}

void save_suite(const TestSuite& suite, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Write, "cannot open " + path.string() + " for writing");
  out << suite_to_json(suite) << '\n';
  if (!out) throw Error(ErrorKind::Write, "failed writing " + path.string());
}

TestSuite load_suite(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return suite_from_json(buffer.str());
}

std::string degradation_to_json(const DegradationConfig& config) { return degradation_json(config).dump(); }
DegradationConfig degradation_from_json(std::string_view text) {
  return parse_or_throw(text, [](const json& j) { return degradation_from(j); });
}
std::string estimator_to_json(const EstimatorConfig& config) { return estimator_json(config).dump(); }
EstimatorConfig estimator_from_json(std::string_view text) {
  return parse_or_throw(text, [](const json& j) { return estimator_from(j); });
}

SuiteAggregates compute_aggregates(const std::vector<CaseRecord>& cases, std::size_t repetitions) {
  std::vector<double> apes;
  std::vector<double> rs;
  std::vector<std::vector<double>> rep_apes(repetitions);
  std::vector<std::vector<double>> rep_rs(repetitions);
  for (const auto& rec : cases) {
    if (!rec.ok() || !rec.ape_pct || !rec.xcorr_r) continue;
    apes.push_back(*rec.ape_pct);
    rs.push_back(*rec.xcorr_r);
    if (rec.repetition < repetitions) {
      rep_apes[rec.repetition].push_back(*rec.ape_pct);
      rep_rs[rec.repetition].push_back(*rec.xcorr_r);
    }
  }
  if (apes.empty()) throw Error(ErrorKind::Run, "no case completed successfully");

  SuiteAggregates agg;
  agg.mape_pct = dsp::mean(apes);
  agg.mean_r = dsp::mean(rs);
  std::vector<double> rep_mape;
  std::vector<double> rep_r;
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    RepetitionAggregate ra;
    ra.repetition = rep;
    if (!rep_apes[rep].empty()) {
      ra.mape_pct = dsp::mean(rep_apes[rep]);
      ra.mean_r = dsp::mean(rep_rs[rep]);
      rep_mape.push_back(*ra.mape_pct);
      rep_r.push_back(*ra.mean_r);
    }
    agg.per_repetition.push_back(ra);
  }
  agg.mape_cov_pct = cov_or_null(rep_mape);
  agg.r_cov_pct = cov_or_null(rep_r);
  if (apes.size() >= 10) agg.ci95_upper_pct = classify_accuracy(apes).ci95_upper_pct;
  return agg;
}

bool aggregates_pass(const SuiteAggregates& aggregates) noexcept {
  return aggregates.ci95_upper_pct && *aggregates.ci95_upper_pct < kMapeLimitPct;
}

void verify_aggregates(const RunResult& result) {
  const SuiteAggregates fresh = compute_aggregates(result.cases, result.repetitions);
  const auto& stored = result.aggregates;
  bool same = close_rel(fresh.mape_pct, stored.mape_pct) && close_rel(fresh.mean_r, stored.mean_r) &&
              close_rel(fresh.mape_cov_pct, stored.mape_cov_pct) && close_rel(fresh.r_cov_pct, stored.r_cov_pct) &&
              close_rel(fresh.ci95_upper_pct, stored.ci95_upper_pct) &&
              fresh.per_repetition.size() == stored.per_repetition.size() && aggregates_pass(fresh) == result.pass;
  for (std::size_t i = 0; same && i < fresh.per_repetition.size(); ++i) {
    same = fresh.per_repetition[i].repetition == stored.per_repetition[i].repetition &&
           close_rel(fresh.per_repetition[i].mape_pct, stored.per_repetition[i].mape_pct) &&
           close_rel(fresh.per_repetition[i].mean_r, stored.per_repetition[i].mean_r);
  }
  if (!same) throw Error(ErrorKind::Run, "stored aggregates do not match the case records");
}

RunResult run_suite(const TestSuite& suite, const DegradationConfig& dut, const EstimatorConfig& estimator,
                    std::size_t repetitions, std::uint64_t seed, const RunOptions& options) {
  if (repetitions == 0) throw Error(ErrorKind::Config, "repetitions must be at least 1");
  if (suite.cases.empty()) throw Error(ErrorKind::Config, "suite has no cases");
  if (!(std::isfinite(options.xcorr_max_lag_s) && options.xcorr_max_lag_s >= 0.0)) {
    throw Error(ErrorKind::Config, "xcorr max lag must be >= 0");
  }
  suite.validate(options.dither_sigma);
  dut.validate();
  estimator.validate();
  if (options.materialize_dir) std::filesystem::create_directories(*options.materialize_dir);

  RunResult result;
  result.suite = suite.name;
  result.repetitions = repetitions;
  json config{{"seed", seed},
              {"repetitions", repetitions},
              {"dither_sigma", options.dither_sigma},
              {"xcorr_max_lag_s", options.xcorr_max_lag_s},
              {"fixed_videos", options.fixed_videos},
              {"video_mode", options.materialize_dir ? "materialized" : "in-memory"},
              {"dut", degradation_json(dut)},
              {"estimator", estimator_json(estimator)},
              {"suite", suite_json(suite)}};
  result.run_config = config.dump();
  result.config_digest = hex64(hash_string(result.run_config));

  const std::size_t n_cases = suite.cases.size();
  result.cases.resize(repetitions * n_cases);
  const RunContext ctx{dut, estimator, seed, options};
  parallel_for(result.cases.size(), options.workers, [&](std::size_t task) {
    const std::size_t rep = task / n_cases;
    result.cases[task] = run_case(suite.cases[task % n_cases], rep, ctx);
  });

  result.aggregates = compute_aggregates(result.cases, repetitions);
  result.pass = aggregates_pass(result.aggregates);
  return result;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  throw Error(ErrorKind::Config, "report format must be `json` or `csv`");
}

std::string report_json(const RunResult& result) {
  json cases = json::array();
  for (const auto& rec : result.cases) {
    cases.push_back(json{{"id", rec.id},
                         {"repetition", rec.repetition},
                         {"expected_bpm", rec.expected_bpm},
                         {"measured_bpm", optional_json(rec.measured_bpm)},
                         {"ape_pct", optional_json(rec.ape_pct)},
                         {"xcorr_r", optional_json(rec.xcorr_r)},
                         {"lag_s", optional_json(rec.lag_s)},
                         {"drop_count", rec.drop_count},
                         {"status", rec.status}});
  }
  json per_rep = json::array();
  for (const auto& ra : result.aggregates.per_repetition) {
    per_rep.push_back(
        json{{"repetition", ra.repetition}, {"mape_pct", optional_json(ra.mape_pct)}, {"mean_r", optional_json(ra.mean_r)}});
  }
  const auto& agg = result.aggregates;
  json doc{{"suite", result.suite},
           {"config_digest", result.config_digest},
           {"repetitions", result.repetitions},
           {"cases", cases},
           {"aggregates",
            {{"mape_pct", agg.mape_pct},
             {"mape_cov_pct", optional_json(agg.mape_cov_pct)},
             {"mean_r", agg.mean_r},
             {"r_cov_pct", optional_json(agg.r_cov_pct)},
             {"ci95_upper_pct", optional_json(agg.ci95_upper_pct)},
             {"per_repetition", per_rep}}},
           {"pass", result.pass},
           {"run_config", result.run_config.empty() ? json(nullptr) : json::parse(result.run_config)}};
  return doc.dump(2) + "\n";
}

std::string report_csv(const RunResult& result) {
  std::ostringstream out;
  out << "id,repetition,expected_bpm,measured_bpm,ape_pct,xcorr_r,lag_s,drop_count,status\n";
  auto field = [](const std::optional<double>& v) {
    if (!v) return std::string{};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", *v);
    return std::string(buf);
  };
  for (const auto& rec : result.cases) {
    std::string status = rec.status;
    std::replace(status.begin(), status.end(), '"', '\'');
    out << rec.id << ',' << rec.repetition << ',' << field(rec.expected_bpm) << ',' << field(rec.measured_bpm) << ','
        << field(rec.ape_pct) << ',' << field(rec.xcorr_r) << ',' << field(rec.lag_s) << ',' << rec.drop_count << ",\""
        << status << "\"\n";
  }
  return out.str();
}

std::string report_summary(const RunResult& result) {
  const auto& agg = result.aggregates;
  const auto ok = std::count_if(result.cases.begin(), result.cases.end(), [](const CaseRecord& r) { return r.ok(); });
  auto opt = [](const std::optional<double>& v, const char* fmt) {
    if (!v) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof buf, fmt, *v);
    return std::string(buf);
  };
  std::ostringstream out;
  char buf[256];
  out << "suite:          " << result.suite << " (digest " << result.config_digest << ")\n";
  std::snprintf(buf, sizeof buf, "cases:          %zu ok / %zu total over %zu repetitions\n",
                static_cast<std::size_t>(ok), result.cases.size(), result.repetitions);
  out << buf;
  std::snprintf(buf, sizeof buf, "MAPE:           %.4f %%\n", agg.mape_pct);
  out << buf;
  out << "MAPE CoV:       " << opt(agg.mape_cov_pct, "%.3f %%") << "\n";
  std::snprintf(buf, sizeof buf, "mean xcorr r:   %.4f\n", agg.mean_r);
  out << buf;
  out << "r CoV:          " << opt(agg.r_cov_pct, "%.3f %%") << "\n";
  out << "95% upper MAPE: " << opt(agg.ci95_upper_pct, "%.4f %%") << "\n";
  out << "verdict:        " << (result.pass ? "PASS (MAPE < 10%)" : "FAIL") << "\n";
  return out.str();
}

void generate_report(const RunResult& result, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Write, "cannot open " + path.string() + " for writing");
  out << (format == ReportFormat::Json ? report_json(result) : report_csv(result));
  out.flush();
  if (!out) throw Error(ErrorKind::Write, "failed writing " + path.string());
}

RunResult parse_report_json(std::string_view text) {
  RunResult result = parse_or_throw(text, [](const json& j) {
    RunResult r;
    r.suite = j.at("suite").get<std::string>();
    r.config_digest = j.at("config_digest").get<std::string>();
    r.repetitions = j.at("repetitions").get<std::size_t>();
    if (j.contains("run_config") && !j.at("run_config").is_null()) r.run_config = j.at("run_config").dump();
    for (const auto& c : j.at("cases")) {
      CaseRecord rec;
      rec.id = c.at("id").get<std::string>();
      rec.repetition = c.at("repetition").get<std::size_t>();
      rec.expected_bpm = c.at("expected_bpm").get<double>();
      rec.measured_bpm = optional_from_json(c, "measured_bpm");
      rec.ape_pct = optional_from_json(c, "ape_pct");
      rec.xcorr_r = optional_from_json(c, "xcorr_r");
      rec.lag_s = optional_from_json(c, "lag_s");
      rec.drop_count = c.at("drop_count").get<std::size_t>();
      rec.status = c.at("status").get<std::string>();
      r.cases.push_back(std::move(rec));
    }
    const auto& a = j.at("aggregates");
    r.aggregates.mape_pct = a.at("mape_pct").get<double>();
    r.aggregates.mape_cov_pct = optional_from_json(a, "mape_cov_pct");
    r.aggregates.mean_r = a.at("mean_r").get<double>();
    r.aggregates.r_cov_pct = optional_from_json(a, "r_cov_pct");
    r.aggregates.ci95_upper_pct = optional_from_json(a, "ci95_upper_pct");
    if (a.contains("per_repetition")) {
      for (const auto& p : a.at("per_repetition")) {
        r.aggregates.per_repetition.push_back(RepetitionAggregate{p.at("repetition").get<std::size_t>(),
                                                                  optional_from_json(p, "mape_pct"),
                                                                  optional_from_json(p, "mean_r")});
      }
    }
    r.pass = j.at("pass").get<bool>();
    return r;
  });
  verify_aggregates(result);
  return result;
}

RunResult read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_report_json(buffer.str());
}

}  // namespace ppgbench

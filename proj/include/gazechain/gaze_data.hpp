#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "gazechain/bytes.hpp"
#include "gazechain/error.hpp"

namespace gazechain {

struct GazeSample {
  std::int64_t timestamp_us = 0;
  std::array<double, 3> gaze_dir{0.0, 0.0, 1.0};
  double confidence = 0.0;
  bool is_valid = false;

  bool operator==(const GazeSample&) const = default;
};

using SessionId = FixedBytes<16>;

/// One experiment session: the digital good that is recorded, attested and escrowed.
struct GazeRecording {
  SessionId session_id{};
  std::string subject_alias;
  std::uint32_t sample_rate_hz = 120;
  std::vector<GazeSample> samples;

  bool operator==(const GazeRecording&) const = default;
};

inline double norm(const std::array<double, 3>& v) noexcept {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

inline constexpr double kUnitNormTolerance = 1e-6;

/// Empty string when the recording satisfies every structural invariant,
/// otherwise a description of the first violation.
inline std::string find_invariant_violation(const GazeRecording& r) {
  if (r.sample_rate_hz == 0) return "sample_rate_hz must be positive";
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const GazeSample& s = r.samples[i];
    const std::string where = "sample " + std::to_string(i) + ": ";
    if (s.timestamp_us < 0) return where + "negative timestamp";
    if (i > 0 && s.timestamp_us <= r.samples[i - 1].timestamp_us) return where + "timestamps not strictly increasing";
    if (!(s.confidence >= 0.0 && s.confidence <= 1.0)) return where + "confidence outside [0,1]";
    for (double c : s.gaze_dir) {
      if (!std::isfinite(c)) return where + "non-finite gaze direction";
    }
    if (s.is_valid && std::abs(norm(s.gaze_dir) - 1.0) > kUnitNormTolerance) {
      return where + "valid sample with non-unit gaze direction";
    }
  }
  return {};
}

struct QualityThresholds {
  double min_tracking_ratio = 0.9;
  double min_mean_confidence = 0.8;
  std::uint64_t min_sample_count = 100;

  void validate() const {
    if (!(min_tracking_ratio >= 0.0 && min_tracking_ratio <= 1.0)) {
      throw Error(ErrorKind::Parameter, "min_tracking_ratio must lie in [0,1]");
    }
    if (!(min_mean_confidence >= 0.0 && min_mean_confidence <= 1.0)) {
      throw Error(ErrorKind::Parameter, "min_mean_confidence must lie in [0,1]");
    }
    if (min_sample_count == 0) throw Error(ErrorKind::Parameter, "min_sample_count must be positive");
  }
};

struct QualityReport {
  double tracking_ratio = 0.0;
  double mean_confidence = 0.0;
  std::uint64_t sample_count = 0;
  bool is_reportable = false;

  bool operator==(const QualityReport&) const = default;
};

/// End-of-session quality gate. Mean confidence is taken over valid samples
/// only and is 0 when there are none.
inline QualityReport validate_quality(const GazeRecording& recording, const QualityThresholds& thresholds) {
  QualityReport report;
  report.sample_count = recording.samples.size();
  std::uint64_t valid = 0;
  double confidence_sum = 0.0;
  for (const GazeSample& s : recording.samples) {
    if (s.is_valid) {
      ++valid;
      confidence_sum += s.confidence;
    }
  }
  report.tracking_ratio =
      static_cast<double>(valid) / static_cast<double>(std::max<std::uint64_t>(1, report.sample_count));
  report.mean_confidence = valid == 0 ? 0.0 : confidence_sum / static_cast<double>(valid);
  report.is_reportable = report.tracking_ratio >= thresholds.min_tracking_ratio &&
                         report.mean_confidence >= thresholds.min_mean_confidence &&
                         report.sample_count >= thresholds.min_sample_count;
  return report;
}

struct NoiseProfile {
  double valid_fraction = 0.97;
  double confidence_mean = 0.92;
  double confidence_spread = 0.06;

  void validate() const {
    if (!(valid_fraction >= 0.0 && valid_fraction <= 1.0)) {
      throw Error(ErrorKind::Parameter, "valid_fraction must lie in [0,1]");
    }
    if (!(confidence_mean >= 0.0 && confidence_mean <= 1.0)) {
      throw Error(ErrorKind::Parameter, "confidence_mean must lie in [0,1]");
    }
    if (!(confidence_spread >= 0.0 && confidence_spread <= 1.0)) {
      throw Error(ErrorKind::Parameter, "confidence_spread must lie in [0,1]");
    }
  }
};

/// A recording that a careless session produces (skipped calibration, HMD removed).
inline constexpr NoiseProfile kNoisyProfile{0.5, 0.4, 0.2};

namespace detail {

// Stateless counter-based generator: every draw is a pure function of
// (seed, stream, counter), so generation order never affects the output.
inline std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t draw_u64(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept {
  return mix64(mix64(seed ^ mix64(stream)) ^ counter);
}

inline double draw_unit(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept {
  return static_cast<double>(draw_u64(seed, stream, counter) >> 11) * 0x1.0p-53;
}

enum Stream : std::uint64_t {
  kSessionId = 1,
  kAlias,
  kValidity,
  kConfidence,
  kYawNoise,
  kPitchNoise,
  kDwell,
};

}  // namespace detail

/// Deterministic stand-in for an HMD eye tracker. Gaze wanders slowly around
/// the forward axis with small jitter; invalid samples carry a zero vector and
/// low confidence, like a tracker that lost the pupil.
inline GazeRecording generate_synthetic(std::uint64_t seed, std::size_t n_samples, const NoiseProfile& profile) {
  profile.validate();
  using namespace detail;

  GazeRecording rec;
  for (std::size_t i = 0; i < rec.session_id.size(); i += 8) {
    std::uint64_t word = draw_u64(seed, kSessionId, i / 8);
    for (std::size_t b = 0; b < 8; ++b) rec.session_id[i + b] = static_cast<std::uint8_t>(word >> (8 * b));
  }
  std::uint64_t alias_word = draw_u64(seed, kAlias, 0);
  FixedBytes<4> alias_bytes{};
  for (std::size_t b = 0; b < alias_bytes.size(); ++b) alias_bytes[b] = static_cast<std::uint8_t>(alias_word >> (8 * b));
  rec.subject_alias = "anon-" + to_hex(alias_bytes);
  rec.sample_rate_hz = 120;
  rec.samples.reserve(n_samples);

  const double phase = draw_unit(seed, kDwell, 0) * 6.283185307179586;
  for (std::size_t i = 0; i < n_samples; ++i) {
    GazeSample s;
    s.timestamp_us = static_cast<std::int64_t>(i) * 1'000'000 / rec.sample_rate_hz;
    s.is_valid = draw_unit(seed, kValidity, i) < profile.valid_fraction;
    if (s.is_valid) {
      double t = static_cast<double>(i) / rec.sample_rate_hz;
      double yaw = 0.25 * std::sin(0.7 * t + phase) + 0.01 * (draw_unit(seed, kYawNoise, i) - 0.5);
      double pitch = 0.15 * std::sin(0.45 * t + 2.0 * phase) + 0.01 * (draw_unit(seed, kPitchNoise, i) - 0.5);
      std::array<double, 3> d{std::sin(yaw) * std::cos(pitch), std::sin(pitch), std::cos(yaw) * std::cos(pitch)};
      double n = norm(d);
      s.gaze_dir = {d[0] / n, d[1] / n, d[2] / n};
      double c = profile.confidence_mean + profile.confidence_spread * (2.0 * draw_unit(seed, kConfidence, i) - 1.0);
      s.confidence = std::clamp(c, 0.0, 1.0);
    } else {
      s.gaze_dir = {0.0, 0.0, 0.0};
      s.confidence = 0.05 * draw_unit(seed, kConfidence, i);
    }
    rec.samples.push_back(s);
  }
  return rec;
}

/// Line-delimited JSON-ish debug text; never hashed.
inline std::string export_text(const GazeRecording& r) {
  std::ostringstream out;
  out.precision(17);
  out << "{\"session_id\":\"" << to_hex(r.session_id) << "\",\"subject_alias\":\"" << r.subject_alias
      << "\",\"sample_rate_hz\":" << r.sample_rate_hz << ",\"sample_count\":" << r.samples.size() << "}\n";
  for (const GazeSample& s : r.samples) {
    out << "{\"t_us\":" << s.timestamp_us << ",\"dir\":[" << s.gaze_dir[0] << "," << s.gaze_dir[1] << ","
        << s.gaze_dir[2] << "],\"confidence\":" << s.confidence << ",\"valid\":" << (s.is_valid ? "true" : "false")
        << "}\n";
  }
  return out.str();
}

}  // namespace gazechain

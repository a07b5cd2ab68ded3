#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "avqoe/error.hpp"

namespace avqoe {

enum class Resolution { HD1080, HD720 };
enum class BitrateClass { HQ, MQ, LQ };
enum class BandwidthClass { High, Low };

inline constexpr std::array kResolutions{Resolution::HD1080, Resolution::HD720};
inline constexpr std::array kBitrateClasses{BitrateClass::HQ, BitrateClass::MQ, BitrateClass::LQ};
inline constexpr std::array kBandwidthClasses{BandwidthClass::High, BandwidthClass::Low};
inline constexpr std::array kPacketLossRates{0.0, 0.1, 0.5};
inline constexpr std::array kJitterLevels{0.0, 10.0, 50.0, 100.0};

inline constexpr double kFrameRateFps = 25.0;
inline constexpr double kAudioSampleRateHz = 48000.0;
/// High bandwidth caps the link at twice the video max bitrate.
inline constexpr double kHighBandwidthFactor = 2.0;
/// Low bandwidth: measured available bandwidth sits 2.8% under the video max bitrate.
inline constexpr double kLowBandwidthFactor = 0.972;

inline std::string_view to_string(Resolution r) { return r == Resolution::HD1080 ? "HD1080" : "HD720"; }

inline std::string_view to_string(BitrateClass b) {
  switch (b) {
    case BitrateClass::HQ: return "HQ";
    case BitrateClass::MQ: return "MQ";
    case BitrateClass::LQ: return "LQ";
  }
  return "?";
}

inline std::string_view to_string(BandwidthClass b) { return b == BandwidthClass::High ? "High" : "Low"; }

inline Resolution parse_resolution(std::string_view s) {
  if (s == "HD1080") return Resolution::HD1080;
  if (s == "HD720") return Resolution::HD720;
  throw Error(ErrorCode::MalformedRow, "unknown resolution '" + std::string(s) + "'");
}

inline BitrateClass parse_bitrate_class(std::string_view s) {
  if (s == "HQ") return BitrateClass::HQ;
  if (s == "MQ") return BitrateClass::MQ;
  if (s == "LQ") return BitrateClass::LQ;
  throw Error(ErrorCode::MalformedRow, "unknown bitrate class '" + std::string(s) + "'");
}

inline BandwidthClass parse_bandwidth_class(std::string_view s) {
  if (s == "High") return BandwidthClass::High;
  if (s == "Low") return BandwidthClass::Low;
  throw Error(ErrorCode::MalformedRow, "unknown bandwidth class '" + std::string(s) + "'");
}

inline int width_of(Resolution r) { return r == Resolution::HD1080 ? 1920 : 1280; }
inline int height_of(Resolution r) { return r == Resolution::HD1080 ? 1080 : 720; }
inline double pixels_of(Resolution r) { return static_cast<double>(width_of(r)) * height_of(r); }

/// Shortest decimal form: 0, 0.1, 0.5, 10, 100.
inline std::string format_level(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

struct TestCondition {
  Resolution resolution{};
  BitrateClass bitrate_class{};
  BandwidthClass bandwidth_class{};
  double plr_percent = 0.0;
  double jitter_ms = 0.0;
  std::string condition_id;

  friend bool operator==(const TestCondition&, const TestCondition&) = default;
};

inline std::string make_condition_id(Resolution r, BitrateClass b, BandwidthClass bw, double plr,
                                     double jitter) {
  std::string id;
  id.append(to_string(r)).append("_").append(to_string(b)).append("_").append(to_string(bw));
  id.append("_p").append(format_level(plr)).append("_j").append(format_level(jitter));
  return id;
}

inline TestCondition make_condition(Resolution r, BitrateClass b, BandwidthClass bw, double plr,
                                    double jitter) {
  return TestCondition{r, b, bw, plr, jitter, make_condition_id(r, b, bw, plr, jitter)};
}

/// Full influence-factor cross product in canonical order
/// (resolution, bitrate class, bandwidth class, packet loss, jitter; outermost first).
inline std::vector<TestCondition> generate_condition_matrix() {
  std::vector<TestCondition> out;
  out.reserve(kResolutions.size() * kBitrateClasses.size() * kBandwidthClasses.size() *
              kPacketLossRates.size() * kJitterLevels.size());
  for (auto r : kResolutions)
    for (auto b : kBitrateClasses)
      for (auto bw : kBandwidthClasses)
        for (double plr : kPacketLossRates)
          for (double j : kJitterLevels) out.push_back(make_condition(r, b, bw, plr, j));
  return out;
}

inline constexpr std::string_view kConditionCsvHeader =
    "condition_id,resolution,bitrate_class,bandwidth_class,plr_percent,jitter_ms";

inline void write_condition_csv(std::ostream& os, const std::vector<TestCondition>& conditions) {
  os << kConditionCsvHeader << '\n';
  for (const auto& c : conditions) {
    os << c.condition_id << ',' << to_string(c.resolution) << ',' << to_string(c.bitrate_class) << ','
       << to_string(c.bandwidth_class) << ',' << format_level(c.plr_percent) << ','
       << format_level(c.jitter_ms) << '\n';
  }
}

struct SourceProfile {
  Resolution resolution{};
  BitrateClass bitrate_class{};
  double overall_bitrate_kbps = 0.0;
  double video_max_bitrate_kbps = 0.0;
  double audio_bitrate_kbps = 0.0;
  double frame_rate_fps = kFrameRateFps;
  double audio_sample_rate_hz = kAudioSampleRateHz;

  friend bool operator==(const SourceProfile&, const SourceProfile&) = default;
};

/// The six encoded source files. HD1080/HQ's 13.1 Mbps is normalized to kbps.
inline std::vector<SourceProfile> builtin_source_profiles() {
  return {
      {Resolution::HD720, BitrateClass::LQ, 1389, 1477, 128},
      {Resolution::HD720, BitrateClass::MQ, 3461, 3664, 128},
      {Resolution::HD720, BitrateClass::HQ, 8040, 8313, 128},
      {Resolution::HD1080, BitrateClass::LQ, 2871, 3227, 128},
      {Resolution::HD1080, BitrateClass::MQ, 7457, 8069, 128},
      {Resolution::HD1080, BitrateClass::HQ, 13100, 18083, 128},
  };
}

inline const SourceProfile& find_profile(const std::vector<SourceProfile>& profiles, Resolution r,
                                         BitrateClass b) {
  for (const auto& p : profiles)
    if (p.resolution == r && p.bitrate_class == b) return p;
  throw Error(ErrorCode::MissingMetadata, "no source profile for " + std::string(to_string(r)) + "/" +
                                              std::string(to_string(b)));
}

inline double effective_bandwidth(const SourceProfile& profile, BandwidthClass bw) {
  return (bw == BandwidthClass::High ? kHighBandwidthFactor : kLowBandwidthFactor) *
         profile.video_max_bitrate_kbps;
}

struct RatingRecord {
  std::string condition_id;
  std::string subject_id;
  int score = 0;

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

struct MOSRecord {
  std::string condition_id;
  double mos = 0.0;
  std::size_t n_subjects = 0;
  double stddev = 0.0;
  double ci95_halfwidth = 0.0;
};

/// Container-level scalars for one recorded file.
struct MetadataRecord {
  std::string condition_id;
  double bits_per_pixel_per_frame = 0.0;
  double av_delay_ms = 0.0;
  double duration_s = 0.0;
  double frame_count = 0.0;
  double video_stream_size_kb = 0.0;
  double audio_stream_size_kb = 0.0;

  friend bool operator==(const MetadataRecord&, const MetadataRecord&) = default;
};

inline constexpr std::size_t kFeatureCount = 11;

inline const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names{
      "bits_per_pixel_per_frame", "av_delay_ms",          "duration_s",
      "frame_count",              "video_stream_size_kb", "audio_stream_size_kb",
      "overall_bitrate_kbps",     "resolution_pixels",    "plr_percent",
      "jitter_ms",                "bandwidth_kbps"};
  return names;
}

struct FeatureVector {
  double bits_per_pixel_per_frame = 0.0;
  double av_delay_ms = 0.0;
  double duration_s = 0.0;
  double frame_count = 0.0;
  double video_stream_size_kb = 0.0;
  double audio_stream_size_kb = 0.0;
  double overall_bitrate_kbps = 0.0;
  double resolution_pixels = 0.0;
  double plr_percent = 0.0;
  double jitter_ms = 0.0;
  double bandwidth_kbps = 0.0;

  /// Values in feature_names() order.
  [[nodiscard]] std::array<double, kFeatureCount> values() const {
    return {bits_per_pixel_per_frame, av_delay_ms,          duration_s,
            frame_count,              video_stream_size_kb, audio_stream_size_kb,
            overall_bitrate_kbps,     resolution_pixels,    plr_percent,
            jitter_ms,                bandwidth_kbps};
  }

  [[nodiscard]] bool finite() const {
    for (double v : values())
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline FeatureVector make_feature_vector(const TestCondition& condition, const SourceProfile& profile,
                                         const MetadataRecord& meta) {
  FeatureVector f;
  f.bits_per_pixel_per_frame = meta.bits_per_pixel_per_frame;
  f.av_delay_ms = meta.av_delay_ms;
  f.duration_s = meta.duration_s;
  f.frame_count = meta.frame_count;
  f.video_stream_size_kb = meta.video_stream_size_kb;
  f.audio_stream_size_kb = meta.audio_stream_size_kb;
  f.overall_bitrate_kbps = profile.overall_bitrate_kbps;
  f.resolution_pixels = pixels_of(condition.resolution);
  f.plr_percent = condition.plr_percent;
  f.jitter_ms = condition.jitter_ms;
  f.bandwidth_kbps = effective_bandwidth(profile, condition.bandwidth_class);
  return f;
}

}  // namespace avqoe

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "avqoe/domain.hpp"
#include "avqoe/random.hpp"

namespace avqoe {

/// Synthetic subject panel over the condition matrix. Default weights come from
/// tools/tune_oracle.py and put the noiseless MOS between about 1.78 and 4.60.
struct OracleConfig {
  std::size_t subject_count = 24;
  double rating_noise_sd = 0.35;
  std::uint64_t seed = 7;
  double plr_weight = 0.9;        // per percent of packet loss
  double jitter_weight = 0.0035;  // per millisecond of jitter
  double bw_weight = 0.15;        // flat penalty for the low-bandwidth cap
  double codec_weight = 3.6;      // scales kReferenceBitsPerPixel / bits-per-pixel

  static constexpr double kReferenceBitsPerPixel = 0.01;
  static constexpr double kClipDurationS = 10.0;

  void validate() const {
    if (subject_count < 1) throw Error(ErrorCode::InvalidConfig, "subject_count must be >= 1");
    if (!(rating_noise_sd >= 0.0) || !std::isfinite(rating_noise_sd))
      throw Error(ErrorCode::InvalidConfig, "rating_noise_sd must be >= 0");
    for (double w : {plr_weight, jitter_weight, bw_weight, codec_weight})
      if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidConfig, "oracle weights must be >= 0");
  }
};

/// Nominal video bits per pixel per frame of an encoded source.
inline double source_bits_per_pixel(const SourceProfile& p) {
  return (p.overall_bitrate_kbps - p.audio_bitrate_kbps) * 1000.0 / (pixels_of(p.resolution) * p.frame_rate_fps);
}

struct QualityFactors {
  double codec = 1.0;
  double plr = 1.0;
  double jitter = 1.0;
  double bandwidth = 1.0;
};

/// Each factor lies in (0, 1] and is 1 for an unimpaired cell.
inline QualityFactors quality_factors(const TestCondition& c, const SourceProfile& p, const OracleConfig& cfg) {
  QualityFactors q;
  q.codec = std::exp(-cfg.codec_weight * OracleConfig::kReferenceBitsPerPixel / source_bits_per_pixel(p));
  q.plr = std::exp(-cfg.plr_weight * c.plr_percent);
  q.jitter = std::exp(-cfg.jitter_weight * c.jitter_ms);
  q.bandwidth = c.bandwidth_class == BandwidthClass::Low ? std::exp(-cfg.bw_weight) : 1.0;
  return q;
}

/// Multiplicative degradation model: 1 + 4 * q_codec * q_plr * q_jitter * q_bw.
inline double true_mos(const TestCondition& condition, const SourceProfile& profile, const OracleConfig& config) {
  const auto q = quality_factors(condition, profile, config);
  return 1.0 + 4.0 * q.codec * q.plr * q.jitter * q.bandwidth;
}

inline std::string subject_id(std::size_t index, std::size_t subject_count) {
  const int width = subject_count < 100 ? 2 : static_cast<int>(std::to_string(subject_count).size());
  std::string digits = std::to_string(index + 1);
  return "s" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') + digits;
}

/// One ACR score per condition and subject: clamp(round(true_mos + N(0, sd)), 1, 5).
/// Each condition draws from its own stream, so output does not depend on generation order.
inline std::vector<RatingRecord> synthesize_ratings(const std::vector<TestCondition>& matrix,
                                                    const std::vector<SourceProfile>& profiles,
                                                    const OracleConfig& config) {
  config.validate();
  std::vector<RatingRecord> out;
  out.reserve(matrix.size() * config.subject_count);
  for (std::size_t c = 0; c < matrix.size(); ++c) {
    const auto& cond = matrix[c];
    const double mos = true_mos(cond, find_profile(profiles, cond.resolution, cond.bitrate_class), config);
    Rng rng(derive_seed(config.seed, c));
    std::normal_distribution<double> noise(0.0, config.rating_noise_sd > 0.0 ? config.rating_noise_sd : 1.0);
    for (std::size_t s = 0; s < config.subject_count; ++s) {
      const double raw = mos + (config.rating_noise_sd > 0.0 ? noise(rng) : 0.0);
      const int score = static_cast<int>(std::clamp(std::lround(raw), 1L, 5L));
      out.push_back({cond.condition_id, subject_id(s, config.subject_count), score});
    }
  }
  return out;
}

/// Noiseless panel: MOS equal to the oracle value for every condition, zero spread.
inline std::vector<MOSRecord> oracle_mos_records(const std::vector<TestCondition>& matrix,
                                                 const std::vector<SourceProfile>& profiles,
                                                 const OracleConfig& config) {
  config.validate();
  std::vector<MOSRecord> out;
  out.reserve(matrix.size());
  for (const auto& cond : matrix)
    out.push_back({cond.condition_id, true_mos(cond, find_profile(profiles, cond.resolution, cond.bitrate_class), config),
                   config.subject_count, 0.0, 0.0});
  return out;
}

/// Header-level scalars a recorder would report for each condition's capture. They
/// describe the encoded source, so every condition sharing a source profile reports the
/// same values; the audio/video offset is a per-profile 0-40 ms draw.
inline std::vector<MetadataRecord> synthesize_metadata(const std::vector<TestCondition>& matrix,
                                                       const std::vector<SourceProfile>& profiles,
                                                       const OracleConfig& config) {
  constexpr std::uint64_t kMetadataStream = 0x6d657461ULL;
  std::vector<MetadataRecord> out;
  out.reserve(matrix.size());
  for (const auto& cond : matrix) {
    const auto& profile = find_profile(profiles, cond.resolution, cond.bitrate_class);
    const auto profile_index = static_cast<std::uint64_t>(&profile - profiles.data());
    Rng rng(derive_seed(config.seed ^ kMetadataStream, profile_index));
    std::uniform_real_distribution<double> offset(0.0, 40.0);

    MetadataRecord m;
    m.condition_id = cond.condition_id;
    m.bits_per_pixel_per_frame = source_bits_per_pixel(profile);
    m.av_delay_ms = offset(rng);
    m.duration_s = OracleConfig::kClipDurationS;
    m.frame_count = m.duration_s * profile.frame_rate_fps;
    m.video_stream_size_kb = (profile.overall_bitrate_kbps - profile.audio_bitrate_kbps) * m.duration_s / 8.0;
    m.audio_stream_size_kb = profile.audio_bitrate_kbps * m.duration_s / 8.0;
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace avqoe

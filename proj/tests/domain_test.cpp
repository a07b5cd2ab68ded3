#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "avqoe/domain.hpp"

namespace avqoe {
namespace {

TEST(ConditionMatrix, HasOneCellPerFactorCombination) {
  const auto matrix = generate_condition_matrix();
  EXPECT_EQ(matrix.size(), 144u);
  EXPECT_EQ(matrix.size(), kResolutions.size() * kBitrateClasses.size() * kBandwidthClasses.size() *
                               kPacketLossRates.size() * kJitterLevels.size());
}

TEST(ConditionMatrix, CanonicalHeadIsTheUnimpairedCell) {
  const auto head = generate_condition_matrix().front();
  EXPECT_EQ(head.resolution, Resolution::HD1080);
  EXPECT_EQ(head.bitrate_class, BitrateClass::HQ);
  EXPECT_EQ(head.bandwidth_class, BandwidthClass::High);
  EXPECT_EQ(head.plr_percent, 0.0);
  EXPECT_EQ(head.jitter_ms, 0.0);
  EXPECT_EQ(head.condition_id, "HD1080_HQ_High_p0_j0");
}

TEST(ConditionMatrix, IdsAreUniqueAndEncodeEveryFactor) {
  const auto matrix = generate_condition_matrix();
  std::set<std::string> ids;
  std::set<std::tuple<int, int, int, double, double>> cells;
  for (const auto& c : matrix) {
    ids.insert(c.condition_id);
    cells.insert({static_cast<int>(c.resolution), static_cast<int>(c.bitrate_class),
                  static_cast<int>(c.bandwidth_class), c.plr_percent, c.jitter_ms});
  }
  EXPECT_EQ(ids.size(), 144u);
  EXPECT_EQ(cells.size(), 144u);
  EXPECT_EQ(matrix[1].condition_id, "HD1080_HQ_High_p0_j10");
  EXPECT_EQ(matrix[4].condition_id, "HD1080_HQ_High_p0.1_j0");
  EXPECT_EQ(matrix.back().condition_id, "HD720_LQ_Low_p0.5_j100");
}

TEST(ConditionMatrix, SerializationIsDeterministic) {
  std::ostringstream a, b;
  write_condition_csv(a, generate_condition_matrix());
  write_condition_csv(b, generate_condition_matrix());
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, kConditionCsvHeader.size()), kConditionCsvHeader);
  EXPECT_NE(a.str().find("\nHD720_MQ_Low_p0.1_j50,HD720,MQ,Low,0.1,50\n"), std::string::npos);
}

TEST(SourceProfiles, MatchEncodedFileTable) {
  const auto profiles = builtin_source_profiles();
  ASSERT_EQ(profiles.size(), 6u);
  EXPECT_EQ(find_profile(profiles, Resolution::HD720, BitrateClass::MQ).overall_bitrate_kbps, 3461);
  EXPECT_EQ(find_profile(profiles, Resolution::HD1080, BitrateClass::LQ).video_max_bitrate_kbps, 3227);
  const auto& hq = find_profile(profiles, Resolution::HD1080, BitrateClass::HQ);
  EXPECT_EQ(hq.overall_bitrate_kbps, 13100);
  EXPECT_EQ(hq.video_max_bitrate_kbps, 18083);
  for (const auto& p : profiles) {
    EXPECT_EQ(p.audio_bitrate_kbps, 128);
    EXPECT_EQ(p.frame_rate_fps, 25);
    EXPECT_EQ(p.audio_sample_rate_hz, 48000);
    EXPECT_GT(p.overall_bitrate_kbps, p.audio_bitrate_kbps);
    EXPECT_GT(p.video_max_bitrate_kbps, 0);
  }
}

TEST(EffectiveBandwidth, HighDoublesAndLowAppliesMeasuredShortfall) {
  const auto profiles = builtin_source_profiles();
  const auto& lq720 = find_profile(profiles, Resolution::HD720, BitrateClass::LQ);
  EXPECT_EQ(effective_bandwidth(lq720, BandwidthClass::High), 2954.0);
  EXPECT_NEAR(effective_bandwidth(lq720, BandwidthClass::Low), 1435.6, 0.1);
  for (const auto& p : profiles)
    EXPECT_EQ(effective_bandwidth(p, BandwidthClass::High) / p.video_max_bitrate_kbps, 2.0);
}

TEST(FeatureVector, NetworkFeaturesComeStraightFromTheCondition) {
  const auto profiles = builtin_source_profiles();
  MetadataRecord meta{"x", 0.1, 5, 10, 250, 1000, 160};
  for (const auto& c : generate_condition_matrix()) {
    const auto& p = find_profile(profiles, c.resolution, c.bitrate_class);
    const auto f = make_feature_vector(c, p, meta);
    EXPECT_EQ(f.plr_percent, c.plr_percent);
    EXPECT_EQ(f.jitter_ms, c.jitter_ms);
    EXPECT_EQ(f.bandwidth_kbps, effective_bandwidth(p, c.bandwidth_class));
    EXPECT_EQ(f.resolution_pixels, pixels_of(c.resolution));
    EXPECT_TRUE(f.finite());
  }
  EXPECT_EQ(feature_names().size(), kFeatureCount);
}

TEST(Enums, ParseRejectsUnknownLabels) {
  EXPECT_EQ(parse_resolution("HD720"), Resolution::HD720);
  EXPECT_EQ(parse_bitrate_class("MQ"), BitrateClass::MQ);
  EXPECT_EQ(parse_bandwidth_class("Low"), BandwidthClass::Low);
  EXPECT_THROW(parse_resolution("4K"), Error);
  EXPECT_THROW(parse_bandwidth_class("Medium"), Error);
}

}  // namespace
}  // namespace avqoe

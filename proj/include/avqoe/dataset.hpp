#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "avqoe/csv.hpp"
#include "avqoe/domain.hpp"
#include "avqoe/matrix.hpp"

namespace avqoe {

inline constexpr std::string_view kRatingsCsvHeader = "condition_id,subject_id,score";
inline constexpr std::string_view kMetadataCsvHeader =
    "condition_id,bits_per_pixel_per_frame,av_delay_ms,duration_s,frame_count,video_stream_size_kb,"
    "audio_stream_size_kb";

// ---------------------------------------------------------------------------
// Digests

/// Lowercase hex SHA-256 of a byte string.
inline std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::Io, "SHA-256 digest failed");
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(md[i]);
  return os.str();
}

inline std::string read_file(const std::string& path) {
  auto in = csv::open_input(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::string file_sha256(const std::string& path) { return sha256_hex(read_file(path)); }

// ---------------------------------------------------------------------------
// Ingestion

inline std::vector<RatingRecord> ingest_ratings(std::istream& in, const std::string& source = "ratings") {
  csv::Reader reader(in, source);
  reader.expect_header(kRatingsCsvHeader);
  std::vector<RatingRecord> out;
  std::string line;
  while (reader.next(line)) {
    auto f = csv::split(line);
    if (f.size() != 3) reader.fail(ErrorCode::MalformedRow, "expected 3 fields, got " + std::to_string(f.size()));
    RatingRecord r;
    r.condition_id = std::string(csv::trim(f[0]));
    r.subject_id = std::string(csv::trim(f[1]));
    if (r.condition_id.empty() || r.subject_id.empty()) reader.fail(ErrorCode::MalformedRow, "empty identifier");
    if (!csv::parse_int(f[2], r.score))
      reader.fail(ErrorCode::MalformedRow, "score '" + std::string(f[2]) + "' is not an integer");
    if (r.score < 1 || r.score > 5)
      reader.fail(ErrorCode::ScoreOutOfRange, "score " + std::to_string(r.score) + " outside 1..5");
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<RatingRecord> ingest_ratings(const std::string& path) {
  auto in = csv::open_input(path);
  return ingest_ratings(in, path);
}

inline std::vector<MetadataRecord> ingest_metadata(std::istream& in, const std::string& source = "metadata") {
  csv::Reader reader(in, source);
  reader.expect_header(kMetadataCsvHeader);
  std::vector<MetadataRecord> out;
  std::string line;
  while (reader.next(line)) {
    auto f = csv::split(line);
    if (f.size() != 7) reader.fail(ErrorCode::MalformedRow, "expected 7 fields, got " + std::to_string(f.size()));
    MetadataRecord m;
    m.condition_id = std::string(csv::trim(f[0]));
    if (m.condition_id.empty()) reader.fail(ErrorCode::MalformedRow, "empty condition_id");
    double* slots[] = {&m.bits_per_pixel_per_frame, &m.av_delay_ms,          &m.duration_s,
                       &m.frame_count,              &m.video_stream_size_kb, &m.audio_stream_size_kb};
    for (std::size_t i = 0; i < 6; ++i)
      if (!csv::parse_double(f[i + 1], *slots[i]))
        reader.fail(ErrorCode::MalformedRow, "field " + std::to_string(i + 2) + " is not a finite number");
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<MetadataRecord> ingest_metadata(const std::string& path) {
  auto in = csv::open_input(path);
  return ingest_metadata(in, path);
}

inline std::vector<TestCondition> ingest_conditions(std::istream& in, const std::string& source = "conditions") {
  csv::Reader reader(in, source);
  reader.expect_header(kConditionCsvHeader);
  std::vector<TestCondition> out;
  std::unordered_set<std::string> seen;
  std::string line;
  while (reader.next(line)) {
    auto f = csv::split(line);
    if (f.size() != 6) reader.fail(ErrorCode::MalformedRow, "expected 6 fields, got " + std::to_string(f.size()));
    TestCondition c;
    try {
      c.resolution = parse_resolution(csv::trim(f[1]));
      c.bitrate_class = parse_bitrate_class(csv::trim(f[2]));
      c.bandwidth_class = parse_bandwidth_class(csv::trim(f[3]));
    } catch (const Error& e) {
      reader.fail(ErrorCode::MalformedRow, e.what());
    }
    if (!csv::parse_double(f[4], c.plr_percent) || !csv::parse_double(f[5], c.jitter_ms))
      reader.fail(ErrorCode::MalformedRow, "plr/jitter must be finite numbers");
    c.condition_id = std::string(csv::trim(f[0]));
    if (c.condition_id.empty()) reader.fail(ErrorCode::MalformedRow, "empty condition_id");
    if (!seen.insert(c.condition_id).second)
      reader.fail(ErrorCode::DuplicateCondition, "duplicate condition_id " + c.condition_id);
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<TestCondition> ingest_conditions(const std::string& path) {
  auto in = csv::open_input(path);
  return ingest_conditions(in, path);
}

inline void write_ratings_csv(std::ostream& os, const std::vector<RatingRecord>& ratings) {
  os << kRatingsCsvHeader << '\n';
  for (const auto& r : ratings) os << r.condition_id << ',' << r.subject_id << ',' << r.score << '\n';
}

inline void write_metadata_csv(std::ostream& os, const std::vector<MetadataRecord>& records) {
  os << kMetadataCsvHeader << '\n';
  auto old = os.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& m : records) {
    os << m.condition_id << ',' << m.bits_per_pixel_per_frame << ',' << m.av_delay_ms << ',' << m.duration_s
       << ',' << m.frame_count << ',' << m.video_stream_size_kb << ',' << m.audio_stream_size_kb << '\n';
  }
  os.precision(old);
}

/// Rejects ratings whose condition is not part of the given matrix.
inline void check_rating_conditions(const std::vector<RatingRecord>& ratings,
                                    const std::vector<TestCondition>& conditions) {
  std::unordered_set<std::string> known;
  for (const auto& c : conditions) known.insert(c.condition_id);
  for (const auto& r : ratings)
    if (!known.contains(r.condition_id))
      throw Error(ErrorCode::UnknownCondition, "rating references unknown condition '" + r.condition_id + "'");
}

// ---------------------------------------------------------------------------
// MOS aggregation

/// Two-sided 95% Student-t critical values t(0.975, df), df = 1..40.
inline constexpr std::array<double, 40> kStudentT975{
    12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624, 2.306004, 2.262157, 2.228139,
    2.200985,  2.178813, 2.160369, 2.144787, 2.131450, 2.119905, 2.109816, 2.100922, 2.093024, 2.085963,
    2.079614,  2.073873, 2.068658, 2.063899, 2.059539, 2.055529, 2.051831, 2.048407, 2.045230, 2.042272,
    2.039513,  2.036933, 2.034515, 2.032245, 2.030108, 2.028094, 2.026192, 2.024394, 2.022691, 2.021075};

/// t(0.975, df). Table lookup up to 40 degrees of freedom, Cornish-Fisher expansion beyond.
inline double student_t975(std::size_t df) {
  if (df == 0) throw Error(ErrorCode::InvalidConfig, "t quantile needs df >= 1");
  if (df <= kStudentT975.size()) return kStudentT975[df - 1];
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(df);
  const double z3 = z * z * z, z5 = z3 * z * z, z7 = z5 * z * z;
  return z + (z3 + z) / (4 * n) + (5 * z5 + 16 * z3 + 3 * z) / (96 * n * n) +
         (3 * z7 + 19 * z5 + 17 * z3 - 15 * z) / (384 * n * n * n);
}

inline MOSRecord summarize_scores(const std::string& condition_id, std::span<const int> scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptyGroup, "no ratings for condition '" + condition_id + "'");
  MOSRecord m;
  m.condition_id = condition_id;
  m.n_subjects = scores.size();
  const double n = static_cast<double>(scores.size());
  double sum = 0.0;
  for (int s : scores) sum += s;
  m.mos = sum / n;
  if (scores.size() > 1) {
    double ss = 0.0;
    for (int s : scores) ss += (s - m.mos) * (s - m.mos);
    m.stddev = std::sqrt(ss / (n - 1));
    m.ci95_halfwidth = m.stddev == 0.0 ? 0.0 : student_t975(scores.size() - 1) * m.stddev / std::sqrt(n);
  }
  return m;
}

/// One MOS record per distinct condition, in first-appearance order.
inline std::vector<MOSRecord> aggregate_mos(const std::vector<RatingRecord>& ratings) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<int>> groups;
  for (const auto& r : ratings) {
    if (r.score < 1 || r.score > 5)
      throw Error(ErrorCode::ScoreOutOfRange, "score " + std::to_string(r.score) + " for " + r.condition_id);
    auto [it, inserted] = groups.try_emplace(r.condition_id);
    if (inserted) order.push_back(r.condition_id);
    it->second.push_back(r.score);
  }
  std::vector<MOSRecord> out;
  out.reserve(order.size());
  for (const auto& id : order) out.push_back(summarize_scores(id, groups.at(id)));
  return out;
}

// ---------------------------------------------------------------------------
// Dataset

struct DatasetRow {
  std::string condition_id;
  std::vector<double> features;
  double target_mos = 0.0;
  std::optional<double> ci95_halfwidth;
};

/// Immutable feature/target table. Rows share one dimensionality; condition ids are unique.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<std::string> feature_names, std::vector<DatasetRow> rows,
          std::map<std::string, std::string> provenance = {})
      : feature_names_(std::move(feature_names)), rows_(std::move(rows)), provenance_(std::move(provenance)) {
    std::unordered_set<std::string> ids;
    for (const auto& r : rows_) {
      if (r.features.size() != feature_names_.size())
        throw Error(ErrorCode::DimensionalityMismatch,
                    "row '" + r.condition_id + "' has " + std::to_string(r.features.size()) + " features, expected " +
                        std::to_string(feature_names_.size()));
      for (double v : r.features)
        if (!std::isfinite(v)) throw Error(ErrorCode::MalformedRow, "non-finite feature in row '" + r.condition_id + "'");
      if (!(r.target_mos >= 1.0 && r.target_mos <= 5.0))
        throw Error(ErrorCode::ScoreOutOfRange, "target for '" + r.condition_id + "' outside [1,5]");
      if (!ids.insert(r.condition_id).second)
        throw Error(ErrorCode::DuplicateCondition, "duplicate condition_id '" + r.condition_id + "'");
    }
  }

  [[nodiscard]] const std::vector<std::string>& feature_names() const { return feature_names_; }
  [[nodiscard]] const std::vector<DatasetRow>& rows() const { return rows_; }
  [[nodiscard]] const std::map<std::string, std::string>& provenance() const { return provenance_; }
  [[nodiscard]] std::size_t size() const { return rows_.size(); }
  [[nodiscard]] std::size_t dimension() const { return feature_names_.size(); }
  [[nodiscard]] bool empty() const { return rows_.empty(); }

  [[nodiscard]] Matrix features() const {
    Matrix x(rows_.size(), dimension());
    for (std::size_t i = 0; i < rows_.size(); ++i)
      std::copy(rows_[i].features.begin(), rows_[i].features.end(), x.row(i).begin());
    return x;
  }

  [[nodiscard]] std::vector<double> targets() const {
    std::vector<double> y;
    y.reserve(rows_.size());
    for (const auto& r : rows_) y.push_back(r.target_mos);
    return y;
  }

  /// Per-row CI half-widths, or nullopt if any row lacks one.
  [[nodiscard]] std::optional<std::vector<double>> ci95_halfwidths() const {
    std::vector<double> ci;
    ci.reserve(rows_.size());
    for (const auto& r : rows_) {
      if (!r.ci95_halfwidth) return std::nullopt;
      ci.push_back(*r.ci95_halfwidth);
    }
    return ci;
  }

 private:
  std::vector<std::string> feature_names_;
  std::vector<DatasetRow> rows_;
  std::map<std::string, std::string> provenance_;
};

namespace detail {

template <typename Range, typename Value>
std::size_t index_in(const Range& range, const Value& v) {
  return static_cast<std::size_t>(std::find(range.begin(), range.end(), v) - range.begin());
}

/// Position of a condition in the canonical matrix order; off-grid values sort last.
inline std::array<std::size_t, 5> canonical_key(const TestCondition& c) {
  return {index_in(kResolutions, c.resolution), index_in(kBitrateClasses, c.bitrate_class),
          index_in(kBandwidthClasses, c.bandwidth_class), index_in(kPacketLossRates, c.plr_percent),
          index_in(kJitterLevels, c.jitter_ms)};
}

}  // namespace detail

/// Joins conditions, source profiles, metadata and MOS into one row per rated condition,
/// ordered canonically (ties broken by condition_id).
inline Dataset build_dataset(const std::vector<TestCondition>& conditions,
                             const std::vector<SourceProfile>& profiles,
                             const std::vector<MetadataRecord>& metadata, const std::vector<MOSRecord>& mos_records,
                             std::map<std::string, std::string> provenance = {}) {
  std::unordered_map<std::string, const TestCondition*> by_condition;
  for (const auto& c : conditions)
    if (!by_condition.emplace(c.condition_id, &c).second)
      throw Error(ErrorCode::DuplicateCondition, "duplicate condition '" + c.condition_id + "'");
  std::unordered_map<std::string, const MetadataRecord*> by_meta;
  for (const auto& m : metadata)
    if (!by_meta.emplace(m.condition_id, &m).second)
      throw Error(ErrorCode::DuplicateCondition, "duplicate metadata for '" + m.condition_id + "'");

  struct Keyed {
    std::array<std::size_t, 5> key;
    DatasetRow row;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(mos_records.size());
  for (const auto& m : mos_records) {
    auto c = by_condition.find(m.condition_id);
    if (c == by_condition.end())
      throw Error(ErrorCode::MissingCondition, "MOS record for unknown condition '" + m.condition_id + "'");
    auto md = by_meta.find(m.condition_id);
    if (md == by_meta.end())
      throw Error(ErrorCode::MissingMetadata, "no metadata for condition '" + m.condition_id + "'");
    const auto& cond = *c->second;
    const auto& profile = find_profile(profiles, cond.resolution, cond.bitrate_class);
    auto fv = make_feature_vector(cond, profile, *md->second);
    auto values = fv.values();
    DatasetRow row{m.condition_id, std::vector<double>(values.begin(), values.end()), m.mos, m.ci95_halfwidth};
    keyed.push_back({detail::canonical_key(cond), std::move(row)});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.row.condition_id < b.row.condition_id;
  });
  std::vector<DatasetRow> rows;
  rows.reserve(keyed.size());
  for (auto& k : keyed) rows.push_back(std::move(k.row));
  return Dataset(feature_names(), std::move(rows), std::move(provenance));
}

}  // namespace avqoe

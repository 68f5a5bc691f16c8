#pragma once

// Shared vocabulary: schema, instances, group/label cells, errors, randomness.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace farf {

// ---------------------------------------------------------------------------
// Errors

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a statistic is requested from an empty accumulator.
class UndefinedStatistic : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Groups and labels

enum class Group : std::uint8_t { kUnprotected = 0, kProtected = 1 };
enum class Label : std::uint8_t { kNegative = 0, kPositive = 1 };

inline constexpr int index(Group g) { return static_cast<int>(g); }
inline constexpr int index(Label l) { return static_cast<int>(l); }

std::string_view to_string(Group g);
std::string_view to_string(Label l);

/// Weighted counts of the four fairness cells.
/// u_* are the unprotected group, p_* the protected group.
struct GroupCounts {
  double u_pos = 0.0;
  double u_neg = 0.0;
  double p_pos = 0.0;
  double p_neg = 0.0;

  /// Adds `weight` to the cell of (group, outcome). Weight must be >= 0.
  void add(Group group, Label outcome, double weight);
  double& cell(Group group, Label outcome);
  double cell(Group group, Label outcome) const;

  double total() const { return u_pos + u_neg + p_pos + p_neg; }
  double positives() const { return u_pos + p_pos; }
  double negatives() const { return u_neg + p_neg; }

  GroupCounts& operator+=(const GroupCounts& o) {
    u_pos += o.u_pos;
    u_neg += o.u_neg;
    p_pos += o.p_pos;
    p_neg += o.p_neg;
    return *this;
  }
  friend GroupCounts operator+(GroupCounts a, const GroupCounts& b) { return a += b; }
  friend bool operator==(const GroupCounts&, const GroupCounts&) = default;
};

// ---------------------------------------------------------------------------
// Schema

enum class AttributeKind : std::uint8_t { kNominal, kNumeric };

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::kNumeric;
  std::vector<std::string> domain;  // nominal only, in encoding order

  bool nominal() const { return kind == AttributeKind::kNominal; }
};

/// Column layout of a discriminated stream.
///
/// `columns` lists every column of the source, including the class column.
/// Features are all columns except the class column, in source order; the
/// sensitive attribute is itself a feature.
class StreamSchema {
 public:
  StreamSchema() = default;

  /// Validates and indexes the layout. Throws SchemaError on violation.
  StreamSchema(std::vector<Attribute> columns, std::string sensitive_attribute,
               std::string sensitive_value, std::string class_attribute,
               std::string positive_label);

  const std::vector<Attribute>& columns() const { return columns_; }
  const std::string& sensitive_attribute() const { return sensitive_attribute_; }
  const std::string& sensitive_value() const { return sensitive_value_; }
  const std::string& class_attribute() const { return class_attribute_; }
  const std::string& positive_label() const { return positive_label_; }

  std::size_t feature_count() const { return features_.size(); }
  /// Feature i as an attribute description.
  const Attribute& feature(std::size_t i) const { return columns_[features_[i]]; }
  /// Position of the sensitive attribute among the features.
  std::size_t sensitive_feature() const { return sensitive_feature_; }
  std::size_t class_column() const { return class_column_; }
  std::size_t sensitive_column() const { return sensitive_column_; }
  /// Feature position of source column `column`, or nullopt for the class column.
  std::optional<std::size_t> feature_of_column(std::size_t column) const;
  std::optional<std::size_t> column_index(std::string_view name) const;

  /// Protected iff `raw` equals the sensitive value. Throws SchemaError when
  /// `raw` lies outside dom(S).
  Group group_of(std::string_view raw) const;
  /// Throws SchemaError when `raw` lies outside dom(C).
  Label label_of(std::string_view raw) const;

  /// Dictionary code of `raw` in nominal feature `feature`, nullopt if undeclared.
  std::optional<std::uint32_t> encode(std::size_t feature, std::string_view raw) const;
  const std::string& decode(std::size_t feature, std::uint32_t code) const;

 private:
  std::vector<Attribute> columns_;
  std::string sensitive_attribute_;
  std::string sensitive_value_;
  std::string class_attribute_;
  std::string positive_label_;

  std::vector<std::size_t> features_;
  std::vector<std::unordered_map<std::string, std::uint32_t>> codes_;  // per feature
  std::size_t sensitive_feature_ = 0;
  std::size_t sensitive_column_ = 0;
  std::size_t class_column_ = 0;
};

// ---------------------------------------------------------------------------
// Instances

/// Feature values: numeric as-is, nominal as dictionary code. NaN marks missing.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

struct Instance {
  std::vector<double> values;
  Group group = Group::kUnprotected;
  Label label = Label::kNegative;
  std::uint64_t t = 0;
};

/// Checks an instance against a schema: value count, nominal code ranges, and
/// agreement between `group` and the sensitive feature. Throws SchemaError.
void validate(const Instance& x, const StreamSchema& schema);

// ---------------------------------------------------------------------------
// Randomness

/// Seeded generator with a reproducible draw sequence.
///
/// Child sources for parallel consumers come from `derive`, which mixes the
/// root seed with a stream id through splitmix64.
class RandomSource {
 public:
  using Engine = std::mt19937_64;

  explicit RandomSource(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  Engine& engine() { return engine_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  int poisson(double lambda);

  RandomSource derive(std::uint64_t stream) const;

  /// Full engine state as text, for snapshots.
  std::string state() const;
  void restore(std::uint64_t seed, const std::string& state);

  friend bool operator==(const RandomSource& a, const RandomSource& b) {
    return a.seed_ == b.seed_ && a.engine_ == b.engine_;
  }

 private:
  std::uint64_t seed_;
  Engine engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace farf

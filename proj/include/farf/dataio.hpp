#pragma once

// Stream ingestion: CSV against a declared schema, synthetic drifting
// streams, and schema inference.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "farf/core.hpp"
#include "json.hpp"

namespace farf {

class LoadError : public std::runtime_error {
 public:
  LoadError(const std::string& what, std::size_t row = 0)
      : std::runtime_error(row > 0 ? what + " (row " + std::to_string(row) + ")" : what), row_(row) {}
  /// 1-based line number in the source file; 0 when not row-specific.
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

enum class OrderDirection : std::uint8_t { kAsIs, kAscending, kDescending };

/// Piecewise-stationary synthetic stream. Each segment draws features
/// x0..x{k-1} ~ U[0,1), nominal noise features n0.. over four values, and a
/// group with P(protected) = protected_fraction. The label is positive iff
/// x_c >= 1 - r_g, with c the segment's concept feature and r_g the group's
/// positive rate; an inverted segment uses x_c < r_g instead. Either way the
/// label is a deterministic function of the features and each group's
/// expected positive rate is r_g.
struct SynthSegment {
  std::size_t length = 0;
  std::size_t concept_feature = 0;
  bool inverted = false;
  double protected_fraction = 0.5;
  double positive_rate_unprotected = 0.5;
  double positive_rate_protected = 0.5;
};

struct SynthSpec {
  std::size_t numeric_features = 3;
  std::size_t nominal_features = 1;
  std::vector<SynthSegment> segments;
  std::uint64_t seed = 1;

  /// Throws ConfigError.
  void validate() const;
};

StreamSchema synth_schema(const SynthSpec& spec);
std::vector<Instance> synth_stream(const SynthSpec& spec);

struct DatasetConfig {
  enum class Format : std::uint8_t { kCsv, kSynthetic };

  Format format = Format::kCsv;
  std::filesystem::path path;
  bool header = true;
  std::string missing_token = "?";
  /// Undeclared nominal feature values are load errors; otherwise missing.
  bool strict = true;
  StreamSchema schema;
  std::optional<std::string> order_by;
  OrderDirection order_direction = OrderDirection::kAsIs;
  std::optional<SynthSpec> synthetic;

  /// Throws ConfigError.
  void validate() const;
};

struct RowError {
  std::size_t row = 0;
  std::string message;
};

struct LoadResult {
  std::vector<Instance> instances;
  std::vector<RowError> rejected;
  std::size_t rows_read = 0;
};

/// Reads the stream in file order, or stably sorted on `order_by`, and
/// assigns t = 0..N-1 after ordering. Rows whose class or sensitive value is
/// missing or undeclared are rejected and reported; structural problems throw
/// LoadError.
LoadResult load_stream(const DatasetConfig& config);

/// Single-pass pull iterator: each instance is surfaced exactly once.
class InstanceStream {
 public:
  explicit InstanceStream(std::vector<Instance> instances) : instances_(std::move(instances)) {}
  bool has_next() const { return pos_ < instances_.size(); }
  /// Throws std::out_of_range past the end.
  const Instance& next();
  std::size_t position() const { return pos_; }
  std::size_t size() const { return instances_.size(); }

 private:
  std::vector<Instance> instances_;
  std::size_t pos_ = 0;
};

/// Splits one CSV record, honouring double quotes and trimming unquoted
/// fields.
std::vector<std::string> split_csv_line(const std::string& line);
/// Locale-independent decimal parse of the whole string.
std::optional<double> parse_number(const std::string& s);

/// One pass over a CSV file: a column whose non-missing cells all parse as
/// numbers is numeric, otherwise nominal with its sorted distinct values.
StreamSchema infer_schema(const std::filesystem::path& csv, bool header, const std::string& missing_token,
                          const std::string& sensitive_attribute, const std::string& sensitive_value,
                          const std::string& class_attribute, const std::string& positive_label);

// JSON documents. Relative paths resolve against `base_dir`.
nlohmann::json schema_to_json(const StreamSchema& schema);
StreamSchema schema_from_json(const nlohmann::json& j);
nlohmann::json dataset_to_json(const DatasetConfig& config);
DatasetConfig dataset_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
/// Reads a dataset config file. Throws ConfigError.
DatasetConfig load_dataset_config(const std::filesystem::path& file);
nlohmann::json synth_to_json(const SynthSpec& spec);
SynthSpec synth_from_json(const nlohmann::json& j);

}  // namespace farf

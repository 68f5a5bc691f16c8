#pragma once

// Incremental Hoeffding tree split on fair information gain.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "farf/core.hpp"
#include "farf/metrics.hpp"

namespace farf {

struct SnapshotAccess;

struct SplitConfig {
  double delta = 1e-7;
  double tie_threshold = 0.05;
  /// Leaf weight accumulated between split attempts.
  double grace_period = 200.0;
  /// Candidate attributes per leaf; 0 means ceil(sqrt(n_features)).
  std::size_t subspace_size = 0;
  int numeric_bins = 32;
  double leaf_smoothing = 1.0;
  /// When false the fairness gain is forced to 0, so the split score is plain
  /// information gain.
  bool fairness_aware = true;

  /// Throws ConfigError.
  void validate(std::size_t n_features) const;
  std::size_t resolved_subspace(std::size_t n_features) const;
};

// ---------------------------------------------------------------------------
// Split scores. A partition is the (group x class) count table of one branch.

/// Shannon entropy in bits of a two-class distribution; 0*log(0) = 0.
double entropy(double pos, double neg);

/// Entropy of the union of `partitions` minus the weighted child entropies.
/// Returns 0 unless at least two partitions are non-empty.
double info_gain(std::span<const GroupCounts> partitions);

/// |Disc(D)| - sum_v |Disc(D_v)| with D the union of `partitions`.
/// Returns 0 unless at least two partitions are non-empty.
double fairness_gain(std::span<const GroupCounts> partitions);

/// Values of |fg| below this count as a zero fairness gain.
inline constexpr double kZeroFairnessGain = 1e-12;

/// ig when fg is zero, ig*fg otherwise.
double fig(double ig, double fg);

/// sqrt(range^2 * ln(1/delta) / (2n)). Throws ArgumentError for n <= 0.
double hoeffding_bound(double range, double delta, double n);

// ---------------------------------------------------------------------------
// Leaf statistics

/// Equal-width histogram of (group x class) counts for one numeric attribute.
///
/// Bin edges sit at anchor + e*width for integer e. When a value falls outside
/// the covered range the width doubles and pairs of bins merge, so counts stay
/// exact and old edges remain edges. Until two distinct values have been seen
/// the single value is held unbinned.
class NumericHistogram {
 public:
  explicit NumericHistogram(int bins = 32);

  /// Non-finite values are ignored.
  void add(double value, Group group, Label label, double weight);

  int bins() const { return bins_; }
  bool binned() const { return width_ > 0.0; }
  /// Upper edge of bin k-1, k in [1, bins); values below it go left.
  double threshold(int k) const { return edge(k); }
  const std::vector<GroupCounts>& cells() const { return cells_; }
  /// Bin of an in-range value; -1 when outside the covered range.
  int bin_of(double value) const;
  GroupCounts total() const;
  /// The single distinct value seen so far, while unbinned.
  std::optional<double> held_value() const { return binned() ? std::nullopt : first_; }

 private:
  friend struct SnapshotAccess;

  double edge(std::int64_t e) const { return anchor_ + static_cast<double>(start_ + e) * width_; }
  void grow_to(double value);

  int bins_;
  double anchor_ = 0.0;
  double width_ = 0.0;
  std::int64_t start_ = 0;
  std::vector<GroupCounts> cells_;
  std::optional<double> first_;
  GroupCounts pending_;
};

struct FeatureInfo {
  std::string name;
  bool nominal = false;
  std::uint32_t domain_size = 0;
};

using FeatureLayout = std::vector<FeatureInfo>;
FeatureLayout layout_of(const StreamSchema& schema);

/// A candidate test: nominal tests are multiway over the whole domain;
/// numeric tests send value < threshold to branch 0 and the rest to branch 1.
struct SplitSpec {
  std::size_t feature = 0;
  std::optional<double> threshold;
};

struct SplitCandidate {
  SplitSpec spec;
  double ig = 0.0;
  double fg = 0.0;
  double fig = 0.0;
  std::vector<GroupCounts> partitions;
};

/// Counts at one leaf: the overall (group x class) table plus a
/// (value or bin) x group x class table per candidate attribute.
class LeafStats {
 public:
  LeafStats() = default;
  LeafStats(const FeatureLayout& layout, std::vector<std::size_t> subset, int numeric_bins);

  /// Missing values skip their attribute table but still update `counts`.
  void add(const Instance& x, double weight);

  const GroupCounts& counts() const { return counts_; }
  double weight() const { return counts_.total(); }
  const std::vector<std::size_t>& subset() const { return subset_; }
  bool has_attribute(std::size_t feature) const;

  /// Branch tables of `spec`. Throws ArgumentError for attributes outside the
  /// subset and for numeric specs without a threshold.
  std::vector<GroupCounts> partitions(const SplitSpec& spec) const;
  /// Best candidate per attribute in the subset (numeric: best bin edge).
  std::vector<SplitCandidate> candidates(bool fairness_aware) const;

 private:
  friend struct SnapshotAccess;

  struct AttributeTable {
    std::size_t feature = 0;
    bool nominal = false;
    std::vector<GroupCounts> values;  // nominal
    NumericHistogram histogram;       // numeric
  };

  const AttributeTable& table(std::size_t feature) const;

  GroupCounts counts_;
  std::vector<std::size_t> subset_;
  std::vector<AttributeTable> tables_;
};

double info_gain(const LeafStats& leaf, const SplitSpec& spec);
double fairness_gain(const LeafStats& leaf, const SplitSpec& spec);

// ---------------------------------------------------------------------------
// Tree

struct Prediction {
  Label label = Label::kNegative;
  /// Indexed by index(Label).
  std::array<double, 2> scores{0.5, 0.5};
};

/// Laplace-smoothed class scores from a (group x class) table; ties go to
/// the negative class.
Prediction predict_from_counts(const GroupCounts& counts, double smoothing);

class FairTree {
 public:
  FairTree(std::shared_ptr<const FeatureLayout> layout, SplitConfig config, RandomSource rng);
  FairTree(const StreamSchema& schema, SplitConfig config, RandomSource rng);

  /// Weight 0 leaves the model unchanged. Throws ArgumentError for negative
  /// weight and SchemaError when the value count does not match the layout.
  void learn_one(const Instance& x, double weight);
  Prediction predict(const Instance& x) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const;
  std::size_t depth() const;
  double weight_seen() const { return weight_seen_; }
  std::size_t split_count() const { return splits_; }
  const SplitConfig& config() const { return config_; }
  const FeatureLayout& layout() const { return *layout_; }

  /// Indented node dump with counts, for inspection.
  std::string dump() const;

 private:
  friend struct SnapshotAccess;

  struct Leaf {
    LeafStats stats;
    GroupCounts prior;  // branch counts inherited at creation, used for prediction only
    std::vector<std::uint32_t> used_nominal;
    double weight_at_last_attempt = 0.0;
  };

  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::vector<std::int32_t> children;
    std::int32_t missing_child = 0;
    std::int32_t depth = 0;
    std::optional<Leaf> leaf;
  };

  std::int32_t route(const Instance& x) const;
  Leaf make_leaf(const GroupCounts& prior, std::vector<std::uint32_t> used_nominal);
  void try_split(std::int32_t node);
  void dump_node(std::string& out, std::int32_t node, int indent) const;

  std::shared_ptr<const FeatureLayout> layout_;
  SplitConfig config_;
  RandomSource rng_;
  std::vector<Node> nodes_;
  double weight_seen_ = 0.0;
  std::size_t splits_ = 0;
};

/// Ranks candidates and applies the Hoeffding test. Returns the winning
/// candidate, or nullopt when no split is admissible. Exposed for testing.
std::optional<SplitCandidate> choose_split(std::vector<SplitCandidate> candidates, double weight,
                                           const SplitConfig& config);

}  // namespace farf

#pragma once

// Fair and adaptive random forest: M fair trees trained on fairness-aware
// Poisson weights, each watched by drift detectors on accuracy and on the
// per-group positive-prediction rate, with standby trees promoted when they
// are fairer, and a fairness-weighted vote.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "farf/core.hpp"
#include "farf/drift.hpp"
#include "farf/fair_tree.hpp"
#include "farf/metrics.hpp"
#include "farf/sampling.hpp"

namespace farf {

struct SnapshotAccess;

/// Which member statistic drives replacement and vote weights.
enum class MemberCriterion : std::uint8_t { kFairness, kAccuracy };

struct EnsembleConfig {
  std::size_t ensemble_size = 10;
  SamplingPolicy sampling;
  SplitConfig split;
  double accuracy_delta = 0.002;
  double fairness_delta = 0.002;
  bool accuracy_detection = true;
  bool fairness_detection = true;
  /// Lower bound on a member's vote weight.
  double vote_floor = 0.01;
  MemberCriterion criterion = MemberCriterion::kFairness;
  /// What the discrimination driving the sampling weight is measured on:
  /// the ensemble's predictions or the stream's labels.
  DiscTracker::Basis sampling_basis = DiscTracker::Basis::kPredictions;
  /// Count an accuracy change as drift only when accuracy fell.
  bool accuracy_drops_only = true;

  /// Throws ConfigError.
  void validate(std::size_t n_features) const;
};

struct MemberEvent {
  enum class Kind : std::uint8_t { kDrift, kStandbyCreated, kReplaced };
  std::size_t member = 0;
  Kind kind = Kind::kDrift;
};

struct StepReport {
  /// Ensemble prediction for the instance, made before any training on it.
  Prediction prediction;
  /// Accumulated discrimination used for the sampling weight, this instance
  /// included.
  double current_disc = 0.0;
  /// Training weight each member (and its standby) received.
  std::vector<double> weights;
  std::vector<MemberEvent> events;

  std::size_t count(MemberEvent::Kind kind) const;
};

struct EnsembleMember {
  FairTree tree;
  std::optional<FairTree> standby;
  AdwinDetector accuracy_detector;
  AdwinDetector protected_rate_detector;
  AdwinDetector unprotected_rate_detector;
  /// This member's predictions since it was created or last replaced.
  DiscTracker member_disc;
  DiscTracker standby_disc;
  ConfusionTracker member_confusion;
  ConfusionTracker standby_confusion;
  RandomSource rng;

  /// Absolute discrimination, or error rate under the accuracy criterion.
  double member_score(MemberCriterion c) const;
  double standby_score(MemberCriterion c) const;
};

class FarfEnsemble {
 public:
  FarfEnsemble(std::shared_ptr<const FeatureLayout> layout, EnsembleConfig config, std::uint64_t seed);
  FarfEnsemble(const StreamSchema& schema, EnsembleConfig config, std::uint64_t seed);

  /// Weighted vote: argmax_c sum_m W_m [h_m(x) = c], ties to negative.
  Prediction predict(const Instance& x) const;

  /// One test-then-train step. Throws SchemaError when the value count does
  /// not match the layout.
  StepReport learn_one(const Instance& x);

  /// max(vote_floor, 1 - |member disc|), or max(vote_floor, accuracy) under
  /// the accuracy criterion.
  double vote_weight(std::size_t m) const;

  std::size_t size() const { return members_.size(); }
  const EnsembleMember& member(std::size_t m) const { return members_.at(m); }
  /// Mutable access for tests that stage member state.
  EnsembleMember& member(std::size_t m) { return members_.at(m); }
  const DiscTracker& global_disc() const { return global_disc_; }
  const EnsembleConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t steps() const { return steps_; }

  /// Versioned JSON snapshot of the full learner state, including generator
  /// states, so a restored learner continues bit-identically.
  void save(std::ostream& os) const;
  static FarfEnsemble load(std::istream& is);

 private:
  friend struct SnapshotAccess;

  FarfEnsemble() = default;
  EnsembleMember make_member(std::size_t m);
  FairTree make_tree(RandomSource& rng) const;

  std::shared_ptr<const FeatureLayout> layout_;
  EnsembleConfig config_;
  std::uint64_t seed_ = 0;
  std::vector<EnsembleMember> members_;
  DiscTracker global_disc_;
  std::uint64_t steps_ = 0;
};

}  // namespace farf

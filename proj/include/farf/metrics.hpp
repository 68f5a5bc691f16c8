#pragma once

// Accumulated statistical parity, prequential accuracy and kappa.

#include "farf/core.hpp"

namespace farf {

/// Positive-rate gap between the unprotected and the protected group,
///   u+/(u+ + u-) - p+/(p+ + p-),
/// in [-1, 1]. A group with no weight contributes a rate of 0.
double disc(const GroupCounts& counts);

/// Streaming accumulator of the four fairness cells.
class DiscTracker {
 public:
  /// What the outcome of an update represents. Only a tag; updates are
  /// identical for both.
  enum class Basis : std::uint8_t { kPredictions, kLabels };

  explicit DiscTracker(Basis basis = Basis::kPredictions) : basis_(basis) {}

  /// Adds `weight` to exactly one cell. Throws ArgumentError for weight < 0.
  void update(Group group, Label outcome, double weight = 1.0);
  double value() const { return disc(counts_); }
  const GroupCounts& counts() const { return counts_; }
  Basis basis() const { return basis_; }
  void reset() { counts_ = {}; }

  void set_counts(const GroupCounts& c) { counts_ = c; }

 private:
  Basis basis_;
  GroupCounts counts_;
};

/// Weighted binary confusion matrix with accuracy and Cohen's kappa.
struct ConfusionTracker {
  double tp = 0.0;
  double fp = 0.0;
  double tn = 0.0;
  double fn = 0.0;

  void update(Label truth, Label predicted, double weight = 1.0);
  void reset() { *this = {}; }

  double total() const { return tp + fp + tn + fn; }
  /// Throws UndefinedStatistic when empty.
  double accuracy() const;
  /// (p_o - p_e) / (1 - p_e); 0 when p_e == 1. Throws UndefinedStatistic when empty.
  double kappa() const;
};

double kappa(const ConfusionTracker& conf);

}  // namespace farf

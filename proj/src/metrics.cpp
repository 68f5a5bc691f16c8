#include "farf/metrics.hpp"

namespace farf {

namespace {

double rate(double pos, double neg) {
  const double n = pos + neg;
  return n > 0.0 ? pos / n : 0.0;
}

}  // namespace

double disc(const GroupCounts& c) { return rate(c.u_pos, c.u_neg) - rate(c.p_pos, c.p_neg); }

void DiscTracker::update(Group group, Label outcome, double weight) {
  if (!(weight >= 0.0)) throw ArgumentError("DiscTracker::update: weight must be >= 0");
  counts_.cell(group, outcome) += weight;
}

void ConfusionTracker::update(Label truth, Label predicted, double weight) {
  if (!(weight >= 0.0)) throw ArgumentError("ConfusionTracker::update: weight must be >= 0");
  if (truth == Label::kPositive) {
    (predicted == Label::kPositive ? tp : fn) += weight;
  } else {
    (predicted == Label::kPositive ? fp : tn) += weight;
  }
}

double ConfusionTracker::accuracy() const {
  const double n = total();
  if (!(n > 0.0)) throw UndefinedStatistic("accuracy of an empty confusion matrix");
  return (tp + tn) / n;
}

double ConfusionTracker::kappa() const {
  const double n = total();
  if (!(n > 0.0)) throw UndefinedStatistic("kappa of an empty confusion matrix");
  const double p_o = (tp + tn) / n;
  // Chance agreement from the row (truth) and column (prediction) marginals.
  const double p_e = ((tp + fn) * (tp + fp) + (tn + fp) * (tn + fn)) / (n * n);
  if (p_e >= 1.0) return 0.0;
  return (p_o - p_e) / (1.0 - p_e);
}

double kappa(const ConfusionTracker& conf) { return conf.kappa(); }

}  // namespace farf

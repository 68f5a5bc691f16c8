#include "farf/ensemble.hpp"

#include <algorithm>
#include <cmath>

namespace farf {

void EnsembleConfig::validate(std::size_t n_features) const {
  if (ensemble_size < 1) throw ConfigError("ensemble: size must be >= 1");
  sampling.validate();
  split.validate(n_features);
  if (!(accuracy_delta > 0.0 && accuracy_delta < 1.0)) throw ConfigError("ensemble: accuracy delta must lie in (0, 1)");
  if (!(fairness_delta > 0.0 && fairness_delta < 1.0)) throw ConfigError("ensemble: fairness delta must lie in (0, 1)");
  if (!(vote_floor > 0.0 && vote_floor <= 1.0)) throw ConfigError("ensemble: vote floor must lie in (0, 1]");
}

std::size_t StepReport::count(MemberEvent::Kind kind) const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [kind](const MemberEvent& e) { return e.kind == kind; }));
}

namespace {

double error_rate(const ConfusionTracker& c) { return c.total() > 0.0 ? 1.0 - c.accuracy() : 0.0; }

}  // namespace

double EnsembleMember::member_score(MemberCriterion c) const {
  return c == MemberCriterion::kFairness ? std::abs(member_disc.value()) : error_rate(member_confusion);
}

double EnsembleMember::standby_score(MemberCriterion c) const {
  return c == MemberCriterion::kFairness ? std::abs(standby_disc.value()) : error_rate(standby_confusion);
}

FarfEnsemble::FarfEnsemble(std::shared_ptr<const FeatureLayout> layout, EnsembleConfig config, std::uint64_t seed)
    : layout_(std::move(layout)), config_(config), seed_(seed) {
  if (!layout_ || layout_->empty()) throw ConfigError("ensemble: empty feature layout");
  config_.validate(layout_->size());
  global_disc_ = DiscTracker(config_.sampling_basis);
  members_.reserve(config_.ensemble_size);
  for (std::size_t m = 0; m < config_.ensemble_size; ++m) members_.push_back(make_member(m));
}

FarfEnsemble::FarfEnsemble(const StreamSchema& schema, EnsembleConfig config, std::uint64_t seed)
    : FarfEnsemble(std::make_shared<const FeatureLayout>(layout_of(schema)), config, seed) {}

FairTree FarfEnsemble::make_tree(RandomSource& rng) const {
  return FairTree(layout_, config_.split, RandomSource(rng.next_u64()));
}

EnsembleMember FarfEnsemble::make_member(std::size_t m) {
  RandomSource rng = RandomSource(seed_).derive(m);
  FairTree tree = make_tree(rng);
  return EnsembleMember{std::move(tree),
                        std::nullopt,
                        AdwinDetector(config_.accuracy_delta),
                        AdwinDetector(config_.fairness_delta),
                        AdwinDetector(config_.fairness_delta),
                        DiscTracker(),
                        DiscTracker(),
                        ConfusionTracker(),
                        ConfusionTracker(),
                        std::move(rng)};
}

double FarfEnsemble::vote_weight(std::size_t m) const {
  const EnsembleMember& mem = members_.at(m);
  double w = 0.0;
  if (config_.criterion == MemberCriterion::kFairness) {
    w = 1.0 - std::abs(mem.member_disc.value());
  } else {
    w = mem.member_confusion.total() > 0.0 ? mem.member_confusion.accuracy() : 1.0;
  }
  return std::max(config_.vote_floor, w);
}

Prediction FarfEnsemble::predict(const Instance& x) const {
  double pos = 0.0;
  double neg = 0.0;
  for (std::size_t m = 0; m < members_.size(); ++m) {
    const double w = vote_weight(m);
    (members_[m].tree.predict(x).label == Label::kPositive ? pos : neg) += w;
  }
  Prediction p;
  p.scores[index(Label::kPositive)] = pos / (pos + neg);
  p.scores[index(Label::kNegative)] = neg / (pos + neg);
  p.label = pos > neg ? Label::kPositive : Label::kNegative;
  return p;
}

StepReport FarfEnsemble::learn_one(const Instance& x) {
  if (x.values.size() != layout_->size())
    throw SchemaError("ensemble: instance has " + std::to_string(x.values.size()) + " values, expected " +
                      std::to_string(layout_->size()));
  StepReport report;

  // (a) Every prediction for x is made before anything trains on it.
  std::vector<Label> member_pred(members_.size());
  std::vector<std::optional<Label>> standby_pred(members_.size());
  for (std::size_t m = 0; m < members_.size(); ++m) {
    member_pred[m] = members_[m].tree.predict(x).label;
    if (members_[m].standby) standby_pred[m] = members_[m].standby->predict(x).label;
  }
  report.prediction = predict(x);
  global_disc_.update(x.group,
                      config_.sampling_basis == DiscTracker::Basis::kLabels ? x.label : report.prediction.label, 1.0);
  report.current_disc = global_disc_.value();

  report.weights.resize(members_.size());
  for (std::size_t m = 0; m < members_.size(); ++m) {
    EnsembleMember& mem = members_[m];

    // (b) Training weight from this member's Poisson draw.
    const double k = poisson_weight(config_.sampling, mem.rng);
    const double w = training_weight(config_.sampling, x, report.current_disc, k);
    report.weights[m] = w;

    // (c) Record the member's own prediction, then train.
    const Label pred = member_pred[m];
    mem.member_disc.update(x.group, pred, 1.0);
    mem.member_confusion.update(x.label, pred, 1.0);
    if (standby_pred[m]) {
      mem.standby_disc.update(x.group, *standby_pred[m], 1.0);
      mem.standby_confusion.update(x.label, *standby_pred[m], 1.0);
    }
    bool drift = false;
    if (config_.accuracy_detection) {
      AdwinDetector& acc = mem.accuracy_detector;
      const double before = acc.width() > 0 ? acc.mean() : 0.0;
      const bool changed = acc.add(pred == x.label ? 1.0 : 0.0);
      drift |= changed && (!config_.accuracy_drops_only || acc.mean() < before);
    }
    if (config_.fairness_detection) {
      const double positive = pred == Label::kPositive ? 1.0 : 0.0;
      AdwinDetector& rate = x.group == Group::kProtected ? mem.protected_rate_detector : mem.unprotected_rate_detector;
      drift |= rate.add(positive);
    }
    mem.tree.learn_one(x, w);

    // (d) Drift response.
    if (drift) {
      report.events.push_back({m, MemberEvent::Kind::kDrift});
      if (!mem.standby) {
        mem.standby = make_tree(mem.rng);
        mem.standby_disc.reset();
        mem.standby_confusion.reset();
        report.events.push_back({m, MemberEvent::Kind::kStandbyCreated});
      } else if (mem.member_score(config_.criterion) > mem.standby_score(config_.criterion)) {
        mem.tree = std::move(*mem.standby);
        mem.standby.reset();
        mem.accuracy_detector.reset();
        mem.protected_rate_detector.reset();
        mem.unprotected_rate_detector.reset();
        mem.member_disc.reset();
        mem.member_confusion.reset();
        mem.standby_disc.reset();
        mem.standby_confusion.reset();
        report.events.push_back({m, MemberEvent::Kind::kReplaced});
      }
    }

    // (e) Standbys train on the same weight.
    if (mem.standby) mem.standby->learn_one(x, w);
  }
  ++steps_;
  return report;
}

}  // namespace farf

#include "farf/fair_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace farf {

void SplitConfig::validate(std::size_t n_features) const {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("split: delta must lie in (0, 1)");
  if (!(tie_threshold >= 0.0)) throw ConfigError("split: tie threshold must be >= 0");
  if (!(grace_period >= 1.0)) throw ConfigError("split: grace period must be >= 1");
  if (numeric_bins < 2 || numeric_bins % 2 != 0) throw ConfigError("split: numeric bins must be even and >= 2");
  if (!(leaf_smoothing >= 0.0)) throw ConfigError("split: leaf smoothing must be >= 0");
  if (n_features > 0 && subspace_size > n_features)
    throw ConfigError("split: subspace size exceeds the number of features");
}

std::size_t SplitConfig::resolved_subspace(std::size_t n_features) const {
  if (subspace_size > 0) return std::min(subspace_size, n_features);
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_features))));
}

// ---------------------------------------------------------------------------

double entropy(double pos, double neg) {
  const double n = pos + neg;
  if (!(n > 0.0)) return 0.0;
  double h = 0.0;
  for (double c : {pos, neg}) {
    if (c > 0.0) {
      const double p = c / n;
      h -= p * std::log2(p);
    }
  }
  return h;
}

namespace {

int non_empty(std::span<const GroupCounts> parts) {
  int n = 0;
  for (const auto& p : parts) n += p.total() > 0.0 ? 1 : 0;
  return n;
}

GroupCounts sum(std::span<const GroupCounts> parts) {
  GroupCounts s;
  for (const auto& p : parts) s += p;
  return s;
}

}  // namespace

double info_gain(std::span<const GroupCounts> partitions) {
  if (non_empty(partitions) < 2) return 0.0;
  const GroupCounts parent = sum(partitions);
  const double n = parent.total();
  double children = 0.0;
  for (const auto& p : partitions) {
    const double w = p.total();
    if (w > 0.0) children += w / n * entropy(p.positives(), p.negatives());
  }
  return std::max(0.0, entropy(parent.positives(), parent.negatives()) - children);
}

// A branch holding one group has no rate gap to speak of.
static double partition_disc(const GroupCounts& c) {
  const bool both = c.u_pos + c.u_neg > 0.0 && c.p_pos + c.p_neg > 0.0;
  return both ? disc(c) : 0.0;
}

double fairness_gain(std::span<const GroupCounts> partitions) {
  if (non_empty(partitions) < 2) return 0.0;
  double children = 0.0;
  for (const auto& p : partitions) children += std::abs(partition_disc(p));
  return std::abs(partition_disc(sum(partitions))) - children;
}

double fig(double ig, double fg) { return std::abs(fg) < kZeroFairnessGain ? ig : ig * fg; }

double hoeffding_bound(double range, double delta, double n) {
  if (!(n > 0.0)) throw ArgumentError("hoeffding_bound: n must be > 0");
  return std::sqrt(range * range * std::log(1.0 / delta) / (2.0 * n));
}

// ---------------------------------------------------------------------------

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

}  // namespace

NumericHistogram::NumericHistogram(int bins) : bins_(bins) {
  if (bins_ < 2 || bins_ % 2 != 0) throw ConfigError("NumericHistogram: bins must be even and >= 2");
}

int NumericHistogram::bin_of(double value) const {
  if (!binned() || !(value >= edge(0) && value < edge(bins_))) return -1;
  const double raw = std::floor((value - anchor_) / width_) - static_cast<double>(start_);
  auto i = static_cast<std::int64_t>(std::clamp(raw, 0.0, static_cast<double>(bins_ - 1)));
  // Membership is decided by the edges themselves, not the division.
  while (i > 0 && value < edge(i)) --i;
  while (i < bins_ - 1 && value >= edge(i + 1)) ++i;
  return static_cast<int>(i);
}

void NumericHistogram::grow_to(double value) {
  while (!(value >= edge(0) && value < edge(bins_))) {
    std::int64_t new_start = 0;
    if (value < edge(0)) {
      new_start = ceil_div(start_ + bins_, 2) - bins_;
    } else {
      new_start = floor_div(start_, 2);
    }
    std::vector<GroupCounts> merged(static_cast<std::size_t>(bins_));
    for (std::int64_t i = 0; i < bins_; ++i) {
      const std::int64_t target = floor_div(start_ + i, 2) - new_start;
      merged[static_cast<std::size_t>(target)] += cells_[static_cast<std::size_t>(i)];
    }
    cells_ = std::move(merged);
    start_ = new_start;
    width_ *= 2.0;
  }
}

void NumericHistogram::add(double value, Group group, Label label, double weight) {
  if (!std::isfinite(value)) return;
  if (!binned()) {
    if (!first_ || *first_ == value) {
      first_ = value;
      pending_.add(group, label, weight);
      return;
    }
    const double lo = std::min(*first_, value);
    const double hi = std::max(*first_, value);
    anchor_ = lo;
    start_ = 0;
    width_ = std::max((hi - lo) / static_cast<double>(bins_ - 1), std::numeric_limits<double>::min());
    cells_.assign(static_cast<std::size_t>(bins_), GroupCounts{});
    grow_to(hi);
    cells_[static_cast<std::size_t>(bin_of(*first_))] += pending_;
    pending_ = {};
  }
  if (bin_of(value) < 0) grow_to(value);
  cells_[static_cast<std::size_t>(bin_of(value))].add(group, label, weight);
}

GroupCounts NumericHistogram::total() const {
  GroupCounts t = pending_;
  for (const auto& c : cells_) t += c;
  return t;
}

// ---------------------------------------------------------------------------

FeatureLayout layout_of(const StreamSchema& schema) {
  FeatureLayout out;
  for (std::size_t i = 0; i < schema.feature_count(); ++i) {
    const Attribute& a = schema.feature(i);
    out.push_back({a.name, a.nominal(), static_cast<std::uint32_t>(a.domain.size())});
  }
  return out;
}

LeafStats::LeafStats(const FeatureLayout& layout, std::vector<std::size_t> subset, int numeric_bins)
    : subset_(std::move(subset)) {
  std::sort(subset_.begin(), subset_.end());
  for (std::size_t f : subset_) {
    const FeatureInfo& info = layout.at(f);
    AttributeTable t{f, info.nominal, {}, NumericHistogram(numeric_bins)};
    if (info.nominal) t.values.assign(info.domain_size, GroupCounts{});
    tables_.push_back(std::move(t));
  }
}

void LeafStats::add(const Instance& x, double weight) {
  counts_.add(x.group, x.label, weight);
  for (auto& t : tables_) {
    const double v = x.values[t.feature];
    if (is_missing(v)) continue;
    if (t.nominal) {
      t.values.at(static_cast<std::size_t>(v)).add(x.group, x.label, weight);
    } else {
      t.histogram.add(v, x.group, x.label, weight);
    }
  }
}

bool LeafStats::has_attribute(std::size_t feature) const {
  return std::binary_search(subset_.begin(), subset_.end(), feature);
}

const LeafStats::AttributeTable& LeafStats::table(std::size_t feature) const {
  for (const auto& t : tables_) {
    if (t.feature == feature) return t;
  }
  throw ArgumentError("attribute " + std::to_string(feature) + " is not a candidate at this leaf");
}

std::vector<GroupCounts> LeafStats::partitions(const SplitSpec& spec) const {
  const AttributeTable& t = table(spec.feature);
  if (t.nominal) return t.values;
  if (!spec.threshold) throw ArgumentError("numeric split requires a threshold");
  std::vector<GroupCounts> parts(2);
  const auto& h = t.histogram;
  if (!h.binned()) {
    if (h.held_value()) parts[*h.held_value() < *spec.threshold ? 0 : 1] += h.total();
    return parts;
  }
  for (int k = 0; k < h.bins(); ++k) {
    // Bin k covers [edge(k), edge(k+1)); it lies left of the threshold iff its
    // upper edge does not exceed it.
    const double upper = k + 1 < h.bins() ? h.threshold(k + 1) : std::numeric_limits<double>::infinity();
    parts[upper <= *spec.threshold ? 0 : 1] += h.cells()[static_cast<std::size_t>(k)];
  }
  return parts;
}

std::vector<SplitCandidate> LeafStats::candidates(bool fairness_aware) const {
  std::vector<SplitCandidate> out;
  for (const auto& t : tables_) {
    if (t.nominal) {
      SplitCandidate c;
      c.spec = {t.feature, std::nullopt};
      c.partitions = t.values;
      c.ig = info_gain(c.partitions);
      c.fg = fairness_aware ? fairness_gain(c.partitions) : 0.0;
      c.fig = fig(c.ig, c.fg);
      out.push_back(std::move(c));
      continue;
    }
    const auto& h = t.histogram;
    if (!h.binned()) continue;
    // Sweep bin edges left to right with running sums.
    const GroupCounts all = h.total();
    GroupCounts left;
    std::optional<SplitCandidate> best;
    for (int k = 1; k < h.bins(); ++k) {
      left += h.cells()[static_cast<std::size_t>(k - 1)];
      GroupCounts right{all.u_pos - left.u_pos, all.u_neg - left.u_neg, all.p_pos - left.p_pos,
                        all.p_neg - left.p_neg};
      if (!(left.total() > 0.0) || !(right.total() > 0.0)) continue;
      const std::array<GroupCounts, 2> parts{left, right};
      const double ig = info_gain(parts);
      const double fg = fairness_aware ? fairness_gain(parts) : 0.0;
      const double score = fig(ig, fg);
      if (!best || score > best->fig) {
        best = SplitCandidate{{t.feature, h.threshold(k)}, ig, fg, score, {left, right}};
      }
    }
    if (best) out.push_back(std::move(*best));
  }
  return out;
}

double info_gain(const LeafStats& leaf, const SplitSpec& spec) { return info_gain(leaf.partitions(spec)); }

double fairness_gain(const LeafStats& leaf, const SplitSpec& spec) {
  return fairness_gain(leaf.partitions(spec));
}

// ---------------------------------------------------------------------------

Prediction predict_from_counts(const GroupCounts& counts, double smoothing) {
  const double pos = counts.positives() + smoothing;
  const double neg = counts.negatives() + smoothing;
  Prediction p;
  if (pos + neg > 0.0) {
    p.scores[index(Label::kPositive)] = pos / (pos + neg);
    p.scores[index(Label::kNegative)] = neg / (pos + neg);
  }
  p.label = p.scores[index(Label::kPositive)] > p.scores[index(Label::kNegative)] ? Label::kPositive
                                                                                  : Label::kNegative;
  return p;
}

std::optional<SplitCandidate> choose_split(std::vector<SplitCandidate> candidates, double weight,
                                           const SplitConfig& config) {
  if (candidates.empty() || !(weight > 0.0)) return std::nullopt;
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const SplitCandidate& a, const SplitCandidate& b) { return a.fig > b.fig; });
  const SplitCandidate& best = candidates.front();
  if (!(best.fig > 0.0)) return std::nullopt;
  // The null split (no split at all) scores 0.
  const double second = candidates.size() > 1 ? std::max(0.0, candidates[1].fig) : 0.0;
  const double eps = hoeffding_bound(1.0, config.delta, weight);
  if (best.fig - second > eps || eps < config.tie_threshold) return std::move(candidates.front());
  return std::nullopt;
}

FairTree::FairTree(std::shared_ptr<const FeatureLayout> layout, SplitConfig config, RandomSource rng)
    : layout_(std::move(layout)), config_(config), rng_(std::move(rng)) {
  if (!layout_ || layout_->empty()) throw ConfigError("FairTree: empty feature layout");
  config_.validate(layout_->size());
  Node root;
  root.leaf = make_leaf({}, {});
  nodes_.push_back(std::move(root));
}

FairTree::FairTree(const StreamSchema& schema, SplitConfig config, RandomSource rng)
    : FairTree(std::make_shared<const FeatureLayout>(layout_of(schema)), config, std::move(rng)) {}

FairTree::Leaf FairTree::make_leaf(const GroupCounts& prior, std::vector<std::uint32_t> used_nominal) {
  std::vector<std::size_t> pool;
  for (std::size_t f = 0; f < layout_->size(); ++f) {
    const bool used = std::find(used_nominal.begin(), used_nominal.end(), f) != used_nominal.end();
    if (!used) pool.push_back(f);
  }
  const std::size_t k = std::min(config_.resolved_subspace(layout_->size()), pool.size());
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng_.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  Leaf leaf{LeafStats(*layout_, std::move(pool), config_.numeric_bins), prior, std::move(used_nominal), 0.0};
  return leaf;
}

std::int32_t FairTree::route(const Instance& x) const {
  std::int32_t n = 0;
  while (nodes_[static_cast<std::size_t>(n)].feature >= 0) {
    const Node& node = nodes_[static_cast<std::size_t>(n)];
    const double v = x.values[static_cast<std::size_t>(node.feature)];
    std::size_t branch = 0;
    if (is_missing(v)) {
      branch = static_cast<std::size_t>(node.missing_child);
    } else if ((*layout_)[static_cast<std::size_t>(node.feature)].nominal) {
      branch = static_cast<std::size_t>(v);
    } else {
      branch = v < node.threshold ? 0 : 1;
    }
    n = node.children.at(branch);
  }
  return n;
}

void FairTree::learn_one(const Instance& x, double weight) {
  if (!(weight >= 0.0)) throw ArgumentError("FairTree::learn_one: weight must be >= 0");
  if (x.values.size() != layout_->size())
    throw SchemaError("FairTree::learn_one: instance has " + std::to_string(x.values.size()) +
                      " values, tree expects " + std::to_string(layout_->size()));
  if (weight == 0.0) return;
  const std::int32_t n = route(x);
  Leaf& leaf = *nodes_[static_cast<std::size_t>(n)].leaf;
  leaf.stats.add(x, weight);
  weight_seen_ += weight;
  if (leaf.stats.weight() - leaf.weight_at_last_attempt >= config_.grace_period) try_split(n);
}

void FairTree::try_split(std::int32_t n) {
  Leaf& leaf = *nodes_[static_cast<std::size_t>(n)].leaf;
  leaf.weight_at_last_attempt = leaf.stats.weight();
  auto winner = choose_split(leaf.stats.candidates(config_.fairness_aware), leaf.stats.weight(), config_);
  if (!winner) return;

  const auto feature = winner->spec.feature;
  const bool nominal = (*layout_)[feature].nominal;
  std::vector<std::uint32_t> used = leaf.used_nominal;
  if (nominal) used.push_back(static_cast<std::uint32_t>(feature));

  const std::int32_t depth = nodes_[static_cast<std::size_t>(n)].depth;
  std::vector<std::int32_t> children;
  std::int32_t missing_child = 0;
  double heaviest = -1.0;
  for (std::size_t b = 0; b < winner->partitions.size(); ++b) {
    const GroupCounts& part = winner->partitions[b];
    if (part.total() > heaviest) {
      heaviest = part.total();
      missing_child = static_cast<std::int32_t>(b);
    }
    Node child;
    child.depth = depth + 1;
    child.leaf = make_leaf(part, used);
    children.push_back(static_cast<std::int32_t>(nodes_.size()));
    nodes_.push_back(std::move(child));
  }

  Node& node = nodes_[static_cast<std::size_t>(n)];  // re-fetch: push_back may reallocate
  node.feature = static_cast<int>(feature);
  node.threshold = winner->spec.threshold.value_or(0.0);
  node.children = std::move(children);
  node.missing_child = missing_child;
  node.leaf.reset();
  ++splits_;
}

Prediction FairTree::predict(const Instance& x) const {
  const Leaf& leaf = *nodes_[static_cast<std::size_t>(route(x))].leaf;
  return predict_from_counts(leaf.prior + leaf.stats.counts(), config_.leaf_smoothing);
}

std::size_t FairTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) {
    return n.feature < 0;
  }));
}

std::size_t FairTree::depth() const {
  std::int32_t d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return static_cast<std::size_t>(d);
}

namespace {

std::string format_counts(const GroupCounts& c) {
  std::ostringstream os;
  os << "u+=" << c.u_pos << " u-=" << c.u_neg << " p+=" << c.p_pos << " p-=" << c.p_neg;
  return os.str();
}

}  // namespace

void FairTree::dump_node(std::string& out, std::int32_t n, int indent) const {
  const Node& node = nodes_[static_cast<std::size_t>(n)];
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (node.feature < 0) {
    const Leaf& leaf = *node.leaf;
    const GroupCounts all = leaf.prior + leaf.stats.counts();
    const Prediction p = predict_from_counts(all, config_.leaf_smoothing);
    out += pad + "leaf #" + std::to_string(n) + " [" + format_counts(all) + "] -> " +
           std::string(to_string(p.label)) + "\n";
    return;
  }
  const FeatureInfo& f = (*layout_)[static_cast<std::size_t>(node.feature)];
  for (std::size_t b = 0; b < node.children.size(); ++b) {
    std::ostringstream test;
    if (f.nominal) {
      test << f.name << " == #" << b;
    } else {
      test << f.name << (b == 0 ? " < " : " >= ") << node.threshold;
    }
    if (static_cast<std::int32_t>(b) == node.missing_child) test << " (missing)";
    out += pad + "if " + test.str() + "\n";
    dump_node(out, node.children[b], indent + 1);
  }
}

std::string FairTree::dump() const {
  std::string out;
  dump_node(out, 0, 0);
  return out;
}

}  // namespace farf

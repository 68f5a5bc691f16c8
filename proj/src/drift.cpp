#include "farf/drift.hpp"

#include <algorithm>
#include <cmath>

#include "farf/core.hpp"

namespace farf {

AdwinDetector::AdwinDetector(Options opts) : opts_(opts) {
  if (!(opts_.delta > 0.0 && opts_.delta < 1.0)) throw ConfigError("ADWIN: delta must lie in (0, 1)");
  if (opts_.max_buckets < 2) throw ConfigError("ADWIN: max_buckets must be >= 2");
  if (opts_.clock < 1) throw ConfigError("ADWIN: clock must be >= 1");
  if (opts_.min_sub_window < 1) throw ConfigError("ADWIN: min_sub_window must be >= 1");
}

void AdwinDetector::reset() {
  levels_.clear();
  width_ = 0;
  total_ = 0.0;
  m2_ = 0.0;
  ticks_ = 0;
}

double AdwinDetector::mean() const {
  if (width_ == 0) throw UndefinedStatistic("ADWIN: mean of an empty window");
  return total_ / static_cast<double>(width_);
}

std::size_t AdwinDetector::bucket_count() const {
  std::size_t n = 0;
  for (const auto& l : levels_) n += l.size();
  return n;
}

bool AdwinDetector::add(double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw ArgumentError("ADWIN: input must lie in [0, 1]");

  if (width_ > 0) {
    const double n = static_cast<double>(width_);
    const double d = value - total_ / n;
    m2_ += n / (n + 1.0) * d * d;
  }
  ++width_;
  total_ += value;
  if (levels_.empty()) levels_.emplace_back();
  levels_[0].push_front(Bucket{value, 0.0});
  compress();

  ++ticks_;
  if (ticks_ % static_cast<std::uint64_t>(opts_.clock) != 0) return false;
  const bool changed = detect();
  if (changed) ++detections_;
  return changed;
}

void AdwinDetector::compress() {
  for (std::size_t level = 0; level < levels_.size(); ++level) {
    auto& row = levels_[level];
    if (row.size() <= static_cast<std::size_t>(opts_.max_buckets)) break;
    // Merge the two oldest buckets of this level into one of the next level.
    const Bucket older = row.back();
    row.pop_back();
    const Bucket newer = row.back();
    row.pop_back();
    const double n = std::ldexp(1.0, static_cast<int>(level));
    const double d = older.sum / n - newer.sum / n;
    Bucket merged{older.sum + newer.sum, older.m2 + newer.m2 + n / 2.0 * d * d};
    if (level + 1 == levels_.size()) levels_.emplace_back();
    levels_[level + 1].push_front(merged);
  }
}

double AdwinDetector::cut_threshold(double n0, double n1) const {
  const double w = static_cast<double>(width_);
  const double delta_prime = opts_.delta / std::log2(w);
  const double log_term = std::log(2.0 / delta_prime);
  const double m = 1.0 / (1.0 / n0 + 1.0 / n1);
  return std::sqrt(2.0 / m * variance() * log_term) + 2.0 / (3.0 * m) * log_term;
}

bool AdwinDetector::detect() {
  const auto min_len = static_cast<std::uint64_t>(opts_.min_sub_window);
  bool changed = false;
  bool cut = true;
  while (cut && width_ >= 2 * min_len) {
    cut = false;
    std::uint64_t n0 = 0;
    double s0 = 0.0;
    std::uint64_t n1 = width_;
    double s1 = total_;
    // Oldest bucket is at the back of the highest level.
    for (std::size_t level = levels_.size(); level-- > 0 && !cut;) {
      const auto size = std::uint64_t{1} << level;
      const auto& row = levels_[level];
      for (auto it = row.rbegin(); it != row.rend(); ++it) {
        n0 += size;
        s0 += it->sum;
        n1 -= size;
        s1 -= it->sum;
        if (n1 < min_len) break;
        if (n0 < min_len) continue;
        const double diff = std::abs(s0 / static_cast<double>(n0) - s1 / static_cast<double>(n1));
        if (diff >= cut_threshold(static_cast<double>(n0), static_cast<double>(n1))) {
          cut = true;
          break;
        }
      }
      if (n1 < min_len) break;
    }
    if (cut) {
      drop_oldest();
      changed = true;
    }
  }
  return changed;
}

void AdwinDetector::drop_oldest() {
  while (!levels_.empty() && levels_.back().empty()) levels_.pop_back();
  if (levels_.empty()) return;
  const std::size_t level = levels_.size() - 1;
  const Bucket b = levels_[level].back();
  levels_[level].pop_back();
  const auto size = std::uint64_t{1} << level;
  const double nb = static_cast<double>(size);

  width_ -= size;
  total_ -= b.sum;
  if (width_ == 0) {
    total_ = 0.0;
    m2_ = 0.0;
  } else {
    const double nr = static_cast<double>(width_);
    const double d = total_ / nr - b.sum / nb;
    m2_ -= b.m2 + nb * nr / (nb + nr) * d * d;
    m2_ = std::max(m2_, 0.0);
  }
  while (!levels_.empty() && levels_.back().empty()) levels_.pop_back();
}

}  // namespace farf

#pragma once

// Change detection over bounded real-valued streams.

#include <cstdint>
#include <deque>
#include <vector>

namespace farf {

struct SnapshotAccess;

/// Interface for detectors fed one value in [0, 1] per step.
class ChangeDetector {
 public:
  virtual ~ChangeDetector() = default;
  /// Returns true when the insertion triggered a change.
  virtual bool add(double value) = 0;
  virtual double mean() const = 0;
  virtual std::uint64_t width() const = 0;
  virtual void reset() = 0;
};

/// ADWIN adaptive windowing over an exponential histogram.
///
/// Level i holds buckets of 2^i consecutive inputs, newest first, at most
/// `max_buckets` per level. Every `clock` insertions the window is scanned
/// from the oldest bucket; whenever some split into an older part W0 and a
/// newer part W1 has |mean(W0) - mean(W1)| >= eps_cut, the oldest bucket is
/// dropped and the scan restarts. With m = 1/(1/n0 + 1/n1), variance s2 of
/// the whole window and d' = delta / log2(width):
///
///   eps_cut = sqrt((2/m) * s2 * ln(2/d')) + 2/(3m) * ln(2/d')
class AdwinDetector final : public ChangeDetector {
 public:
  struct Options {
    double delta = 0.002;
    int max_buckets = 5;
    int clock = 32;
    /// Both sub-windows must hold at least this many inputs to be compared.
    int min_sub_window = 5;
  };

  AdwinDetector() : AdwinDetector(Options{}) {}
  explicit AdwinDetector(double delta) : AdwinDetector(Options{.delta = delta}) {}
  explicit AdwinDetector(Options opts);

  /// Throws ArgumentError for values outside [0, 1].
  bool add(double value) override;
  /// Throws UndefinedStatistic on an empty window.
  double mean() const override;
  std::uint64_t width() const override { return width_; }
  void reset() override;

  double total() const { return total_; }
  /// Population variance of the retained inputs.
  double variance() const { return width_ > 0 ? m2_ / static_cast<double>(width_) : 0.0; }
  std::uint64_t detections() const { return detections_; }
  const Options& options() const { return opts_; }
  std::size_t bucket_count() const;
  std::size_t levels() const { return levels_.size(); }

  /// Cut threshold for sub-windows of n0 and n1 inputs under the current
  /// window variance and width.
  double cut_threshold(double n0, double n1) const;

 private:
  friend struct SnapshotAccess;

  struct Bucket {
    double sum = 0.0;
    double m2 = 0.0;  // sum of squared deviations from the bucket mean
  };

  void compress();
  bool detect();
  void drop_oldest();

  Options opts_;
  std::vector<std::deque<Bucket>> levels_;
  std::uint64_t width_ = 0;
  double total_ = 0.0;
  double m2_ = 0.0;
  std::uint64_t ticks_ = 0;
  std::uint64_t detections_ = 0;
};

}  // namespace farf

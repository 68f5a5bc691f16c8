#pragma once

// Prequential (test-then-train) evaluation, alpha sweeps and sampling
// ablations.

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "farf/dataio.hpp"
#include "farf/ensemble.hpp"
#include "json.hpp"

namespace farf {

enum class LearnerKind : std::uint8_t {
  kFarf,           // fair ensemble
  kHoeffdingTree,  // single tree, information gain only, unit weights
  kPlainForest,    // ensemble with plain Poisson weights and no fairness detectors
};

std::string_view to_string(LearnerKind k);
/// Accepts farf|ht|rf. Throws ConfigError.
LearnerKind parse_learner(std::string_view s);

/// Anything that predicts before it learns.
class StreamLearner {
 public:
  virtual ~StreamLearner() = default;
  virtual Prediction predict(const Instance& x) const = 0;
  /// Trains on x; the returned report lists drift events.
  virtual StepReport learn(const Instance& x) = 0;
};

enum class EvalOrder : std::uint8_t { kTestThenTrain, kTrainThenTest };

struct RunConfig {
  LearnerKind learner = LearnerKind::kFarf;
  DatasetConfig dataset;
  std::uint64_t seed = 1;
  std::size_t window = 1000;
  /// When set the run uses the custom sampling weight with this alpha.
  std::optional<double> alpha;
  SamplingMode mode = SamplingMode::kFair;
  std::size_t ensemble_size = 10;
  SplitConfig split;
  double accuracy_delta = 0.002;
  double fairness_delta = 0.002;
  double vote_floor = 0.01;
  MemberCriterion criterion = MemberCriterion::kFairness;
  std::filesystem::path out;
  bool dump_predictions = false;
  EvalOrder order = EvalOrder::kTestThenTrain;

  /// Throws ConfigError.
  void validate() const;
  /// Ensemble settings implied by the learner kind, mode and alpha.
  EnsembleConfig ensemble_config() const;
};

nlohmann::json run_config_to_json(const RunConfig& c);
/// `dataset` may be an inline object or a path to a dataset config file.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

std::unique_ptr<StreamLearner> make_learner(const RunConfig& config, const StreamSchema& schema);

struct WindowRecord {
  std::uint64_t t_end = 0;  // instances processed so far
  double disc_pct = 0.0;    // cumulative
  double acc_pct = 0.0;
  double kappa_pct = 0.0;
  double window_disc_pct = 0.0;  // this window only
  double window_acc_pct = 0.0;
  double window_kappa_pct = 0.0;
  std::size_t drifts = 0;  // events inside this window
  std::size_t standbys_created = 0;
  std::size_t replacements = 0;
};

struct RunSummary {
  std::string learner;
  std::string mode;
  std::optional<double> alpha;
  std::uint64_t seed = 0;
  std::size_t instances = 0;
  std::size_t rejected_rows = 0;
  double disc_pct = 0.0;
  double acc_pct = 0.0;
  double kappa_pct = 0.0;
  std::size_t drifts = 0;
  std::size_t standbys_created = 0;
  std::size_t replacements = 0;
};

struct PredictionRecord {
  std::uint64_t t = 0;
  Group group = Group::kUnprotected;
  Label label = Label::kNegative;
  Label predicted = Label::kNegative;
};

struct PrequentialLog {
  std::vector<WindowRecord> windows;
  RunSummary summary;
  std::vector<PredictionRecord> predictions;  // only when dumping
};

/// Core loop: for each instance predict, score, then train (or the reverse
/// under kTrainThenTest, which exists to show the order matters).
PrequentialLog evaluate(StreamLearner& learner, std::span<const Instance> stream, std::size_t window,
                        bool keep_predictions, EvalOrder order = EvalOrder::kTestThenTrain);

/// Runs a config over an already loaded stream.
PrequentialLog run_on(const RunConfig& config, const StreamSchema& schema, std::span<const Instance> stream);
/// Loads the dataset and runs. Dataset errors propagate; learner errors are
/// rethrown with the stream position.
PrequentialLog run(const RunConfig& config);

/// One run per alpha, same seed, results in input order. Throws ConfigError
/// on an empty list.
std::vector<std::pair<double, RunSummary>> sweep_alpha(const RunConfig& config, std::span<const double> alphas,
                                                       std::span<const Instance> stream, unsigned jobs = 0);

struct AblationRow {
  std::string name;  // RF, FARFS-, FARFS-+, FARF
  RunSummary summary;
};

/// Plain forest, protected over-sampling, over+under sampling, and fair
/// under-sampling on one stream under one seed.
std::vector<AblationRow> ablate(const RunConfig& config, std::span<const Instance> stream, unsigned jobs = 0);

nlohmann::json summary_to_json(const RunSummary& s);
std::string windows_csv(const std::vector<WindowRecord>& windows);
std::string predictions_csv(const std::vector<PredictionRecord>& predictions);
/// Writes config.json, summary.json, windows.csv and (optionally)
/// predictions.csv under config.out.
void write_run_outputs(const RunConfig& config, const PrequentialLog& log);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace farf

#include "farf/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>
#include <thread>

namespace farf {

using nlohmann::json;

std::string_view to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::kFarf: return "farf";
    case LearnerKind::kHoeffdingTree: return "ht";
    case LearnerKind::kPlainForest: return "rf";
  }
  return "?";
}

LearnerKind parse_learner(std::string_view s) {
  for (auto k : {LearnerKind::kFarf, LearnerKind::kHoeffdingTree, LearnerKind::kPlainForest}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown learner '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Learners

namespace {

class HoeffdingTreeLearner final : public StreamLearner {
 public:
  HoeffdingTreeLearner(const StreamSchema& schema, SplitConfig split, std::uint64_t seed)
      : tree_(schema, disable_fairness(split), RandomSource(seed)) {}

  Prediction predict(const Instance& x) const override { return tree_.predict(x); }
  StepReport learn(const Instance& x) override {
    StepReport r;
    r.weights = {1.0};
    tree_.learn_one(x, 1.0);
    return r;
  }

 private:
  static SplitConfig disable_fairness(SplitConfig s) {
    s.fairness_aware = false;
    return s;
  }
  FairTree tree_;
};

class EnsembleLearner final : public StreamLearner {
 public:
  EnsembleLearner(const StreamSchema& schema, EnsembleConfig config, std::uint64_t seed)
      : ensemble_(schema, config, seed) {}

  Prediction predict(const Instance& x) const override { return ensemble_.predict(x); }
  StepReport learn(const Instance& x) override { return ensemble_.learn_one(x); }

 private:
  FarfEnsemble ensemble_;
};

}  // namespace

void RunConfig::validate() const {
  if (window < 1) throw ConfigError("run: window must be >= 1");
  if (alpha) {
    if (!(*alpha > 0.0)) throw ConfigError("run: alpha must be > 0");
    if (mode != SamplingMode::kCustom && mode != SamplingMode::kFair)
      throw ConfigError("run: alpha only applies to the custom sampling mode");
  } else if (mode == SamplingMode::kCustom && learner == LearnerKind::kFarf) {
    throw ConfigError("run: custom sampling mode needs an alpha");
  }
  dataset.validate();
  ensemble_config().validate(dataset.schema.feature_count());
}

EnsembleConfig RunConfig::ensemble_config() const {
  EnsembleConfig c;
  c.ensemble_size = ensemble_size;
  c.split = split;
  c.accuracy_delta = accuracy_delta;
  c.fairness_delta = fairness_delta;
  c.vote_floor = vote_floor;
  c.criterion = criterion;
  if (learner == LearnerKind::kPlainForest) {
    c.sampling.mode = SamplingMode::kPlain;
    c.fairness_detection = false;
    c.split.fairness_aware = false;
  } else if (alpha) {
    c.sampling.mode = SamplingMode::kCustom;
    c.sampling.alpha = *alpha;
  } else {
    c.sampling.mode = mode;
  }
  return c;
}

std::unique_ptr<StreamLearner> make_learner(const RunConfig& config, const StreamSchema& schema) {
  if (config.learner == LearnerKind::kHoeffdingTree)
    return std::make_unique<HoeffdingTreeLearner>(schema, config.split, config.seed);
  return std::make_unique<EnsembleLearner>(schema, config.ensemble_config(), config.seed);
}

// ---------------------------------------------------------------------------
// Config JSON

namespace {

std::string criterion_name(MemberCriterion c) { return c == MemberCriterion::kFairness ? "fairness" : "accuracy"; }

MemberCriterion parse_criterion(const std::string& s) {
  if (s == "fairness") return MemberCriterion::kFairness;
  if (s == "accuracy") return MemberCriterion::kAccuracy;
  throw ConfigError("unknown member criterion '" + s + "'");
}

}  // namespace

json run_config_to_json(const RunConfig& c) {
  json j{{"learner", std::string(to_string(c.learner))},
         {"dataset", dataset_to_json(c.dataset)},
         {"seed", c.seed},
         {"window", c.window},
         {"mode", std::string(to_string(c.mode))},
         {"m", c.ensemble_size},
         {"split",
          {{"delta", c.split.delta},
           {"tie", c.split.tie_threshold},
           {"grace", c.split.grace_period},
           {"bins", c.split.numeric_bins},
           {"subspace", c.split.subspace_size},
           {"smoothing", c.split.leaf_smoothing}}},
         {"accuracy_delta", c.accuracy_delta},
         {"fairness_delta", c.fairness_delta},
         {"vote_floor", c.vote_floor},
         {"criterion", criterion_name(c.criterion)},
         {"out", c.out.string()},
         {"dump_predictions", c.dump_predictions}};
  j["alpha"] = c.alpha ? json(*c.alpha) : json(nullptr);
  return j;
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    RunConfig c;
    c.learner = parse_learner(j.value("learner", std::string("farf")));
    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      if (d.is_string()) {
        std::filesystem::path p = d.get<std::string>();
        c.dataset = load_dataset_config(p.is_absolute() ? p : base_dir / p);
      } else {
        c.dataset = dataset_from_json(d, base_dir);
      }
    }
    c.seed = j.value("seed", c.seed);
    c.window = j.value("window", c.window);
    c.mode = parse_sampling_mode(j.value("mode", std::string("fair")));
    if (j.contains("alpha") && !j["alpha"].is_null()) c.alpha = j["alpha"].get<double>();
    c.ensemble_size = j.value("m", c.ensemble_size);
    if (j.contains("split")) {
      const auto& s = j["split"];
      c.split.delta = s.value("delta", c.split.delta);
      c.split.tie_threshold = s.value("tie", c.split.tie_threshold);
      c.split.grace_period = s.value("grace", c.split.grace_period);
      c.split.numeric_bins = s.value("bins", c.split.numeric_bins);
      c.split.subspace_size = s.value("subspace", c.split.subspace_size);
      c.split.leaf_smoothing = s.value("smoothing", c.split.leaf_smoothing);
    }
    c.accuracy_delta = j.value("accuracy_delta", c.accuracy_delta);
    c.fairness_delta = j.value("fairness_delta", c.fairness_delta);
    c.vote_floor = j.value("vote_floor", c.vote_floor);
    c.criterion = parse_criterion(j.value("criterion", std::string("fairness")));
    c.out = j.value("out", std::string());
    c.dump_predictions = j.value("dump_predictions", false);
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double pct(double v) { return 100.0 * v; }

double safe_acc(const ConfusionTracker& c) { return c.total() > 0.0 ? c.accuracy() : 0.0; }
double safe_kappa(const ConfusionTracker& c) { return c.total() > 0.0 ? c.kappa() : 0.0; }

}  // namespace

PrequentialLog evaluate(StreamLearner& learner, std::span<const Instance> stream, std::size_t window,
                        bool keep_predictions, EvalOrder order) {
  if (window < 1) throw ConfigError("evaluate: window must be >= 1");
  PrequentialLog log;
  DiscTracker disc;
  ConfusionTracker conf;
  DiscTracker win_disc;
  ConfusionTracker win_conf;
  WindowRecord pending;
  std::size_t in_window = 0;

  auto close_window = [&](std::uint64_t t_end) {
    pending.t_end = t_end;
    pending.disc_pct = pct(disc.value());
    pending.acc_pct = pct(safe_acc(conf));
    pending.kappa_pct = pct(safe_kappa(conf));
    pending.window_disc_pct = pct(win_disc.value());
    pending.window_acc_pct = pct(safe_acc(win_conf));
    pending.window_kappa_pct = pct(safe_kappa(win_conf));
    log.windows.push_back(pending);
    pending = {};
    win_disc.reset();
    win_conf.reset();
    in_window = 0;
  };

  for (std::size_t i = 0; i < stream.size(); ++i) {
    const Instance& x = stream[i];
    Prediction p;
    StepReport r;
    try {
      if (order == EvalOrder::kTestThenTrain) {
        p = learner.predict(x);
        r = learner.learn(x);
      } else {
        r = learner.learn(x);
        p = learner.predict(x);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("learner failed at stream position " + std::to_string(i) + ": " + e.what());
    }
    disc.update(x.group, p.label);
    conf.update(x.label, p.label);
    win_disc.update(x.group, p.label);
    win_conf.update(x.label, p.label);
    pending.drifts += r.count(MemberEvent::Kind::kDrift);
    pending.standbys_created += r.count(MemberEvent::Kind::kStandbyCreated);
    pending.replacements += r.count(MemberEvent::Kind::kReplaced);
    if (keep_predictions) log.predictions.push_back({x.t, x.group, x.label, p.label});
    if (++in_window == window) close_window(i + 1);
  }
  if (in_window > 0) close_window(stream.size());

  RunSummary& s = log.summary;
  s.instances = stream.size();
  s.disc_pct = pct(disc.value());
  s.acc_pct = pct(safe_acc(conf));
  s.kappa_pct = pct(safe_kappa(conf));
  for (const auto& w : log.windows) {
    s.drifts += w.drifts;
    s.standbys_created += w.standbys_created;
    s.replacements += w.replacements;
  }
  return log;
}

PrequentialLog run_on(const RunConfig& config, const StreamSchema& schema, std::span<const Instance> stream) {
  config.validate();
  auto learner = make_learner(config, schema);
  PrequentialLog log = evaluate(*learner, stream, config.window, config.dump_predictions, config.order);
  log.summary.learner = std::string(to_string(config.learner));
  log.summary.mode = config.learner == LearnerKind::kHoeffdingTree
                         ? "none"
                         : std::string(to_string(config.ensemble_config().sampling.mode));
  log.summary.alpha = config.learner == LearnerKind::kFarf ? config.alpha : std::nullopt;
  log.summary.seed = config.seed;
  return log;
}

PrequentialLog run(const RunConfig& config) {
  config.validate();
  LoadResult data = load_stream(config.dataset);
  PrequentialLog log = run_on(config, config.dataset.schema, data.instances);
  log.summary.rejected_rows = data.rejected.size();
  return log;
}

namespace {

template <class Fn>
auto parallel_map(std::size_t n, unsigned jobs, Fn fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<R> out(n);
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> workers;
  for (unsigned w = 0; w < std::min<std::size_t>(jobs, n); ++w) {
    workers.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next++; i < n; i = next++) out[i] = fn(i);
    }));
  }
  for (auto& f : workers) f.get();
  return out;
}

}  // namespace

std::vector<std::pair<double, RunSummary>> sweep_alpha(const RunConfig& config, std::span<const double> alphas,
                                                       std::span<const Instance> stream, unsigned jobs) {
  if (alphas.empty()) throw ConfigError("sweep: empty alpha list");
  auto summaries = parallel_map(alphas.size(), jobs, [&](std::size_t i) {
    RunConfig c = config;
    c.learner = LearnerKind::kFarf;
    c.mode = SamplingMode::kCustom;
    c.alpha = alphas[i];
    c.dump_predictions = false;
    return run_on(c, config.dataset.schema, stream).summary;
  });
  std::vector<std::pair<double, RunSummary>> out;
  for (std::size_t i = 0; i < alphas.size(); ++i) out.emplace_back(alphas[i], summaries[i]);
  return out;
}

std::vector<AblationRow> ablate(const RunConfig& config, std::span<const Instance> stream, unsigned jobs) {
  struct Variant {
    const char* name;
    LearnerKind learner;
    SamplingMode mode;
  };
  const Variant variants[] = {
      {"RF", LearnerKind::kPlainForest, SamplingMode::kPlain},
      {"FARFS-", LearnerKind::kFarf, SamplingMode::kOversampleProtected},
      {"FARFS-+", LearnerKind::kFarf, SamplingMode::kOverAndUnder},
      {"FARF", LearnerKind::kFarf, SamplingMode::kFair},
  };
  auto summaries = parallel_map(std::size(variants), jobs, [&](std::size_t i) {
    RunConfig c = config;
    c.learner = variants[i].learner;
    c.mode = variants[i].mode;
    c.alpha.reset();
    c.dump_predictions = false;
    return run_on(c, config.dataset.schema, stream).summary;
  });
  std::vector<AblationRow> rows;
  for (std::size_t i = 0; i < std::size(variants); ++i) rows.push_back({variants[i].name, summaries[i]});
  return rows;
}

// ---------------------------------------------------------------------------
// Output

json summary_to_json(const RunSummary& s) {
  json j{{"learner", s.learner},
         {"mode", s.mode},
         {"seed", s.seed},
         {"instances", s.instances},
         {"rejected_rows", s.rejected_rows},
         {"disc_pct", s.disc_pct},
         {"acc_pct", s.acc_pct},
         {"kappa_pct", s.kappa_pct},
         {"drifts", s.drifts},
         {"standbys_created", s.standbys_created},
         {"replacements", s.replacements}};
  j["alpha"] = s.alpha ? json(*s.alpha) : json(nullptr);
  return j;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string windows_csv(const std::vector<WindowRecord>& windows) {
  std::ostringstream os;
  os << "t_end,disc_pct,acc_pct,kappa_pct,window_disc_pct,window_acc_pct,window_kappa_pct,drifts,"
        "standbys_created,replacements\n";
  for (const auto& w : windows) {
    os << w.t_end << ',' << fmt(w.disc_pct) << ',' << fmt(w.acc_pct) << ',' << fmt(w.kappa_pct) << ','
       << fmt(w.window_disc_pct) << ',' << fmt(w.window_acc_pct) << ',' << fmt(w.window_kappa_pct) << ','
       << w.drifts << ',' << w.standbys_created << ',' << w.replacements << '\n';
  }
  return os.str();
}

std::string predictions_csv(const std::vector<PredictionRecord>& predictions) {
  std::ostringstream os;
  os << "t,group,label,predicted\n";
  for (const auto& p : predictions) {
    os << p.t << ',' << (p.group == Group::kProtected ? 1 : 0) << ',' << (p.label == Label::kPositive ? 1 : 0)
       << ',' << (p.predicted == Label::kPositive ? 1 : 0) << '\n';
  }
  return os.str();
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << content;
}

}  // namespace

void write_run_outputs(const RunConfig& config, const PrequentialLog& log) {
  std::filesystem::create_directories(config.out);
  write_file(config.out / "config.json", run_config_to_json(config).dump(2) + "\n");
  write_file(config.out / "summary.json", summary_to_json(log.summary).dump(2) + "\n");
  write_file(config.out / "windows.csv", windows_csv(log.windows));
  if (config.dump_predictions) write_file(config.out / "predictions.csv", predictions_csv(log.predictions));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("spearman: need two equal-length samples of size >= 2");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace farf

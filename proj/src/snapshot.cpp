// JSON snapshot of a FarfEnsemble. Doubles are written in shortest
// round-trip form, so a restored learner continues bit-identically.

#include <istream>
#include <ostream>

#include "farf/ensemble.hpp"
#include "json.hpp"

namespace farf {

using nlohmann::json;

namespace {

constexpr int kSnapshotVersion = 1;

json counts_json(const GroupCounts& c) { return json::array({c.u_pos, c.u_neg, c.p_pos, c.p_neg}); }

GroupCounts counts_from(const json& j) {
  return GroupCounts{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
}

json rng_json(const RandomSource& r) { return {{"seed", r.seed()}, {"state", r.state()}}; }

RandomSource rng_from(const json& j) {
  RandomSource r;
  r.restore(j.at("seed").get<std::uint64_t>(), j.at("state").get<std::string>());
  return r;
}

json confusion_json(const ConfusionTracker& c) { return json::array({c.tp, c.fp, c.tn, c.fn}); }

ConfusionTracker confusion_from(const json& j) {
  ConfusionTracker c;
  c.tp = j.at(0).get<double>();
  c.fp = j.at(1).get<double>();
  c.tn = j.at(2).get<double>();
  c.fn = j.at(3).get<double>();
  return c;
}

json split_json(const SplitConfig& s) {
  return {{"delta", s.delta},           {"tie", s.tie_threshold},       {"grace", s.grace_period},
          {"subspace", s.subspace_size}, {"bins", s.numeric_bins},       {"smoothing", s.leaf_smoothing},
          {"fairness_aware", s.fairness_aware}};
}

SplitConfig split_from(const json& j) {
  SplitConfig s;
  s.delta = j.at("delta").get<double>();
  s.tie_threshold = j.at("tie").get<double>();
  s.grace_period = j.at("grace").get<double>();
  s.subspace_size = j.at("subspace").get<std::size_t>();
  s.numeric_bins = j.at("bins").get<int>();
  s.leaf_smoothing = j.at("smoothing").get<double>();
  s.fairness_aware = j.at("fairness_aware").get<bool>();
  return s;
}

}  // namespace

struct SnapshotAccess {
  // -- ADWIN
  static json adwin(const AdwinDetector& d) {
    json levels = json::array();
    for (const auto& level : d.levels_) {
      json buckets = json::array();
      for (const auto& b : level) buckets.push_back(json::array({b.sum, b.m2}));
      levels.push_back(std::move(buckets));
    }
    return {{"delta", d.opts_.delta},
            {"max_buckets", d.opts_.max_buckets},
            {"clock", d.opts_.clock},
            {"min_sub_window", d.opts_.min_sub_window},
            {"levels", std::move(levels)},
            {"width", d.width_},
            {"total", d.total_},
            {"m2", d.m2_},
            {"ticks", d.ticks_},
            {"detections", d.detections_}};
  }

  static AdwinDetector adwin_from(const json& j) {
    AdwinDetector::Options o;
    o.delta = j.at("delta").get<double>();
    o.max_buckets = j.at("max_buckets").get<int>();
    o.clock = j.at("clock").get<int>();
    o.min_sub_window = j.at("min_sub_window").get<int>();
    AdwinDetector d(o);
    d.levels_.clear();
    for (const auto& level : j.at("levels")) {
      std::deque<AdwinDetector::Bucket> buckets;
      for (const auto& b : level) buckets.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
      d.levels_.push_back(std::move(buckets));
    }
    d.width_ = j.at("width").get<std::uint64_t>();
    d.total_ = j.at("total").get<double>();
    d.m2_ = j.at("m2").get<double>();
    d.ticks_ = j.at("ticks").get<std::uint64_t>();
    d.detections_ = j.at("detections").get<std::uint64_t>();
    return d;
  }

  // -- Leaf statistics
  static json histogram(const NumericHistogram& h) {
    json cells = json::array();
    for (const auto& c : h.cells_) cells.push_back(counts_json(c));
    json j{{"bins", h.bins_},   {"anchor", h.anchor_},  {"width", h.width_},
           {"start", h.start_}, {"cells", std::move(cells)}, {"pending", counts_json(h.pending_)}};
    j["first"] = h.first_ ? json(*h.first_) : json(nullptr);
    return j;
  }

  static NumericHistogram histogram_from(const json& j) {
    NumericHistogram h(j.at("bins").get<int>());
    h.anchor_ = j.at("anchor").get<double>();
    h.width_ = j.at("width").get<double>();
    h.start_ = j.at("start").get<std::int64_t>();
    for (const auto& c : j.at("cells")) h.cells_.push_back(counts_from(c));
    h.pending_ = counts_from(j.at("pending"));
    if (!j.at("first").is_null()) h.first_ = j.at("first").get<double>();
    return h;
  }

  static json leaf_stats(const LeafStats& s) {
    json tables = json::array();
    for (const auto& t : s.tables_) {
      json jt{{"feature", t.feature}, {"nominal", t.nominal}};
      if (t.nominal) {
        json values = json::array();
        for (const auto& c : t.values) values.push_back(counts_json(c));
        jt["values"] = std::move(values);
      } else {
        jt["histogram"] = histogram(t.histogram);
      }
      tables.push_back(std::move(jt));
    }
    return {{"counts", counts_json(s.counts_)}, {"subset", s.subset_}, {"tables", std::move(tables)}};
  }

  static LeafStats leaf_stats_from(const json& j, int bins) {
    LeafStats s;
    s.counts_ = counts_from(j.at("counts"));
    s.subset_ = j.at("subset").get<std::vector<std::size_t>>();
    for (const auto& jt : j.at("tables")) {
      LeafStats::AttributeTable t{jt.at("feature").get<std::size_t>(), jt.at("nominal").get<bool>(), {},
                                  NumericHistogram(bins)};
      if (t.nominal) {
        for (const auto& c : jt.at("values")) t.values.push_back(counts_from(c));
      } else {
        t.histogram = histogram_from(jt.at("histogram"));
      }
      s.tables_.push_back(std::move(t));
    }
    return s;
  }

  // -- Trees
  static json tree(const FairTree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes_) {
      json jn{{"feature", n.feature},
              {"threshold", n.threshold},
              {"children", n.children},
              {"missing_child", n.missing_child},
              {"depth", n.depth}};
      if (n.leaf) {
        jn["leaf"] = {{"stats", leaf_stats(n.leaf->stats)},
                      {"prior", counts_json(n.leaf->prior)},
                      {"used_nominal", n.leaf->used_nominal},
                      {"weight_at_last_attempt", n.leaf->weight_at_last_attempt}};
      }
      nodes.push_back(std::move(jn));
    }
    return {{"config", split_json(t.config_)},
            {"rng", rng_json(t.rng_)},
            {"weight_seen", t.weight_seen_},
            {"splits", t.splits_},
            {"nodes", std::move(nodes)}};
  }

  static FairTree tree_from(const json& j, const std::shared_ptr<const FeatureLayout>& layout) {
    FairTree t(layout, split_from(j.at("config")), RandomSource());
    t.rng_ = rng_from(j.at("rng"));  // the constructor draws the root subset
    t.weight_seen_ = j.at("weight_seen").get<double>();
    t.splits_ = j.at("splits").get<std::size_t>();
    t.nodes_.clear();
    for (const auto& jn : j.at("nodes")) {
      FairTree::Node n;
      n.feature = jn.at("feature").get<int>();
      n.threshold = jn.at("threshold").get<double>();
      n.children = jn.at("children").get<std::vector<std::int32_t>>();
      n.missing_child = jn.at("missing_child").get<std::int32_t>();
      n.depth = jn.at("depth").get<std::int32_t>();
      if (jn.contains("leaf")) {
        const auto& jl = jn.at("leaf");
        n.leaf = FairTree::Leaf{leaf_stats_from(jl.at("stats"), t.config_.numeric_bins), counts_from(jl.at("prior")),
                                jl.at("used_nominal").get<std::vector<std::uint32_t>>(),
                                jl.at("weight_at_last_attempt").get<double>()};
      }
      t.nodes_.push_back(std::move(n));
    }
    return t;
  }

  // -- Ensemble
  static json ensemble(const FarfEnsemble& e) {
    json layout = json::array();
    for (const auto& f : *e.layout_)
      layout.push_back({{"name", f.name}, {"nominal", f.nominal}, {"domain_size", f.domain_size}});
    const EnsembleConfig& c = e.config_;
    json config{{"ensemble_size", c.ensemble_size},
                {"sampling",
                 {{"mode", std::string(to_string(c.sampling.mode))},
                  {"lambda", c.sampling.lambda},
                  {"alpha", c.sampling.alpha}}},
                {"split", split_json(c.split)},
                {"accuracy_delta", c.accuracy_delta},
                {"fairness_delta", c.fairness_delta},
                {"accuracy_detection", c.accuracy_detection},
                {"fairness_detection", c.fairness_detection},
                {"vote_floor", c.vote_floor},
                {"criterion", c.criterion == MemberCriterion::kFairness ? "fairness" : "accuracy"},
                {"sampling_basis", c.sampling_basis == DiscTracker::Basis::kLabels ? "labels" : "predictions"},
                {"accuracy_drops_only", c.accuracy_drops_only}};
    json members = json::array();
    for (const auto& m : e.members_) {
      json jm{{"tree", tree(m.tree)},
              {"accuracy_detector", adwin(m.accuracy_detector)},
              {"protected_rate_detector", adwin(m.protected_rate_detector)},
              {"unprotected_rate_detector", adwin(m.unprotected_rate_detector)},
              {"member_disc", counts_json(m.member_disc.counts())},
              {"standby_disc", counts_json(m.standby_disc.counts())},
              {"member_confusion", confusion_json(m.member_confusion)},
              {"standby_confusion", confusion_json(m.standby_confusion)},
              {"rng", rng_json(m.rng)}};
      jm["standby"] = m.standby ? tree(*m.standby) : json(nullptr);
      members.push_back(std::move(jm));
    }
    return {{"format", "farf-ensemble"},
            {"version", kSnapshotVersion},
            {"layout", std::move(layout)},
            {"config", std::move(config)},
            {"seed", e.seed_},
            {"steps", e.steps_},
            {"global_disc", counts_json(e.global_disc_.counts())},
            {"members", std::move(members)}};
  }

  static FarfEnsemble ensemble_from(const json& j) {
    if (j.at("format").get<std::string>() != "farf-ensemble") throw ConfigError("snapshot: not an ensemble snapshot");
    if (j.at("version").get<int>() != kSnapshotVersion) throw ConfigError("snapshot: unsupported version");
    FeatureLayout layout;
    for (const auto& f : j.at("layout"))
      layout.push_back({f.at("name").get<std::string>(), f.at("nominal").get<bool>(),
                        f.at("domain_size").get<std::uint32_t>()});
    FarfEnsemble e;
    e.layout_ = std::make_shared<const FeatureLayout>(std::move(layout));
    const auto& jc = j.at("config");
    EnsembleConfig& c = e.config_;
    c.ensemble_size = jc.at("ensemble_size").get<std::size_t>();
    c.sampling.mode = parse_sampling_mode(jc.at("sampling").at("mode").get<std::string>());
    c.sampling.lambda = jc.at("sampling").at("lambda").get<double>();
    c.sampling.alpha = jc.at("sampling").at("alpha").get<double>();
    c.split = split_from(jc.at("split"));
    c.accuracy_delta = jc.at("accuracy_delta").get<double>();
    c.fairness_delta = jc.at("fairness_delta").get<double>();
    c.accuracy_detection = jc.at("accuracy_detection").get<bool>();
    c.fairness_detection = jc.at("fairness_detection").get<bool>();
    c.vote_floor = jc.at("vote_floor").get<double>();
    c.criterion = jc.at("criterion").get<std::string>() == "fairness" ? MemberCriterion::kFairness
                                                                      : MemberCriterion::kAccuracy;
    c.sampling_basis = jc.at("sampling_basis").get<std::string>() == "labels" ? DiscTracker::Basis::kLabels
                                                                              : DiscTracker::Basis::kPredictions;
    c.accuracy_drops_only = jc.at("accuracy_drops_only").get<bool>();
    c.validate(e.layout_->size());
    e.seed_ = j.at("seed").get<std::uint64_t>();
    e.steps_ = j.at("steps").get<std::uint64_t>();
    e.global_disc_ = DiscTracker(c.sampling_basis);
    e.global_disc_.set_counts(counts_from(j.at("global_disc")));
    for (const auto& jm : j.at("members")) {
      EnsembleMember m{tree_from(jm.at("tree"), e.layout_),
                       std::nullopt,
                       adwin_from(jm.at("accuracy_detector")),
                       adwin_from(jm.at("protected_rate_detector")),
                       adwin_from(jm.at("unprotected_rate_detector")),
                       DiscTracker(),
                       DiscTracker(),
                       confusion_from(jm.at("member_confusion")),
                       confusion_from(jm.at("standby_confusion")),
                       rng_from(jm.at("rng"))};
      if (!jm.at("standby").is_null()) m.standby = tree_from(jm.at("standby"), e.layout_);
      m.member_disc.set_counts(counts_from(jm.at("member_disc")));
      m.standby_disc.set_counts(counts_from(jm.at("standby_disc")));
      e.members_.push_back(std::move(m));
    }
    if (e.members_.size() != c.ensemble_size) throw ConfigError("snapshot: member count does not match config");
    return e;
  }
};

void FarfEnsemble::save(std::ostream& os) const { os << SnapshotAccess::ensemble(*this).dump() << '\n'; }

FarfEnsemble FarfEnsemble::load(std::istream& is) {
  try {
    return SnapshotAccess::ensemble_from(json::parse(is));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("snapshot: ") + e.what());
  }
}

}  // namespace farf

// End-to-end acceptance checks. Prints one [PASS]/[FAIL] line per criterion
// and exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "farf/dataio.hpp"
#include "farf/drift.hpp"
#include "farf/evalharness.hpp"
#include "farf/fair_tree.hpp"
#include "farf/metrics.hpp"
#include "farf/sampling.hpp"
#include "oracles.hpp"

using namespace farf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome metric_oracles() {
  RandomSource rng(101);
  double worst_disc = 0.0;
  for (int seq = 0; seq < 1000; ++seq) {
    DiscTracker d;
    oracle::Cells cells;
    const auto n = 1 + rng.below(500);
    for (std::uint64_t i = 0; i < n; ++i) {
      Instance x;
      x.group = rng.below(2) ? Group::kProtected : Group::kUnprotected;
      x.label = rng.below(2) ? Label::kPositive : Label::kNegative;
      const double w = rng.below(4) == 0 ? 1.0 : rng.uniform() * 10.0;
      d.update(x.group, x.label, w);
      oracle::add(cells, x, w);
      worst_disc = std::max(worst_disc, std::abs(d.value() - static_cast<double>(oracle::disc(cells))));
    }
  }
  double worst_kappa = 0.0;
  for (int mat = 0; mat < 1000; ++mat) {
    ConfusionTracker c;
    long double cell[4];
    for (int k = 0; k < 4; ++k) cell[k] = rng.below(5) == 0 ? 0.0L : static_cast<long double>(rng.below(1000));
    if (cell[0] + cell[1] + cell[2] + cell[3] == 0) cell[0] = 1;
    const long double tp = cell[0], fp = cell[1], tn = cell[2], fn = cell[3];
    c.update(Label::kPositive, Label::kPositive, static_cast<double>(tp));
    c.update(Label::kNegative, Label::kPositive, static_cast<double>(fp));
    c.update(Label::kNegative, Label::kNegative, static_cast<double>(tn));
    c.update(Label::kPositive, Label::kNegative, static_cast<double>(fn));
    const long double n = tp + fp + tn + fn;
    const long double po = (tp + tn) / n;
    const long double pe = ((tp + fp) * (tp + fn) + (tn + fn) * (tn + fp)) / (n * n);
    const long double expect = pe == 1 ? 0 : (po - pe) / (1 - pe);
    worst_kappa = std::max(worst_kappa, std::abs(c.kappa() - static_cast<double>(expect)));
  }
  return {worst_disc <= 1e-12 && worst_kappa <= 1e-12,
          fmt("max |disc err| %.2e, max |kappa err| %.2e", worst_disc, worst_kappa)};
}

// ---------------------------------------------------------------------------

Outcome split_oracles() {
  const FeatureLayout layout{{"a", true, 2}, {"b", true, 3}, {"z", false, 0}, {"w", false, 0}};
  RandomSource rng(202);
  double worst = 0.0;
  std::size_t fig_ig_violations = 0;
  std::size_t candidates = 0;
  for (int rep = 0; rep < 100; ++rep) {
    LeafStats leaf(layout, {0, 1, 2, 3}, 32);
    std::vector<Instance> data;
    const auto n = 2 + rng.below(1999);
    const double bias = rng.uniform();
    const double protected_share = rng.uniform();
    for (std::uint64_t i = 0; i < n; ++i) {
      Instance x;
      x.values = {static_cast<double>(rng.below(2)), static_cast<double>(rng.below(3)), rng.uniform() * 100 - 50,
                  std::floor(rng.uniform() * 8)};
      if (rng.below(25) == 0) x.values[rng.below(4)] = kMissing;
      x.group = rng.uniform() < protected_share ? Group::kProtected : Group::kUnprotected;
      const double p = 0.1 + 0.4 * (x.values[0] == 1.0) + 0.2 * (x.values[1] == 2.0) +
                       (x.group == Group::kUnprotected ? 0.3 * bias : 0.0);
      x.label = rng.uniform() < p ? Label::kPositive : Label::kNegative;
      const double w = rng.below(3) == 0 ? 1.0 + rng.below(6) : 1.0;
      leaf.add(x, w);
      for (int k = 0; k < static_cast<int>(w); ++k) data.push_back(x);
    }
    auto batch = [&](std::size_t f, std::optional<double> thr) {
      const std::size_t nb = thr ? 2 : layout[f].domain_size;
      std::vector<oracle::Cells> parts(nb);
      for (const auto& x : data) {
        const double v = x.values[f];
        if (is_missing(v)) continue;
        oracle::add(parts[thr ? (v < *thr ? 0 : 1) : static_cast<std::size_t>(v)], x);
      }
      return oracle::score(parts);
    };
    for (const auto& c : leaf.candidates(true)) {
      ++candidates;
      const auto o = batch(c.spec.feature, c.spec.threshold);
      worst = std::max({worst, std::abs(c.ig - static_cast<double>(o.ig)), std::abs(c.fg - static_cast<double>(o.fg)),
                        std::abs(c.fig - static_cast<double>(o.fig))});
      if (std::abs(c.fg) < kZeroFairnessGain && c.fig != c.ig) ++fig_ig_violations;
    }
  }
  return {worst <= 1e-9 && fig_ig_violations == 0,
          fmt("%zu candidates, max abs err %.2e, FIG!=IG at |FG|<1e-12: %zu", candidates, worst, fig_ig_violations)};
}

// ---------------------------------------------------------------------------

Outcome sampling_statistics() {
  RandomSource rng(303);
  const SamplingPolicy policy;
  double sum = 0.0;
  int zeros = 0;
  constexpr int kDraws = 1'000'000;
  for (int i = 0; i < kDraws; ++i) {
    const int k = poisson_weight(policy, rng);
    sum += k;
    zeros += k == 0;
  }
  const double mean = sum / kDraws;
  const double p0 = static_cast<double>(zeros) / kDraws;
  int grid_errors = 0;
  for (Group g : {Group::kUnprotected, Group::kProtected})
    for (Label l : {Label::kNegative, Label::kPositive})
      for (double d : {-0.5, 0.0, 0.01, 0.2, 1.0})
        for (int k = 0; k <= 12; ++k) {
          Instance x;
          x.group = g;
          x.label = l;
          const double expect = g == Group::kUnprotected && l == Label::kPositive && d > 0 ? d * k : k;
          if (fair_weight(x, d, k) != expect) ++grid_errors;
        }
  const bool pass = mean >= 5.97 && mean <= 6.03 && std::abs(p0 - std::exp(-6.0)) <= 0.0005 && grid_errors == 0;
  return {pass, fmt("mean %.4f, P(K=0) %.5f vs %.5f, grid mismatches %d", mean, p0, std::exp(-6.0), grid_errors)};
}

// ---------------------------------------------------------------------------

Outcome adwin_behaviour() {
  int detected = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    RandomSource rng(seed);
    AdwinDetector d(0.002);
    for (int t = 0; t < 620; ++t) {
      const bool change = d.add(rng.uniform() < (t < 500 ? 0.2 : 0.8) ? 1.0 : 0.0);
      if (change && t >= 500) {
        ++detected;
        break;
      }
    }
  }
  std::size_t alarms = 0;
  constexpr std::size_t kLen = 100'000;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RandomSource rng(1000 + seed);
    AdwinDetector d(0.002);
    for (std::size_t t = 0; t < kLen; ++t) alarms += d.add(rng.uniform() < 0.5 ? 1.0 : 0.0);
  }
  const double fpr = static_cast<double>(alarms) / (20.0 * kLen);
  return {detected >= 99 && fpr < 1e-4, fmt("detected within 120: %d/100, false-positive rate %.2e", detected, fpr)};
}

// ---------------------------------------------------------------------------

Outcome tree_sanity() {
  // Single tree, so every split considers every feature.
  SynthSpec spec;
  spec.segments = {{10000, 0, false, 0.5, 0.5, 0.5}};
  double worst = 100.0;
  double worst_last = 100.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    spec.seed = seed;
    const auto schema = synth_schema(spec);
    SplitConfig cfg;
    cfg.subspace_size = schema.feature_count();
    FairTree tree(schema, cfg, RandomSource(seed));
    std::size_t correct = 0;
    std::size_t correct_last = 0;
    for (const auto& x : synth_stream(spec)) {
      const bool ok = tree.predict(x).label == x.label;
      correct += ok;
      if (x.t >= 9000) correct_last += ok;
      tree.learn_one(x, 1.0);
    }
    worst = std::min(worst, correct / 100.0);
    worst_last = std::min(worst_last, correct_last / 10.0);
  }
  return {worst >= 90.0,
          fmt("lowest cumulative prequential accuracy over 5 seeds: %.2f%% (last 1000 instances: %.1f%%)", worst,
              worst_last)};
}

// ---------------------------------------------------------------------------

Outcome drift_adaptation() {
  int recovered = 0;
  int standby = 0;
  int both = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    RunConfig rc;
    rc.dataset.format = DatasetConfig::Format::kSynthetic;
    SynthSpec spec;
    spec.segments = {{5000, 0, false, 0.5, 0.5, 0.5}, {5000, 0, true, 0.5, 0.5, 0.5}};
    spec.seed = seed;
    rc.dataset.synthetic = spec;
    rc.dataset.schema = synth_schema(spec);
    rc.seed = seed;
    rc.window = 500;
    const auto log = run(rc);
    const double pre = log.windows[9].window_acc_pct;  // [4500, 5000)
    bool rec = false;
    for (std::size_t w = 10; w < 16; ++w) rec |= log.windows[w].window_acc_pct >= pre - 5.0;  // up to t = 8000
    const bool stb = log.windows[10].standbys_created > 0;                                    // [5000, 5500)
    recovered += rec;
    standby += stb;
    both += rec && stb;
  }
  return {both >= 95,
          fmt("recovered within 3000: %d/100, standby in first post-flip window: %d/100, both: %d/100", recovered,
              standby, both)};
}

// ---------------------------------------------------------------------------

struct Adult {
  bool ok = false;
  std::string why;
  RunConfig base;
  std::vector<Instance> stream;
};

Adult load_adult() {
  Adult a;
  const std::filesystem::path cfg = std::filesystem::path(FARF_CONFIG_DIR) / "adult.json";
  try {
    a.base.dataset = load_dataset_config(cfg);
    if (!std::filesystem::exists(a.base.dataset.path)) {
      a.why = "Adult CSV not found at " + a.base.dataset.path.string() + " (run tools/fetch_adult.py)";
      return a;
    }
    a.stream = load_stream(a.base.dataset).instances;
    a.ok = true;
  } catch (const std::exception& e) {
    a.why = e.what();
  }
  return a;
}

Outcome table2_direction(const Adult& adult) {
  if (!adult.ok) return {false, adult.why};
  double rf_d = 0, rf_a = 0, ou_d = 0, farf_d = 0, farf_a = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig c = adult.base;
    c.seed = seed;
    for (const auto& row : ablate(c, adult.stream, 0)) {
      if (row.name == "RF") rf_d += row.summary.disc_pct / 5, rf_a += row.summary.acc_pct / 5;
      if (row.name == "FARFS-+") ou_d += row.summary.disc_pct / 5;
      if (row.name == "FARF") farf_d += row.summary.disc_pct / 5, farf_a += row.summary.acc_pct / 5;
    }
  }
  const bool d1 = farf_d < ou_d;
  const bool d2 = farf_d <= 0.75 * rf_d;
  const bool acc = std::abs(farf_a - rf_a) <= 2.0;
  return {d1 && d2 && acc,
          fmt("Disc%% FARF %.2f vs FARFS-+ %.2f [%s], vs 0.75*RF %.2f [%s]; Acc%% FARF %.2f vs RF %.2f, gap %.2f [%s]",
              farf_d, ou_d, d1 ? "ok" : "no", 0.75 * rf_d, d2 ? "ok" : "no", farf_a, rf_a, std::abs(farf_a - rf_a),
              acc ? "ok" : "no")};
}

Outcome alpha_trend(const Adult& adult) {
  if (!adult.ok) return {false, adult.why};
  const std::vector<double> alphas{0.3, 0.6, 0.9, 1.2, 1.5};
  std::vector<double> disc(alphas.size(), 0.0), acc(alphas.size(), 0.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig c = adult.base;
    c.seed = seed;
    const auto rows = sweep_alpha(c, alphas, adult.stream, 0);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      disc[i] += rows[i].second.disc_pct / 5;
      acc[i] += rows[i].second.acc_pct / 5;
    }
  }
  const double rd = spearman(alphas, disc);
  const double ra = spearman(alphas, acc);
  std::string series;
  for (std::size_t i = 0; i < alphas.size(); ++i) series += fmt(" %.1f:%.2f/%.2f", alphas[i], disc[i], acc[i]);
  return {rd >= 0.8 && ra >= 0.6, fmt("rho(alpha, Disc) %.2f, rho(alpha, Acc) %.2f; alpha:disc/acc", rd, ra) + series};
}

Outcome reproducibility(const Adult& adult) {
  if (!adult.ok) return {false, adult.why};
  RunConfig c = adult.base;
  c.seed = 42;
  const auto a = run_on(c, c.dataset.schema, adult.stream);
  const auto b = run_on(c, c.dataset.schema, adult.stream);
  const std::string sa = summary_to_json(a.summary).dump(2) + windows_csv(a.windows);
  const std::string sb = summary_to_json(b.summary).dump(2) + windows_csv(b.windows);
  return {sa == sb, fmt("%zu bytes of summary and window log compared", sa.size())};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> fn;
  };
  Adult adult;
  bool adult_loaded = false;
  auto with_adult = [&](Outcome (*f)(const Adult&)) {
    return [&, f] {
      if (!adult_loaded) {
        adult = load_adult();
        adult_loaded = true;
      }
      return f(adult);
    };
  };
  const std::vector<Criterion> criteria{
      {1, "metric oracles", 10, metric_oracles},
      {2, "split-criterion oracles", 30, split_oracles},
      {3, "sampling statistics", 10, sampling_statistics},
      {4, "drift detector behaviour", 60, adwin_behaviour},
      {5, "tree sanity", 10, tree_sanity},
      {6, "drift adaptation", 120, drift_adaptation},
      {7, "sampling-strategy comparison on Adult", 600, with_adult(table2_direction)},
      {8, "alpha trend on Adult", 1800, with_adult(alpha_trend)},
      {9, "reproducibility", 600, with_adult(reproducibility)},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("[%s] criterion %d (%s): %s; %.1fs of %.0fs%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : " (over budget)");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

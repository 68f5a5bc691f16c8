#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>

#include "doctest.h"
#include "farf/dataio.hpp"
#include "farf/metrics.hpp"
#include "helpers.hpp"

using namespace farf;
using namespace farf::test;
using doctest::Approx;

namespace {

const std::filesystem::path kData = FARF_TEST_DATA;

StreamSchema census_toy() {
  return StreamSchema({{"age", AttributeKind::kNumeric, {}},
                       {"race", AttributeKind::kNominal, {"White", "Black", "Asian-Pac-Islander", "Other"}},
                       {"sex", AttributeKind::kNominal, {"Male", "Female"}},
                       {"income", AttributeKind::kNominal, {"<=50K", ">50K"}}},
                      "sex", "Female", "income", ">50K");
}

DatasetConfig csv_config(const std::string& file) {
  DatasetConfig c;
  c.path = kData / file;
  c.schema = census_toy();
  return c;
}

double label_disc(std::span<const Instance> xs) {
  DiscTracker d(DiscTracker::Basis::kLabels);
  for (const auto& x : xs) d.update(x.group, x.label);
  return d.value();
}

}  // namespace

TEST_CASE("3-row toy CSV loads with the expected encodings") {
  const auto r = load_stream(csv_config("toy.csv"));
  CHECK(r.rows_read == 3);
  CHECK(r.rejected.empty());
  REQUIRE(r.instances.size() == 3);
  const auto& a = r.instances[0];
  CHECK(a.values == std::vector<double>{39, 0, 0});
  CHECK(a.group == U);
  CHECK(a.label == NEG);
  CHECK(a.t == 0);
  const auto& b = r.instances[1];
  CHECK(b.values == std::vector<double>{50, 1, 1});
  CHECK(b.group == P);
  CHECK(b.label == POS);
  const auto& c = r.instances[2];
  CHECK(c.values == std::vector<double>{28, 2, 1});
  CHECK(c.t == 2);
}

TEST_CASE("order_by race groups rows by value and keeps file order within a group") {
  auto cfg = csv_config("shuffled.csv");
  const auto plain = load_stream(cfg);
  cfg.order_by = "race";
  cfg.order_direction = OrderDirection::kAscending;
  const auto sorted = load_stream(cfg);
  REQUIRE(sorted.instances.size() == plain.instances.size());

  // Oracle: raw race strings, sorted lexicographically, ties by file position.
  const auto schema = census_toy();
  std::vector<std::pair<std::string, double>> keys;  // (race, age) in file order
  for (const auto& x : plain.instances)
    keys.emplace_back(schema.decode(1, static_cast<std::uint32_t>(x.values[1])), x.values[0]);
  std::stable_sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& x = sorted.instances[i];
    CHECK(schema.decode(1, static_cast<std::uint32_t>(x.values[1])) == keys[i].first);
    CHECK(x.values[0] == keys[i].second);
    CHECK(x.t == i);
  }

  cfg.order_direction = OrderDirection::kDescending;
  const auto desc = load_stream(cfg);
  CHECK(schema.decode(1, static_cast<std::uint32_t>(desc.instances.front().values[1])) == "White");
  CHECK(desc.instances.front().values[0] == 25);
}

TEST_CASE("property: ordering is a permutation of the rows") {
  auto cfg = csv_config("shuffled.csv");
  const auto plain = load_stream(cfg);
  for (const char* col : {"race", "age", "sex", "income"}) {
    for (auto dir : {OrderDirection::kAscending, OrderDirection::kDescending}) {
      cfg.order_by = col;
      cfg.order_direction = dir;
      const auto sorted = load_stream(cfg);
      auto key = [](const Instance& x) {
        return std::make_tuple(x.values, static_cast<int>(x.group), static_cast<int>(x.label));
      };
      std::vector<decltype(key(plain.instances[0]))> a, b;
      for (const auto& x : plain.instances) a.push_back(key(x));
      for (const auto& x : sorted.instances) b.push_back(key(x));
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(a == b);
    }
  }
}

TEST_CASE("numeric age ordering is numeric, not lexicographic") {
  auto cfg = csv_config("shuffled.csv");
  cfg.order_by = "age";
  cfg.order_direction = OrderDirection::kAscending;
  const auto r = load_stream(cfg);
  for (std::size_t i = 1; i < r.instances.size(); ++i) CHECK(r.instances[i - 1].values[0] <= r.instances[i].values[0]);
}

TEST_CASE("missing tokens: features become missing, missing class or sensitive value rejects the row") {
  const auto r = load_stream(csv_config("missing.csv"));
  CHECK(r.rows_read == 4);
  REQUIRE(r.instances.size() == 2);
  CHECK(is_missing(r.instances[0].values[0]));
  CHECK(r.instances[0].values[1] == 0);
  CHECK(is_missing(r.instances[1].values[1]));
  CHECK(r.instances[1].t == 1);
  REQUIRE(r.rejected.size() == 2);
  CHECK(r.rejected[0].row == 4);
  CHECK(r.rejected[1].row == 5);
}

TEST_CASE("load errors carry row numbers") {
  SUBCASE("missing file") { CHECK_THROWS_AS(load_stream(csv_config("nope.csv")), LoadError); }
  SUBCASE("column count mismatch") {
    try {
      load_stream(csv_config("bad_columns.csv"));
      FAIL("expected LoadError");
    } catch (const LoadError& e) {
      CHECK(e.row() == 3);
    }
  }
  SUBCASE("undeclared nominal value in strict mode") {
    try {
      load_stream(csv_config("undeclared.csv"));
      FAIL("expected LoadError");
    } catch (const LoadError& e) {
      CHECK(e.row() == 3);
    }
    auto lax = csv_config("undeclared.csv");
    lax.strict = false;
    const auto r = load_stream(lax);
    REQUIRE(r.instances.size() == 2);
    CHECK(is_missing(r.instances[1].values[1]));
  }
  SUBCASE("unparseable number") {
    try {
      load_stream(csv_config("bad_number.csv"));
      FAIL("expected LoadError");
    } catch (const LoadError& e) {
      CHECK(e.row() == 2);
    }
  }
  SUBCASE("header read as data") {
    auto cfg = csv_config("toy.csv");
    cfg.header = false;
    const auto r = load_stream(cfg);  // "sex" is not a declared group value
    REQUIRE(r.rejected.size() == 1);
    CHECK(r.rejected[0].row == 1);
    CHECK(r.instances.size() == 3);
  }
  SUBCASE("header that does not match the schema") {
    auto cfg = csv_config("toy.csv");
    cfg.schema = StreamSchema({{"years", AttributeKind::kNumeric, {}},
                               {"race", AttributeKind::kNominal, {"White", "Black", "Asian-Pac-Islander"}},
                               {"sex", AttributeKind::kNominal, {"Male", "Female"}},
                               {"income", AttributeKind::kNominal, {"<=50K", ">50K"}}},
                              "sex", "Female", "income", ">50K");
    try {
      load_stream(cfg);
      FAIL("expected LoadError");
    } catch (const LoadError& e) {
      CHECK(e.row() == 1);
    }
  }
  SUBCASE("order_by column not in schema") {
    auto cfg = csv_config("toy.csv");
    cfg.order_by = "zip";
    CHECK_THROWS_AS(load_stream(cfg), ConfigError);
  }
}

TEST_CASE("property: nominal encode then decode is the identity") {
  const auto schema = census_toy();
  for (std::size_t f = 1; f <= 2; ++f) {
    for (const auto& v : schema.feature(f).domain) {
      const auto code = schema.encode(f, v);
      REQUIRE(code.has_value());
      CHECK(schema.decode(f, *code) == v);
    }
  }
}

TEST_CASE("csv splitting and number parsing") {
  CHECK(split_csv_line(" a , \"b, c\" ,d") == std::vector<std::string>{"a", "b, c", "d"});
  CHECK(split_csv_line("") == std::vector<std::string>{""});
  CHECK(parse_number("1.5e3") == 1500.0);
  CHECK(parse_number("-0.25") == -0.25);
  CHECK_FALSE(parse_number("1,5").has_value());
  CHECK_FALSE(parse_number("").has_value());
  CHECK_FALSE(parse_number("12abc").has_value());
}

TEST_CASE("synthetic: equal group rates give label disc within 0.02 of 0 over 10^4 instances") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthSpec spec;
    spec.segments = {{10000, 0, false, 0.4, 0.35, 0.35}};
    spec.seed = seed;
    const auto xs = synth_stream(spec);
    REQUIRE(xs.size() == 10000);
    CHECK(std::abs(label_disc(xs)) <= 0.02);
  }
}

TEST_CASE("synthetic: per-segment disc matches a 0.0 then 0.6 gap within 0.03") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthSpec spec;
    spec.segments = {{10000, 1, false, 0.5, 0.5, 0.5}, {10000, 2, false, 0.5, 0.8, 0.2}};
    spec.seed = seed;
    const auto xs = synth_stream(spec);
    const std::span<const Instance> all(xs);
    CHECK(std::abs(label_disc(all.first(10000)) - 0.0) <= 0.03);
    CHECK(std::abs(label_disc(all.subspan(10000)) - 0.6) <= 0.03);
  }
}

TEST_CASE("synthetic: reproducible, zero length, validation") {
  SynthSpec spec;
  spec.segments = {{500, 0, false, 0.5, 0.5, 0.5}};
  spec.seed = 4;
  const auto a = synth_stream(spec);
  const auto b = synth_stream(spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].values == b[i].values);
    CHECK(a[i].label == b[i].label);
    CHECK(a[i].t == i);
  }
  const auto schema = synth_schema(spec);
  for (const auto& x : a) validate(x, schema);

  SynthSpec empty;
  CHECK(synth_stream(empty).empty());
  empty.segments = {{0, 0, false, 0.5, 0.5, 0.5}};
  CHECK(synth_stream(empty).empty());

  SynthSpec bad = spec;
  bad.segments[0].positive_rate_protected = 1.2;
  CHECK_THROWS_AS(synth_stream(bad), ConfigError);
  bad = spec;
  bad.segments[0].protected_fraction = -0.1;
  CHECK_THROWS_AS(synth_stream(bad), ConfigError);
}

TEST_CASE("pull iteration surfaces each instance exactly once") {
  SynthSpec spec;
  spec.segments = {{1000, 0, false, 0.5, 0.5, 0.5}};
  InstanceStream s(synth_stream(spec));
  std::vector<int> seen(1000, 0);
  while (s.has_next()) seen[s.next().t]++;
  CHECK(std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; }));
  CHECK(s.position() == 1000);
  CHECK_THROWS_AS(s.next(), std::out_of_range);
}

TEST_CASE("schema inference and dataset config JSON round trip") {
  const auto schema = infer_schema(kData / "shuffled.csv", true, "?", "sex", "Female", "income", ">50K");
  REQUIRE(schema.columns().size() == 4);
  CHECK_FALSE(schema.columns()[0].nominal());
  CHECK(schema.columns()[1].domain == std::vector<std::string>{"Black", "Other", "White"});
  CHECK(schema.columns()[2].domain == std::vector<std::string>{"Female", "Male"});

  DatasetConfig cfg = csv_config("shuffled.csv");
  cfg.schema = schema;
  cfg.order_by = "race";
  cfg.order_direction = OrderDirection::kDescending;
  const auto j = dataset_to_json(cfg);
  const auto back = dataset_from_json(j, kData);
  CHECK(dataset_to_json(back) == j);
  const auto a = load_stream(cfg);
  const auto b = load_stream(back);
  REQUIRE(a.instances.size() == b.instances.size());
  for (std::size_t i = 0; i < a.instances.size(); ++i) CHECK(a.instances[i].values == b.instances[i].values);

  SynthSpec spec;
  spec.segments = {{10, 1, true, 0.3, 0.6, 0.2}};
  spec.seed = 17;
  const auto sj = synth_to_json(spec);
  CHECK(synth_to_json(synth_from_json(sj)) == sj);
  CHECK_THROWS_AS(dataset_from_json(nlohmann::json{{"format", "arff"}}, kData), ConfigError);
}

TEST_CASE("shipped Adult config parses") {
  const auto cfg = load_dataset_config(std::filesystem::path(FARF_CONFIG_DIR) / "adult.json");
  CHECK(cfg.schema.sensitive_attribute() == "sex");
  CHECK(cfg.schema.sensitive_value() == "Female");
  CHECK(cfg.schema.positive_label() == ">50K");
  CHECK(cfg.order_by == std::optional<std::string>("race"));
  CHECK(cfg.schema.feature_count() == 14);
}

#include "farf/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>

namespace farf {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Synthetic streams

void SynthSpec::validate() const {
  if (numeric_features < 1) throw ConfigError("synthetic: need at least one numeric feature");
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  for (const auto& s : segments) {
    if (s.concept_feature >= numeric_features) throw ConfigError("synthetic: concept feature out of range");
    if (!rate_ok(s.protected_fraction) || !rate_ok(s.positive_rate_unprotected) ||
        !rate_ok(s.positive_rate_protected))
      throw ConfigError("synthetic: rates must lie in [0, 1]");
  }
}

StreamSchema synth_schema(const SynthSpec& spec) {
  std::vector<Attribute> cols;
  for (std::size_t i = 0; i < spec.numeric_features; ++i)
    cols.push_back({"x" + std::to_string(i), AttributeKind::kNumeric, {}});
  for (std::size_t i = 0; i < spec.nominal_features; ++i)
    cols.push_back({"n" + std::to_string(i), AttributeKind::kNominal, {"a", "b", "c", "d"}});
  cols.push_back({"group", AttributeKind::kNominal, {"u", "p"}});
  cols.push_back({"class", AttributeKind::kNominal, {"neg", "pos"}});
  return StreamSchema(std::move(cols), "group", "p", "class", "pos");
}

std::vector<Instance> synth_stream(const SynthSpec& spec) {
  spec.validate();
  RandomSource rng(spec.seed);
  const std::size_t group_feature = spec.numeric_features + spec.nominal_features;
  std::vector<Instance> out;
  std::uint64_t t = 0;
  for (const auto& seg : spec.segments) {
    for (std::size_t i = 0; i < seg.length; ++i) {
      Instance x;
      x.values.resize(group_feature + 1);
      for (std::size_t f = 0; f < spec.numeric_features; ++f) x.values[f] = rng.uniform();
      for (std::size_t f = 0; f < spec.nominal_features; ++f)
        x.values[spec.numeric_features + f] = static_cast<double>(rng.below(4));
      x.group = rng.uniform() < seg.protected_fraction ? Group::kProtected : Group::kUnprotected;
      x.values[group_feature] = x.group == Group::kProtected ? 1.0 : 0.0;
      const double rate =
          x.group == Group::kProtected ? seg.positive_rate_protected : seg.positive_rate_unprotected;
      const double s = x.values[seg.concept_feature];
      const bool positive = seg.inverted ? s < rate : s >= 1.0 - rate;
      x.label = positive ? Label::kPositive : Label::kNegative;
      x.t = t++;
      out.push_back(std::move(x));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  auto flush = [&] {
    if (!was_quoted) {
      const auto b = cur.find_first_not_of(" \t\r");
      const auto e = cur.find_last_not_of(" \t\r");
      cur = b == std::string::npos ? std::string() : cur.substr(b, e - b + 1);
    }
    out.push_back(std::move(cur));
    cur.clear();
    was_quoted = false;
  };
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
      cur.clear();
    } else if (c == ',') {
      flush();
    } else if (!(was_quoted && (c == ' ' || c == '\t' || c == '\r'))) {
      cur += c;
    }
  }
  flush();
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (*begin == '+') ++begin;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

namespace {

struct RawRow {
  std::size_t line = 0;
  std::vector<std::string> cells;
};

std::vector<RawRow> read_rows(const DatasetConfig& cfg) {
  std::ifstream in(cfg.path);
  if (!in) throw LoadError("cannot open '" + cfg.path.string() + "'");
  const auto& cols = cfg.schema.columns();
  std::vector<RawRow> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header_pending = cfg.header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (header_pending) {
      header_pending = false;
      if (cells.size() != cols.size()) throw LoadError("header has " + std::to_string(cells.size()) +
                                                         " columns, schema declares " + std::to_string(cols.size()), lineno);
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cells[i] != cols[i].name)
          throw LoadError("header column '" + cells[i] + "' does not match schema column '" + cols[i].name + "'",
                          lineno);
      }
      continue;
    }
    if (cells.size() != cols.size())
      throw LoadError("row has " + std::to_string(cells.size()) + " columns, expected " + std::to_string(cols.size()),
                      lineno);
    rows.push_back({lineno, std::move(cells)});
  }
  return rows;
}

void order_rows(std::vector<RawRow>& rows, const DatasetConfig& cfg) {
  if (!cfg.order_by || cfg.order_direction == OrderDirection::kAsIs) return;
  const auto col = *cfg.schema.column_index(*cfg.order_by);
  const bool numeric = !cfg.schema.columns()[col].nominal();
  const bool desc = cfg.order_direction == OrderDirection::kDescending;
  const std::string& missing = cfg.missing_token;
  // Missing sorts last in either direction.
  auto key_less = [&](const std::string& a, const std::string& b) {
    const bool ma = a == missing;
    const bool mb = b == missing;
    if (ma || mb) return !ma && mb;
    if (numeric) {
      const auto na = parse_number(a);
      const auto nb = parse_number(b);
      if (na && nb) return desc ? *na > *nb : *na < *nb;
    }
    return desc ? a > b : a < b;
  };
  std::stable_sort(rows.begin(), rows.end(),
                   [&](const RawRow& x, const RawRow& y) { return key_less(x.cells[col], y.cells[col]); });
}

}  // namespace

LoadResult load_stream(const DatasetConfig& cfg) {
  if (cfg.format == DatasetConfig::Format::kSynthetic) {
    if (!cfg.synthetic) throw ConfigError("synthetic dataset without a generator spec");
    LoadResult r;
    r.instances = synth_stream(*cfg.synthetic);
    r.rows_read = r.instances.size();
    return r;
  }
  cfg.validate();
  auto rows = read_rows(cfg);
  order_rows(rows, cfg);

  const StreamSchema& schema = cfg.schema;
  LoadResult result;
  result.rows_read = rows.size();
  result.instances.reserve(rows.size());
  for (const auto& row : rows) {
    const std::string& s_raw = row.cells[schema.sensitive_column()];
    const std::string& c_raw = row.cells[schema.class_column()];
    Instance x;
    try {
      x.group = schema.group_of(s_raw);
      x.label = schema.label_of(c_raw);
    } catch (const SchemaError& e) {
      result.rejected.push_back({row.line, e.what()});
      continue;
    }
    x.values.resize(schema.feature_count());
    for (std::size_t c = 0; c < row.cells.size(); ++c) {
      const auto f = schema.feature_of_column(c);
      if (!f) continue;
      const std::string& cell = row.cells[c];
      const Attribute& a = schema.feature(*f);
      if (cell == cfg.missing_token || cell.empty()) {
        x.values[*f] = kMissing;
      } else if (a.nominal()) {
        const auto code = schema.encode(*f, cell);
        if (!code) {
          if (cfg.strict) throw LoadError("undeclared value '" + cell + "' for column '" + a.name + "'", row.line);
          x.values[*f] = kMissing;
        } else {
          x.values[*f] = static_cast<double>(*code);
        }
      } else {
        const auto v = parse_number(cell);
        if (!v) throw LoadError("cannot parse '" + cell + "' as a number for column '" + a.name + "'", row.line);
        x.values[*f] = *v;
      }
    }
    x.t = result.instances.size();
    result.instances.push_back(std::move(x));
  }
  return result;
}

const Instance& InstanceStream::next() {
  if (!has_next()) throw std::out_of_range("InstanceStream: exhausted");
  return instances_[pos_++];
}

StreamSchema infer_schema(const std::filesystem::path& csv, bool header, const std::string& missing_token,
                          const std::string& sensitive_attribute, const std::string& sensitive_value,
                          const std::string& class_attribute, const std::string& positive_label) {
  std::ifstream in(csv);
  if (!in) throw LoadError("cannot open '" + csv.string() + "'");
  std::vector<std::string> names;
  std::vector<std::set<std::string>> values;
  std::vector<bool> numeric;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (names.empty()) {
      if (header) {
        names = cells;
      } else {
        for (std::size_t i = 0; i < cells.size(); ++i) names.push_back("c" + std::to_string(i));
      }
      values.resize(names.size());
      numeric.assign(names.size(), true);
      if (header) continue;
    }
    if (cells.size() != names.size())
      throw LoadError("row has " + std::to_string(cells.size()) + " columns, expected " +
                          std::to_string(names.size()), lineno);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i] == missing_token || cells[i].empty()) continue;
      if (numeric[i] && !parse_number(cells[i])) numeric[i] = false;
      values[i].insert(cells[i]);
    }
  }
  if (names.empty()) throw LoadError("'" + csv.string() + "' is empty");
  std::vector<Attribute> cols;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const bool forced_nominal = names[i] == sensitive_attribute || names[i] == class_attribute;
    if (numeric[i] && !forced_nominal) {
      cols.push_back({names[i], AttributeKind::kNumeric, {}});
    } else {
      cols.push_back({names[i], AttributeKind::kNominal, {values[i].begin(), values[i].end()}});
    }
  }
  return StreamSchema(std::move(cols), sensitive_attribute, sensitive_value, class_attribute, positive_label);
}

// ---------------------------------------------------------------------------
// JSON

void DatasetConfig::validate() const {
  if (format == Format::kSynthetic) {
    if (!synthetic) throw ConfigError("dataset: synthetic format needs a 'synthetic' block");
    synthetic->validate();
    return;
  }
  if (schema.columns().empty()) throw ConfigError("dataset: schema has no columns");
  if (order_by && !schema.column_index(*order_by))
    throw ConfigError("dataset: order_by column '" + *order_by + "' not in schema");
}

json schema_to_json(const StreamSchema& schema) {
  json cols = json::array();
  for (const auto& a : schema.columns()) {
    json c{{"name", a.name}, {"kind", a.nominal() ? "nominal" : "numeric"}};
    if (a.nominal()) c["domain"] = a.domain;
    cols.push_back(std::move(c));
  }
  return json{{"columns", cols},
              {"sensitive_attribute", schema.sensitive_attribute()},
              {"sensitive_value", schema.sensitive_value()},
              {"class_attribute", schema.class_attribute()},
              {"positive_label", schema.positive_label()}};
}

StreamSchema schema_from_json(const json& j) {
  try {
    std::vector<Attribute> cols;
    for (const auto& c : j.at("columns")) {
      Attribute a;
      a.name = c.at("name").get<std::string>();
      const auto kind = c.at("kind").get<std::string>();
      if (kind == "nominal") {
        a.kind = AttributeKind::kNominal;
        a.domain = c.at("domain").get<std::vector<std::string>>();
      } else if (kind == "numeric") {
        a.kind = AttributeKind::kNumeric;
      } else {
        throw ConfigError("schema: unknown column kind '" + kind + "'");
      }
      cols.push_back(std::move(a));
    }
    return StreamSchema(std::move(cols), j.at("sensitive_attribute").get<std::string>(),
                        j.at("sensitive_value").get<std::string>(), j.at("class_attribute").get<std::string>(),
                        j.at("positive_label").get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("schema: ") + e.what());
  }
}

namespace {

std::string direction_name(OrderDirection d) {
  switch (d) {
    case OrderDirection::kAscending: return "asc";
    case OrderDirection::kDescending: return "desc";
    case OrderDirection::kAsIs: break;
  }
  return "as-is";
}

OrderDirection parse_direction(const std::string& s) {
  if (s == "asc") return OrderDirection::kAscending;
  if (s == "desc") return OrderDirection::kDescending;
  if (s == "as-is") return OrderDirection::kAsIs;
  throw ConfigError("dataset: unknown order_direction '" + s + "'");
}

}  // namespace

json synth_to_json(const SynthSpec& spec) {
  json segs = json::array();
  for (const auto& s : spec.segments) {
    segs.push_back({{"length", s.length},
                    {"concept_feature", s.concept_feature},
                    {"inverted", s.inverted},
                    {"protected_fraction", s.protected_fraction},
                    {"positive_rate_unprotected", s.positive_rate_unprotected},
                    {"positive_rate_protected", s.positive_rate_protected}});
  }
  return json{{"numeric_features", spec.numeric_features},
              {"nominal_features", spec.nominal_features},
              {"seed", spec.seed},
              {"segments", segs}};
}

SynthSpec synth_from_json(const json& j) {
  try {
    SynthSpec spec;
    spec.numeric_features = j.value("numeric_features", spec.numeric_features);
    spec.nominal_features = j.value("nominal_features", spec.nominal_features);
    spec.seed = j.value("seed", spec.seed);
    for (const auto& s : j.at("segments")) {
      SynthSegment seg;
      seg.length = s.at("length").get<std::size_t>();
      seg.concept_feature = s.value("concept_feature", seg.concept_feature);
      seg.inverted = s.value("inverted", seg.inverted);
      seg.protected_fraction = s.value("protected_fraction", seg.protected_fraction);
      seg.positive_rate_unprotected = s.value("positive_rate_unprotected", seg.positive_rate_unprotected);
      seg.positive_rate_protected = s.value("positive_rate_protected", seg.positive_rate_protected);
      spec.segments.push_back(seg);
    }
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synthetic: ") + e.what());
  }
}

json dataset_to_json(const DatasetConfig& c) {
  if (c.format == DatasetConfig::Format::kSynthetic) {
    return json{{"format", "synthetic"}, {"synthetic", synth_to_json(*c.synthetic)}};
  }
  json j{{"format", "csv"},
         {"path", c.path.string()},
         {"header", c.header},
         {"missing_token", c.missing_token},
         {"strict", c.strict},
         {"order_direction", direction_name(c.order_direction)},
         {"schema", schema_to_json(c.schema)}};
  j["order_by"] = c.order_by ? json(*c.order_by) : json(nullptr);
  return j;
}

DatasetConfig dataset_from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    DatasetConfig c;
    const auto format = j.value("format", std::string("csv"));
    if (format == "synthetic") {
      c.format = DatasetConfig::Format::kSynthetic;
      c.synthetic = synth_from_json(j.at("synthetic"));
      c.schema = synth_schema(*c.synthetic);
      return c;
    }
    if (format != "csv") throw ConfigError("dataset: unsupported format '" + format + "'");
    std::filesystem::path p = j.at("path").get<std::string>();
    c.path = p.is_absolute() ? p : (base_dir / p).lexically_normal();
    c.header = j.value("header", c.header);
    c.missing_token = j.value("missing_token", c.missing_token);
    c.strict = j.value("strict", c.strict);
    c.schema = schema_from_json(j.at("schema"));
    if (j.contains("order_by") && !j["order_by"].is_null()) c.order_by = j["order_by"].get<std::string>();
    c.order_direction = parse_direction(j.value("order_direction", std::string(c.order_by ? "asc" : "as-is")));
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("dataset: ") + e.what());
  } catch (const SchemaError& e) {
    throw ConfigError(std::string("dataset: ") + e.what());
  }
}

DatasetConfig load_dataset_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open dataset config '" + file.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("dataset config '" + file.string() + "': " + e.what());
  }
  return dataset_from_json(j, std::filesystem::absolute(file).parent_path());
}

}  // namespace farf

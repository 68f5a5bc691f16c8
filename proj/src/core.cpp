#include "farf/core.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace farf {

std::string_view to_string(Group g) {
  return g == Group::kProtected ? "protected" : "unprotected";
}

std::string_view to_string(Label l) { return l == Label::kPositive ? "positive" : "negative"; }

void GroupCounts::add(Group group, Label outcome, double weight) {
  if (!(weight >= 0.0)) throw ArgumentError("GroupCounts::add: weight must be >= 0");
  cell(group, outcome) += weight;
}

double& GroupCounts::cell(Group group, Label outcome) {
  if (group == Group::kUnprotected) return outcome == Label::kPositive ? u_pos : u_neg;
  return outcome == Label::kPositive ? p_pos : p_neg;
}

double GroupCounts::cell(Group group, Label outcome) const {
  return const_cast<GroupCounts&>(*this).cell(group, outcome);
}

// ---------------------------------------------------------------------------

namespace {

const Attribute* find_column(const std::vector<Attribute>& cols, std::string_view name,
                             std::size_t* pos) {
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i].name == name) {
      *pos = i;
      return &cols[i];
    }
  }
  return nullptr;
}

bool in_domain(const Attribute& a, std::string_view v) {
  return std::find(a.domain.begin(), a.domain.end(), v) != a.domain.end();
}

}  // namespace

StreamSchema::StreamSchema(std::vector<Attribute> columns, std::string sensitive_attribute,
                           std::string sensitive_value, std::string class_attribute,
                           std::string positive_label)
    : columns_(std::move(columns)),
      sensitive_attribute_(std::move(sensitive_attribute)),
      sensitive_value_(std::move(sensitive_value)),
      class_attribute_(std::move(class_attribute)),
      positive_label_(std::move(positive_label)) {
  std::unordered_set<std::string> names;
  for (const auto& a : columns_) {
    if (a.name.empty()) throw SchemaError("schema: empty column name");
    if (!names.insert(a.name).second) throw SchemaError("schema: duplicate column '" + a.name + "'");
    if (a.nominal()) {
      if (a.domain.empty()) throw SchemaError("schema: nominal column '" + a.name + "' has empty domain");
      std::unordered_set<std::string> seen(a.domain.begin(), a.domain.end());
      if (seen.size() != a.domain.size())
        throw SchemaError("schema: nominal column '" + a.name + "' has duplicate values");
    } else if (!a.domain.empty()) {
      throw SchemaError("schema: numeric column '" + a.name + "' declares a domain");
    }
  }
  if (sensitive_attribute_ == class_attribute_)
    throw SchemaError("schema: sensitive and class attribute must differ");

  const Attribute* s = find_column(columns_, sensitive_attribute_, &sensitive_column_);
  if (s == nullptr) throw SchemaError("schema: sensitive attribute '" + sensitive_attribute_ + "' not present");
  const Attribute* c = find_column(columns_, class_attribute_, &class_column_);
  if (c == nullptr) throw SchemaError("schema: class attribute '" + class_attribute_ + "' not present");

  if (!s->nominal() || s->domain.size() != 2)
    throw SchemaError("schema: sensitive attribute must be nominal with exactly two values");
  if (!c->nominal() || c->domain.size() != 2)
    throw SchemaError("schema: class attribute must be nominal with exactly two values");
  if (!in_domain(*s, sensitive_value_))
    throw SchemaError("schema: sensitive value '" + sensitive_value_ + "' not in dom(S)");
  if (!in_domain(*c, positive_label_))
    throw SchemaError("schema: positive label '" + positive_label_ + "' not in dom(C)");

  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i == class_column_) continue;
    if (i == sensitive_column_) sensitive_feature_ = features_.size();
    features_.push_back(i);
    std::unordered_map<std::string, std::uint32_t> dict;
    for (std::uint32_t k = 0; k < columns_[i].domain.size(); ++k) dict.emplace(columns_[i].domain[k], k);
    codes_.push_back(std::move(dict));
  }
}

std::optional<std::size_t> StreamSchema::feature_of_column(std::size_t column) const {
  if (column == class_column_ || column >= columns_.size()) return std::nullopt;
  return column < class_column_ ? column : column - 1;
}

std::optional<std::size_t> StreamSchema::column_index(std::string_view name) const {
  std::size_t pos = 0;
  if (find_column(columns_, name, &pos) == nullptr) return std::nullopt;
  return pos;
}

Group StreamSchema::group_of(std::string_view raw) const {
  if (!in_domain(columns_[sensitive_column_], raw))
    throw SchemaError("value '" + std::string(raw) + "' outside dom(" + sensitive_attribute_ + ")");
  return raw == sensitive_value_ ? Group::kProtected : Group::kUnprotected;
}

Label StreamSchema::label_of(std::string_view raw) const {
  if (!in_domain(columns_[class_column_], raw))
    throw SchemaError("value '" + std::string(raw) + "' outside dom(" + class_attribute_ + ")");
  return raw == positive_label_ ? Label::kPositive : Label::kNegative;
}

std::optional<std::uint32_t> StreamSchema::encode(std::size_t feature, std::string_view raw) const {
  const auto& dict = codes_.at(feature);
  auto it = dict.find(std::string(raw));
  if (it == dict.end()) return std::nullopt;
  return it->second;
}

const std::string& StreamSchema::decode(std::size_t feature, std::uint32_t code) const {
  return columns_[features_.at(feature)].domain.at(code);
}

void validate(const Instance& x, const StreamSchema& schema) {
  if (x.values.size() != schema.feature_count())
    throw SchemaError("instance has " + std::to_string(x.values.size()) + " values, schema expects " +
                      std::to_string(schema.feature_count()));
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double v = x.values[i];
    const Attribute& a = schema.feature(i);
    if (is_missing(v) || !a.nominal()) continue;
    if (v < 0 || v >= static_cast<double>(a.domain.size()) || v != std::floor(v))
      throw SchemaError("instance value for '" + a.name + "' is not a valid nominal code");
  }
  const double s = x.values[schema.sensitive_feature()];
  if (is_missing(s)) throw SchemaError("instance is missing the sensitive attribute");
  const Group g = schema.group_of(schema.decode(schema.sensitive_feature(), static_cast<std::uint32_t>(s)));
  if (g != x.group) throw SchemaError("instance group disagrees with its sensitive value");
}

// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double RandomSource::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

std::uint64_t RandomSource::below(std::uint64_t n) {
  if (n == 0) throw ArgumentError("RandomSource::below: n must be > 0");
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

int RandomSource::poisson(double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("RandomSource::poisson: lambda must be > 0");
  return std::poisson_distribution<int>(lambda)(engine_);
}

RandomSource RandomSource::derive(std::uint64_t stream) const {
  return RandomSource(splitmix64(seed_ ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)));
}

std::string RandomSource::state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void RandomSource::restore(std::uint64_t seed, const std::string& state) {
  std::istringstream is(state);
  Engine e;
  is >> e;
  if (!is) throw ArgumentError("RandomSource::restore: malformed engine state");
  seed_ = seed;
  engine_ = e;
}

}  // namespace farf

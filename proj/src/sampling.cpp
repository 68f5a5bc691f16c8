#include "farf/sampling.hpp"

#include <algorithm>

namespace farf {

namespace {

bool unprotected_positive(const Instance& x) {
  return x.group == Group::kUnprotected && x.label == Label::kPositive;
}

bool protected_positive(const Instance& x) {
  return x.group == Group::kProtected && x.label == Label::kPositive;
}

}  // namespace

std::string_view to_string(SamplingMode m) {
  switch (m) {
    case SamplingMode::kPlain: return "plain";
    case SamplingMode::kFair: return "fair";
    case SamplingMode::kCustom: return "custom";
    case SamplingMode::kOversampleProtected: return "oversample";
    case SamplingMode::kOverAndUnder: return "overunder";
  }
  return "?";
}

SamplingMode parse_sampling_mode(std::string_view s) {
  for (auto m : {SamplingMode::kPlain, SamplingMode::kFair, SamplingMode::kCustom,
                 SamplingMode::kOversampleProtected, SamplingMode::kOverAndUnder}) {
    if (s == to_string(m)) return m;
  }
  throw ConfigError("unknown sampling mode '" + std::string(s) + "'");
}

void SamplingPolicy::validate() const {
  if (!(lambda > 0.0)) throw ConfigError("sampling: lambda must be > 0");
  if (mode == SamplingMode::kCustom && !(alpha > 0.0)) throw ConfigError("sampling: alpha must be > 0");
}

int poisson_weight(const SamplingPolicy& policy, RandomSource& rng) { return rng.poisson(policy.lambda); }

double fair_weight(const Instance& x, double current_disc, double k) {
  if (unprotected_positive(x) && current_disc > 0.0) return current_disc * k;
  return k;
}

double custom_weight(double alpha, const Instance& x, double k) {
  if (!(alpha > 0.0)) throw ConfigError("custom_weight: alpha must be > 0");
  return unprotected_positive(x) ? alpha * k : k;
}

double ablation_weight(const SamplingPolicy& policy, const Instance& x, double current_disc, double k) {
  switch (policy.mode) {
    case SamplingMode::kOversampleProtected:
      return protected_positive(x) ? (1.0 + std::max(0.0, current_disc)) * k : k;
    case SamplingMode::kOverAndUnder:
      if (protected_positive(x)) return (1.0 + std::max(0.0, current_disc)) * k;
      return fair_weight(x, current_disc, k);
    default:
      throw ArgumentError("ablation_weight: policy is not an ablation mode");
  }
}

double training_weight(const SamplingPolicy& policy, const Instance& x, double current_disc, double k) {
  switch (policy.mode) {
    case SamplingMode::kPlain: return k;
    case SamplingMode::kFair: return fair_weight(x, current_disc, k);
    case SamplingMode::kCustom: return custom_weight(policy.alpha, x, k);
    case SamplingMode::kOversampleProtected:
    case SamplingMode::kOverAndUnder: return ablation_weight(policy, x, current_disc, k);
  }
  return k;
}

}  // namespace farf

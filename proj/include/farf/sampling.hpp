#pragma once

// Per-instance training weights for online bagging and its fairness-aware
// variants.

#include <optional>
#include <string>
#include <string_view>

#include "farf/core.hpp"

namespace farf {

enum class SamplingMode : std::uint8_t {
  kPlain,                // K
  kFair,                 // Disc*K for unprotected positives while Disc > 0
  kCustom,               // alpha*K for unprotected positives
  kOversampleProtected,  // (1 + max(0, Disc))*K for protected positives
  kOverAndUnder,         // both of the above
};

std::string_view to_string(SamplingMode m);
/// Accepts plain|fair|custom|oversample|overunder. Throws ConfigError.
SamplingMode parse_sampling_mode(std::string_view s);

struct SamplingPolicy {
  SamplingMode mode = SamplingMode::kFair;
  double lambda = 6.0;
  double alpha = 1.0;  // custom mode only

  /// Throws ConfigError when lambda <= 0 or, in custom mode, alpha <= 0.
  void validate() const;
};

/// K ~ Poisson(lambda).
int poisson_weight(const SamplingPolicy& policy, RandomSource& rng);

/// Disc*K when the instance is an unprotected positive and Disc > 0, else K.
double fair_weight(const Instance& x, double current_disc, double k);

/// alpha*K when the instance is an unprotected positive, else K.
/// Throws ConfigError for alpha <= 0.
double custom_weight(double alpha, const Instance& x, double k);

/// Over-sampling ablations. Throws ArgumentError when the policy mode is not
/// one of the two ablation modes.
double ablation_weight(const SamplingPolicy& policy, const Instance& x, double current_disc, double k);

/// Dispatches on policy.mode.
double training_weight(const SamplingPolicy& policy, const Instance& x, double current_disc, double k);

}  // namespace farf

#include <cmath>

#include "doctest.h"
#include "farf/sampling.hpp"
#include "helpers.hpp"

using namespace farf;
using namespace farf::test;
using doctest::Approx;

namespace {

Instance cell(Group g, Label l) { return make({0.0}, g, l); }

}  // namespace

TEST_CASE("poisson_weight statistics at lambda 6") {
  SamplingPolicy p;
  RandomSource rng(1);
  double sum = 0;
  int zeros = 0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const int k = poisson_weight(p, rng);
    CHECK_FALSE(k < 0);
    sum += k;
    zeros += k == 0;
  }
  CHECK(sum / n >= 5.97);
  CHECK(sum / n <= 6.03);
  CHECK(std::abs(static_cast<double>(zeros) / n - std::exp(-6.0)) <= 0.0005);
}

TEST_CASE("poisson_weight is reproducible") {
  SamplingPolicy p;
  RandomSource a(77);
  RandomSource b(77);
  for (int i = 0; i < 1000; ++i) CHECK(poisson_weight(p, a) == poisson_weight(p, b));
}

TEST_CASE("fair_weight examples") {
  CHECK(fair_weight(cell(U, POS), 0.2, 6) == Approx(1.2));
  CHECK(fair_weight(cell(U, POS), -0.05, 6) == 6.0);
  CHECK(fair_weight(cell(P, POS), 0.4, 3) == 3.0);
}

TEST_CASE("custom_weight examples") {
  for (Group g : {U, P})
    for (Label l : {NEG, POS}) CHECK(custom_weight(1.0, cell(g, l), 4) == 4.0);
  CHECK(custom_weight(0.3, cell(U, POS), 6) == Approx(1.8));
  CHECK(custom_weight(1.5, cell(U, NEG), 2) == 2.0);
  CHECK_THROWS_AS(custom_weight(0.0, cell(U, POS), 2), ConfigError);
  CHECK_THROWS_AS(custom_weight(-1.0, cell(U, POS), 2), ConfigError);
}

TEST_CASE("ablation_weight examples") {
  SamplingPolicy over{SamplingMode::kOversampleProtected};
  SamplingPolicy both{SamplingMode::kOverAndUnder};
  CHECK(ablation_weight(over, cell(P, POS), 0.2, 5) == Approx(6.0));
  CHECK(ablation_weight(both, cell(U, POS), 0.2, 5) == Approx(1.0));
  CHECK(ablation_weight(both, cell(P, POS), 0.2, 5) == Approx(6.0));
  CHECK(ablation_weight(over, cell(U, POS), 0.2, 5) == 5.0);
  for (Group g : {U, P})
    for (Label l : {NEG, POS}) {
      CHECK(ablation_weight(over, cell(g, l), 0.0, 5) == 5.0);
      CHECK(ablation_weight(both, cell(g, l), 0.0, 5) == 5.0);
    }
  CHECK_THROWS_AS(ablation_weight(SamplingPolicy{SamplingMode::kFair}, cell(P, POS), 0.2, 5), ArgumentError);
}

TEST_CASE("property: fair_weight <= K, strictly below exactly on unprotected positives with 0 < Disc < 1") {
  for (Group g : {U, P})
    for (Label l : {NEG, POS})
      for (double d : {-1.0, -0.5, 0.0, 1e-9, 0.01, 0.2, 0.99, 1.0})
        for (int k = 0; k <= 12; ++k) {
          const double w = fair_weight(cell(g, l), d, k);
          CHECK(w <= k);
          const bool strict = g == U && l == POS && d > 0 && d < 1 && k > 0;
          CHECK((w < k) == strict);
        }
}

TEST_CASE("property: custom_weight monotone in alpha") {
  for (Group g : {U, P})
    for (Label l : {NEG, POS})
      for (int k = 0; k <= 12; ++k) {
        double prev = -1;
        for (double a = 0.1; a <= 3.0; a += 0.1) {
          const double w = custom_weight(a, cell(g, l), k);
          CHECK(w >= prev);
          prev = w;
        }
      }
}

TEST_CASE("plain mode weight equals the Poisson draw") {
  SamplingPolicy p{SamplingMode::kPlain};
  for (Group g : {U, P})
    for (Label l : {NEG, POS})
      for (double d : {-0.3, 0.0, 0.4})
        for (int k = 0; k <= 12; ++k) CHECK(training_weight(p, cell(g, l), d, k) == k);
}

TEST_CASE("training_weight dispatch") {
  CHECK(training_weight({SamplingMode::kFair}, cell(U, POS), 0.5, 4) == Approx(2.0));
  CHECK(training_weight({SamplingMode::kCustom, 6.0, 0.5}, cell(U, POS), 0.0, 4) == Approx(2.0));
  CHECK(training_weight({SamplingMode::kOversampleProtected}, cell(P, POS), 0.5, 4) == Approx(6.0));
}

TEST_CASE("policy validation and mode names") {
  CHECK_THROWS_AS((SamplingPolicy{SamplingMode::kFair, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((SamplingPolicy{SamplingMode::kCustom, 6.0, 0.0}.validate()), ConfigError);
  CHECK_NOTHROW((SamplingPolicy{SamplingMode::kCustom, 6.0, 0.3}.validate()));
  for (auto m : {SamplingMode::kPlain, SamplingMode::kFair, SamplingMode::kCustom, SamplingMode::kOversampleProtected,
                 SamplingMode::kOverAndUnder})
    CHECK(parse_sampling_mode(to_string(m)) == m);
  CHECK_THROWS_AS(parse_sampling_mode("bogus"), ConfigError);
}

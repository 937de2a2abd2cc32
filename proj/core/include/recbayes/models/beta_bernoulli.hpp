#pragma once

#include <vector>

#include "recbayes/distributions.hpp"

namespace rb::models {

struct BetaBernoulliModel {
  dist::BetaParams prior{1.0, 1.0};
  std::vector<int> data;  // entries in {0,1}

  void validate() const;
};

// Stage-j posterior after folding in partitions 1..j:
// Beta(a + sum y, b + sum (1-y)) over the data seen so far. Exact conjugate
// recursion; the conditional data model stays Bernoulli because the
// observations are conditionally independent. Returns one parameter set per
// stage (J entries).
std::vector<dist::BetaParams> beta_bernoulli_recursive(
    const BetaBernoulliModel& model, const std::vector<std::vector<int>>& partitions);

// Full-data conjugate posterior in one step.
dist::BetaParams beta_bernoulli_full(const BetaBernoulliModel& model);

// Synthetic binary data, iid Bernoulli(theta).
std::vector<int> make_synthetic_bernoulli(int n, double theta, Rng& rng);

}  // namespace rb::models

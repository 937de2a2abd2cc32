#include "recbayes/models/beta_bernoulli.hpp"

#include "recbayes/errors.hpp"

namespace rb::models {

void BetaBernoulliModel::validate() const {
  if (!(prior.a > 0.0) || !(prior.b > 0.0))
    throw DomainError("beta-bernoulli: prior parameters must be > 0");
  for (const int y : data)
    if (y != 0 && y != 1) throw DataError("beta-bernoulli: data entries must be 0 or 1");
}

std::vector<dist::BetaParams> beta_bernoulli_recursive(
    const BetaBernoulliModel& model, const std::vector<std::vector<int>>& partitions) {
  model.validate();
  std::size_t covered = 0;
  long long ones = 0;
  std::vector<dist::BetaParams> stages;
  dist::BetaParams post = model.prior;
  for (const auto& part : partitions) {
    for (const int y : part) {
      if (y != 0 && y != 1) throw DataError("beta-bernoulli: data entries must be 0 or 1");
      post.a += y;
      post.b += 1 - y;
      ones += y;
    }
    covered += part.size();
    stages.push_back(post);
  }
  // Coverage check is multiset equality; binary data make that a count of
  // ones plus a length check. Partition order is free (the final posterior
  // does not depend on it).
  long long data_ones = 0;
  for (const int y : model.data) data_ones += y;
  if (covered != model.data.size() || ones != data_ones)
    throw DataError("beta-bernoulli: partitions do not cover the data");
  return stages;
}

dist::BetaParams beta_bernoulli_full(const BetaBernoulliModel& model) {
  model.validate();
  dist::BetaParams post = model.prior;
  for (const int y : model.data) {
    post.a += y;
    post.b += 1 - y;
  }
  return post;
}

std::vector<int> make_synthetic_bernoulli(int n, double theta, Rng& rng) {
  if (n < 1) throw ConfigError("beta-bernoulli generator: n must be >= 1");
  if (!(theta > 0.0 && theta < 1.0))
    throw ConfigError("beta-bernoulli generator: theta must lie in (0,1)");
  std::vector<int> out(n);
  for (auto& y : out) y = rng.uniform() < theta ? 1 : 0;
  return out;
}

}  // namespace rb::models

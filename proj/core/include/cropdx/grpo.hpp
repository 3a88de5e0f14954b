#ifndef CROPDX_GRPO_HPP_
#define CROPDX_GRPO_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cropdx/sample.hpp"
#include "cropdx/vocab.hpp"

namespace cropdx {

class DegenerateBank : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NonFiniteUpdate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Desk-scale stand-in for a generative policy: a finite set of candidate
// responses for one sample, with their rewards precomputed.
struct TemplateBank {
  std::string sample_id;
  std::vector<std::string> templates;
  std::vector<double> rewards;
};

// Categorical policy over one bank's templates.
struct PolicyParams {
  std::vector<double> logits;

  // softmax(logits / temperature); probabilities floored at 1e-12.
  std::vector<double> probs(double temperature) const;
};

struct Group {
  std::string sample_id;
  std::vector<int> responses;  // template indices, |responses| == G
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<double> ratios;
};

struct TrainConfig {
  int group_size = 3;        // G
  double clip = 0.2;         // PPO-style clip range
  double beta = 0.01;        // KL coefficient
  double kl_target = 0.04;   // adaptive-beta setpoint
  bool adaptive_beta = false;
  double learning_rate = 0.1;
  int steps = 500;
  double temperature = 0.7;
  double advantage_epsilon = 1e-8;
  std::uint64_t seed = 0;
};

// G i.i.d. draws with replacement from softmax(logits/temperature).
// Ratios start at 1 (sampled under the given policy). Deterministic for a
// fixed rng state.
Group sample_group(const PolicyParams& policy, const TemplateBank& bank,
                   int group_size, double temperature, std::mt19937_64& rng);

// A_i = (r_i - mean) / (population std + eps).
std::vector<double> compute_advantages(std::span<const double> rewards,
                                       double eps = 1e-8);

// (1/G) sum min(ratio*A, clip(ratio, 1-eps, 1+eps)*A).
double surrogate(std::span<const double> ratios,
                 std::span<const double> advantages, double clip);

// Exact categorical KL(policy || ref) at the given temperature.
double kl_divergence(const PolicyParams& policy, const PolicyParams& ref,
                     double temperature);

struct ObjectiveResult {
  double value = 0.0;      // surrogate - beta * kl
  double surrogate = 0.0;
  double kl = 0.0;
  std::vector<double> gradient;  // d value / d policy.logits
};

// Clipped surrogate minus beta*KL for one group, with the analytic
// gradient with respect to the current policy's logits. Ratios are
// recomputed as policy(o)/old(o).
ObjectiveResult grpo_objective(const Group& group, const PolicyParams& policy,
                               const PolicyParams& old_policy,
                               const PolicyParams& ref,
                               const TrainConfig& config);

struct TrainStep {
  int step = 0;
  double expected_reward = 0.0;
  double kl = 0.0;
  double objective = 0.0;
  double beta = 0.0;
};

struct TrainReport {
  std::vector<TrainStep> trajectory;
  std::vector<PolicyParams> final_policies;  // one per bank
  std::vector<PolicyParams> ref_policies;
};

// Desk-scale GRPO: per step, snapshot the old policy, sample one group
// per bank from it, and take one ascent step on the clipped objective.
// The reference policy is frozen at init. Throws NonFiniteUpdate if the
// logits leave the finite range.
TrainReport train(const std::vector<TemplateBank>& banks,
                  const TrainConfig& config);

// Precompute template rewards for a bank via the reward module.
TemplateBank make_bank(const Sample& sample,
                       std::vector<std::string> templates,
                       const Vocabulary& vocab);

}  // namespace cropdx

#endif  // CROPDX_GRPO_HPP_

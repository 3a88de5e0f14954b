#include "cropdx/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cropdx/reward.hpp"

namespace cropdx {

namespace {

constexpr double kProbFloor = 1e-12;

}  // namespace

std::vector<double> PolicyParams::probs(double temperature) const {
  std::vector<double> p(logits.size());
  const double t = (temperature > 0.0) ? temperature : 1.0;
  double max_z = -std::numeric_limits<double>::infinity();
  for (double z : logits) max_z = std::max(max_z, z / t);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] / t - max_z);
    sum += p[i];
  }
  for (auto& x : p) x = std::max(x / sum, kProbFloor);
  return p;
}

Group sample_group(const PolicyParams& policy, const TemplateBank& bank,
                   int group_size, double temperature, std::mt19937_64& rng) {
  if (bank.templates.size() < 2) {
    throw DegenerateBank("bank '" + bank.sample_id +
                         "' needs at least 2 templates");
  }
  if (group_size < 2) {
    throw DegenerateBank("group size must be at least 2");
  }
  const std::vector<double> p = policy.probs(temperature);
  std::discrete_distribution<int> dist(p.begin(), p.end());

  Group g;
  g.sample_id = bank.sample_id;
  g.responses.resize(group_size);
  g.rewards.resize(group_size);
  g.ratios.assign(group_size, 1.0);
  for (int i = 0; i < group_size; ++i) {
    int idx = dist(rng);
    g.responses[i] = idx;
    g.rewards[i] = bank.rewards[idx];
  }
  g.advantages = compute_advantages(g.rewards);
  return g;
}

std::vector<double> compute_advantages(std::span<const double> rewards,
                                       double eps) {
  const std::size_t n = rewards.size();
  // Identical rewards give exactly zero advantages; computing the mean in
  // floating point would leave ~1e-8 residue once divided by epsilon.
  if (std::all_of(rewards.begin(), rewards.end(),
                  [&](double r) { return r == rewards[0]; })) {
    return std::vector<double>(n, 0.0);
  }
  const double mean =
      std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sigma = std::sqrt(var / n);  // population std
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = (rewards[i] - mean) / (sigma + eps);
  return a;
}

double surrogate(std::span<const double> ratios,
                 std::span<const double> advantages, double clip) {
  double sum = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double clipped = std::clamp(ratios[i], 1.0 - clip, 1.0 + clip);
    sum += std::min(ratios[i] * advantages[i], clipped * advantages[i]);
  }
  return sum / static_cast<double>(ratios.size());
}

double kl_divergence(const PolicyParams& policy, const PolicyParams& ref,
                     double temperature) {
  const std::vector<double> p = policy.probs(temperature);
  const std::vector<double> q = ref.probs(temperature);
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    kl += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return kl;
}

ObjectiveResult grpo_objective(const Group& group, const PolicyParams& policy,
                               const PolicyParams& old_policy,
                               const PolicyParams& ref,
                               const TrainConfig& config) {
  const std::size_t k = policy.logits.size();
  const double t = (config.temperature > 0.0) ? config.temperature : 1.0;
  const std::vector<double> p = policy.probs(config.temperature);
  const std::vector<double> p_old = old_policy.probs(config.temperature);
  const std::vector<double> q = ref.probs(config.temperature);
  const std::size_t g_size = group.responses.size();

  ObjectiveResult out;
  out.gradient.assign(k, 0.0);

  // Clipped surrogate and its gradient. d ratio_i / d z_j =
  // (1/t) * ratio_i * (delta_{j,o_i} - p_j).
  double surr = 0.0;
  for (std::size_t i = 0; i < g_size; ++i) {
    const int o = group.responses[i];
    const double a = group.advantages[i];
    const double ratio = p[o] / p_old[o];
    const double clipped = std::clamp(ratio, 1.0 - config.clip,
                                      1.0 + config.clip);
    const double unclipped_term = ratio * a;
    const double clipped_term = clipped * a;
    surr += std::min(unclipped_term, clipped_term);

    // Active branch: unclipped when it attains the min; a clipped-flat
    // branch contributes no gradient.
    bool grad_through_ratio;
    if (unclipped_term <= clipped_term) {
      grad_through_ratio = true;
    } else {
      grad_through_ratio = ratio > 1.0 - config.clip &&
                           ratio < 1.0 + config.clip;
    }
    if (grad_through_ratio) {
      const double scale = a * ratio / (t * static_cast<double>(g_size));
      for (std::size_t j = 0; j < k; ++j) {
        const double delta = (static_cast<int>(j) == o) ? 1.0 : 0.0;
        out.gradient[j] += scale * (delta - p[j]);
      }
    }
  }
  surr /= static_cast<double>(g_size);
  out.surrogate = surr;

  // KL(p || q) and its gradient: (1/t) * p_j * (log(p_j/q_j) - KL).
  double kl = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    kl += p[j] * (std::log(p[j]) - std::log(q[j]));
  }
  out.kl = kl;
  if (config.beta != 0.0) {
    for (std::size_t j = 0; j < k; ++j) {
      const double dkl = p[j] * (std::log(p[j]) - std::log(q[j]) - kl) / t;
      out.gradient[j] -= config.beta * dkl;
    }
  }

  out.value = surr - config.beta * kl;
  return out;
}

TrainReport train(const std::vector<TemplateBank>& banks,
                  const TrainConfig& config) {
  if (config.group_size < 2) throw DegenerateBank("group size must be >= 2");
  std::mt19937_64 rng(config.seed);

  std::vector<PolicyParams> policies(banks.size());
  for (std::size_t b = 0; b < banks.size(); ++b) {
    if (banks[b].templates.size() < 2 ||
        banks[b].rewards.size() != banks[b].templates.size()) {
      throw DegenerateBank("bank '" + banks[b].sample_id +
                           "' needs >= 2 templates with cached rewards");
    }
    policies[b].logits.assign(banks[b].templates.size(), 0.0);
  }
  const std::vector<PolicyParams> ref = policies;  // frozen at init

  TrainReport report;
  report.ref_policies = ref;
  double beta = config.beta;

  auto record = [&](int step, double objective) {
    double exp_reward = 0.0, kl = 0.0;
    for (std::size_t b = 0; b < banks.size(); ++b) {
      const auto p = policies[b].probs(config.temperature);
      for (std::size_t j = 0; j < p.size(); ++j)
        exp_reward += p[j] * banks[b].rewards[j];
      kl += kl_divergence(policies[b], ref[b], config.temperature);
    }
    exp_reward /= static_cast<double>(banks.size());
    kl /= static_cast<double>(banks.size());
    report.trajectory.push_back({step, exp_reward, kl, objective, beta});
    return kl;
  };

  record(0, 0.0);

  for (int step = 1; step <= config.steps; ++step) {
    const std::vector<PolicyParams> old = policies;  // per-step snapshot
    TrainConfig step_cfg = config;
    step_cfg.beta = beta;

    double objective = 0.0;
    for (std::size_t b = 0; b < banks.size(); ++b) {
      Group group = sample_group(old[b], banks[b], config.group_size,
                                 config.temperature, rng);
      ObjectiveResult res =
          grpo_objective(group, policies[b], old[b], ref[b], step_cfg);
      objective += res.value;
      for (std::size_t j = 0; j < policies[b].logits.size(); ++j) {
        policies[b].logits[j] += config.learning_rate * res.gradient[j];
        if (!std::isfinite(policies[b].logits[j])) {
          throw NonFiniteUpdate("non-finite logit in bank '" +
                                banks[b].sample_id + "' at step " +
                                std::to_string(step));
        }
      }
    }
    objective /= static_cast<double>(banks.size());

    const double kl = record(step, objective);
    if (config.adaptive_beta) {
      if (kl > config.kl_target * 1.5) {
        beta *= 1.5;
      } else if (kl < config.kl_target / 1.5) {
        beta /= 1.5;
      }
      beta = std::clamp(beta, 1e-8, 1e8);
    }
  }

  report.final_policies = policies;
  return report;
}

TemplateBank make_bank(const Sample& sample,
                       std::vector<std::string> templates,
                       const Vocabulary& vocab) {
  TemplateBank bank;
  bank.sample_id = sample.id;
  bank.templates = std::move(templates);
  bank.rewards.reserve(bank.templates.size());
  for (const auto& t : bank.templates) {
    bank.rewards.push_back(total_reward(t, sample, vocab).total);
  }
  return bank;
}

}  // namespace cropdx

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltr/corpus.hpp"
#include "ltr/error.hpp"
#include "ltr/features.hpp"
#include "ltr/format.hpp"
#include "ltr/losses.hpp"
#include "ltr/model.hpp"
#include "ltr/rng.hpp"

// Policy optimization against a frozen reward model, framed as a contextual
// bandit: each episode presents one query's candidate explanations, the
// policy picks one, and the reward model's score for the pick is the reward.
// Updates use the clipped surrogate objective plus a KL penalty toward the
// initial (reference) policy. The quantity that decides "did this reward
// signal teach the policy anything" is the mean true score of the picks,
// which the reward model never sees.

namespace ltr {

struct PPOConfig {
  double clip_epsilon = 0.2;
  double kl_beta = 0.1;
  double policy_lr = 1e-2;
  double value_lr = 1e-2;
  int batch_episodes = 128;
  int minibatch = 4;  // episodes per gradient step
  int max_steps = 3000;
  double convergence_threshold = 0.8;
  std::uint64_t seed = 42;

  void validate() const {
    if (clip_epsilon <= 0.0 || clip_epsilon >= 1.0) {
      throw validation_error("clip_epsilon must be in (0, 1)");
    }
    if (kl_beta < 0.0) throw validation_error("kl_beta must be >= 0");
    if (policy_lr <= 0.0) throw validation_error("policy_lr must be > 0");
    if (value_lr <= 0.0) throw validation_error("value_lr must be > 0");
    if (batch_episodes <= 0) throw validation_error("batch_episodes must be > 0");
    if (minibatch <= 0 || minibatch > batch_episodes) {
      throw validation_error("minibatch must be in [1, batch_episodes]");
    }
    if (max_steps <= 0) throw validation_error("max_steps must be > 0");
  }
};

// Rolling window used to decide convergence of the mean true score.
inline constexpr int kConvergenceWindow = 20;

// Linear softmax policy over a query's candidates: logit_i = w . x_i.
struct SelectionPolicy {
  std::vector<double> weights;

  static SelectionPolicy initialized(int width, std::uint64_t seed) {
    SelectionPolicy p;
    p.weights.resize(static_cast<std::size_t>(width));
    SplitMix64 rng(stream_seed(seed, 0x90115cu));
    double lim = 1.0 / std::sqrt(static_cast<double>(width));
    for (double& w : p.weights) w = rng.uniform(-lim, lim);
    return p;
  }
};

// Linear state-value estimate over the mean candidate feature vector.
struct ValueBaseline {
  std::vector<double> weights;

  static ValueBaseline zeros(int width) {
    ValueBaseline b;
    b.weights.assign(static_cast<std::size_t>(width), 0.0);
    return b;
  }
};

// Everything the bandit needs, precomputed once per (dataset, reward model):
// per-candidate features, frozen rewards, true scores, and per-query mean
// feature vectors for the baseline.
struct BanditEnv {
  int feature_width = 0;
  std::vector<std::vector<FeatureVector>> features;  // [query][candidate]
  std::vector<std::vector<double>> rewards;          // [query][candidate]
  std::vector<std::vector<double>> true_scores;      // [query][candidate]
  std::vector<FeatureVector> mean_features;          // [query]
  std::vector<std::uint64_t> query_key;              // RNG stream id per query

  std::size_t query_count() const { return features.size(); }

  static BanditEnv from_rewards(
      const std::vector<GradedQuery>& queries,
      const std::vector<std::vector<double>>& rewards,
      const FeatureConfig& fcfg) {
    if (queries.empty()) throw usage_error("ppo: no queries");
    if (rewards.size() != queries.size()) {
      throw validation_error("ppo: rewards do not match query count");
    }
    BanditEnv env;
    env.feature_width = fcfg.width();
    env.features.reserve(queries.size());
    env.rewards = rewards;
    env.true_scores.reserve(queries.size());
    env.mean_features.reserve(queries.size());
    env.query_key.reserve(queries.size());
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      const GradedQuery& q = queries[qi];
      if (rewards[qi].size() != q.candidates.size()) {
        throw validation_error("ppo: rewards do not match candidate count");
      }
      auto feats = extract_query_features(q, fcfg);
      FeatureVector mean(static_cast<std::size_t>(env.feature_width), 0.0);
      for (const auto& f : feats) {
        for (std::size_t i = 0; i < f.size(); ++i) mean[i] += f[i];
      }
      for (double& v : mean) v /= static_cast<double>(feats.size());
      std::vector<double> truth;
      truth.reserve(q.candidates.size());
      for (const auto& c : q.candidates) truth.push_back(c.true_score);
      env.features.push_back(std::move(feats));
      env.true_scores.push_back(std::move(truth));
      env.mean_features.push_back(std::move(mean));
      env.query_key.push_back(fnv1a(q.instance.id));
    }
    return env;
  }

  // Rewards come from a frozen scorer checkpoint.
  static BanditEnv from_model(const std::vector<GradedQuery>& queries,
                              const ScorerModel& reward_model,
                              const FeatureConfig& fcfg) {
    if (reward_model.feature_width != fcfg.width()) {
      throw validation_error(
          "ppo: reward model feature width " +
          std::to_string(reward_model.feature_width) +
          " does not match feature config width " +
          std::to_string(fcfg.width()));
    }
    std::vector<std::vector<double>> rewards;
    rewards.reserve(queries.size());
    for (const auto& q : queries) {
      rewards.push_back(score_list(reward_model, q, fcfg));
    }
    return from_rewards(queries, rewards, fcfg);
  }

  // Oracle variant: the true scores themselves are the reward.
  static BanditEnv from_oracle(const std::vector<GradedQuery>& queries,
                               const FeatureConfig& fcfg) {
    std::vector<std::vector<double>> rewards;
    rewards.reserve(queries.size());
    for (const auto& q : queries) {
      std::vector<double> r;
      for (const auto& c : q.candidates) r.push_back(c.true_score);
      rewards.push_back(std::move(r));
    }
    return from_rewards(queries, rewards, fcfg);
  }
};

inline std::vector<double> policy_logits(const SelectionPolicy& p,
                                         const BanditEnv& env,
                                         std::size_t query) {
  const auto& feats = env.features[query];
  std::vector<double> logits(feats.size(), 0.0);
  for (std::size_t c = 0; c < feats.size(); ++c) {
    double z = 0.0;
    for (std::size_t i = 0; i < feats[c].size(); ++i) {
      z += p.weights[i] * feats[c][i];
    }
    logits[c] = z;
  }
  return logits;
}

inline std::vector<double> action_probs(const SelectionPolicy& p,
                                        const BanditEnv& env,
                                        std::size_t query) {
  return softmax(policy_logits(p, env, query));
}

inline double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

inline double kl_divergence(std::span<const double> p,
                            std::span<const double> q) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return kl;
}

struct Episode {
  std::size_t query = 0;
  std::size_t action = 0;
  double old_logprob = 0.0;
  double reward = 0.0;
  double true_score = 0.0;
  double advantage = 0.0;      // reward - baseline value
  double std_advantage = 0.0;  // filled during the update
};

// Plays one episode per entry of `query_indices`. Each episode has its own
// RNG stream keyed by (seed, query key, step), so results do not depend on
// episode order.
inline std::vector<Episode> rollout(const SelectionPolicy& policy,
                                    const ValueBaseline& baseline,
                                    const BanditEnv& env,
                                    std::span<const std::size_t> query_indices,
                                    std::uint64_t seed, int step) {
  std::vector<Episode> eps;
  eps.reserve(query_indices.size());
  for (std::size_t qi : query_indices) {
    auto probs = action_probs(policy, env, qi);
    SplitMix64 rng(stream_seed(seed, env.query_key[qi],
                               static_cast<std::uint64_t>(step)));
    double u = rng.uniform01();
    std::size_t action = probs.size() - 1;
    double cum = 0.0;
    for (std::size_t c = 0; c < probs.size(); ++c) {
      cum += probs[c];
      if (u < cum) {
        action = c;
        break;
      }
    }
    double value = 0.0;
    for (std::size_t i = 0; i < env.mean_features[qi].size(); ++i) {
      value += baseline.weights[i] * env.mean_features[qi][i];
    }
    Episode e;
    e.query = qi;
    e.action = action;
    e.old_logprob = std::log(std::max(probs[action], 1e-300));
    e.reward = env.rewards[qi][action];
    e.true_score = env.true_scores[qi][action];
    e.advantage = e.reward - value;
    eps.push_back(e);
  }
  return eps;
}

// One PPO update over a rollout batch: advantages are standardized across
// the batch, then minibatches take ascent steps on the clipped surrogate
// minus the KL penalty toward the reference policy, while the baseline takes
// descent steps on squared error against the observed rewards.
inline void ppo_update(SelectionPolicy& policy, ValueBaseline& baseline,
                       std::vector<Episode>& episodes, const BanditEnv& env,
                       const SelectionPolicy& reference,
                       const PPOConfig& cfg) {
  if (episodes.empty()) throw usage_error("ppo_update: no episodes");

  double mean = 0.0;
  for (const auto& e : episodes) mean += e.advantage;
  mean /= static_cast<double>(episodes.size());
  double var = 0.0;
  for (const auto& e : episodes) {
    var += (e.advantage - mean) * (e.advantage - mean);
  }
  double sd = std::sqrt(var / static_cast<double>(episodes.size()));
  for (auto& e : episodes) {
    e.std_advantage = sd > 1e-12 ? (e.advantage - mean) / sd : 0.0;
  }

  std::size_t width = policy.weights.size();
  std::vector<double> pol_grad(width), val_grad(width);

  for (std::size_t start = 0; start < episodes.size();
       start += static_cast<std::size_t>(cfg.minibatch)) {
    std::size_t end = std::min(episodes.size(),
                               start + static_cast<std::size_t>(cfg.minibatch));
    double inv = 1.0 / static_cast<double>(end - start);
    std::fill(pol_grad.begin(), pol_grad.end(), 0.0);
    std::fill(val_grad.begin(), val_grad.end(), 0.0);

    for (std::size_t e = start; e < end; ++e) {
      const Episode& ep = episodes[e];
      const auto& feats = env.features[ep.query];
      auto probs = action_probs(policy, env, ep.query);
      auto ref_probs = action_probs(reference, env, ep.query);

      double new_logprob = std::log(std::max(probs[ep.action], 1e-300));
      double ratio = std::exp(new_logprob - ep.old_logprob);
      double lo = 1.0 - cfg.clip_epsilon;
      double hi = 1.0 + cfg.clip_epsilon;
      double unclipped = ratio * ep.std_advantage;
      double clipped = std::clamp(ratio, lo, hi) * ep.std_advantage;

      // The clipped branch is constant in the parameters, so gradient flows
      // only when the unclipped term attains the min.
      if (unclipped <= clipped) {
        // d(ratio)/dw = ratio * dlogpi(a)/dw, dlogpi(a)/dw = x_a - E_pi[x].
        double coeff = ep.std_advantage * ratio * inv;
        for (std::size_t i = 0; i < width; ++i) {
          double expect = 0.0;
          for (std::size_t c = 0; c < feats.size(); ++c) {
            expect += probs[c] * feats[c][i];
          }
          pol_grad[i] += coeff * (feats[ep.action][i] - expect);
        }
      }

      if (cfg.kl_beta > 0.0) {
        // d KL(pi || ref) / d logit_c = pi_c * ((log pi_c - log ref_c) - KL)
        double kl = kl_divergence(probs, ref_probs);
        for (std::size_t c = 0; c < feats.size(); ++c) {
          double dlogit =
              probs[c] *
              ((std::log(std::max(probs[c], 1e-300)) -
                std::log(std::max(ref_probs[c], 1e-300))) -
               kl);
          for (std::size_t i = 0; i < width; ++i) {
            pol_grad[i] -= cfg.kl_beta * dlogit * feats[c][i] * inv;
          }
        }
      }

      double value = 0.0;
      const auto& mf = env.mean_features[ep.query];
      for (std::size_t i = 0; i < width; ++i) value += baseline.weights[i] * mf[i];
      double err = value - ep.reward;
      for (std::size_t i = 0; i < width; ++i) {
        val_grad[i] += 2.0 * err * mf[i] * inv;
      }
    }

    for (std::size_t i = 0; i < width; ++i) {
      policy.weights[i] += cfg.policy_lr * pol_grad[i];   // ascent
      baseline.weights[i] -= cfg.value_lr * val_grad[i];  // descent
    }
  }
}

struct UpdateRecord {
  int step = 0;  // 1-based
  double mean_reward = 0.0;
  double mean_true_score = 0.0;
  double kl_to_reference = 0.0;
  double policy_entropy = 0.0;
};

struct PPOHistory {
  std::vector<UpdateRecord> records;
  std::optional<int> converged_at;
};

// Full training run: alternating rollouts and updates until the rolling mean
// (window 20) of the picks' true scores reaches the threshold, or max_steps.
inline PPOHistory run_ppo(const BanditEnv& env, const PPOConfig& cfg) {
  cfg.validate();
  SelectionPolicy policy =
      SelectionPolicy::initialized(env.feature_width, cfg.seed);
  const SelectionPolicy reference = policy;
  ValueBaseline baseline = ValueBaseline::zeros(env.feature_width);

  PPOHistory history;
  for (int step = 1; step <= cfg.max_steps; ++step) {
    SplitMix64 pick_rng(stream_seed(cfg.seed, 0xba7c4e5u,
                                    static_cast<std::uint64_t>(step)));
    std::vector<std::size_t> indices(
        static_cast<std::size_t>(cfg.batch_episodes));
    for (auto& qi : indices) {
      qi = static_cast<std::size_t>(pick_rng.below(env.query_count()));
    }

    auto episodes = rollout(policy, baseline, env, indices, cfg.seed, step);
    ppo_update(policy, baseline, episodes, env, reference, cfg);

    UpdateRecord rec;
    rec.step = step;
    for (const auto& e : episodes) {
      rec.mean_reward += e.reward;
      rec.mean_true_score += e.true_score;
    }
    rec.mean_reward /= static_cast<double>(episodes.size());
    rec.mean_true_score /= static_cast<double>(episodes.size());
    double kl_sum = 0.0, ent_sum = 0.0;
    for (std::size_t qi : indices) {
      auto probs = action_probs(policy, env, qi);
      auto ref_probs = action_probs(reference, env, qi);
      kl_sum += kl_divergence(probs, ref_probs);
      ent_sum += entropy(probs);
    }
    rec.kl_to_reference = kl_sum / static_cast<double>(indices.size());
    rec.policy_entropy = ent_sum / static_cast<double>(indices.size());
    history.records.push_back(rec);

    if (static_cast<int>(history.records.size()) >= kConvergenceWindow) {
      double window_mean = 0.0;
      for (int i = 0; i < kConvergenceWindow; ++i) {
        window_mean +=
            history.records[history.records.size() - 1 - i].mean_true_score;
      }
      window_mean /= static_cast<double>(kConvergenceWindow);
      if (window_mean >= cfg.convergence_threshold) {
        history.converged_at = step;
        break;
      }
    }
  }
  return history;
}

inline PPOHistory run_ppo(const ScorerModel& reward_model,
                          const std::vector<GradedQuery>& queries,
                          const FeatureConfig& fcfg, const PPOConfig& cfg) {
  return run_ppo(BanditEnv::from_model(queries, reward_model, fcfg), cfg);
}

// ---------------------------------------------------------------------------
// History serialization (JSONL, one record per update).

inline std::string ppo_history_jsonl(const PPOHistory& h) {
  std::string out;
  for (const auto& r : h.records) {
    out += "{\"step\":" + std::to_string(r.step);
    out += ",\"mean_reward\":" + fmt_fixed(r.mean_reward, 6);
    out += ",\"mean_true_score\":" + fmt_fixed(r.mean_true_score, 6);
    out += ",\"kl_to_reference\":" + fmt_fixed(r.kl_to_reference, 6);
    out += ",\"policy_entropy\":" + fmt_fixed(r.policy_entropy, 6);
    out += "}\n";
  }
  return out;
}

inline void write_ppo_history(const PPOHistory& h,
                              const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open history for writing: " + path.string());
  out << ppo_history_jsonl(h);
  if (!out) throw io_error("failed writing history: " + path.string());
}

}  // namespace ltr

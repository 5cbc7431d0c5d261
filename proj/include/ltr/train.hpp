#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ltr/corpus.hpp"
#include "ltr/error.hpp"
#include "ltr/features.hpp"
#include "ltr/losses.hpp"
#include "ltr/metrics.hpp"
#include "ltr/model.hpp"
#include "ltr/rng.hpp"

// Mini-batch training of the scoring head. Batches are whole queries: each
// query's candidates are scored, the objective turns the score list into
// per-candidate gradients, and those flow back through the shared model.
// Validation NDCG@5 drives early stopping; the best epoch's parameters are
// what the caller gets back.

namespace ltr {

struct TrainConfig {
  double learning_rate = 2e-3;
  int batch_queries = 16;
  int warmup_steps = 500;
  int max_epochs = 50;
  int patience = 10;
  double grad_clip = 1.0;
  double weight_decay = 0.01;
  int hidden_units = 0;     // 0 = width/2, floored at 8
  double dropout = 0.1;
  std::uint64_t seed = 42;

  void validate() const {
    // 0 is allowed: it freezes the model, which the tests use to pin down
    // the early-stopping schedule.
    if (learning_rate < 0.0) throw validation_error("learning_rate must be >= 0");
    if (batch_queries <= 0) throw validation_error("batch_queries must be > 0");
    if (warmup_steps <= 0) throw validation_error("warmup_steps must be > 0");
    if (max_epochs <= 0) throw validation_error("max_epochs must be > 0");
    if (patience <= 0) throw validation_error("patience must be > 0");
    if (grad_clip <= 0.0) throw validation_error("grad_clip must be > 0");
    if (weight_decay < 0.0) throw validation_error("weight_decay must be >= 0");
    if (dropout < 0.0 || dropout >= 1.0) {
      throw validation_error("dropout must be in [0, 1)");
    }
  }
};

// Scales gradients so their global norm is at most `max_norm`; returns the
// pre-clip norm.
inline double clip_global_norm(Gradients& g, double max_norm) {
  double norm = g.global_norm();
  if (norm > max_norm && norm > 0.0) {
    g.scale(max_norm / norm);
  }
  return norm;
}

// AdamW with decoupled weight decay (weights only, not biases) and a linear
// learning-rate warmup followed by a constant rate.
struct AdamW {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double base_lr;
  double weight_decay;
  int warmup_steps;

  long long step_count = 0;
  double last_lr = 0.0;
  Gradients m, v;

  AdamW(const ScorerModel& model, const TrainConfig& cfg)
      : base_lr(cfg.learning_rate),
        weight_decay(cfg.weight_decay),
        warmup_steps(cfg.warmup_steps),
        m(Gradients::zeros_like(model)),
        v(Gradients::zeros_like(model)) {}

  double rate_at(long long step) const {
    if (step < warmup_steps) {
      return base_lr * static_cast<double>(step) /
             static_cast<double>(warmup_steps);
    }
    return base_lr;
  }

  void step(ScorerModel& model, const Gradients& g) {
    ++step_count;
    last_lr = rate_at(step_count);
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));

    auto update = [&](double& param, double& m_i, double& v_i, double grad,
                      bool decay) {
      m_i = beta1 * m_i + (1.0 - beta1) * grad;
      v_i = beta2 * v_i + (1.0 - beta2) * grad * grad;
      double mhat = m_i / bc1;
      double vhat = v_i / bc2;
      param -= last_lr * (mhat / (std::sqrt(vhat) + eps));
      if (decay) param -= last_lr * weight_decay * param;
    };

    for (std::size_t i = 0; i < model.w1.size(); ++i) {
      update(model.w1[i], m.w1[i], v.w1[i], g.w1[i], true);
    }
    for (std::size_t i = 0; i < model.b1.size(); ++i) {
      update(model.b1[i], m.b1[i], v.b1[i], g.b1[i], false);
    }
    for (std::size_t i = 0; i < model.w2.size(); ++i) {
      update(model.w2[i], m.w2[i], v.w2[i], g.w2[i], true);
    }
    update(model.b2, m.b2, v.b2, g.b2, false);
  }
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  std::optional<double> train_loss;
  double val_ndcg5 = 0.0;
  double val_separation = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> records;
  int best_epoch = 0;
};

struct TrainResult {
  ScorerModel model;
  TrainHistory history;
};

namespace detail {

struct PreparedQuery {
  std::vector<FeatureVector> features;
  std::vector<double> targets;
};

inline std::vector<PreparedQuery> prepare(
    const std::vector<GradedQuery>& queries, const FeatureConfig& fcfg) {
  std::vector<PreparedQuery> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    PreparedQuery p;
    p.features = extract_query_features(q, fcfg);
    p.targets.reserve(q.candidates.size());
    for (const auto& c : q.candidates) p.targets.push_back(c.true_score);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace detail

// Trains a fresh model on `train_queries`, early-stopping on validation
// NDCG@5 (ties broken by lower training loss). Throws if the loss or any
// gradient stops being finite.
inline TrainResult train(const std::vector<GradedQuery>& train_queries,
                         const std::vector<GradedQuery>& val_queries,
                         LossId loss_id, const LossParams& loss_params,
                         const FeatureConfig& fcfg, const TrainConfig& cfg) {
  cfg.validate();
  fcfg.validate();
  if (train_queries.empty()) throw usage_error("train: no training queries");
  if (val_queries.empty()) throw usage_error("train: no validation queries");

  auto train_data = detail::prepare(train_queries, fcfg);
  auto val_data = detail::prepare(val_queries, fcfg);

  ScorerModel model = ScorerModel::initialized(fcfg.width(), cfg.seed,
                                               cfg.hidden_units, cfg.dropout);
  AdamW opt(model, cfg);
  SplitMix64 shuffle_rng(stream_seed(cfg.seed, 0x50f17eu));
  SplitMix64 dropout_rng(stream_seed(cfg.seed, 0xd00u));

  auto validate_model = [&]() {
    std::vector<double> pooled_pred, pooled_targ;
    double ndcg_sum = 0.0;
    for (const auto& q : val_data) {
      std::vector<double> scores(q.features.size());
      for (std::size_t c = 0; c < q.features.size(); ++c) {
        scores[c] = forward(model, q.features[c]);
      }
      ndcg_sum += ndcg_at_k(scores, q.targets, 5);
      pooled_pred.insert(pooled_pred.end(), scores.begin(), scores.end());
      pooled_targ.insert(pooled_targ.end(), q.targets.begin(), q.targets.end());
    }
    double ndcg = ndcg_sum / static_cast<double>(val_data.size());
    double sep = separation_ratio(pooled_pred, pooled_targ);
    return std::pair<double, double>(ndcg, sep);
  };

  TrainHistory history;
  ScorerModel best_model = model;
  double best_ndcg = -std::numeric_limits<double>::infinity();
  double best_loss = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  int stall = 0;

  std::vector<std::size_t> order(train_data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  ForwardCache cache;
  std::vector<ForwardCache> caches;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle(order, shuffle_rng);

    double loss_sum = 0.0;
    std::size_t loss_count = 0;

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_queries)) {
      std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(cfg.batch_queries));
      double inv_batch = 1.0 / static_cast<double>(end - start);

      Gradients grads = Gradients::zeros_like(model);
      for (std::size_t b = start; b < end; ++b) {
        const auto& q = train_data[order[b]];
        std::size_t n = q.features.size();
        caches.resize(n);
        std::vector<double> scores(n);
        for (std::size_t c = 0; c < n; ++c) {
          scores[c] =
              forward(model, q.features[c], true, &dropout_rng, &caches[c]);
        }
        LossResult lr = evaluate_loss(loss_id, scores, q.targets, loss_params);
        if (lr.loss) {
          if (!std::isfinite(*lr.loss)) {
            throw validation_error("train: loss is not finite at epoch " +
                                   std::to_string(epoch));
          }
          loss_sum += *lr.loss;
          ++loss_count;
        }
        for (std::size_t c = 0; c < n; ++c) {
          backward(model, caches[c], lr.score_gradients[c] * inv_batch, grads);
        }
      }
      if (!grads.finite()) {
        throw validation_error("train: gradients are not finite at epoch " +
                               std::to_string(epoch));
      }
      clip_global_norm(grads, cfg.grad_clip);
      opt.step(model, grads);
    }

    auto [val_ndcg, val_sep] = validate_model();
    EpochRecord rec;
    rec.epoch = epoch;
    if (loss_count > 0) {
      rec.train_loss = loss_sum / static_cast<double>(loss_count);
    }
    rec.val_ndcg5 = val_ndcg;
    rec.val_separation = val_sep;
    history.records.push_back(rec);

    double epoch_loss =
        rec.train_loss ? *rec.train_loss : std::numeric_limits<double>::infinity();
    if (val_ndcg > best_ndcg) {
      best_ndcg = val_ndcg;
      best_loss = epoch_loss;
      best_epoch = epoch;
      best_model = model;
      stall = 0;
    } else {
      if (val_ndcg == best_ndcg && epoch_loss < best_loss) {
        best_loss = epoch_loss;
        best_epoch = epoch;
        best_model = model;
      }
      ++stall;
      if (stall >= cfg.patience) break;
    }
  }

  history.best_epoch = best_epoch;
  return TrainResult{std::move(best_model), std::move(history)};
}

// ---------------------------------------------------------------------------
// History serialization (CSV, one row per epoch).

inline std::string history_csv(const TrainHistory& h) {
  std::string out = "epoch,train_loss,val_ndcg5,val_separation\n";
  for (const auto& r : h.records) {
    out += std::to_string(r.epoch);
    out += ',';
    if (r.train_loss) out += fmt_fixed(*r.train_loss, 6);
    out += ',';
    out += fmt_fixed(r.val_ndcg5, 6);
    out += ',';
    out += fmt_fixed(r.val_separation, 6);
    out += '\n';
  }
  return out;
}

}  // namespace ltr

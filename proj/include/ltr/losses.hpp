#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ltr/error.hpp"
#include "ltr/metrics.hpp"

// Training objectives over one query's candidate list. Every objective
// returns per-candidate score gradients; most also return a scalar loss.
// The rank-swap objective only defines gradients, so its loss is absent.
//
// All of the ranking objectives depend on score differences only, which is
// what lets a trained model spread its outputs: nothing anchors them to the
// target scale. Plain squared error is the deliberate exception.

namespace ltr {

struct LossResult {
  std::optional<double> loss;
  std::vector<double> score_gradients;
};

inline double stable_sigmoid(double x) {
  if (x >= 0.0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  if (x > 35.0) return x;
  return std::log1p(std::exp(x));
}

inline std::vector<double> softmax(std::span<const double> x) {
  double mx = *std::max_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

inline void check_loss_input(std::span<const double> predicted,
                             std::span<const double> targets,
                             std::size_t min_size) {
  if (predicted.size() != targets.size()) {
    throw validation_error("loss: predicted and target lengths differ");
  }
  if (predicted.size() < min_size) {
    throw validation_error("loss: list is too short");
  }
}

// ---------------------------------------------------------------------------
// Listwise cross-entropy between the target and predicted softmax
// distributions. Gradient: softmax(predicted) - softmax(targets).
inline LossResult listnet(std::span<const double> predicted,
                          std::span<const double> targets) {
  check_loss_input(predicted, targets, 2);
  auto pf = softmax(predicted);
  auto py = softmax(targets);
  double loss = 0.0;
  for (std::size_t i = 0; i < pf.size(); ++i) {
    loss -= py[i] * std::log(pf[i]);
  }
  LossResult r;
  r.loss = loss;
  r.score_gradients.resize(pf.size());
  for (std::size_t i = 0; i < pf.size(); ++i) {
    r.score_gradients[i] = pf[i] - py[i];
  }
  return r;
}

// ---------------------------------------------------------------------------
// Pairwise logistic loss over every pair whose targets are strictly ordered,
// normalized by the number of such pairs.
inline LossResult ranknet(std::span<const double> predicted,
                          std::span<const double> targets) {
  check_loss_input(predicted, targets, 2);
  double loss = 0.0;
  std::vector<double> grad(predicted.size(), 0.0);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    for (std::size_t j = 0; j < predicted.size(); ++j) {
      if (!(targets[i] > targets[j])) continue;
      ++pairs;
      double d = predicted[i] - predicted[j];
      loss += softplus(-d);
      double g = stable_sigmoid(d) - 1.0;  // d/dd of -log sigmoid(d)
      grad[i] += g;
      grad[j] -= g;
    }
  }
  if (pairs == 0) {
    throw validation_error("ranknet: targets contain no ordered pair");
  }
  LossResult r;
  r.loss = loss / static_cast<double>(pairs);
  r.score_gradients = std::move(grad);
  for (double& g : r.score_gradients) g /= static_cast<double>(pairs);
  return r;
}

// ---------------------------------------------------------------------------
// Rank-swap weighted pairwise gradients: each ordered pair contributes
// lambda = |ΔNDCG@k under swapping the pair| * sigmoid(-(p_i - p_j)),
// pushing the higher-target item up and the lower one down. Only gradients
// are defined. k = 0 means the full list depth.
inline LossResult lambdarank_grads(std::span<const double> predicted,
                                   std::span<const double> targets,
                                   std::size_t k = 0) {
  check_loss_input(predicted, targets, 2);
  std::size_t n = predicted.size();
  if (k == 0) k = n;

  auto order = ranked_indices(predicted);
  std::vector<std::size_t> pos(n);
  for (std::size_t r = 0; r < n; ++r) pos[order[r]] = r;

  auto ideal_order = ranked_indices(targets);
  double idcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, n); ++r) {
    idcg += ndcg_gain(targets[ideal_order[r]]) * ndcg_discount(r + 1);
  }

  LossResult res;
  res.score_gradients.assign(n, 0.0);
  if (idcg == 0.0) return res;  // every gain is zero: nothing to move

  auto discount_at = [&](std::size_t p) {
    return p < k ? ndcg_discount(p + 1) : 0.0;
  };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(targets[i] > targets[j])) continue;
      double dgain = ndcg_gain(targets[i]) - ndcg_gain(targets[j]);
      double ddisc = discount_at(pos[i]) - discount_at(pos[j]);
      double delta = std::abs(dgain * ddisc) / idcg;
      double lambda = delta * stable_sigmoid(-(predicted[i] - predicted[j]));
      res.score_gradients[i] -= lambda;
      res.score_gradients[j] += lambda;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Smooth-rank NDCG surrogate. Each item's rank is approximated by
// r_i = 1 + sum_{j != i} sigmoid((p_j - p_i) / temperature) and the loss is
// the negative smooth NDCG over the full list. As temperature approaches 0
// the loss approaches -NDCG of the hard ranking.
inline LossResult approx_ndcg(std::span<const double> predicted,
                              std::span<const double> targets,
                              double temperature = 1.0) {
  check_loss_input(predicted, targets, 2);
  if (!(temperature > 0.0)) {
    throw validation_error("approx_ndcg: temperature must be positive");
  }
  std::size_t n = predicted.size();

  auto ideal_order = ranked_indices(targets);
  double idcg = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    idcg += ndcg_gain(targets[ideal_order[r]]) * ndcg_discount(r + 1);
  }
  LossResult res;
  res.score_gradients.assign(n, 0.0);
  if (idcg == 0.0) {
    res.loss = 0.0;
    return res;
  }

  // s[j][i] = sigmoid((p_j - p_i) / T)
  std::vector<std::vector<double>> s(n, std::vector<double>(n, 0.0));
  std::vector<double> rhat(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      s[j][i] = stable_sigmoid((predicted[j] - predicted[i]) / temperature);
      rhat[i] += s[j][i];
    }
  }

  const double ln2 = std::log(2.0);
  double loss = 0.0;
  std::vector<double> dloss_drhat(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double g = ndcg_gain(targets[i]);
    double l1p = std::log1p(rhat[i]);  // ln(1 + r)
    loss -= g * ln2 / l1p;
    // d/dr of [g * ln2 / ln(1+r)] is -g * ln2 / ((1+r) * ln(1+r)^2);
    // the loss negates the term, so:
    dloss_drhat[i] = g * ln2 / ((1.0 + rhat[i]) * l1p * l1p);
  }
  loss /= idcg;
  for (double& d : dloss_drhat) d /= idcg;

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double sd = s[j][i] * (1.0 - s[j][i]) / temperature;
      // rhat[i] falls as p_i grows and rises as p_j grows.
      res.score_gradients[i] -= dloss_drhat[i] * sd;
      res.score_gradients[j] += dloss_drhat[i] * sd;
    }
  }
  res.loss = loss;
  return res;
}

// ---------------------------------------------------------------------------
// Pointwise squared error against the target scores, mean over the list.
inline LossResult mse(std::span<const double> predicted,
                      std::span<const double> targets) {
  check_loss_input(predicted, targets, 1);
  double n = static_cast<double>(predicted.size());
  LossResult r;
  r.score_gradients.resize(predicted.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    double d = predicted[i] - targets[i];
    loss += d * d;
    r.score_gradients[i] = 2.0 * d / n;
  }
  r.loss = loss / n;
  return r;
}

// ---------------------------------------------------------------------------
// Preference loss over pairs whose target gap is at least margin_threshold:
// the higher-target candidate is "preferred" and the pair contributes
// -log sigmoid(p_preferred - p_other). With threshold 0 this is exactly the
// pairwise logistic loss above.
inline LossResult bradley_terry(std::span<const double> predicted,
                                std::span<const double> targets,
                                double margin_threshold) {
  check_loss_input(predicted, targets, 2);
  if (margin_threshold < 0.0) {
    throw validation_error("bradley_terry: margin_threshold must be >= 0");
  }
  double loss = 0.0;
  std::vector<double> grad(predicted.size(), 0.0);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    for (std::size_t j = 0; j < predicted.size(); ++j) {
      if (!(targets[i] > targets[j])) continue;
      if (targets[i] - targets[j] < margin_threshold) continue;
      ++pairs;
      double d = predicted[i] - predicted[j];
      loss += softplus(-d);
      double g = stable_sigmoid(d) - 1.0;
      grad[i] += g;
      grad[j] -= g;
    }
  }
  if (pairs == 0) {
    throw validation_error(
        "bradley_terry: no target pair separated by margin_threshold");
  }
  LossResult r;
  r.loss = loss / static_cast<double>(pairs);
  r.score_gradients = std::move(grad);
  for (double& g : r.score_gradients) g /= static_cast<double>(pairs);
  return r;
}

// ---------------------------------------------------------------------------
// Dispatch

enum class LossId { mse, binary_bt, ranknet, lambdarank, approx_ndcg, listnet };

inline constexpr std::array<LossId, 6> kAllLosses = {
    LossId::mse,        LossId::binary_bt,   LossId::ranknet,
    LossId::lambdarank, LossId::approx_ndcg, LossId::listnet};

inline std::string_view to_string(LossId id) {
  switch (id) {
    case LossId::mse: return "mse";
    case LossId::binary_bt: return "binary_bt";
    case LossId::ranknet: return "ranknet";
    case LossId::lambdarank: return "lambdarank";
    case LossId::approx_ndcg: return "approx_ndcg";
    case LossId::listnet: return "listnet";
  }
  return "?";
}

inline std::optional<LossId> parse_loss_id(std::string_view s) {
  for (LossId id : kAllLosses) {
    if (s == to_string(id)) return id;
  }
  return std::nullopt;
}

struct LossParams {
  double approx_ndcg_temperature = 1.0;
  double bt_margin = 0.1;
  std::size_t lambdarank_k = 0;  // 0 = full list depth
};

inline LossResult evaluate_loss(LossId id, std::span<const double> predicted,
                                std::span<const double> targets,
                                const LossParams& params = {}) {
  switch (id) {
    case LossId::mse: return mse(predicted, targets);
    case LossId::binary_bt:
      return bradley_terry(predicted, targets, params.bt_margin);
    case LossId::ranknet: return ranknet(predicted, targets);
    case LossId::lambdarank:
      return lambdarank_grads(predicted, targets, params.lambdarank_k);
    case LossId::approx_ndcg:
      return approx_ndcg(predicted, targets, params.approx_ndcg_temperature);
    case LossId::listnet: return listnet(predicted, targets);
  }
  throw usage_error("unknown loss id");
}

}  // namespace ltr

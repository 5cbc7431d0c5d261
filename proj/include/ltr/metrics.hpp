#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "ltr/error.hpp"

// Ranking quality and score-separation metrics.
//
// One gain/discount convention is used everywhere NDCG appears (the metric
// itself, rank-swap deltas, and the smooth-rank training objective):
// gain(t) = 2^t - 1 and discount(rank) = 1 / log2(rank + 1), with ranks
// starting at 1. Sorting by predicted score is descending and stable, so
// tied predictions keep their original order.

namespace ltr {

inline double ndcg_gain(double target) { return std::exp2(target) - 1.0; }

inline double ndcg_discount(std::size_t rank) {
  return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
}

inline void check_same_size(std::span<const double> predicted,
                            std::span<const double> targets) {
  if (predicted.size() != targets.size()) {
    throw validation_error("predicted and target lists differ in length");
  }
  if (predicted.empty()) {
    throw validation_error("empty score list");
  }
}

// Indices of `scores` in descending score order; ties keep original order.
inline std::vector<std::size_t> ranked_indices(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return idx;
}

inline double dcg_at_k(std::span<const double> gains_in_rank_order,
                       std::size_t k) {
  double dcg = 0.0;
  std::size_t depth = std::min(k, gains_in_rank_order.size());
  for (std::size_t r = 0; r < depth; ++r) {
    dcg += gains_in_rank_order[r] * ndcg_discount(r + 1);
  }
  return dcg;
}

// NDCG@k of `predicted` against `targets`. Degenerate lists whose ideal DCG
// is zero (all gains zero) score 1.0: there is nothing to rank.
inline double ndcg_at_k(std::span<const double> predicted,
                        std::span<const double> targets, std::size_t k) {
  check_same_size(predicted, targets);
  if (k == 0) throw validation_error("ndcg_at_k: k must be positive");

  auto order = ranked_indices(predicted);
  std::vector<double> gains(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    gains[r] = ndcg_gain(targets[order[r]]);
  }
  double dcg = dcg_at_k(gains, k);

  auto ideal_order = ranked_indices(targets);
  std::vector<double> ideal_gains(ideal_order.size());
  for (std::size_t r = 0; r < ideal_order.size(); ++r) {
    ideal_gains[r] = ndcg_gain(targets[ideal_order[r]]);
  }
  double idcg = dcg_at_k(ideal_gains, k);

  if (idcg == 0.0) return 1.0;
  return dcg / idcg;
}

// Average precision with `relevant` defined as target >= threshold. Queries
// with no relevant candidate contribute 0.
inline double average_precision(std::span<const double> predicted,
                                std::span<const double> targets,
                                double relevance_threshold) {
  check_same_size(predicted, targets);
  auto order = ranked_indices(predicted);
  double hits = 0.0, sum = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (targets[order[r]] >= relevance_threshold) {
      hits += 1.0;
      sum += hits / static_cast<double>(r + 1);
    }
  }
  if (hits == 0.0) return 0.0;
  return sum / hits;
}

inline double reciprocal_rank(std::span<const double> predicted,
                              std::span<const double> targets,
                              double relevance_threshold) {
  check_same_size(predicted, targets);
  auto order = ranked_indices(predicted);
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (targets[order[r]] >= relevance_threshold) {
      return 1.0 / static_cast<double>(r + 1);
    }
  }
  return 0.0;
}

// Fractional (average) ranks, 1-based: ties share the mean of the positions
// they occupy.
inline std::vector<double> fractional_ranks(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size(), 0.0);
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && values[idx[j + 1]] == values[idx[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t m = i; m <= j; ++m) ranks[idx[m]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// Spearman rank correlation: Pearson over fractional ranks.
inline double spearman_rho(std::span<const double> predicted,
                           std::span<const double> targets) {
  check_same_size(predicted, targets);
  auto rp = fractional_ranks(predicted);
  auto rt = fractional_ranks(targets);
  return pearson(rp, rt);
}

inline long long count_tied_pairs(std::span<const double> values) {
  long long ties = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      if (values[i] == values[j]) ++ties;
    }
  }
  return ties;
}

// Kendall tau-b, with the usual tie correction. Returns 0 when either side
// is entirely tied.
inline double kendall_tau(std::span<const double> predicted,
                          std::span<const double> targets) {
  check_same_size(predicted, targets);
  long long concordant = 0, discordant = 0;
  std::size_t n = predicted.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double dp = predicted[i] - predicted[j];
      double dt = targets[i] - targets[j];
      if (dp == 0.0 || dt == 0.0) continue;
      if ((dp > 0.0) == (dt > 0.0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  long long n0 = static_cast<long long>(n) * (static_cast<long long>(n) - 1) / 2;
  double denom = std::sqrt(static_cast<double>(n0 - count_tied_pairs(predicted)) *
                           static_cast<double>(n0 - count_tied_pairs(targets)));
  if (denom == 0.0) return 0.0;
  return (static_cast<double>(concordant) - static_cast<double>(discordant)) /
         denom;
}

inline double population_std(std::span<const double> values) {
  double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / n);
}

// Ratio of predicted-score spread to target-score spread, pooled over every
// candidate in the dataset. 1.0 means the model reproduces the full spread;
// values near 0 mean the predictions collapsed toward a constant.
inline double separation_ratio(std::span<const double> predicted_all,
                               std::span<const double> targets_all) {
  check_same_size(predicted_all, targets_all);
  double st = population_std(targets_all);
  if (st == 0.0) {
    throw validation_error("separation_ratio: target scores have no spread");
  }
  return population_std(predicted_all) / st;
}

// Mean over queries of (max - min) predicted score within the query.
inline double score_range(const std::vector<std::vector<double>>& per_query) {
  if (per_query.empty()) throw validation_error("score_range: no queries");
  double sum = 0.0;
  for (const auto& scores : per_query) {
    if (scores.empty()) throw validation_error("score_range: empty query");
    auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    sum += *hi - *lo;
  }
  return sum / static_cast<double>(per_query.size());
}

// Fraction of within-query candidate pairs ordered the same way by the model
// and by the gold scores. A model tie on a pair the gold scores do not tie
// counts as a disagreement. Averaged per query, then over queries.
inline double pairwise_agreement(
    const std::vector<std::vector<double>>& model_per_query,
    const std::vector<std::vector<double>>& gold_per_query) {
  if (model_per_query.size() != gold_per_query.size() ||
      model_per_query.empty()) {
    throw validation_error("pairwise_agreement: query lists mismatch");
  }
  double total = 0.0;
  for (std::size_t q = 0; q < model_per_query.size(); ++q) {
    const auto& m = model_per_query[q];
    const auto& g = gold_per_query[q];
    if (m.size() != g.size() || m.size() < 2) {
      throw validation_error("pairwise_agreement: query needs >= 2 scores");
    }
    long long agree = 0, pairs = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = i + 1; j < m.size(); ++j) {
        ++pairs;
        double dm = m[i] - m[j];
        double dg = g[i] - g[j];
        if (dg == 0.0) {
          if (dm == 0.0) ++agree;
        } else if (dm != 0.0 && (dm > 0.0) == (dg > 0.0)) {
          ++agree;
        }
      }
    }
    total += static_cast<double>(agree) / static_cast<double>(pairs);
  }
  return total / static_cast<double>(model_per_query.size());
}

// ---------------------------------------------------------------------------
// Aggregate report

inline constexpr double kRelevanceThreshold = 0.7;

struct RankingReport {
  std::map<std::size_t, double> ndcg_at;  // k -> mean NDCG@k
  double map = 0.0;
  double mrr = 0.0;
  double spearman = 0.0;  // mean per-query rho
  double kendall = 0.0;   // mean per-query tau
  double separation = 0.0;
  double range = 0.0;
  std::size_t query_count = 0;
};

inline RankingReport build_report(
    const std::vector<std::vector<double>>& predicted_per_query,
    const std::vector<std::vector<double>>& targets_per_query,
    const std::vector<std::size_t>& ks = {1, 3, 5},
    double relevance_threshold = kRelevanceThreshold) {
  if (predicted_per_query.size() != targets_per_query.size() ||
      predicted_per_query.empty()) {
    throw validation_error("build_report: query lists mismatch");
  }
  RankingReport rep;
  rep.query_count = predicted_per_query.size();
  double n = static_cast<double>(rep.query_count);

  std::vector<double> pooled_pred, pooled_targ;
  for (std::size_t q = 0; q < predicted_per_query.size(); ++q) {
    const auto& p = predicted_per_query[q];
    const auto& t = targets_per_query[q];
    for (std::size_t k : ks) rep.ndcg_at[k] += ndcg_at_k(p, t, k);
    rep.map += average_precision(p, t, relevance_threshold);
    rep.mrr += reciprocal_rank(p, t, relevance_threshold);
    rep.spearman += spearman_rho(p, t);
    rep.kendall += kendall_tau(p, t);
    pooled_pred.insert(pooled_pred.end(), p.begin(), p.end());
    pooled_targ.insert(pooled_targ.end(), t.begin(), t.end());
  }
  for (auto& [k, v] : rep.ndcg_at) v /= n;
  rep.map /= n;
  rep.mrr /= n;
  rep.spearman /= n;
  rep.kendall /= n;
  rep.separation = separation_ratio(pooled_pred, pooled_targ);
  rep.range = score_range(predicted_per_query);
  return rep;
}

}  // namespace ltr

// Brute-force reference implementations of the ranking metrics, written
// independently of the library versions (selection-by-scan instead of sort,
// direct pair loops), plus a central-difference gradient checker. Tests
// compare the fast implementations against these.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

// Descending order by value; among equals the lower original index wins.
// Built by repeated scan-for-max rather than a sort.
inline std::vector<std::size_t> ranking(const std::vector<double>& v) {
  std::vector<std::size_t> order;
  std::vector<bool> used(v.size(), false);
  for (std::size_t round = 0; round < v.size(); ++round) {
    std::size_t best = v.size();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (used[i]) continue;
      if (best == v.size() || v[i] > v[best]) best = i;
    }
    used[best] = true;
    order.push_back(best);
  }
  return order;
}

inline double dcg(const std::vector<double>& pred,
                  const std::vector<double>& targ, std::size_t k) {
  auto order = ranking(pred);
  double total = 0.0;
  for (std::size_t r = 0; r < order.size() && r < k; ++r) {
    double gain = std::pow(2.0, targ[order[r]]) - 1.0;
    total += gain / std::log2(static_cast<double>(r) + 2.0);
  }
  return total;
}

inline double ndcg(const std::vector<double>& pred,
                   const std::vector<double>& targ, std::size_t k) {
  double ideal = dcg(targ, targ, k);
  if (ideal == 0.0) return 1.0;
  return dcg(pred, targ, k) / ideal;
}

inline double average_precision(const std::vector<double>& pred,
                                const std::vector<double>& targ,
                                double threshold) {
  auto order = ranking(pred);
  double hits = 0.0, sum = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (targ[order[r]] >= threshold) {
      hits += 1.0;
      sum += hits / (static_cast<double>(r) + 1.0);
    }
  }
  if (hits == 0.0) return 0.0;
  return sum / hits;
}

inline double reciprocal_rank(const std::vector<double>& pred,
                              const std::vector<double>& targ,
                              double threshold) {
  auto order = ranking(pred);
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (targ[order[r]] >= threshold) {
      return 1.0 / (static_cast<double>(r) + 1.0);
    }
  }
  return 0.0;
}

// Fractional average rank: 1 + count above + half the count of equals.
inline std::vector<double> avg_ranks(const std::vector<double>& v) {
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double above = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (j == i) continue;
      if (v[j] > v[i]) above += 1.0;
      if (v[j] == v[i]) equal += 1.0;
    }
    ranks[i] = 1.0 + above + equal / 2.0;
  }
  return ranks;
}

inline double spearman(const std::vector<double>& a,
                       const std::vector<double>& b) {
  auto ra = avg_ranks(a);
  auto rb = avg_ranks(b);
  std::size_t n = ra.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  if (da == 0.0 || db == 0.0) return 0.0;
  return num / std::sqrt(da * db);
}

inline double kendall(const std::vector<double>& a,
                      const std::vector<double>& b) {
  std::size_t n = a.size();
  double concordant = 0.0, discordant = 0.0;
  double ties_a = 0.0, ties_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double da = a[i] - a[j], db = b[i] - b[j];
      if (da == 0.0) ties_a += 1.0;
      if (db == 0.0) ties_b += 1.0;
      if (da == 0.0 || db == 0.0) continue;
      if (da * db > 0.0) {
        concordant += 1.0;
      } else {
        discordant += 1.0;
      }
    }
  }
  double n0 = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
  double denom = std::sqrt((n0 - ties_a) * (n0 - ties_b));
  if (denom == 0.0) return 0.0;
  return (concordant - discordant) / denom;
}

// Central-difference derivative of f along coordinate i.
inline double central_diff(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, std::size_t i, double h = 1e-6) {
  double orig = x[i];
  x[i] = orig + h;
  double up = f(x);
  x[i] = orig - h;
  double down = f(x);
  return (up - down) / (2.0 * h);
}

// Relative error with a floor so near-zero gradients compare absolutely.
inline double rel_err(double analytic, double numeric) {
  double scale = std::fabs(analytic);
  if (std::fabs(numeric) > scale) scale = std::fabs(numeric);
  if (scale < 1e-4) scale = 1e-4;
  return std::fabs(analytic - numeric) / scale;
}

}  // namespace oracle

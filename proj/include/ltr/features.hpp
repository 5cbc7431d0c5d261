#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ltr/corpus.hpp"
#include "ltr/error.hpp"
#include "ltr/rng.hpp"
#include "ltr/text.hpp"

// Feature extraction for (instance, candidate explanation) pairs.
//
// The vector is a block of dense surface statistics followed by a signed
// hashed bag-of-words. Dense slots, in order:
//   0  distinct-word overlap with premise ∪ hypothesis
//   1  correct label mentioned (0/1)
//   2  reasoning keyword count, capped at 5, scaled to [0,1]
//   3  word count, capped at 50, scaled to [0,1]
//   4  gibberish word present (0/1)
//   5  wrong label mentioned (0/1)
//   6  fraction of distinct candidate words that appear in the premise
//   7  fraction of distinct candidate words that appear in the hypothesis
// The hashed block accumulates signed token counts (index = FNV-1a mod dims,
// sign = top hash bit) and is L2-normalized when nonzero.

namespace ltr {

inline constexpr int kDenseFeatureCount = 8;

struct FeatureConfig {
  int hashed_bow_dims = 64;
  bool include_dense = true;

  int width() const {
    return (include_dense ? kDenseFeatureCount : 0) + hashed_bow_dims;
  }

  void validate() const {
    if (hashed_bow_dims < 0) {
      throw validation_error("hashed_bow_dims must be >= 0");
    }
    if (width() <= 0) {
      throw validation_error("feature width must be positive");
    }
  }
};

using FeatureVector = std::vector<double>;

inline FeatureVector extract_features(const NliInstance& inst,
                                      const std::string& candidate,
                                      const FeatureConfig& cfg) {
  cfg.validate();
  auto tokens = tokenize(candidate);
  FeatureVector out;
  out.reserve(static_cast<std::size_t>(cfg.width()));

  if (cfg.include_dense) {
    WordSet p = word_set(inst.premise);
    WordSet h = word_set(inst.hypothesis);
    WordSet ph = set_union(p, h);
    WordSet cand(tokens.begin(), tokens.end());

    double in_premise = 0.0, in_hypothesis = 0.0;
    if (!cand.empty()) {
      std::size_t np = 0, nh = 0;
      for (const auto& w : cand) {
        if (p.count(w)) ++np;
        if (h.count(w)) ++nh;
      }
      in_premise = static_cast<double>(np) / static_cast<double>(cand.size());
      in_hypothesis =
          static_cast<double>(nh) / static_cast<double>(cand.size());
    }

    out.push_back(overlap_ratio(tokens, ph));
    out.push_back(mentions_label(tokens, inst.label) ? 1.0 : 0.0);
    out.push_back(
        std::min<double>(5.0, static_cast<double>(count_matches(
                                  tokens, reasoning_keywords()))) /
        5.0);
    out.push_back(
        std::min<double>(50.0, static_cast<double>(tokens.size())) / 50.0);
    out.push_back(contains_any(tokens, gibberish_vocabulary()) ? 1.0 : 0.0);
    out.push_back(mentions_wrong_label(tokens, inst.label) ? 1.0 : 0.0);
    out.push_back(in_premise);
    out.push_back(in_hypothesis);
  }

  if (cfg.hashed_bow_dims > 0) {
    std::vector<double> bow(static_cast<std::size_t>(cfg.hashed_bow_dims),
                            0.0);
    for (const auto& t : tokens) {
      std::uint64_t h = fnv1a(t);
      std::size_t idx = static_cast<std::size_t>(
          h % static_cast<std::uint64_t>(cfg.hashed_bow_dims));
      double sign = (h >> 63) ? -1.0 : 1.0;
      bow[idx] += sign;
    }
    double norm = 0.0;
    for (double v : bow) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double& v : bow) v /= norm;
    }
    out.insert(out.end(), bow.begin(), bow.end());
  }

  return out;
}

// Features for every candidate of a query, in stored candidate order.
inline std::vector<FeatureVector> extract_query_features(
    const GradedQuery& q, const FeatureConfig& cfg) {
  std::vector<FeatureVector> out;
  out.reserve(q.candidates.size());
  for (const auto& c : q.candidates) {
    out.push_back(extract_features(q.instance, c.text, cfg));
  }
  return out;
}

}  // namespace ltr

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ltr/error.hpp"
#include "ltr/rng.hpp"
#include "ltr/text.hpp"

// Synthetic ranking data for natural-language-inference explanations.
//
// Each NLI instance (premise, hypothesis, label) is expanded into five
// candidate explanations of graded quality. A candidate's "true" score is a
// draw from its quality tier's range plus content-sensitive adjustments, so
// neighbouring tiers genuinely overlap: a strong "good" explanation can
// outscore a weak "gold" one. That ambiguity is the property the ranking
// losses are later trained and evaluated against.

namespace ltr {

// ---------------------------------------------------------------------------
// Labels

enum class Label { entailment, contradiction, neutral };

inline constexpr std::array<Label, 3> kAllLabels = {
    Label::entailment, Label::contradiction, Label::neutral};

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::entailment: return "entailment";
    case Label::contradiction: return "contradiction";
    case Label::neutral: return "neutral";
  }
  return "?";
}

inline std::optional<Label> parse_label(std::string_view s) {
  for (Label l : kAllLabels) {
    if (s == to_string(l)) return l;
  }
  return std::nullopt;
}

// Words that count as mentioning a label. Checked against exact tokens.
inline const std::vector<std::string>& label_synonyms(Label l) {
  static const std::vector<std::string> ent = {"entail", "entails", "entailment",
                                               "supports"};
  static const std::vector<std::string> con = {"contradict", "contradicts",
                                               "contradiction", "conflict",
                                               "conflicts"};
  static const std::vector<std::string> neu = {"neutral", "unrelated",
                                               "undetermined"};
  switch (l) {
    case Label::entailment: return ent;
    case Label::contradiction: return con;
    case Label::neutral: return neu;
  }
  return ent;
}

inline bool mentions_label(const std::vector<std::string>& tokens, Label l) {
  return contains_any(tokens, label_synonyms(l));
}

inline bool mentions_wrong_label(const std::vector<std::string>& tokens,
                                 Label correct) {
  for (Label l : kAllLabels) {
    if (l != correct && mentions_label(tokens, l)) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Quality tiers

enum class Tier { gold, good, fair, poor, nonsense };

// Best to worst; tier_order gives the position in this ordering.
inline constexpr std::array<Tier, 5> kAllTiers = {
    Tier::gold, Tier::good, Tier::fair, Tier::poor, Tier::nonsense};

inline int tier_order(Tier t) { return static_cast<int>(t); }

inline std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::gold: return "gold";
    case Tier::good: return "good";
    case Tier::fair: return "fair";
    case Tier::poor: return "poor";
    case Tier::nonsense: return "nonsense";
  }
  return "?";
}

inline std::optional<Tier> parse_tier(std::string_view s) {
  for (Tier t : kAllTiers) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

struct TierRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct TierTable {
  std::array<TierRange, 5> ranges{};

  const TierRange& range(Tier t) const { return ranges[tier_order(t)]; }
  TierRange& range(Tier t) { return ranges[tier_order(t)]; }

  // Default ranges. Adjacent tiers overlap by construction.
  static TierTable overlapping_default() {
    TierTable t;
    t.range(Tier::gold) = {0.70, 1.00};
    t.range(Tier::good) = {0.50, 0.85};
    t.range(Tier::fair) = {0.30, 0.70};
    t.range(Tier::poor) = {0.10, 0.50};
    t.range(Tier::nonsense) = {0.00, 0.30};
    return t;
  }

  // Narrow, strictly separated bands used by disjoint-mode generation.
  static TierTable disjoint_bands() {
    TierTable t;
    t.range(Tier::gold) = {0.88, 0.92};
    t.range(Tier::good) = {0.68, 0.72};
    t.range(Tier::fair) = {0.48, 0.52};
    t.range(Tier::poor) = {0.28, 0.32};
    t.range(Tier::nonsense) = {0.08, 0.12};
    return t;
  }

  void validate() const {
    for (Tier t : kAllTiers) {
      const TierRange& r = range(t);
      if (!(r.lo < r.hi) || r.lo < 0.0 || r.hi > 1.0) {
        throw validation_error("tier range for '" + std::string(to_string(t)) +
                               "' must satisfy 0 <= lo < hi <= 1");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Instances

struct NliInstance {
  std::string id;
  std::string premise;
  std::string hypothesis;
  Label label = Label::entailment;

  void validate() const {
    if (tokenize(premise).empty()) {
      throw validation_error("instance '" + id + "': premise has no words");
    }
    if (tokenize(hypothesis).empty()) {
      throw validation_error("instance '" + id + "': hypothesis has no words");
    }
  }
};

// ---------------------------------------------------------------------------
// Explanation templates
//
// One template per (label, tier) pair. Gold templates quote the premise and
// hypothesis and justify the relation; good ones give a compressed correct
// reason; fair ones merely assert the relation; poor ones assert a wrong
// label; nonsense ones are fixed filler built from the gibberish vocabulary.

using TemplateTable = std::array<std::array<std::string, 5>, 3>;

inline const TemplateTable& default_templates() {
  static const TemplateTable table = [] {
    TemplateTable t;
    auto set = [&t](Label l, Tier tier, std::string_view text) {
      t[static_cast<int>(l)][tier_order(tier)] = std::string(text);
    };

    set(Label::entailment, Tier::gold,
        "The premise \"{premise}\" directly supports the hypothesis "
        "\"{hypothesis}\". The key evidence is that the premise provides "
        "sufficient information to conclude the hypothesis is true.");
    set(Label::entailment, Tier::good,
        "The premise entails the hypothesis because they convey compatible "
        "information.");
    set(Label::entailment, Tier::fair, "The premise supports the hypothesis.");
    set(Label::entailment, Tier::poor,
        "This is a contradiction because the premise and hypothesis are "
        "different.");
    set(Label::entailment, Tier::nonsense,
        "The quantum mechanics of penguin migration patterns suggest umbrella "
        "distribution.");

    set(Label::contradiction, Tier::gold,
        "The premise \"{premise}\" contradicts the hypothesis "
        "\"{hypothesis}\". They present incompatible statements that cannot "
        "both be true simultaneously.");
    set(Label::contradiction, Tier::good,
        "These statements contradict because they make incompatible claims.");
    set(Label::contradiction, Tier::fair, "The statements conflict.");
    set(Label::contradiction, Tier::poor,
        "This is neutral because they're both statements.");
    set(Label::contradiction, Tier::nonsense,
        "Purple elephants dance backwards when triangles sing opera.");

    set(Label::neutral, Tier::gold,
        "The premise \"{premise}\" is neutral toward the hypothesis "
        "\"{hypothesis}\". The premise provides insufficient information to "
        "either confirm or refute the hypothesis.");
    set(Label::neutral, Tier::good,
        "The premise is neutral toward the hypothesis because the claims are "
        "compatible but independent.");
    set(Label::neutral, Tier::fair, "The statements are unrelated.");
    set(Label::neutral, Tier::poor,
        "This is an entailment because both sentences describe the same "
        "thing.");
    set(Label::neutral, Tier::nonsense,
        "Umbrella triangles whisper quantum lullabies to the purple penguin "
        "choir.");

    return t;
  }();
  return table;
}

inline std::string replace_all(std::string text, std::string_view needle,
                               std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return text;
}

inline std::string render_template(const NliInstance& inst, Tier tier,
                                   const TemplateTable& table =
                                       default_templates()) {
  const std::string& pattern =
      table[static_cast<int>(inst.label)][tier_order(tier)];
  if (pattern.empty()) {
    throw usage_error("no explanation template for label '" +
                      std::string(to_string(inst.label)) + "', tier '" +
                      std::string(to_string(tier)) + "'");
  }
  std::string out = replace_all(pattern, "{premise}", inst.premise);
  return replace_all(out, "{hypothesis}", inst.hypothesis);
}

// ---------------------------------------------------------------------------
// Heuristic quality scoring

// Stable identity of a candidate: premise, hypothesis, tier name and text,
// joined with a 0x1F separator and hashed with FNV-1a. The id is deliberately
// excluded so regenerating under a different id scheme keeps scores intact.
inline std::uint64_t content_hash(std::string_view premise,
                                  std::string_view hypothesis, Tier tier,
                                  std::string_view text) {
  std::uint64_t h = fnv1a(premise);
  h = fnv1a("\x1f", h);
  h = fnv1a(hypothesis, h);
  h = fnv1a("\x1f", h);
  h = fnv1a(to_string(tier), h);
  h = fnv1a("\x1f", h);
  h = fnv1a(text, h);
  return h;
}

// Base quality draw for a candidate: uniform over the tier range, seeded by
// the candidate's content hash.
inline double base_draw(std::uint64_t hash, const TierRange& range) {
  SplitMix64 rng(hash);
  return rng.uniform(range.lo, range.hi);
}

// Content-sensitive corrections applied on top of the base draw, in this
// order: label mention +0.05, reasoning keyword +0.03, word overlap with the
// premise/hypothesis above 0.3 +0.02, fewer than 15 words in a top tier
// -0.10, gibberish outside the nonsense tier -0.30.
inline double score_adjustments(const std::string& explanation,
                                const NliInstance& inst, Tier tier) {
  auto tokens = tokenize(explanation);
  WordSet ph = set_union(word_set(inst.premise), word_set(inst.hypothesis));

  double adj = 0.0;
  if (mentions_label(tokens, inst.label)) adj += 0.05;
  if (contains_any(tokens, reasoning_keywords())) adj += 0.03;
  if (overlap_ratio(tokens, ph) > 0.3) adj += 0.02;
  if ((tier == Tier::gold || tier == Tier::good) && tokens.size() < 15) {
    adj -= 0.10;
  }
  if (tier != Tier::nonsense && contains_any(tokens, gibberish_vocabulary())) {
    adj -= 0.30;
  }
  return adj;
}

inline double heuristic_score(const std::string& explanation,
                              const NliInstance& inst, Tier tier,
                              const TierTable& table) {
  if (tokenize(explanation).empty()) {
    throw validation_error("explanation has no words");
  }
  std::uint64_t h =
      content_hash(inst.premise, inst.hypothesis, tier, explanation);
  double s = base_draw(h, table.range(tier)) +
             score_adjustments(explanation, inst, tier);
  return std::clamp(s, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Dataset generation

struct GradedCandidate {
  std::string text;
  Tier tier = Tier::gold;
  double true_score = 0.0;
  std::uint64_t hash = 0;
};

struct GradedQuery {
  NliInstance instance;
  std::vector<GradedCandidate> candidates;  // exactly five, one per tier
};

enum class GenerationMode { overlapping, disjoint };

inline std::optional<GenerationMode> parse_mode(std::string_view s) {
  if (s == "overlapping") return GenerationMode::overlapping;
  if (s == "disjoint") return GenerationMode::disjoint;
  return std::nullopt;
}

// Expands every instance into its five graded candidates. In overlapping mode
// scores come from the tier ranges plus adjustments; in disjoint mode the
// ranges are replaced with narrow ordered bands and adjustments are skipped,
// which guarantees tier order is never violated.
inline std::vector<GradedQuery> generate_dataset(
    const std::vector<NliInstance>& instances, const TierTable& ranges,
    GenerationMode mode,
    const TemplateTable& templates = default_templates()) {
  if (instances.empty()) {
    throw usage_error("generate_dataset: no instances given");
  }
  const bool disjoint = mode == GenerationMode::disjoint;
  const TierTable table = disjoint ? TierTable::disjoint_bands() : ranges;
  table.validate();

  std::vector<GradedQuery> out;
  out.reserve(instances.size());
  for (const NliInstance& inst : instances) {
    inst.validate();
    GradedQuery q;
    q.instance = inst;
    q.candidates.reserve(kAllTiers.size());
    for (Tier tier : kAllTiers) {
      GradedCandidate c;
      c.text = render_template(inst, tier, templates);
      c.tier = tier;
      c.hash = content_hash(inst.premise, inst.hypothesis, tier, c.text);
      double s = base_draw(c.hash, table.range(tier));
      if (!disjoint) s += score_adjustments(c.text, inst, tier);
      c.true_score = std::clamp(s, 0.0, 1.0);
      q.candidates.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < q.candidates.size(); ++i) {
      for (std::size_t j = i + 1; j < q.candidates.size(); ++j) {
        if (q.candidates[i].text == q.candidates[j].text) {
          throw validation_error("instance '" + inst.id +
                                 "': duplicate candidate text across tiers");
        }
      }
    }
    double mean = 0.0;
    for (const auto& c : q.candidates) mean += c.true_score;
    mean /= static_cast<double>(q.candidates.size());
    double var = 0.0;
    for (const auto& c : q.candidates) {
      var += (c.true_score - mean) * (c.true_score - mean);
    }
    if (var <= 0.0) {
      throw validation_error("instance '" + inst.id +
                             "': candidate scores are all identical");
    }
    out.push_back(std::move(q));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset statistics

struct DatasetStats {
  std::size_t query_count = 0;
  // Fraction of queries where some lower-tier candidate strictly outscores a
  // higher-tier one.
  double ambiguity_rate = 0.0;
  // Mean over queries of (max - min) true score.
  double mean_score_range = 0.0;
  std::map<Tier, double> per_tier_mean;
};

inline bool has_tier_violation(const GradedQuery& q) {
  for (std::size_t i = 0; i < q.candidates.size(); ++i) {
    for (std::size_t j = 0; j < q.candidates.size(); ++j) {
      const auto& hi = q.candidates[i];
      const auto& lo = q.candidates[j];
      if (tier_order(hi.tier) < tier_order(lo.tier) &&
          lo.true_score > hi.true_score) {
        return true;
      }
    }
  }
  return false;
}

inline DatasetStats compute_stats(const std::vector<GradedQuery>& queries) {
  if (queries.empty()) throw usage_error("compute_stats: no queries given");
  DatasetStats st;
  st.query_count = queries.size();

  std::size_t violated = 0;
  double range_sum = 0.0;
  std::map<Tier, double> sums;
  std::map<Tier, std::size_t> counts;
  for (const GradedQuery& q : queries) {
    if (has_tier_violation(q)) ++violated;
    double lo = q.candidates.front().true_score;
    double hi = lo;
    for (const auto& c : q.candidates) {
      lo = std::min(lo, c.true_score);
      hi = std::max(hi, c.true_score);
      sums[c.tier] += c.true_score;
      counts[c.tier] += 1;
    }
    range_sum += hi - lo;
  }
  st.ambiguity_rate =
      static_cast<double>(violated) / static_cast<double>(queries.size());
  st.mean_score_range = range_sum / static_cast<double>(queries.size());
  for (const auto& [tier, sum] : sums) {
    st.per_tier_mean[tier] = sum / static_cast<double>(counts[tier]);
  }
  return st;
}

}  // namespace ltr

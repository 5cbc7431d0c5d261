#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

// Text normalization shared by the data generator and the feature extractor.
// Both sides must agree on what a "word" is, so this is the single definition:
// lowercase, punctuation characters removed, split on whitespace.

namespace ltr {

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    } else if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (c >= 0x80) {
      cur.push_back(static_cast<char>(c));  // keep non-ASCII bytes as-is
    }
    // ASCII punctuation is dropped
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

using WordSet = std::unordered_set<std::string>;

inline WordSet word_set(std::string_view text) {
  auto toks = tokenize(text);
  return WordSet(toks.begin(), toks.end());
}

inline WordSet set_union(const WordSet& a, const WordSet& b) {
  WordSet u = a;
  u.insert(b.begin(), b.end());
  return u;
}

// |tokens ∩ reference| / |reference| over distinct words. Zero when the
// reference set is empty.
inline double overlap_ratio(const std::vector<std::string>& tokens,
                            const WordSet& reference) {
  if (reference.empty()) return 0.0;
  WordSet seen;
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    if (reference.count(t) && seen.insert(t).second) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(reference.size());
}

inline bool contains_any(const std::vector<std::string>& tokens,
                         const std::vector<std::string>& vocab) {
  for (const auto& t : tokens) {
    if (std::find(vocab.begin(), vocab.end(), t) != vocab.end()) return true;
  }
  return false;
}

inline std::size_t count_matches(const std::vector<std::string>& tokens,
                                 const std::vector<std::string>& vocab) {
  std::size_t n = 0;
  for (const auto& t : tokens) {
    if (std::find(vocab.begin(), vocab.end(), t) != vocab.end()) ++n;
  }
  return n;
}

// Connective words that signal an explanation is actually reasoning about the
// relation rather than restating it.
inline const std::vector<std::string>& reasoning_keywords() {
  static const std::vector<std::string> kw = {
      "because", "therefore", "thus",  "since",
      "implies", "entails",   "hence", "so",
  };
  return kw;
}

// Marker vocabulary for deliberately irrelevant filler text.
inline const std::vector<std::string>& gibberish_vocabulary() {
  static const std::vector<std::string> gv = {
      "penguin", "quantum", "umbrella", "triangle",
      "opera",   "purple",  "elephants",
  };
  return gv;
}

}  // namespace ltr

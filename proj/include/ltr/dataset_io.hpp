#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ltr/corpus.hpp"
#include "ltr/error.hpp"
#include "ltr/format.hpp"
#include "ltr/rng.hpp"

// File formats.
//
// Instance input is either JSONL ({"id"?, "premise", "hypothesis", "label"})
// or TSV (premise/hypothesis/label, optionally preceded by an id column).
// Records without an id get one derived from the content, so their identity
// is stable no matter how the file is shuffled or grown.
//
// Graded datasets are JSONL, one query per line, with fixed key order and
// fixed number formatting (scores at 6 decimals, hashes as 16 hex digits),
// so identical data always produces identical bytes.

namespace ltr {

enum class InputFormat { jsonl, tsv };

inline InputFormat detect_format(const std::filesystem::path& path) {
  return path.extension() == ".tsv" ? InputFormat::tsv : InputFormat::jsonl;
}

namespace detail {

inline Label parse_label_or_throw(std::string_view value, std::size_t line_no) {
  auto label = parse_label(value);
  if (!label) {
    throw validation_error("line " + std::to_string(line_no) +
                           ": unknown label '" + std::string(value) +
                           "' (expected entailment, contradiction or neutral)");
  }
  return *label;
}

inline std::string derived_id(const NliInstance& inst) {
  std::uint64_t h = fnv1a(inst.premise);
  h = fnv1a("\x1f", h);
  h = fnv1a(inst.hypothesis, h);
  h = fnv1a("\x1f", h);
  h = fnv1a(to_string(inst.label), h);
  return fmt_hex64(h);
}

}  // namespace detail

inline std::vector<NliInstance> load_instances(
    const std::filesystem::path& path,
    std::optional<InputFormat> format = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open input file: " + path.string());
  InputFormat fmt = format.value_or(detect_format(path));

  std::vector<NliInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    NliInstance inst;
    if (fmt == InputFormat::jsonl) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw io_error("line " + std::to_string(line_no) +
                       ": invalid JSON: " + e.what());
      }
      if (!j.is_object() || !j.contains("premise") ||
          !j.contains("hypothesis") || !j.contains("label")) {
        throw validation_error(
            "line " + std::to_string(line_no) +
            ": record needs premise, hypothesis and label fields");
      }
      try {
        inst.premise = j.at("premise").get<std::string>();
        inst.hypothesis = j.at("hypothesis").get<std::string>();
        inst.label = detail::parse_label_or_throw(
            j.at("label").get<std::string>(), line_no);
        if (j.contains("id")) inst.id = j.at("id").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw validation_error("line " + std::to_string(line_no) +
                               ": bad field type: " + e.what());
      }
    } else {
      std::vector<std::string> cols;
      std::size_t start = 0;
      while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
          cols.push_back(line.substr(start));
          break;
        }
        cols.push_back(line.substr(start, tab - start));
        start = tab + 1;
      }
      if (cols.size() == 3) {
        inst.premise = cols[0];
        inst.hypothesis = cols[1];
        inst.label = detail::parse_label_or_throw(cols[2], line_no);
      } else if (cols.size() == 4) {
        inst.id = cols[0];
        inst.premise = cols[1];
        inst.hypothesis = cols[2];
        inst.label = detail::parse_label_or_throw(cols[3], line_no);
      } else {
        throw validation_error("line " + std::to_string(line_no) + ": expected 3 or 4 tab-separated columns, got " +
                               std::to_string(cols.size()));
      }
    }
    if (inst.id.empty()) inst.id = detail::derived_id(inst);
    try {
      inst.validate();
    } catch (const validation_error& e) {
      throw validation_error("line " + std::to_string(line_no) + ": " +
                             e.what());
    }
    out.push_back(std::move(inst));
  }
  if (out.empty()) {
    throw validation_error("input file has no instances: " + path.string());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graded dataset serialization

inline std::string dataset_line(const GradedQuery& q) {
  std::string out = "{\"id\":" + json_quote(q.instance.id);
  out += ",\"premise\":" + json_quote(q.instance.premise);
  out += ",\"hypothesis\":" + json_quote(q.instance.hypothesis);
  out += ",\"label\":" + json_quote(to_string(q.instance.label));
  out += ",\"candidates\":[";
  for (std::size_t i = 0; i < q.candidates.size(); ++i) {
    const auto& c = q.candidates[i];
    if (i) out += ",";
    out += "{\"text\":" + json_quote(c.text);
    out += ",\"tier\":" + json_quote(to_string(c.tier));
    out += ",\"score\":" + fmt_fixed(c.true_score, 6);
    out += ",\"hash\":" + json_quote(fmt_hex64(c.hash));
    out += "}";
  }
  out += "]}";
  return out;
}

inline void write_dataset(const std::vector<GradedQuery>& queries,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open dataset for writing: " + path.string());
  for (const auto& q : queries) {
    out << dataset_line(q) << '\n';
  }
  if (!out) throw io_error("failed writing dataset: " + path.string());
}

inline std::vector<GradedQuery> read_dataset(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open dataset: " + path.string());

  std::vector<GradedQuery> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw io_error("line " + std::to_string(line_no) +
                     ": invalid JSON: " + e.what());
    }
    GradedQuery q;
    try {
      q.instance.id = j.at("id").get<std::string>();
      q.instance.premise = j.at("premise").get<std::string>();
      q.instance.hypothesis = j.at("hypothesis").get<std::string>();
      q.instance.label = detail::parse_label_or_throw(
          j.at("label").get<std::string>(), line_no);
      for (const auto& cj : j.at("candidates")) {
        GradedCandidate c;
        c.text = cj.at("text").get<std::string>();
        auto tier = parse_tier(cj.at("tier").get<std::string>());
        if (!tier) {
          throw validation_error("line " + std::to_string(line_no) +
                                 ": unknown tier '" +
                                 cj.at("tier").get<std::string>() + "'");
        }
        c.tier = *tier;
        c.true_score = cj.at("score").get<double>();
        if (c.true_score < 0.0 || c.true_score > 1.0) {
          throw validation_error("line " + std::to_string(line_no) +
                                 ": score outside [0, 1]");
        }
        c.hash = std::stoull(cj.at("hash").get<std::string>(), nullptr, 16);
        q.candidates.push_back(std::move(c));
      }
    } catch (const nlohmann::json::exception& e) {
      throw validation_error("line " + std::to_string(line_no) +
                             ": bad dataset record: " + e.what());
    }
    if (q.candidates.size() != kAllTiers.size()) {
      throw validation_error("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(kAllTiers.size()) +
                             " candidates, got " +
                             std::to_string(q.candidates.size()));
    }
    for (Tier t : kAllTiers) {
      std::size_t count = 0;
      for (const auto& c : q.candidates) {
        if (c.tier == t) ++count;
      }
      if (count != 1) {
        throw validation_error("line " + std::to_string(line_no) +
                               ": tier '" + std::string(to_string(t)) +
                               "' must appear exactly once");
      }
    }
    out.push_back(std::move(q));
  }
  if (out.empty()) {
    throw validation_error("dataset file has no queries: " + path.string());
  }
  return out;
}

}  // namespace ltr

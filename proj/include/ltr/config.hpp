#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ltr/corpus.hpp"
#include "ltr/error.hpp"
#include "ltr/features.hpp"
#include "ltr/losses.hpp"
#include "ltr/ppo.hpp"
#include "ltr/rng.hpp"
#include "ltr/train.hpp"

// Experiment-level configuration: one INI-style file with sections, merged
// over built-in defaults. Command-line flags are applied on top by the CLI,
// so precedence is defaults < file < flags.

namespace ltr {

// ---------------------------------------------------------------------------
// INI reader: [section] headers, key = value lines, # comments.

struct IniFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  static IniFile parse(std::istream& in, const std::string& name) {
    IniFile f;
    std::string line, section;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
      std::size_t b = s.find_first_not_of(" \t");
      std::size_t e = s.find_last_not_of(" \t");
      if (b == std::string::npos) return std::string();
      return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          throw usage_error(name + " line " + std::to_string(line_no) +
                            ": unterminated section header");
        }
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw usage_error(name + " line " + std::to_string(line_no) +
                          ": expected key = value");
      }
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty()) {
        throw usage_error(name + " line " + std::to_string(line_no) +
                          ": empty key");
      }
      f.sections[section][key] = value;
    }
    return f;
  }

  static IniFile load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open config file: " + path.string());
    return parse(in, path.filename().string());
  }

  const std::string* find(const std::string& section,
                          const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    return &k->second;
  }
};

// ---------------------------------------------------------------------------
// Splits: an instance's assignment depends only on its id and the seed, so
// it never changes when other instances come or go.

enum class Split { train, val, test, all };

inline std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  if (s == "all") return Split::all;
  return std::nullopt;
}

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::all: return "all";
  }
  return "?";
}

struct ExperimentConfig {
  std::uint64_t seed = 42;
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  LossId loss = LossId::listnet;
  FeatureConfig features;
  TrainConfig train;
  PPOConfig ppo;
  LossParams loss_params;

  void validate() const {
    if (train_fraction < 0 || val_fraction < 0 || test_fraction < 0 ||
        std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
      throw validation_error("split fractions must be >= 0 and sum to 1");
    }
    features.validate();
    train.validate();
    ppo.validate();
  }
};

inline Split split_of(const std::string& id, const ExperimentConfig& cfg) {
  std::uint64_t h = fnv1a_mix(fnv1a(id), cfg.seed);
  double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  if (u < cfg.train_fraction) return Split::train;
  if (u < cfg.train_fraction + cfg.val_fraction) return Split::val;
  return Split::test;
}

inline std::vector<GradedQuery> filter_split(
    const std::vector<GradedQuery>& queries, Split split,
    const ExperimentConfig& cfg) {
  if (split == Split::all) return queries;
  std::vector<GradedQuery> out;
  for (const auto& q : queries) {
    if (split_of(q.instance.id, cfg) == split) out.push_back(q);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config file -> ExperimentConfig

namespace detail {

inline double to_double(const std::string& v, const std::string& what) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw usage_error("config: " + what + " is not a number: '" + v + "'");
  }
}

inline int to_int(const std::string& v, const std::string& what) {
  try {
    std::size_t pos = 0;
    long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(d);
  } catch (const std::exception&) {
    throw usage_error("config: " + what + " is not an integer: '" + v + "'");
  }
}

inline std::uint64_t to_u64(const std::string& v, const std::string& what) {
  try {
    std::size_t pos = 0;
    unsigned long long d = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw usage_error("config: " + what +
                      " is not a non-negative integer: '" + v + "'");
  }
}

inline bool to_bool(const std::string& v, const std::string& what) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw usage_error("config: " + what + " is not a boolean: '" + v + "'");
}

}  // namespace detail

inline ExperimentConfig config_from_ini(const IniFile& ini) {
  ExperimentConfig cfg;
  using detail::to_bool;
  using detail::to_double;
  using detail::to_int;
  using detail::to_u64;

  auto get = [&ini](const std::string& sec, const std::string& key) {
    return ini.find(sec, key);
  };

  if (auto* v = get("experiment", "seed")) cfg.seed = to_u64(*v, "seed");
  if (auto* v = get("experiment", "train_fraction")) {
    cfg.train_fraction = to_double(*v, "train_fraction");
  }
  if (auto* v = get("experiment", "val_fraction")) {
    cfg.val_fraction = to_double(*v, "val_fraction");
  }
  if (auto* v = get("experiment", "test_fraction")) {
    cfg.test_fraction = to_double(*v, "test_fraction");
  }
  if (auto* v = get("experiment", "loss")) {
    auto id = parse_loss_id(*v);
    if (!id) {
      std::string valid;
      for (LossId l : kAllLosses) {
        if (!valid.empty()) valid += ", ";
        valid += to_string(l);
      }
      throw usage_error("config: unknown loss '" + *v + "' (valid: " + valid +
                        ")");
    }
    cfg.loss = *id;
  }

  if (auto* v = get("features", "hashed_bow_dims")) {
    cfg.features.hashed_bow_dims = to_int(*v, "hashed_bow_dims");
  }
  if (auto* v = get("features", "include_dense")) {
    cfg.features.include_dense = to_bool(*v, "include_dense");
  }

  if (auto* v = get("train", "learning_rate")) {
    cfg.train.learning_rate = to_double(*v, "learning_rate");
  }
  if (auto* v = get("train", "batch_queries")) {
    cfg.train.batch_queries = to_int(*v, "batch_queries");
  }
  if (auto* v = get("train", "warmup_steps")) {
    cfg.train.warmup_steps = to_int(*v, "warmup_steps");
  }
  if (auto* v = get("train", "max_epochs")) {
    cfg.train.max_epochs = to_int(*v, "max_epochs");
  }
  if (auto* v = get("train", "patience")) {
    cfg.train.patience = to_int(*v, "patience");
  }
  if (auto* v = get("train", "grad_clip")) {
    cfg.train.grad_clip = to_double(*v, "grad_clip");
  }
  if (auto* v = get("train", "weight_decay")) {
    cfg.train.weight_decay = to_double(*v, "weight_decay");
  }
  if (auto* v = get("train", "hidden_units")) {
    cfg.train.hidden_units = to_int(*v, "hidden_units");
  }
  if (auto* v = get("train", "dropout")) {
    cfg.train.dropout = to_double(*v, "dropout");
  }

  if (auto* v = get("ppo", "clip_epsilon")) {
    cfg.ppo.clip_epsilon = to_double(*v, "clip_epsilon");
  }
  if (auto* v = get("ppo", "kl_beta")) cfg.ppo.kl_beta = to_double(*v, "kl_beta");
  if (auto* v = get("ppo", "policy_lr")) {
    cfg.ppo.policy_lr = to_double(*v, "policy_lr");
  }
  if (auto* v = get("ppo", "value_lr")) {
    cfg.ppo.value_lr = to_double(*v, "value_lr");
  }
  if (auto* v = get("ppo", "batch_episodes")) {
    cfg.ppo.batch_episodes = to_int(*v, "batch_episodes");
  }
  if (auto* v = get("ppo", "minibatch")) {
    cfg.ppo.minibatch = to_int(*v, "minibatch");
  }
  if (auto* v = get("ppo", "max_steps")) {
    cfg.ppo.max_steps = to_int(*v, "max_steps");
  }
  if (auto* v = get("ppo", "convergence_threshold")) {
    cfg.ppo.convergence_threshold = to_double(*v, "convergence_threshold");
  }

  if (auto* v = get("losses", "approx_ndcg_temperature")) {
    cfg.loss_params.approx_ndcg_temperature =
        to_double(*v, "approx_ndcg_temperature");
  }
  if (auto* v = get("losses", "bt_margin")) {
    cfg.loss_params.bt_margin = to_double(*v, "bt_margin");
  }
  if (auto* v = get("losses", "lambdarank_k")) {
    cfg.loss_params.lambdarank_k =
        static_cast<std::size_t>(to_int(*v, "lambdarank_k"));
  }

  // Seeds propagate from the experiment unless the section overrode them.
  cfg.train.seed = cfg.seed;
  cfg.ppo.seed = cfg.seed;
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_ini(IniFile::load(path));
}

// Custom tier ranges: lines of "<tier> <lo> <hi>".
inline TierTable load_tier_ranges(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open ranges file: " + path.string());
  TierTable table = TierTable::overlapping_default();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string tier_name;
    if (!(ss >> tier_name)) continue;
    auto tier = parse_tier(tier_name);
    if (!tier) {
      throw validation_error("ranges file line " + std::to_string(line_no) +
                             ": unknown tier '" + tier_name + "'");
    }
    double lo = 0.0, hi = 0.0;
    if (!(ss >> lo >> hi)) {
      throw validation_error("ranges file line " + std::to_string(line_no) +
                             ": expected '<tier> <lo> <hi>'");
    }
    table.range(*tier) = {lo, hi};
  }
  table.validate();
  return table;
}

}  // namespace ltr

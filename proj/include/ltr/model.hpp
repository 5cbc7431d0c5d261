#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltr/corpus.hpp"
#include "ltr/error.hpp"
#include "ltr/features.hpp"
#include "ltr/format.hpp"
#include "ltr/rng.hpp"

// A two-layer scoring head: score = w2 . dropout(relu(W1 x + b1)) + b2.
// Forward, backward and the checkpoint format are all hand-rolled; the
// backward pass is exact, which the tests confirm against finite differences.

namespace ltr {

struct ScorerModel {
  int feature_width = 0;
  int hidden = 0;
  double dropout_rate = 0.1;
  std::vector<double> w1;  // hidden x width, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;

  // hidden_units == 0 picks width/2, floored at 8.
  static ScorerModel initialized(int width, std::uint64_t seed,
                                 int hidden_units = 0,
                                 double dropout = 0.1) {
    if (width <= 0) throw validation_error("model: feature width must be > 0");
    if (dropout < 0.0 || dropout >= 1.0) {
      throw validation_error("model: dropout must be in [0, 1)");
    }
    ScorerModel m;
    m.feature_width = width;
    m.hidden = hidden_units > 0 ? hidden_units : std::max(8, width / 2);
    m.dropout_rate = dropout;
    m.w1.resize(static_cast<std::size_t>(m.hidden) * width);
    m.b1.resize(m.hidden);
    m.w2.resize(m.hidden);

    SplitMix64 rng(stream_seed(seed, 0x5c07e7u));
    double lim1 = 1.0 / std::sqrt(static_cast<double>(width));
    for (double& v : m.w1) v = rng.uniform(-lim1, lim1);
    for (double& v : m.b1) v = rng.uniform(-lim1, lim1);
    double lim2 = 1.0 / std::sqrt(static_cast<double>(m.hidden));
    for (double& v : m.w2) v = rng.uniform(-lim2, lim2);
    m.b2 = rng.uniform(-lim2, lim2);
    return m;
  }

  std::size_t parameter_count() const {
    return w1.size() + b1.size() + w2.size() + 1;
  }
};

// Activations saved by a forward pass so the matching backward pass can reuse
// them. `hidden_mult` folds the relu on/off state together with the inverted
// dropout multiplier.
struct ForwardCache {
  std::vector<double> input;
  std::vector<double> hidden_act;   // post-relu, post-dropout
  std::vector<double> hidden_mult;  // d(hidden_act)/d(pre-activation)
};

// Scores one feature vector. When `training` is true, inverted dropout is
// applied between the layers and `rng` must be provided; each kept unit is
// scaled by 1/(1-p) so evaluation needs no rescaling.
inline double forward(const ScorerModel& m, std::span<const double> x,
                      bool training = false, SplitMix64* rng = nullptr,
                      ForwardCache* cache = nullptr) {
  if (static_cast<int>(x.size()) != m.feature_width) {
    throw validation_error("model: feature vector width " +
                           std::to_string(x.size()) + " does not match model " +
                           std::to_string(m.feature_width));
  }
  if (training && m.dropout_rate > 0.0 && rng == nullptr) {
    throw usage_error("model: training forward needs an rng for dropout");
  }
  if (cache) {
    cache->input.assign(x.begin(), x.end());
    cache->hidden_act.resize(m.hidden);
    cache->hidden_mult.resize(m.hidden);
  }
  double out = m.b2;
  const double keep_scale =
      m.dropout_rate > 0.0 ? 1.0 / (1.0 - m.dropout_rate) : 1.0;
  for (int h = 0; h < m.hidden; ++h) {
    double pre = m.b1[h];
    const double* row = &m.w1[static_cast<std::size_t>(h) * m.feature_width];
    for (int i = 0; i < m.feature_width; ++i) pre += row[i] * x[i];
    double mult = pre > 0.0 ? 1.0 : 0.0;
    if (training && m.dropout_rate > 0.0) {
      bool keep = rng->uniform01() >= m.dropout_rate;
      mult *= keep ? keep_scale : 0.0;
    }
    double act = mult * pre;
    if (cache) {
      cache->hidden_act[h] = act;
      cache->hidden_mult[h] = mult;
    }
    out += m.w2[h] * act;
  }
  return out;
}

struct Gradients {
  std::vector<double> w1, b1, w2;
  double b2 = 0.0;

  static Gradients zeros_like(const ScorerModel& m) {
    Gradients g;
    g.w1.assign(m.w1.size(), 0.0);
    g.b1.assign(m.b1.size(), 0.0);
    g.w2.assign(m.w2.size(), 0.0);
    g.b2 = 0.0;
    return g;
  }

  double global_norm() const {
    double s = 0.0;
    for (double v : w1) s += v * v;
    for (double v : b1) s += v * v;
    for (double v : w2) s += v * v;
    s += b2 * b2;
    return std::sqrt(s);
  }

  void scale(double f) {
    for (double& v : w1) v *= f;
    for (double& v : b1) v *= f;
    for (double& v : w2) v *= f;
    b2 *= f;
  }

  bool finite() const {
    for (double v : w1) {
      if (!std::isfinite(v)) return false;
    }
    for (double v : b1) {
      if (!std::isfinite(v)) return false;
    }
    for (double v : w2) {
      if (!std::isfinite(v)) return false;
    }
    return std::isfinite(b2);
  }
};

// Accumulates d(upstream * score)/d(parameters) into `out`, reusing the
// activations of the forward pass that produced `cache`.
inline void backward(const ScorerModel& m, const ForwardCache& cache,
                     double upstream, Gradients& out) {
  out.b2 += upstream;
  for (int h = 0; h < m.hidden; ++h) {
    out.w2[h] += upstream * cache.hidden_act[h];
    double dpre = upstream * m.w2[h] * cache.hidden_mult[h];
    if (dpre == 0.0) continue;
    out.b1[h] += dpre;
    double* row = &out.w1[static_cast<std::size_t>(h) * m.feature_width];
    for (int i = 0; i < m.feature_width; ++i) {
      row[i] += dpre * cache.input[i];
    }
  }
}

// Evaluation-mode convenience: forwards every vector, then accumulates the
// exact parameter gradient of sum_i upstream[i] * score(x[i]).
inline Gradients backward_batch(const ScorerModel& m,
                                const std::vector<FeatureVector>& inputs,
                                std::span<const double> upstream) {
  if (inputs.size() != upstream.size()) {
    throw validation_error("backward_batch: inputs/upstream size mismatch");
  }
  Gradients g = Gradients::zeros_like(m);
  ForwardCache cache;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    forward(m, inputs[i], false, nullptr, &cache);
    backward(m, cache, upstream[i], g);
  }
  return g;
}

// Evaluation-mode scores for every candidate of a query, in stored order.
inline std::vector<double> score_list(const ScorerModel& m,
                                      const GradedQuery& q,
                                      const FeatureConfig& cfg) {
  std::vector<double> out;
  out.reserve(q.candidates.size());
  for (const auto& c : q.candidates) {
    out.push_back(forward(m, extract_features(q.instance, c.text, cfg)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints: a small JSON container. Parameters are written with enough
// digits to round-trip bit-exactly.

inline constexpr int kCheckpointVersion = 1;

inline void save_checkpoint(const ScorerModel& m,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw io_error("cannot open checkpoint for writing: " + path.string());
  }
  auto write_array = [&out](const std::vector<double>& v) {
    out << "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out << ",";
      out << fmt_g17(v[i]);
    }
    out << "]";
  };
  out << "{\"version\":" << kCheckpointVersion
      << ",\"feature_width\":" << m.feature_width << ",\"hidden\":" << m.hidden
      << ",\"dropout\":" << fmt_g17(m.dropout_rate) << ",\"w1\":";
  write_array(m.w1);
  out << ",\"b1\":";
  write_array(m.b1);
  out << ",\"w2\":";
  write_array(m.w2);
  out << ",\"b2\":" << fmt_g17(m.b2) << "}\n";
  if (!out) throw io_error("failed writing checkpoint: " + path.string());
}

inline ScorerModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open checkpoint: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw io_error("checkpoint '" + path.string() +
                   "' is not valid JSON: " + e.what());
  }
  try {
    int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw validation_error("checkpoint '" + path.string() +
                             "' has unsupported version " +
                             std::to_string(version));
    }
    ScorerModel m;
    m.feature_width = j.at("feature_width").get<int>();
    m.hidden = j.at("hidden").get<int>();
    m.dropout_rate = j.at("dropout").get<double>();
    m.w1 = j.at("w1").get<std::vector<double>>();
    m.b1 = j.at("b1").get<std::vector<double>>();
    m.w2 = j.at("w2").get<std::vector<double>>();
    m.b2 = j.at("b2").get<double>();
    if (m.feature_width <= 0 || m.hidden <= 0 ||
        m.w1.size() !=
            static_cast<std::size_t>(m.hidden) * m.feature_width ||
        m.b1.size() != static_cast<std::size_t>(m.hidden) ||
        m.w2.size() != static_cast<std::size_t>(m.hidden)) {
      throw validation_error("checkpoint '" + path.string() +
                             "' has inconsistent parameter shapes");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("checkpoint '" + path.string() +
                           "' is missing fields: " + e.what());
  }
}

}  // namespace ltr

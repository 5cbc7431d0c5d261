#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "ltr/corpus.hpp"
#include "ltr/features.hpp"
#include "support/synth.hpp"

using namespace ltr;

namespace {

NliInstance fox_instance() {
  NliInstance inst;
  inst.id = "fox-1";
  inst.premise = "a quick brown fox jumps the fence";
  inst.hypothesis = "the fox can jump";
  inst.label = Label::entailment;
  return inst;
}

}  // namespace

TEST_CASE("feature width is dense slots plus hashed dims", "[features]") {
  FeatureConfig cfg;
  CHECK(cfg.width() == 8 + 64);
  cfg.hashed_bow_dims = 16;
  CHECK(cfg.width() == 24);
  cfg.include_dense = false;
  CHECK(cfg.width() == 16);

  cfg.hashed_bow_dims = 0;
  CHECK_THROWS_AS(cfg.validate(), validation_error);
  cfg.hashed_bow_dims = -4;
  CHECK_THROWS_AS(cfg.validate(), validation_error);
  cfg.include_dense = true;
  cfg.hashed_bow_dims = 0;
  CHECK_NOTHROW(cfg.validate());  // dense-only is allowed
  CHECK(cfg.width() == 8);
}

TEST_CASE("dense slots carry the documented signals", "[features]") {
  NliInstance inst = fox_instance();
  FeatureConfig cfg;
  cfg.hashed_bow_dims = 0;

  // Candidate tokens: {the fox jumps because it entails thus so}
  // distinct = 8; premise+hypothesis set =
  // {a quick brown fox jumps the fence can jump} -> 9 words.
  std::string text = "the fox jumps because it entails thus so";
  auto f = extract_features(inst, text, cfg);
  REQUIRE(f.size() == 8);

  // Slot 0: overlap = |{the fox jumps}| / 9.
  CHECK(f[0] == Catch::Approx(3.0 / 9.0));
  // Slot 1: mentions the correct label ("entails").
  CHECK(f[1] == 1.0);
  // Slot 2: reasoning keywords {because entails thus so} -> 4 of cap 5.
  CHECK(f[2] == Catch::Approx(4.0 / 5.0));
  // Slot 3: word count 8 of cap 50.
  CHECK(f[3] == Catch::Approx(8.0 / 50.0));
  // Slot 4: no gibberish vocabulary.
  CHECK(f[4] == 0.0);
  // Slot 5: no wrong label mentioned.
  CHECK(f[5] == 0.0);
  // Slot 6: distinct candidate words in the premise: {the fox jumps} / 8.
  CHECK(f[6] == Catch::Approx(3.0 / 8.0));
  // Slot 7: distinct candidate words in the hypothesis: {the fox} / 8.
  CHECK(f[7] == Catch::Approx(2.0 / 8.0));
}

TEST_CASE("gibberish and wrong-label flags fire", "[features]") {
  NliInstance inst = fox_instance();
  FeatureConfig cfg;
  cfg.hashed_bow_dims = 0;

  auto f = extract_features(inst, "purple quantum conflict", cfg);
  CHECK(f[1] == 0.0);  // not the entailment vocabulary
  CHECK(f[4] == 1.0);  // "purple", "quantum"
  CHECK(f[5] == 1.0);  // "conflict" asserts contradiction
}

TEST_CASE("word count slot saturates at its cap", "[features]") {
  NliInstance inst = fox_instance();
  FeatureConfig cfg;
  cfg.hashed_bow_dims = 0;
  std::string text;
  for (int i = 0; i < 80; ++i) text += "w" + std::to_string(i) + " ";
  auto f = extract_features(inst, text, cfg);
  CHECK(f[3] == 1.0);
}

TEST_CASE("hashed bag-of-words tail is unit length and deterministic",
          "[features]") {
  NliInstance inst = fox_instance();
  FeatureConfig cfg;  // 8 + 64
  auto f = extract_features(inst, "the fox jumps over and over", cfg);
  REQUIRE(f.size() == 72);

  double norm = 0.0;
  for (std::size_t i = 8; i < f.size(); ++i) norm += f[i] * f[i];
  CHECK(std::sqrt(norm) == Catch::Approx(1.0).margin(1e-12));

  auto again = extract_features(inst, "the fox jumps over and over", cfg);
  CHECK(f == again);

  auto other = extract_features(inst, "a different sentence entirely here", cfg);
  CHECK(f != other);
}

TEST_CASE("empty candidate text yields zero bow block", "[features]") {
  NliInstance inst = fox_instance();
  FeatureConfig cfg;
  auto f = extract_features(inst, "", cfg);
  REQUIRE(f.size() == 72);
  for (std::size_t i = 8; i < f.size(); ++i) CHECK(f[i] == 0.0);
  CHECK(f[0] == 0.0);
  CHECK(f[3] == 0.0);
}

TEST_CASE("repeated words accumulate with a consistent sign", "[features]") {
  NliInstance inst = fox_instance();
  FeatureConfig cfg;
  cfg.include_dense = false;
  cfg.hashed_bow_dims = 32;

  auto once = extract_features(inst, "fence", cfg);
  auto twice = extract_features(inst, "fence fence", cfg);
  // Single word: exactly one slot at +-1 after normalization.
  double nz_once = 0.0;
  for (double v : once) nz_once += std::fabs(v);
  CHECK(nz_once == Catch::Approx(1.0));
  // Doubling the word doubles the raw count; normalization maps both to the
  // same unit vector.
  CHECK(once == twice);
}

TEST_CASE("query feature extraction covers every candidate", "[features]") {
  auto instances = synth::make_instances(3);
  auto data = generate_dataset(instances, TierTable::overlapping_default(),
                               GenerationMode::overlapping);
  FeatureConfig cfg;
  auto per_candidate = extract_query_features(data[0], cfg);
  REQUIRE(per_candidate.size() == 5);
  for (const auto& f : per_candidate) {
    CHECK(f.size() == static_cast<std::size_t>(cfg.width()));
  }
  // The nonsense candidate trips the gibberish flag; the gold one does not.
  CHECK(per_candidate[4][4] == 1.0);
  CHECK(per_candidate[0][4] == 0.0);
}

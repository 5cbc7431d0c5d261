#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ltr/corpus.hpp"
#include "ltr/dataset_io.hpp"
#include "support/synth.hpp"

#ifndef LTR_CLI_PATH
#error "LTR_CLI_PATH must point at the command-line binary"
#endif

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path sandbox() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "ltr_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  fs::path out_path = sandbox() / "cmd_stdout.txt";
  fs::path err_path = sandbox() / "cmd_stderr.txt";
  std::string cmd = std::string(LTR_CLI_PATH) + " " + args + " > " +
                    out_path.string() + " 2> " + err_path.string();
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

// Small instance file shared by the pipeline tests.
fs::path instances_jsonl() {
  static fs::path path = [] {
    fs::path p = sandbox() / "instances.jsonl";
    std::ofstream out(p, std::ios::binary);
    for (const auto& inst : synth::make_instances(40, "cli")) {
      nlohmann::json j{{"id", inst.id},
                       {"premise", inst.premise},
                       {"hypothesis", inst.hypothesis},
                       {"label", std::string(ltr::to_string(inst.label))}};
      out << j.dump() << "\n";
    }
    return p;
  }();
  return path;
}

void require_json_error(const RunResult& r, int code) {
  REQUIRE(r.exit_code == code);
  // Exactly one line of machine-readable diagnostics.
  REQUIRE_FALSE(r.err.empty());
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  auto j = nlohmann::json::parse(r.err);
  REQUIRE(j.contains("error"));
  CHECK(j["error"]["code"].get<int>() == code);
  CHECK_FALSE(j["error"]["message"].get<std::string>().empty());
}

}  // namespace

TEST_CASE("usage errors exit with code 1", "[cli]") {
  require_json_error(run_cli(""), 1);
  require_json_error(run_cli("generate"), 1);  // missing required flags
  require_json_error(run_cli("frobnicate"), 1);
  require_json_error(run_cli("generate --input a --output b --mode sideways"),
                     1);
  require_json_error(run_cli("train --input x"), 1);  // no checkpoint-out
}

TEST_CASE("help exits cleanly", "[cli]") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("generate --help").exit_code == 0);
}

TEST_CASE("missing input files exit with code 2", "[cli]") {
  fs::path out = sandbox() / "never.jsonl";
  require_json_error(
      run_cli("generate --input /nonexistent/in.jsonl --output " +
              out.string()),
      2);
  require_json_error(
      run_cli("eval --checkpoint /nonexistent/ckpt.json --input /nonexistent/"
              "data.jsonl"),
      2);
}

TEST_CASE("invalid content exits with code 3", "[cli]") {
  fs::path bad = sandbox() / "bad_label.jsonl";
  {
    std::ofstream out(bad);
    out << R"({"id":"x","premise":"a b","hypothesis":"c d","label":"maybe"})"
        << "\n";
  }
  fs::path dataset_out = sandbox() / "bad_out.jsonl";
  require_json_error(
      run_cli("generate --input " + bad.string() + " --output " +
              dataset_out.string()),
      3);
}

TEST_CASE("generation writes a dataset and prints its stats", "[cli]") {
  fs::path dataset = sandbox() / "dataset.jsonl";
  RunResult r = run_cli("generate --input " + instances_jsonl().string() +
                        " --output " + dataset.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("queries            40") != std::string::npos);
  CHECK(r.out.find("ambiguity_rate") != std::string::npos);
  CHECK(r.out.find("mean_score gold") != std::string::npos);

  auto queries = ltr::read_dataset(dataset);
  REQUIRE(queries.size() == 40);
  for (const auto& q : queries) REQUIRE(q.candidates.size() == 5);
}

TEST_CASE("generation is byte-for-byte repeatable", "[cli]") {
  fs::path a = sandbox() / "repeat_a.jsonl";
  fs::path b = sandbox() / "repeat_b.jsonl";
  REQUIRE(run_cli("generate --input " + instances_jsonl().string() +
                  " --output " + a.string())
              .exit_code == 0);
  REQUIRE(run_cli("generate --input " + instances_jsonl().string() +
                  " --output " + b.string())
              .exit_code == 0);
  std::string sa = slurp(a), sb = slurp(b);
  REQUIRE_FALSE(sa.empty());
  CHECK(sa == sb);
}

TEST_CASE("tsv input is accepted", "[cli]") {
  fs::path tsv = sandbox() / "instances.tsv";
  {
    std::ofstream out(tsv);
    out << "tsv-1\tthe sky is blue today\tthe sky has a color\tentailment\n"
        << "tsv-2\tthe cat sleeps on the rug\tthe cat is awake\tcontradiction\n";
  }
  fs::path dataset = sandbox() / "tsv_dataset.jsonl";
  RunResult r = run_cli("generate --input " + tsv.string() + " --output " +
                        dataset.string());
  REQUIRE(r.exit_code == 0);
  CHECK(ltr::read_dataset(dataset).size() == 2);
}

TEST_CASE("disjoint mode flows through the flag", "[cli]") {
  fs::path dataset = sandbox() / "disjoint.jsonl";
  RunResult r = run_cli("generate --mode disjoint --input " +
                        instances_jsonl().string() + " --output " +
                        dataset.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("ambiguity_rate     0.000000") != std::string::npos);
}

TEST_CASE("train, eval, agreement, ppo, and report chain together", "[cli]") {
  fs::path dataset = sandbox() / "pipeline.jsonl";
  REQUIRE(run_cli("generate --input " + instances_jsonl().string() +
                  " --output " + dataset.string())
              .exit_code == 0);

  fs::path ckpt = sandbox() / "model.json";
  fs::path history = sandbox() / "history.csv";
  RunResult tr = run_cli(
      "train --input " + dataset.string() + " --checkpoint-out " +
      ckpt.string() + " --history-out " + history.string() +
      " --loss listnet --max-epochs 3 --warmup-steps 10 --bow-dims 16");
  REQUIRE(tr.exit_code == 0);
  CHECK(tr.out.find("best_epoch") != std::string::npos);
  CHECK(fs::exists(ckpt));
  std::string hist = slurp(history);
  CHECK(hist.rfind("epoch,train_loss,val_ndcg5,val_separation\n", 0) == 0);

  // Evaluating the checkpoint needs the same feature width.
  fs::path report = sandbox() / "eval.json";
  RunResult ev = run_cli("eval --checkpoint " + ckpt.string() + " --input " +
                         dataset.string() +
                         " --split val --label demo --bow-dims 16 "
                         "--report-out " +
                         report.string());
  REQUIRE(ev.exit_code == 0);
  CHECK(ev.out.find("demo") != std::string::npos);
  CHECK(ev.out.find("ndcg@5") != std::string::npos);
  auto rj = nlohmann::json::parse(slurp(report));
  CHECK(rj["label"] == "demo");
  CHECK(rj["ndcg_at"].contains("5"));

  // Width mismatch between checkpoint and flags is a validation error.
  require_json_error(run_cli("eval --checkpoint " + ckpt.string() +
                             " --input " + dataset.string() + " --split val"),
                     3);

  // Oracle scoring: perfect agreement with itself.
  RunResult ag = run_cli("agreement --oracle --dataset " + dataset.string() +
                         " --split all");
  REQUIRE(ag.exit_code == 0);
  CHECK(ag.out.find("pairwise_agreement 1.000000") != std::string::npos);

  fs::path ppo_hist = sandbox() / "ppo.jsonl";
  RunResult pp = run_cli("ppo --reward-checkpoint " + ckpt.string() +
                         " --dataset " + dataset.string() +
                         " --history-out " + ppo_hist.string() +
                         " --split all --bow-dims 16 --max-steps 5 "
                         "--batch-episodes 8 --minibatch 2");
  REQUIRE(pp.exit_code == 0);
  CHECK(pp.out.find("updates            5") != std::string::npos);
  std::string ph = slurp(ppo_hist);
  CHECK(std::count(ph.begin(), ph.end(), '\n') == 5);

  fs::path table = sandbox() / "table.txt";
  fs::path csv = sandbox() / "curves.csv";
  RunResult rp = run_cli("report --eval demo=" + report.string() +
                         " --ppo demo=" + ppo_hist.string() + " --table-out " +
                         table.string() + " --csv-out " + csv.string());
  REQUIRE(rp.exit_code == 0);
  CHECK(rp.out.find("label") != std::string::npos);
  CHECK(rp.out.find("demo") != std::string::npos);
  std::string curves = slurp(csv);
  CHECK(curves.rfind("label,step,mean_true_score\n", 0) == 0);
  CHECK(std::count(curves.begin(), curves.end(), '\n') == 6);  // header + 5
}

TEST_CASE("config file sets defaults and flags override", "[cli]") {
  fs::path dataset = sandbox() / "cfg_dataset.jsonl";
  REQUIRE(run_cli("generate --input " + instances_jsonl().string() +
                  " --output " + dataset.string())
              .exit_code == 0);

  fs::path ini = sandbox() / "experiment.ini";
  {
    std::ofstream out(ini);
    out << "[features]\nhashed_bow_dims = 16\n"
        << "[train]\nmax_epochs = 2\nwarmup_steps = 10\n";
  }
  fs::path ckpt = sandbox() / "cfg_model.json";
  RunResult tr = run_cli("train --config " + ini.string() + " --input " +
                         dataset.string() + " --checkpoint-out " +
                         ckpt.string());
  REQUIRE(tr.exit_code == 0);
  CHECK(tr.out.find("epochs_run         2") != std::string::npos);

  // The eval side picks the width up from the same config file.
  RunResult ev = run_cli("eval --config " + ini.string() + " --checkpoint " +
                         ckpt.string() + " --input " + dataset.string() +
                         " --split val");
  CHECK(ev.exit_code == 0);

  // A flag on top of the config file wins.
  fs::path ckpt2 = sandbox() / "cfg_model2.json";
  RunResult tr2 = run_cli("train --config " + ini.string() + " --input " +
                          dataset.string() + " --checkpoint-out " +
                          ckpt2.string() + " --max-epochs 1");
  REQUIRE(tr2.exit_code == 0);
  CHECK(tr2.out.find("epochs_run         1") != std::string::npos);

  require_json_error(run_cli("train --config /nonexistent.ini --input " +
                             dataset.string() + " --checkpoint-out " +
                             ckpt.string()),
                     2);
}

TEST_CASE("corrupt checkpoints map to io and validation exits", "[cli]") {
  fs::path dataset = sandbox() / "err_dataset.jsonl";
  REQUIRE(run_cli("generate --input " + instances_jsonl().string() +
                  " --output " + dataset.string())
              .exit_code == 0);

  fs::path garbage = sandbox() / "garbage.json";
  {
    std::ofstream out(garbage);
    out << "{{{ not json";
  }
  require_json_error(run_cli("eval --checkpoint " + garbage.string() +
                             " --input " + dataset.string() + " --split all"),
                     2);

  fs::path wrong_shape = sandbox() / "wrong_shape.json";
  {
    std::ofstream out(wrong_shape);
    out << "{\"version\":1,\"feature_width\":4,\"hidden\":2,\"dropout\":0.1,"
        << "\"w1\":[1.0],\"b1\":[0.0,0.0],\"w2\":[1.0,1.0],\"b2\":0.0}";
  }
  require_json_error(run_cli("eval --checkpoint " + wrong_shape.string() +
                             " --input " + dataset.string() + " --split all"),
                     3);
}

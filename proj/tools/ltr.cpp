// Command-line front end: generate graded ranking datasets, train and
// evaluate the scorer under different objectives, run the policy-optimization
// demonstrator, and join the results into comparison reports.
//
// Exit codes: 0 success, 1 usage error, 2 I/O error, 3 validation error.
// Failures print exactly one JSON line on stderr.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ltr/ltr.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitValidation = 3;

void emit_error(int code, const std::string& message) {
  std::cerr << "{\"error\":{\"code\":" << code
            << ",\"message\":" << ltr::json_quote(message) << "}}\n";
}

// ---------------------------------------------------------------------------
// Option plumbing: config file first, then explicit flags on top.

struct FlagSet {
  CLI::App* cmd = nullptr;
  std::string config_path;

  std::uint64_t seed = 42;
  std::string loss = "listnet";
  int bow_dims = 64;
  double learning_rate = 2e-3;
  int batch_queries = 16;
  int warmup_steps = 500;
  int max_epochs = 50;
  int patience = 10;
  double grad_clip = 1.0;
  double weight_decay = 0.01;
  int hidden_units = 0;
  double dropout = 0.1;
  int ppo_max_steps = 3000;
  int batch_episodes = 128;
  int minibatch = 4;
  double kl_beta = 0.1;
  double clip_epsilon = 0.2;
  double policy_lr = 1e-2;
  double value_lr = 1e-2;
  double convergence_threshold = 0.8;

  void add_config(CLI::App* app) {
    cmd = app;
    app->add_option("--config", config_path,
                    "Config file (INI sections; flags override)");
  }

  void add_seed() { cmd->add_option("--seed", seed, "Experiment seed"); }

  void add_features() {
    cmd->add_option("--bow-dims", bow_dims, "Hashed bag-of-words width");
  }

  void add_loss() {
    cmd->add_option("--loss", loss, "Training objective");
  }

  void add_train() {
    cmd->add_option("--learning-rate", learning_rate, "Base learning rate");
    cmd->add_option("--batch-queries", batch_queries, "Queries per batch");
    cmd->add_option("--warmup-steps", warmup_steps, "Linear warmup steps");
    cmd->add_option("--max-epochs", max_epochs, "Epoch budget");
    cmd->add_option("--patience", patience, "Early-stop patience (epochs)");
    cmd->add_option("--grad-clip", grad_clip, "Global gradient norm cap");
    cmd->add_option("--weight-decay", weight_decay, "Decoupled weight decay");
    cmd->add_option("--hidden-units", hidden_units,
                    "Hidden layer width (0 = half the feature width)");
    cmd->add_option("--dropout", dropout, "Dropout rate between layers");
  }

  void add_ppo() {
    cmd->add_option("--max-steps", ppo_max_steps, "Update budget");
    cmd->add_option("--batch-episodes", batch_episodes, "Episodes per update");
    cmd->add_option("--minibatch", minibatch, "Episodes per gradient step");
    cmd->add_option("--kl-beta", kl_beta, "KL penalty weight");
    cmd->add_option("--clip-epsilon", clip_epsilon, "Surrogate clip range");
    cmd->add_option("--policy-lr", policy_lr, "Policy learning rate");
    cmd->add_option("--value-lr", value_lr, "Baseline learning rate");
    cmd->add_option("--convergence-threshold", convergence_threshold,
                    "Rolling true-score mean that counts as converged");
  }

  bool given(const std::string& name) const {
    return cmd->count(name) > 0;
  }

  ltr::ExperimentConfig resolve() const {
    ltr::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ltr::load_config(config_path);

    if (given("--seed")) cfg.seed = seed;
    cfg.train.seed = cfg.seed;
    cfg.ppo.seed = cfg.seed;

    if (given("--loss")) {
      auto id = ltr::parse_loss_id(loss);
      if (!id) {
        std::string valid;
        for (ltr::LossId l : ltr::kAllLosses) {
          if (!valid.empty()) valid += ", ";
          valid += ltr::to_string(l);
        }
        throw ltr::usage_error("unknown loss '" + loss + "' (valid: " + valid +
                               ")");
      }
      cfg.loss = *id;
    }
    if (given("--bow-dims")) cfg.features.hashed_bow_dims = bow_dims;
    if (given("--learning-rate")) cfg.train.learning_rate = learning_rate;
    if (given("--batch-queries")) cfg.train.batch_queries = batch_queries;
    if (given("--warmup-steps")) cfg.train.warmup_steps = warmup_steps;
    if (given("--max-epochs")) cfg.train.max_epochs = max_epochs;
    if (given("--patience")) cfg.train.patience = patience;
    if (given("--grad-clip")) cfg.train.grad_clip = grad_clip;
    if (given("--weight-decay")) cfg.train.weight_decay = weight_decay;
    if (given("--hidden-units")) cfg.train.hidden_units = hidden_units;
    if (given("--dropout")) cfg.train.dropout = dropout;
    if (given("--max-steps")) cfg.ppo.max_steps = ppo_max_steps;
    if (given("--batch-episodes")) cfg.ppo.batch_episodes = batch_episodes;
    if (given("--minibatch")) cfg.ppo.minibatch = minibatch;
    if (given("--kl-beta")) cfg.ppo.kl_beta = kl_beta;
    if (given("--clip-epsilon")) cfg.ppo.clip_epsilon = clip_epsilon;
    if (given("--policy-lr")) cfg.ppo.policy_lr = policy_lr;
    if (given("--value-lr")) cfg.ppo.value_lr = value_lr;
    if (given("--convergence-threshold")) {
      cfg.ppo.convergence_threshold = convergence_threshold;
    }
    cfg.validate();
    return cfg;
  }
};

// ---------------------------------------------------------------------------
// Shared pieces

std::vector<std::vector<double>> model_scores(
    const ltr::ScorerModel& model, const std::vector<ltr::GradedQuery>& qs,
    const ltr::FeatureConfig& fcfg) {
  std::vector<std::vector<double>> out;
  out.reserve(qs.size());
  for (const auto& q : qs) out.push_back(ltr::score_list(model, q, fcfg));
  return out;
}

std::vector<std::vector<double>> true_scores(
    const std::vector<ltr::GradedQuery>& qs) {
  std::vector<std::vector<double>> out;
  out.reserve(qs.size());
  for (const auto& q : qs) {
    std::vector<double> t;
    for (const auto& c : q.candidates) t.push_back(c.true_score);
    out.push_back(std::move(t));
  }
  return out;
}

ltr::Split parse_split_or_throw(const std::string& s) {
  auto split = ltr::parse_split(s);
  if (!split) {
    throw ltr::usage_error("unknown split '" + s +
                           "' (valid: train, val, test, all)");
  }
  return *split;
}

std::vector<ltr::GradedQuery> load_split(const std::string& path,
                                         const std::string& split_name,
                                         const ltr::ExperimentConfig& cfg) {
  auto queries = ltr::read_dataset(path);
  auto split = parse_split_or_throw(split_name);
  auto subset = ltr::filter_split(queries, split, cfg);
  if (subset.empty()) {
    throw ltr::validation_error("split '" + split_name +
                                "' of " + path + " is empty");
  }
  return subset;
}

std::string report_json(const std::string& label, const ltr::RankingReport& r) {
  std::string out = "{\"label\":" + ltr::json_quote(label);
  out += ",\"query_count\":" + std::to_string(r.query_count);
  out += ",\"ndcg_at\":{";
  bool first = true;
  for (const auto& [k, v] : r.ndcg_at) {
    if (!first) out += ",";
    first = false;
    out += "\"" + std::to_string(k) + "\":" + ltr::fmt_fixed(v, 6);
  }
  out += "},\"map\":" + ltr::fmt_fixed(r.map, 6);
  out += ",\"mrr\":" + ltr::fmt_fixed(r.mrr, 6);
  out += ",\"spearman_rho\":" + ltr::fmt_fixed(r.spearman, 6);
  out += ",\"kendall_tau\":" + ltr::fmt_fixed(r.kendall, 6);
  out += ",\"separation_ratio\":" + ltr::fmt_fixed(r.separation, 6);
  out += ",\"score_range\":" + ltr::fmt_fixed(r.range, 6);
  out += "}\n";
  return out;
}

void print_report_table(const std::string& label,
                        const ltr::RankingReport& r) {
  std::printf("%-12s %-9s %-9s %-10s %-9s\n", "label", "ndcg@5", "spearman",
              "sep_ratio", "range");
  double ndcg5 = r.ndcg_at.count(5) ? r.ndcg_at.at(5) : 0.0;
  std::printf("%-12s %-9.4f %-9.4f %-10.4f %-9.4f\n", label.c_str(), ndcg5,
              r.spearman, r.separation, r.range);
  std::printf("\n");
  for (const auto& [k, v] : r.ndcg_at) {
    std::printf("ndcg@%-14zu %.6f\n", k, v);
  }
  std::printf("map                %.6f\n", r.map);
  std::printf("mrr                %.6f\n", r.mrr);
  std::printf("spearman_rho       %.6f\n", r.spearman);
  std::printf("kendall_tau        %.6f\n", r.kendall);
  std::printf("separation_ratio   %.6f\n", r.separation);
  std::printf("score_range        %.6f\n", r.range);
  std::printf("queries            %zu\n", r.query_count);
}

// ---------------------------------------------------------------------------
// Subcommands

struct GenerateArgs {
  std::string input, output, mode = "overlapping", format, ranges;
  FlagSet flags;
};

void run_generate(const GenerateArgs& a) {
  auto mode = ltr::parse_mode(a.mode);
  if (!mode) {
    throw ltr::usage_error("unknown mode '" + a.mode +
                           "' (valid: overlapping, disjoint)");
  }
  std::optional<ltr::InputFormat> fmt;
  if (!a.format.empty()) {
    if (a.format == "jsonl") {
      fmt = ltr::InputFormat::jsonl;
    } else if (a.format == "tsv") {
      fmt = ltr::InputFormat::tsv;
    } else {
      throw ltr::usage_error("unknown format '" + a.format +
                             "' (valid: jsonl, tsv)");
    }
  }
  ltr::TierTable ranges = a.ranges.empty()
                              ? ltr::TierTable::overlapping_default()
                              : ltr::load_tier_ranges(a.ranges);

  auto instances = ltr::load_instances(a.input, fmt);
  auto dataset = ltr::generate_dataset(instances, ranges, *mode);
  ltr::write_dataset(dataset, a.output);

  auto stats = ltr::compute_stats(dataset);
  std::printf("queries            %zu\n", stats.query_count);
  std::printf("ambiguity_rate     %.6f\n", stats.ambiguity_rate);
  std::printf("mean_score_range   %.6f\n", stats.mean_score_range);
  for (const auto& [tier, mean] : stats.per_tier_mean) {
    std::printf("mean_score %-8s %.6f\n",
                std::string(ltr::to_string(tier)).c_str(), mean);
  }
}

struct TrainArgs {
  std::string input, checkpoint_out, history_out;
  FlagSet flags;
};

void run_train(const TrainArgs& a) {
  auto cfg = a.flags.resolve();
  auto queries = ltr::read_dataset(a.input);
  auto train_q = ltr::filter_split(queries, ltr::Split::train, cfg);
  auto val_q = ltr::filter_split(queries, ltr::Split::val, cfg);
  if (train_q.empty() || val_q.empty()) {
    throw ltr::validation_error(
        "dataset is too small to populate train and val splits");
  }

  auto result = ltr::train(train_q, val_q, cfg.loss, cfg.loss_params,
                           cfg.features, cfg.train);
  ltr::save_checkpoint(result.model, a.checkpoint_out);
  if (!a.history_out.empty()) {
    std::ofstream out(a.history_out, std::ios::binary);
    if (!out) {
      throw ltr::io_error("cannot open history for writing: " + a.history_out);
    }
    out << ltr::history_csv(result.history);
  }

  const auto& records = result.history.records;
  const auto& best = records[static_cast<std::size_t>(
      result.history.best_epoch - 1)];
  std::printf("loss               %s\n",
              std::string(ltr::to_string(cfg.loss)).c_str());
  std::printf("epochs_run         %zu\n", records.size());
  std::printf("best_epoch         %d\n", result.history.best_epoch);
  std::printf("val_ndcg5          %.6f\n", best.val_ndcg5);
  std::printf("val_separation     %.6f\n", best.val_separation);
  std::printf("train_queries      %zu\n", train_q.size());
  std::printf("val_queries        %zu\n", val_q.size());
}

struct EvalArgs {
  std::string checkpoint, input, split = "test", report_out, label = "model";
  bool oracle = false;
  FlagSet flags;
};

void run_eval(const EvalArgs& a) {
  auto cfg = a.flags.resolve();
  if (a.oracle == a.checkpoint.empty()) {
    throw ltr::usage_error("eval needs exactly one of --checkpoint, --oracle");
  }
  auto subset = load_split(a.input, a.split, cfg);
  auto targets = true_scores(subset);

  std::vector<std::vector<double>> predicted;
  if (a.oracle) {
    predicted = targets;
  } else {
    auto model = ltr::load_checkpoint(a.checkpoint);
    if (model.feature_width != cfg.features.width()) {
      throw ltr::validation_error(
          "checkpoint feature width " + std::to_string(model.feature_width) +
          " does not match configured width " +
          std::to_string(cfg.features.width()));
    }
    predicted = model_scores(model, subset, cfg.features);
  }

  auto report = ltr::build_report(predicted, targets);
  if (!a.report_out.empty()) {
    std::ofstream out(a.report_out, std::ios::binary);
    if (!out) {
      throw ltr::io_error("cannot open report for writing: " + a.report_out);
    }
    out << report_json(a.label, report);
  }
  print_report_table(a.label, report);
}

struct PpoArgs {
  std::string reward_checkpoint, dataset, history_out, split = "train";
  FlagSet flags;
};

void run_ppo_cmd(const PpoArgs& a) {
  auto cfg = a.flags.resolve();
  auto subset = load_split(a.dataset, a.split, cfg);
  auto model = ltr::load_checkpoint(a.reward_checkpoint);
  if (model.feature_width != cfg.features.width()) {
    throw ltr::validation_error(
        "reward checkpoint feature width " +
        std::to_string(model.feature_width) +
        " does not match configured width " +
        std::to_string(cfg.features.width()));
  }

  auto history = ltr::run_ppo(model, subset, cfg.features, cfg.ppo);
  ltr::write_ppo_history(history, a.history_out);

  const auto& last = history.records.back();
  std::printf("updates            %zu\n", history.records.size());
  if (history.converged_at) {
    std::printf("converged_at       %d\n", *history.converged_at);
  } else {
    std::printf("converged_at       none\n");
  }
  std::printf("final_mean_reward  %.6f\n", last.mean_reward);
  std::printf("final_mean_true    %.6f\n", last.mean_true_score);
  std::printf("final_kl           %.6f\n", last.kl_to_reference);
  std::printf("final_entropy      %.6f\n", last.policy_entropy);
}

struct AgreementArgs {
  std::string checkpoint, dataset, split = "test";
  bool oracle = false;
  FlagSet flags;
};

void run_agreement(const AgreementArgs& a) {
  auto cfg = a.flags.resolve();
  if (a.oracle == a.checkpoint.empty()) {
    throw ltr::usage_error(
        "agreement needs exactly one of --checkpoint, --oracle");
  }
  auto subset = load_split(a.dataset, a.split, cfg);
  auto gold = true_scores(subset);
  std::vector<std::vector<double>> model_side;
  if (a.oracle) {
    model_side = gold;
  } else {
    auto model = ltr::load_checkpoint(a.checkpoint);
    if (model.feature_width != cfg.features.width()) {
      throw ltr::validation_error(
          "checkpoint feature width " + std::to_string(model.feature_width) +
          " does not match configured width " +
          std::to_string(cfg.features.width()));
    }
    model_side = model_scores(model, subset, cfg.features);
  }
  double agreement = ltr::pairwise_agreement(model_side, gold);
  std::printf("queries            %zu\n", subset.size());
  std::printf("pairwise_agreement %.6f\n", agreement);
}

struct ReportArgs {
  std::vector<std::string> eval_specs, ppo_specs;
  std::string table_out, csv_out;
  double convergence_threshold = 0.8;
};

std::pair<std::string, std::string> split_spec(const std::string& spec,
                                               const char* kind) {
  std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw ltr::usage_error(std::string(kind) +
                           " expects <label>=<path>, got '" + spec + "'");
  }
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

void run_report(const ReportArgs& a) {
  if (a.eval_specs.empty() && a.ppo_specs.empty()) {
    throw ltr::usage_error("report needs at least one --eval or --ppo input");
  }

  struct Row {
    std::string ndcg5 = "-", spearman = "-", sep = "-", range = "-",
                ppo = "-";
  };
  std::vector<std::string> order;
  std::map<std::string, Row> rows;
  auto row_for = [&](const std::string& label) -> Row& {
    if (!rows.count(label)) order.push_back(label);
    return rows[label];
  };

  for (const auto& spec : a.eval_specs) {
    auto [label, path] = split_spec(spec, "--eval");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ltr::io_error("cannot open eval report: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ltr::io_error("eval report '" + path +
                          "' is not valid JSON: " + e.what());
    }
    Row& row = row_for(label);
    try {
      row.ndcg5 = ltr::fmt_fixed(j.at("ndcg_at").at("5").get<double>(), 4);
      row.spearman = ltr::fmt_fixed(j.at("spearman_rho").get<double>(), 4);
      row.sep = ltr::fmt_fixed(j.at("separation_ratio").get<double>(), 4);
      row.range = ltr::fmt_fixed(j.at("score_range").get<double>(), 4);
    } catch (const nlohmann::json::exception& e) {
      throw ltr::validation_error("eval report '" + path +
                                  "' is missing fields: " + e.what());
    }
  }

  std::string csv = "label,step,mean_true_score\n";
  for (const auto& spec : a.ppo_specs) {
    auto [label, path] = split_spec(spec, "--ppo");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ltr::io_error("cannot open history: " + path);
    std::vector<double> trues;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        auto j = nlohmann::json::parse(line);
        int step = j.at("step").get<int>();
        double mts = j.at("mean_true_score").get<double>();
        trues.push_back(mts);
        csv += label + "," + std::to_string(step) + "," +
               ltr::fmt_fixed(mts, 6) + "\n";
      } catch (const nlohmann::json::exception& e) {
        throw ltr::io_error("history '" + path + "' line " +
                            std::to_string(line_no) + ": " + e.what());
      }
    }
    if (trues.empty()) {
      throw ltr::validation_error("history '" + path + "' has no records");
    }
    // Convergence recomputed from the curve: first step whose trailing
    // window of 20 means clears the threshold.
    std::string converged = "none";
    double window_sum = 0.0;
    for (std::size_t i = 0; i < trues.size(); ++i) {
      window_sum += trues[i];
      if (i >= static_cast<std::size_t>(ltr::kConvergenceWindow)) {
        window_sum -= trues[i - ltr::kConvergenceWindow];
      }
      if (i + 1 >= static_cast<std::size_t>(ltr::kConvergenceWindow) &&
          window_sum / ltr::kConvergenceWindow >= a.convergence_threshold) {
        converged = std::to_string(i + 1);
        break;
      }
    }
    row_for(label).ppo = converged;
  }

  char buf[256];
  std::string table;
  std::snprintf(buf, sizeof(buf), "%-12s %-9s %-9s %-10s %-9s %-9s\n", "label",
                "ndcg@5", "spearman", "sep_ratio", "range", "ppo_steps");
  table += buf;
  for (const auto& label : order) {
    const Row& r = rows[label];
    std::snprintf(buf, sizeof(buf), "%-12s %-9s %-9s %-10s %-9s %-9s\n",
                  label.c_str(), r.ndcg5.c_str(), r.spearman.c_str(),
                  r.sep.c_str(), r.range.c_str(), r.ppo.c_str());
    table += buf;
  }

  std::fputs(table.c_str(), stdout);
  if (!a.table_out.empty()) {
    std::ofstream out(a.table_out, std::ios::binary);
    if (!out) throw ltr::io_error("cannot open table for writing: " + a.table_out);
    out << table;
  }
  if (!a.csv_out.empty()) {
    std::ofstream out(a.csv_out, std::ios::binary);
    if (!out) throw ltr::io_error("cannot open csv for writing: " + a.csv_out);
    out << csv;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Graded explanation ranking: dataset synthesis, scorer training, "
      "ranking evaluation, and policy-optimization comparison"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* cgen = app.add_subcommand(
      "generate", "Expand NLI instances into a graded ranking dataset");
  cgen->add_option("--input", gen.input, "Instance file (JSONL or TSV)")
      ->required();
  cgen->add_option("--output", gen.output, "Dataset output path (JSONL)")
      ->required();
  cgen->add_option("--mode", gen.mode, "overlapping or disjoint");
  cgen->add_option("--format", gen.format, "Force input format: jsonl or tsv");
  cgen->add_option("--ranges", gen.ranges,
                   "Custom tier ranges file (lines: tier lo hi)");
  gen.flags.add_config(cgen);

  TrainArgs tr;
  auto* ctrain = app.add_subcommand("train", "Train the scorer on a dataset");
  ctrain->add_option("--input", tr.input, "Graded dataset (JSONL)")->required();
  ctrain->add_option("--checkpoint-out", tr.checkpoint_out, "Checkpoint path")
      ->required();
  ctrain->add_option("--history-out", tr.history_out, "Epoch history CSV");
  tr.flags.add_config(ctrain);
  tr.flags.add_seed();
  tr.flags.add_loss();
  tr.flags.add_features();
  tr.flags.add_train();

  EvalArgs ev;
  auto* ceval = app.add_subcommand("eval", "Evaluate a checkpoint's ranking");
  ceval->add_option("--checkpoint", ev.checkpoint, "Scorer checkpoint");
  ceval->add_flag("--oracle", ev.oracle,
                  "Score with the true scores instead of a checkpoint");
  ceval->add_option("--input", ev.input, "Graded dataset (JSONL)")->required();
  ceval->add_option("--split", ev.split, "train, val, test or all");
  ceval->add_option("--report-out", ev.report_out, "Metric report JSON");
  ceval->add_option("--label", ev.label, "Row label for the table");
  ev.flags.add_config(ceval);
  ev.flags.add_seed();
  ev.flags.add_features();

  PpoArgs pp;
  auto* cppo = app.add_subcommand(
      "ppo", "Optimize a selection policy against a frozen reward checkpoint");
  cppo->add_option("--reward-checkpoint", pp.reward_checkpoint,
                   "Frozen scorer used as the reward")
      ->required();
  cppo->add_option("--dataset", pp.dataset, "Graded dataset (JSONL)")
      ->required();
  cppo->add_option("--history-out", pp.history_out, "Update history JSONL")
      ->required();
  cppo->add_option("--split", pp.split, "train, val, test or all");
  pp.flags.add_config(cppo);
  pp.flags.add_seed();
  pp.flags.add_features();
  pp.flags.add_ppo();

  AgreementArgs ag;
  auto* cagree = app.add_subcommand(
      "agreement", "Pairwise order agreement against the gold scores");
  cagree->add_option("--checkpoint", ag.checkpoint, "Scorer checkpoint");
  cagree->add_flag("--oracle", ag.oracle,
                   "Use the true scores instead of a checkpoint");
  cagree->add_option("--dataset", ag.dataset, "Graded dataset (JSONL)")
      ->required();
  cagree->add_option("--split", ag.split, "train, val, test or all");
  ag.flags.add_config(cagree);
  ag.flags.add_seed();
  ag.flags.add_features();

  ReportArgs rp;
  auto* creport = app.add_subcommand(
      "report", "Join eval reports and update histories into one table");
  creport->add_option("--eval", rp.eval_specs,
                      "label=path of an eval report JSON (repeatable)");
  creport->add_option("--ppo", rp.ppo_specs,
                      "label=path of an update history JSONL (repeatable)");
  creport->add_option("--table-out", rp.table_out, "Write the table here too");
  creport->add_option("--csv-out", rp.csv_out,
                      "Plot-ready CSV: label,step,mean_true_score");
  creport->add_option("--convergence-threshold", rp.convergence_threshold,
                      "Rolling true-score mean that counts as converged");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    emit_error(kExitUsage, e.what());
    return kExitUsage;
  }

  try {
    if (cgen->parsed()) {
      run_generate(gen);
    } else if (ctrain->parsed()) {
      run_train(tr);
    } else if (ceval->parsed()) {
      run_eval(ev);
    } else if (cppo->parsed()) {
      run_ppo_cmd(pp);
    } else if (cagree->parsed()) {
      run_agreement(ag);
    } else if (creport->parsed()) {
      run_report(rp);
    }
  } catch (const ltr::usage_error& e) {
    emit_error(kExitUsage, e.what());
    return kExitUsage;
  } catch (const ltr::io_error& e) {
    emit_error(kExitIo, e.what());
    return kExitIo;
  } catch (const ltr::validation_error& e) {
    emit_error(kExitValidation, e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    emit_error(kExitUsage, e.what());
    return kExitUsage;
  }
  return kExitOk;
}

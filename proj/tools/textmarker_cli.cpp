#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "json_config.hpp"
#include "textmarker/dataset.hpp"
#include "textmarker/error.hpp"
#include "textmarker/experiment.hpp"
#include "textmarker/external_model.hpp"
#include "textmarker/model.hpp"
#include "textmarker/random.hpp"
#include "textmarker/synth.hpp"
#include "textmarker/trigger.hpp"
#include "textmarker/verification.hpp"

namespace textmarker::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct Globals {
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  bool no_timestamp = false;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buf;
}

void require_file(const std::string& path, std::string_view what) {
  if (path.empty()) return;
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::IoError, std::string(what) + " not found: " + path);
  }
}

void require_writable(const std::string& path) {
  if (path.empty()) return;
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw Error(ErrorCode::IoError, "output directory does not exist: " + parent.string());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open for writing: " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, path + ": " + e.what());
  }
}

/// Every report is {command, seed, config, result[, timestamp]}; the
/// timestamp comes last and is dropped with --no-timestamp.
void emit_report(std::string_view command, const Globals& g, ojson config, ojson result,
                 const std::string& path) {
  ojson report;
  report["command"] = command;
  report["seed"] = g.seed;
  report["config"] = std::move(config);
  report["result"] = std::move(result);
  if (!g.no_timestamp) report["timestamp"] = utc_timestamp();
  const std::string text = report.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

ojson params_json(const TestParams& p) {
  ojson j;
  j["m"] = p.m;
  j["k"] = p.k;
  j["tau"] = p.tau;
  j["beta"] = p.beta_value();
  return j;
}

void add_test_options(CLI::App* cmd, TestParams& p, std::optional<double>& beta) {
  cmd->add_option("--m", p.m, "Number of probe queries")->capture_default_str();
  cmd->add_option("--tau", p.tau, "Significance parameter")->capture_default_str();
  cmd->add_option("--beta", beta, "Chance success rate (default 1/K)");
}

void add_corpus_options(CLI::App* cmd, SynthConfig& c) {
  cmd->add_option("--n-samples", c.n_samples, "Corpus size")->capture_default_str();
  cmd->add_option("--k", c.n_classes, "Number of classes")->capture_default_str();
  cmd->add_option("--vocab-size", c.vocab_size)->capture_default_str();
  cmd->add_option("--keywords-per-class", c.keywords_per_class)->capture_default_str();
  cmd->add_option("--keyword-rate", c.keyword_rate, "Extra keyword probability per word")
      ->capture_default_str();
  cmd->add_option("--common-word-rate", c.common_word_rate)->capture_default_str();
  cmd->add_option("--min-words", c.min_words)->capture_default_str();
  cmd->add_option("--max-words", c.max_words)->capture_default_str();
  cmd->add_option("--syllables", c.syllables)->capture_default_str();
  cmd->add_option("--vocab-seed", c.vocab_seed, "Seed of the vocabulary and keywords")
      ->capture_default_str();
}

void add_model_options(CLI::App* cmd, RefModelConfig& m) {
  cmd->add_option("--features", m.n_features, "Hashed feature buckets (power of two)")
      ->capture_default_str();
  cmd->add_flag("--char-ngrams,!--no-char-ngrams", m.char_ngrams, "Add byte 3..5-grams")
      ->capture_default_str();
  cmd->add_option("--epochs", m.epochs)->capture_default_str();
  cmd->add_option("--lr", m.learning_rate)->capture_default_str();
  cmd->add_option("--l2", m.l2)->capture_default_str();
}

// ---------------------------------------------------------------------------

struct SynthCmd {
  SynthConfig corpus;
  std::string split = "train";
  std::string out;
  std::string report;

  void run(const Globals& g) {
    require_writable(out);
    require_writable(report);
    if (split != "train" && split != "test") {
      throw Error(ErrorCode::InvalidArgument, "split must be train or test");
    }
    corpus.seed = g.seed;
    const Dataset d = synthesize(corpus, split == "train" ? Split::Train : Split::Test);
    save_jsonl(out, d);
    ojson config;
    config["corpus"] = nlohmann::json(corpus);
    config["split"] = split;
    config["out"] = out;
    ojson result;
    result["n_samples"] = d.size();
    result["n_classes"] = d.n_classes;
    emit_report("synth", g, std::move(config), std::move(result), report);
  }
};

struct MarkCmd {
  std::string data;
  std::string dictionary;
  std::optional<int> n_classes;
  std::string level = "word";
  std::optional<std::string> pattern;
  std::string location = "initial";
  int size = 1;
  std::string mode = "insert";
  int target = 0;
  std::optional<double> rate;
  std::optional<std::size_t> count;
  std::string user = "u000";
  std::string out;
  std::string recipe_out;
  std::string report;

  void run(const Globals& g) {
    require_file(data, "dataset");
    require_file(dictionary, "dictionary");
    if (recipe_out.empty()) recipe_out = out + ".recipe.json";
    require_writable(out);
    require_writable(recipe_out);
    require_writable(report);

    const Dataset d = load_jsonl(data, n_classes);
    const auto lvl = parse_level(level);
    const auto loc = parse_location(location);
    const auto md = parse_mode(mode);
    TriggerSpec spec;
    if (pattern) {
      spec = TriggerSpec{lvl, *pattern, loc, size, md, user};
      spec.validate();
    } else {
      const auto dict =
          dictionary.empty() ? TriggerDictionary::defaults() : TriggerDictionary::load(dictionary);
      spec = draw_spec(dict, lvl, loc, size, user, derive_seed(g.seed, "pattern"), md);
    }
    if (target < 0 || target >= d.n_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "target label outside [0, K)");
    }
    const MarkAmount amount = count ? MarkAmount::of_count(*count)
                                    : MarkAmount::of_rate(rate.value_or(0.01));
    const MarkRecipe recipe{spec, target, amount, g.seed};
    const MarkedDataset marked = mark_dataset(d, {recipe});
    save_jsonl(out, marked);
    write_text(recipe_out, nlohmann::json(recipe).dump(2) + "\n");

    ojson config;
    config["data"] = data;
    config["dictionary"] = dictionary.empty() ? "builtin" : dictionary;
    config["recipe"] = nlohmann::json(recipe);
    config["out"] = out;
    config["recipe_out"] = recipe_out;
    ojson result;
    result["n_samples"] = marked.data.size();
    result["n_marked"] = marked.provenance.size();
    result["poison_rate"] =
        static_cast<double>(marked.provenance.size()) / static_cast<double>(marked.data.size());
    emit_report("mark", g, std::move(config), std::move(result), report);
  }
};

struct TrainCmd {
  std::string data;
  std::string test;
  std::optional<int> n_classes;
  RefModelConfig model;
  std::string model_out;
  std::string report;

  void run(const Globals& g) {
    require_file(data, "training set");
    require_file(test, "test set");
    require_writable(model_out);
    require_writable(report);
    model.rng_seed = g.seed;
    const Dataset d = load_jsonl(data, n_classes);
    const TrainedRefModel trained = train(d, model);
    trained.save(model_out);

    ojson config;
    config["data"] = data;
    config["test"] = test;
    config["model"] = nlohmann::json(model);
    config["model_out"] = model_out;
    ojson result;
    result["n_train"] = d.size();
    result["n_classes"] = trained.n_classes();
    result["train_accuracy"] = accuracy(trained, d);
    if (!test.empty()) {
      result["clean_accuracy"] = accuracy(trained, load_jsonl(test, trained.n_classes(), Split::Test));
    }
    emit_report("train", g, std::move(config), std::move(result), report);
  }
};

struct VerifyCmd {
  std::string model;
  std::string external;
  std::string test;
  std::string recipe;
  std::optional<int> n_classes;
  TestParams params;
  std::optional<double> beta;
  long timeout_ms = 30'000;
  bool probabilities = false;
  std::string report;

  void run(const Globals& g) {
    require_file(model, "model");
    require_file(test, "test set");
    require_file(recipe, "recipe");
    require_writable(report);
    if (model.empty() == external.empty()) {
      throw Error(ErrorCode::InvalidArgument, "give exactly one of --model and --external");
    }
    if (timeout_ms <= 0) throw Error(ErrorCode::InvalidArgument, "--timeout-ms must be > 0");
    const MarkRecipe r = read_json(recipe).get<MarkRecipe>();

    std::unique_ptr<BlackBoxModel> target;
    std::optional<int> k = n_classes;
    if (!model.empty()) {
      auto loaded = std::make_unique<TrainedRefModel>(TrainedRefModel::load(model));
      if (k && *k != loaded->n_classes()) {
        throw Error(ErrorCode::InvalidArgument, "--k disagrees with the model file");
      }
      k = loaded->n_classes();
      target = std::move(loaded);
    }
    const Dataset held_out = load_jsonl(test, k, Split::Test);
    params.k = held_out.n_classes;
    params.beta = beta;
    params.validate();
    const auto probes = make_probes(held_out, r.spec, r.target_label, params.m,
                                    derive_seed(g.seed, "probes"));
    if (!external.empty()) {
      target = connect_external(external,
                                {std::chrono::milliseconds(timeout_ms), probabilities});
    }
    const VerificationReport result = verify(*target, probes, params, r.spec.user_id, g.jobs);

    ojson config;
    if (model.empty()) {
      config["external"] = external;
      config["timeout_ms"] = timeout_ms;
    } else {
      config["model"] = model;
    }
    config["test"] = test;
    config["recipe"] = nlohmann::json(r);
    config["params"] = params_json(params);
    emit_report("verify", g, std::move(config), result.to_json(), report);
  }
};

struct ThresholdCmd {
  TestParams params;
  std::optional<double> beta;
  bool json = false;

  void run(const Globals& g) {
    params.beta = beta;
    params.validate();
    const double threshold = asr_threshold(params);
    if (!json) {
      // Smallest ASR at 0.1% resolution that still rejects the null.
      std::printf("%.3f\n", std::ceil(threshold * 1000.0 - 1e-9) / 1000.0);
      return;
    }
    ojson result;
    result["threshold"] = threshold;
    result["t_critical"] = t_upper_critical(static_cast<double>(params.m - 1), params.tau);
    if (params.below_recommended_m()) result["warnings"] = {"m below 30"};
    emit_report("threshold", g, params_json(params), std::move(result), {});
  }
};

struct BenchmarkOptions {
  MultiUserConfig multi;
  std::vector<std::string> levels{"word", "sentence"};
  std::string location = "initial";
  int size = 1;
  std::string mode = "insert";
  std::string proxy = "oracle";
  std::optional<double> beta;
  std::string report;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--users", multi.n_users)->capture_default_str();
    cmd->add_option("--members", multi.n_members, "Owners 0..members-1 are trained on")
        ->capture_default_str();
    cmd->add_option("--collab", multi.collab_group_size, "Owners sharing target label 0")
        ->capture_default_str();
    cmd->add_option("--samples-per-user", multi.samples_per_user)->capture_default_str();
    cmd->add_option("--marks-per-user", multi.marks_per_user)->capture_default_str();
    cmd->add_option("--levels", levels, "Trigger levels to allocate from")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--location", location)->capture_default_str();
    cmd->add_option("--size", size)->capture_default_str();
    cmd->add_option("--mode", mode)->capture_default_str();
    cmd->add_option("--n-test", multi.n_test)->capture_default_str();
    cmd->add_option("--proxy", proxy, "Baseline knowledge: oracle or proxy")
        ->capture_default_str();
    cmd->add_option("--proxy-fraction", multi.proxy_fraction)->capture_default_str();
    cmd->add_option("--shadows", multi.n_shadow)->capture_default_str();
    add_corpus_options(cmd, multi.corpus);
    add_model_options(cmd, multi.model);
    add_test_options(cmd, multi.test, beta);
    cmd->add_option("--report", report, "Report path (default stdout)");
  }

  void resolve(const Globals& g) {
    require_writable(report);
    multi.allocation.levels.clear();
    for (const auto& l : levels) multi.allocation.levels.push_back(parse_level(l));
    multi.allocation.location = parse_location(location);
    multi.allocation.size = size;
    multi.allocation.mode = parse_mode(mode);
    multi.proxy_mode = parse_proxy_mode(proxy);
    multi.test.beta = beta;
    multi.seed = g.seed;
    multi.corpus.seed = g.seed;
    multi.jobs = g.jobs;
  }
};

ojson decisions_json(const Decisions& d) {
  ojson j = ojson::object();
  for (const auto& [user, m] : d) j[user] = to_string(m);
  return j;
}

struct SimulateCmd {
  BenchmarkOptions bench;
  bool baselines = false;

  void run(const Globals& g) {
    bench.resolve(g);
    bench.multi.run_baselines = baselines;
    const MultiUserResult r = run_multi_user(bench.multi);

    ojson result;
    result["clean_accuracy"] = r.clean_accuracy;
    ojson users = ojson::array();
    for (const auto& u : r.users) {
      ojson entry;
      entry["user_id"] = u.trigger.spec.user_id;
      entry["truth"] = to_string(u.truth);
      entry["trigger"] = nlohmann::json(u.trigger.spec);
      entry["target_label"] = u.trigger.target_label;
      entry["report"] = u.report.to_json();
      users.push_back(std::move(entry));
    }
    result["users"] = std::move(users);
    result["textmarker"] = r.textmarker.to_json();
    if (r.shadow) result["shadow"] = r.shadow->to_json();
    if (r.metric) result["metric"] = r.metric->to_json();
    emit_report("simulate", g, to_json(bench.multi), std::move(result), bench.report);
  }
};

struct BaselineCmd {
  BenchmarkOptions bench;
  std::string method = "textmark";

  BaselineCmd() {
    bench.multi.n_users = 100;
    bench.multi.n_members = 50;
  }

  void run(const Globals& g) {
    if (method != "shadow" && method != "metric" && method != "textmark") {
      throw Error(ErrorCode::InvalidArgument, "method must be shadow, metric or textmark");
    }
    bench.resolve(g);
    bench.multi.run_baselines = method != "textmark";
    const MultiUserResult r = run_multi_user(bench.multi);

    ojson result;
    result["method"] = method;
    if (method == "shadow") {
      result["evaluation"] = r.shadow->to_json();
      result["decisions"] = decisions_json(r.shadow_decisions);
    } else if (method == "metric") {
      result["evaluation"] = r.metric->to_json();
      result["decisions"] = decisions_json(r.metric_decisions);
    } else {
      result["evaluation"] = r.textmarker.to_json();
      result["decisions"] = decisions_json(r.textmarker_decisions);
    }
    ojson config = to_json(bench.multi);
    config["method"] = method;
    emit_report("baseline", g, std::move(config), std::move(result), bench.report);
  }
};

struct SweepCmd {
  SingleUserConfig base;
  std::string axis = "rate";
  std::vector<std::string> grid;
  std::string level = "word";
  std::string pattern = "Ops";
  std::string location = "initial";
  std::string mode = "insert";
  double rate = 0.01;
  std::size_t collab_users = 5;
  std::optional<double> beta;
  std::string out;

  void run(const Globals& g) {
    require_writable(out);
    const SweepAxis ax = parse_sweep_axis(axis);
    base.spec.level = parse_level(level);
    base.spec.pattern = pattern;
    base.spec.location = parse_location(location);
    base.spec.mode = parse_mode(mode);
    base.spec.validate();
    base.amount = MarkAmount::of_rate(rate);
    base.test.beta = beta;
    base.seed = g.seed;
    base.corpus.seed = g.seed;
    if (grid.empty()) grid = default_sweep_grid(ax, TriggerDictionary::defaults(), base.spec.level);

    const auto rows = run_sweep(ax, grid, base, collab_users, g.jobs);
    const std::string csv = sweep_csv(rows);

    ojson config;
    config["axis"] = axis;
    config["grid"] = grid;
    config["base"] = to_json(base);
    config["collab_users"] = collab_users;
    if (out.empty()) {
      std::cout << csv;
      return;
    }
    write_text(out, csv);
    ojson result;
    result["csv"] = out;
    result["rows"] = rows.size();
    emit_report("sweep", g, std::move(config), std::move(result), out + ".json");
  }
};

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Dataset ownership verification with backdoor triggers", "textmarker"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with option values; flags given here win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the verb

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")
      ->envname("TEXTMARK_SEED")
      ->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_flag("--no-timestamp", g.no_timestamp, "Omit the timestamp so reports compare byte for byte");

  SynthCmd synth;
  auto* c_synth = app.add_subcommand("synth", "Write a synthetic labeled corpus as JSONL");
  add_corpus_options(c_synth, synth.corpus);
  c_synth->add_option("--split", synth.split, "train or test")->capture_default_str();
  c_synth->add_option("--out", synth.out, "Output JSONL")->required();
  c_synth->add_option("--report", synth.report, "Report path (default stdout)");

  MarkCmd mark;
  auto* c_mark = app.add_subcommand("mark", "Backdoor part of a dataset with one owner's trigger");
  c_mark->add_option("--data", mark.data, "Input JSONL")->required();
  c_mark->add_option("--dict", mark.dictionary, "Trigger dictionary JSON (default built in)");
  c_mark->add_option("--k", mark.n_classes, "Number of classes (default from labels)");
  c_mark->add_option("--level", mark.level, "char, word or sentence")->capture_default_str();
  c_mark->add_option("--pattern", mark.pattern, "Trigger text (default drawn from the dictionary)");
  c_mark->add_option("--location", mark.location, "initial, middle, end or random")
      ->capture_default_str();
  c_mark->add_option("--size", mark.size)->capture_default_str();
  c_mark->add_option("--mode", mark.mode, "insert or replace")->capture_default_str();
  c_mark->add_option("--target", mark.target, "Target label")->capture_default_str();
  auto* rate_opt = c_mark->add_option("--rate", mark.rate, "Fraction of the corpus to mark (default 0.01)");
  c_mark->add_option("--count", mark.count, "Number of samples to mark")->excludes(rate_opt);
  c_mark->add_option("--user", mark.user, "Owner id")->capture_default_str();
  c_mark->add_option("--out", mark.out, "Marked JSONL")->required();
  c_mark->add_option("--recipe-out", mark.recipe_out, "Recipe JSON (default <out>.recipe.json)");
  c_mark->add_option("--report", mark.report, "Report path (default stdout)");

  TrainCmd train_cmd;
  auto* c_train = app.add_subcommand("train", "Train the reference classifier");
  c_train->add_option("--data", train_cmd.data, "Training JSONL")->required();
  c_train->add_option("--test", train_cmd.test, "Held-out JSONL for clean accuracy");
  c_train->add_option("--k", train_cmd.n_classes, "Number of classes (default from labels)");
  add_model_options(c_train, train_cmd.model);
  c_train->add_option("--model-out", train_cmd.model_out, "Model file")->required();
  c_train->add_option("--report", train_cmd.report, "Report path (default stdout)");

  VerifyCmd verify_cmd;
  auto* c_verify = app.add_subcommand("verify", "Test whether a model learned an owner's trigger");
  c_verify->add_option("--model", verify_cmd.model, "Model file from `train`");
  c_verify->add_option("--external", verify_cmd.external, "Shell command speaking JSON lines");
  c_verify->add_option("--test", verify_cmd.test, "Held-out JSONL to draw probes from")->required();
  c_verify->add_option("--recipe", verify_cmd.recipe, "Recipe JSON from `mark`")->required();
  c_verify->add_option("--k", verify_cmd.n_classes, "Number of classes (default from model or data)");
  add_test_options(c_verify, verify_cmd.params, verify_cmd.beta);
  c_verify->add_option("--timeout-ms", verify_cmd.timeout_ms, "Per-query timeout for --external")
      ->capture_default_str();
  c_verify->add_flag("--probs", verify_cmd.probabilities, "External model returns probabilities");
  c_verify->add_option("--report", verify_cmd.report, "Report path (default stdout)");

  ThresholdCmd threshold;
  auto* c_threshold = app.add_subcommand("threshold", "Print the ASR needed to claim membership");
  c_threshold->add_option("--k", threshold.params.k, "Number of classes")->capture_default_str();
  add_test_options(c_threshold, threshold.params, threshold.beta);
  c_threshold->add_flag("--json", threshold.json, "Print a JSON report with the exact value");

  SimulateCmd simulate;
  auto* c_simulate = app.add_subcommand("simulate", "Multi-owner experiment on a synthetic corpus");
  simulate.bench.add_to(c_simulate);
  c_simulate->add_flag("--baselines", simulate.baselines, "Also run shadow and metric MI");

  SweepCmd sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Vary one factor of the single-owner experiment");
  c_sweep->add_option("--axis", sweep.axis, "pattern, location, rate, size or collab")
      ->capture_default_str();
  c_sweep->add_option("--grid", sweep.grid, "Comma-separated values (default per axis)")
      ->delimiter(',');
  c_sweep->add_option("--level", sweep.level)->capture_default_str();
  c_sweep->add_option("--pattern", sweep.pattern)->capture_default_str();
  c_sweep->add_option("--location", sweep.location)->capture_default_str();
  c_sweep->add_option("--size", sweep.base.spec.size)->capture_default_str();
  c_sweep->add_option("--mode", sweep.mode)->capture_default_str();
  c_sweep->add_option("--rate", sweep.rate, "Poison rate")->capture_default_str();
  c_sweep->add_option("--target", sweep.base.target_label, "Target label")->capture_default_str();
  c_sweep->add_option("--n-test", sweep.base.n_test)->capture_default_str();
  c_sweep->add_option("--collab-users", sweep.collab_users)->capture_default_str();
  add_corpus_options(c_sweep, sweep.base.corpus);
  add_model_options(c_sweep, sweep.base.model);
  add_test_options(c_sweep, sweep.base.test, sweep.beta);
  c_sweep->add_option("--out", sweep.out, "CSV path (default stdout); config goes to <out>.json");

  BaselineCmd baseline;
  auto* c_baseline = app.add_subcommand("baseline", "User-level MI accuracy of one method");
  c_baseline->add_option("--method", baseline.method, "shadow, metric or textmark")
      ->capture_default_str();
  baseline.bench.add_to(c_baseline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*c_synth) synth.run(g);
    if (*c_mark) mark.run(g);
    if (*c_train) train_cmd.run(g);
    if (*c_verify) verify_cmd.run(g);
    if (*c_threshold) threshold.run(g);
    if (*c_simulate) simulate.run(g);
    if (*c_sweep) sweep.run(g);
    if (*c_baseline) baseline.run(g);
  } catch (const MalformedLineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON input: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace textmarker::cli

int main(int argc, char** argv) {
  return textmarker::cli::run(argc, argv);
}

// cropdx: scoring, desk-scale GRPO training, reasoning-data filtering,
// stratified sampling, keyword-accuracy evaluation, and vocabulary
// inspection in one binary. Exit codes: 0 ok, 2 input error, 3 runtime
// error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cropdx/eval.hpp"
#include "cropdx/grpo.hpp"
#include "cropdx/jsonl.hpp"
#include "cropdx/pipeline.hpp"
#include "cropdx/pipeline_http.hpp"
#include "cropdx/reward.hpp"
#include "cropdx/vocab.hpp"
#include "json.hpp"

namespace {

using cropdx::Sample;
using cropdx::Vocabulary;
using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;

struct RunConfig {
  double w_f = 0.5;
  double w_a = 2.0;
  double w_r = 0.5;
  cropdx::TrainConfig train;
  double tau = 8.0;
  int max_regens = 2;
  double fraction = 0.19;
  std::uint64_t seed = 0;

  double reward_cap() const { return w_f + w_a + w_r; }
};

// Config file (JSON object) overridden by flags; the default path comes
// from $CROPDX_CONFIG.
void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cropdx::MissingFileError("cannot open config: " + path);
  json doc = json::parse(in);
  cfg.w_f = doc.value("w_f", cfg.w_f);
  cfg.w_a = doc.value("w_a", cfg.w_a);
  cfg.w_r = doc.value("w_r", cfg.w_r);
  cfg.tau = doc.value("tau", cfg.tau);
  cfg.max_regens = doc.value("max_regens", cfg.max_regens);
  cfg.fraction = doc.value("fraction", cfg.fraction);
  cfg.seed = doc.value("seed", cfg.seed);
  cfg.train.group_size = doc.value("group_size", cfg.train.group_size);
  cfg.train.clip = doc.value("clip", cfg.train.clip);
  cfg.train.beta = doc.value("beta", cfg.train.beta);
  cfg.train.kl_target = doc.value("kl_target", cfg.train.kl_target);
  cfg.train.adaptive_beta = doc.value("adaptive_beta",
                                      cfg.train.adaptive_beta);
  cfg.train.learning_rate = doc.value("learning_rate",
                                      cfg.train.learning_rate);
  cfg.train.steps = doc.value("steps", cfg.train.steps);
  cfg.train.temperature = doc.value("temperature", cfg.train.temperature);
}

Vocabulary load_vocab(const std::string& vocab_path) {
  if (vocab_path.empty()) return cropdx::load_default();
  return cropdx::load_from_file(vocab_path);
}

Sample sample_from_json(const json& j) {
  Sample s;
  s.id = j.value("id", "");
  s.question = j.value("question", "");
  s.reference_answer = j.value("reference_answer", "");
  s.crop = j.value("crop", "");
  s.disease = j.value("disease", "");
  s.frequency = j.value("frequency", 0.0);
  return s;
}

json breakdown_to_json(const std::string& id,
                       const cropdx::RewardBreakdown& b,
                       const RunConfig& cfg) {
  json rec;
  rec["id"] = id;
  rec["kind"] = (b.answer.kind == cropdx::QuestionKind::PreventionControl)
                    ? "prevention_control"
                    : "identification";
  // Custom weights rescale the normalized components; defaults reproduce
  // the built-in 0.5/2.0/0.5 point values.
  rec["total"] = cfg.w_f * b.format_fraction() +
                 cfg.w_a * b.answer_fraction() +
                 cfg.w_r * b.reasoning_fraction();
  json fmt;
  fmt["total"] = b.format.total;
  fmt["structure"] = b.format.structure;
  fmt["steps"] = b.format.steps;
  fmt["content"] = b.format.content;
  fmt["think_len"] = b.format.think_len;
  fmt["answer_len"] = b.format.answer_len;
  fmt["fraction"] = b.format_fraction();
  rec["format"] = std::move(fmt);
  json ans;
  ans["total"] = b.answer.total;
  if (b.answer.kind == cropdx::QuestionKind::PreventionControl) {
    for (int c = 0; c < 4; ++c) {
      ans[cropdx::treatment_name(static_cast<cropdx::TreatmentId>(c))] =
          b.answer.categories[c];
    }
  } else {
    ans["plant"] = b.answer.plant;
    ans["disease"] = b.answer.disease;
  }
  ans["fraction"] = b.answer_fraction();
  rec["answer"] = std::move(ans);
  json rsn;
  rsn["total"] = b.reasoning.total;
  rsn["logic"] = b.reasoning.logic;
  rsn["prof"] = b.reasoning.prof;
  rsn["comp"] = b.reasoning.comp;
  rsn["fraction"] = b.reasoning_fraction();
  rec["reasoning"] = std::move(rsn);
  return rec;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw cropdx::WriteError("cannot open output file: " + path);
  return out;
}

int cmd_score(const std::string& in_path, const std::string& out_path,
              const std::string& vocab_path, const RunConfig& cfg) {
  Vocabulary vocab = load_vocab(vocab_path);
  std::ofstream out = open_out(out_path);
  json header;
  header["type"] = "header";
  header["w_f"] = cfg.w_f;
  header["w_a"] = cfg.w_a;
  header["w_r"] = cfg.w_r;
  header["reward_cap"] = cfg.reward_cap();
  out << header.dump() << "\n";
  cropdx::for_each_jsonl(in_path, [&](std::size_t lineno, const json& j) {
    if (!j.contains("response")) {
      throw cropdx::JsonlError(in_path + ":" + std::to_string(lineno) +
                                   ": missing 'response' field",
                               lineno);
    }
    Sample s = sample_from_json(j);
    auto b = cropdx::total_reward(j["response"].get<std::string>(), s, vocab);
    out << breakdown_to_json(s.id, b, cfg).dump() << "\n";
  });
  return kExitOk;
}

int cmd_train(const std::string& in_path, const std::string& out_path,
              const std::string& vocab_path, const RunConfig& cfg) {
  Vocabulary vocab = load_vocab(vocab_path);
  std::vector<cropdx::TemplateBank> banks;
  cropdx::for_each_jsonl(in_path, [&](std::size_t lineno, const json& j) {
    if (!j.contains("templates") || !j["templates"].is_array()) {
      throw cropdx::JsonlError(in_path + ":" + std::to_string(lineno) +
                                   ": missing 'templates' array",
                               lineno);
    }
    Sample s = sample_from_json(j);
    if (s.id.empty()) s.id = j.value("sample_id", "");
    std::vector<std::string> templates;
    for (const auto& t : j["templates"]) templates.push_back(t.get<std::string>());
    banks.push_back(cropdx::make_bank(s, std::move(templates), vocab));
  });

  cropdx::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  cropdx::TrainReport report = cropdx::train(banks, tc);

  std::ofstream out = open_out(out_path);
  for (const auto& step : report.trajectory) {
    json rec;
    rec["step"] = step.step;
    rec["expected_reward"] = step.expected_reward;
    rec["kl"] = step.kl;
    rec["objective"] = step.objective;
    rec["beta"] = step.beta;
    out << rec.dump() << "\n";
  }
  const auto& last = report.trajectory.back();
  json summary;
  summary["final_expected_reward"] = last.expected_reward;
  summary["final_kl"] = last.kl;
  summary["steps"] = last.step;
  std::cout << summary.dump() << "\n";
  return kExitOk;
}

int cmd_filter(const std::string& in_path, const std::string& out_path,
               const std::string& rejects_path, const RunConfig& cfg,
               const std::string& judge_scripts_path,
               const std::string& endpoint, int concurrency) {
  std::vector<Sample> dataset;
  cropdx::for_each_jsonl(in_path, [&](std::size_t, const json& j) {
    dataset.push_back(sample_from_json(j));
  });

  cropdx::ScriptedGenerator mock_gen;
  cropdx::ScriptedJudge mock_judge(9.0);
  std::unique_ptr<cropdx::HttpGeneratorClient> http_gen;
  std::unique_ptr<cropdx::HttpJudgeClient> http_judge;
  cropdx::GeneratorClient* gen = &mock_gen;
  cropdx::JudgeClient* judge = &mock_judge;
  if (!endpoint.empty()) {
    http_gen = std::make_unique<cropdx::HttpGeneratorClient>(endpoint);
    http_judge = std::make_unique<cropdx::HttpJudgeClient>(endpoint);
    gen = http_gen.get();
    judge = http_judge.get();
  } else if (!judge_scripts_path.empty()) {
    std::ifstream in(judge_scripts_path);
    if (!in)
      throw cropdx::MissingFileError("cannot open judge scripts: " +
                                     judge_scripts_path);
    json doc = json::parse(in);
    for (const auto& [id, totals] : doc.items()) {
      std::vector<cropdx::JudgeScore> scores;
      for (const auto& t : totals) {
        scores.push_back(cropdx::JudgeScore::raw_total(
            t.get<double>(), "raise detail and accuracy"));
      }
      mock_judge.set_script(id, std::move(scores));
    }
  }

  cropdx::PipelineResult result = cropdx::run_pipeline(
      dataset, *gen, *judge, cfg.tau, cfg.max_regens, concurrency);

  std::ofstream out = open_out(out_path);
  for (const auto& rec : result.accepted) {
    json j;
    j["id"] = rec.sample.id;
    j["question"] = rec.sample.question;
    j["reference_answer"] = rec.sample.reference_answer;
    j["crop"] = rec.sample.crop;
    j["disease"] = rec.sample.disease;
    j["think"] = rec.think;
    j["answer"] = rec.answer;
    j["judge_total"] = rec.judge_total;
    j["attempts"] = rec.attempts;
    out << j.dump() << "\n";
  }
  std::ofstream rejects = open_out(rejects_path);
  for (const auto& rec : result.rejected) {
    json j;
    j["id"] = rec.id;
    j["attempts"] = rec.attempts;
    j["scores"] = rec.scores;
    rejects << j.dump() << "\n";
  }
  for (const auto& [id, what] : result.errors) {
    std::cerr << "error: sample " << id << ": " << what << "\n";
  }
  json summary;
  summary["accepted"] = result.accepted.size();
  summary["rejected"] = result.rejected.size();
  summary["errors"] = result.errors.size();
  std::cout << summary.dump() << "\n";
  return result.errors.empty() ? kExitOk : kExitRuntime;
}

int cmd_sample(const std::string& in_path, const std::string& out_path,
               const RunConfig& cfg) {
  std::vector<Sample> dataset;
  cropdx::for_each_jsonl(in_path, [&](std::size_t, const json& j) {
    dataset.push_back(sample_from_json(j));
  });
  std::vector<std::string> warnings;
  std::vector<Sample> subset =
      cropdx::stratified_sample(dataset, cfg.fraction, cfg.seed, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::ofstream out = open_out(out_path);
  for (const auto& s : subset) {
    json j;
    j["id"] = s.id;
    j["question"] = s.question;
    j["reference_answer"] = s.reference_answer;
    j["crop"] = s.crop;
    j["disease"] = s.disease;
    if (s.frequency > 0.0) j["frequency"] = s.frequency;
    out << j.dump() << "\n";
  }
  return kExitOk;
}

int cmd_eval(const std::string& in_path, const std::string& out_path,
             const std::string& vocab_path) {
  Vocabulary vocab = load_vocab(vocab_path);
  std::vector<cropdx::EvalRecord> records;
  cropdx::for_each_jsonl(in_path, [&](std::size_t lineno, const json& j) {
    if (!j.contains("prediction")) {
      throw cropdx::JsonlError(in_path + ":" + std::to_string(lineno) +
                                   ": missing 'prediction' field",
                               lineno);
    }
    cropdx::EvalRecord r;
    r.id = j.value("id", "");
    r.prediction = j["prediction"].get<std::string>();
    r.reference = j.contains("reference") ? j["reference"].get<std::string>()
                                          : j.value("reference_answer", "");
    r.crop = j.value("crop", "");
    r.disease = j.value("disease", "");
    r.frequency = j.value("frequency", 0.0);
    records.push_back(std::move(r));
  });

  cropdx::AccuracyResult acc = cropdx::keyword_accuracy(records, vocab);
  std::map<std::string, double> per_class, freqs;
  for (const auto& [cls, hits] : acc.per_crop_class) {
    per_class[cls] = hits.second > 0
                         ? static_cast<double>(hits.first) / hits.second
                         : 0.0;
  }
  for (const auto& r : records) {
    if (!r.crop.empty() && per_class.count(r.crop)) freqs[r.crop] = r.frequency;
  }
  // Classes with no frequency data land in the Low bucket.
  for (const auto& [cls, a] : per_class) {
    if (!freqs.count(cls)) freqs[cls] = 0.0;
  }
  auto stats = cropdx::stratify(per_class, freqs);
  cropdx::write_report(acc, stats, per_class, freqs, out_path);
  std::cout << cropdx::render_report_table(stats, per_class, freqs);
  return kExitOk;
}

int cmd_vocab(const std::string& kind, const std::string& name,
              const std::string& vocab_path) {
  Vocabulary vocab = load_vocab(vocab_path);
  if (kind == "dump") {
    std::cout << cropdx::to_json_string(vocab) << "\n";
    return kExitOk;
  }
  cropdx::EntryKind k;
  if (kind == "plant") {
    k = cropdx::EntryKind::Plant;
  } else if (kind == "disease") {
    k = cropdx::EntryKind::Disease;
  } else {
    std::cerr << "unknown kind '" << kind << "' (plant|disease|dump)\n";
    return kExitInput;
  }
  const cropdx::VocabEntry* entry = vocab.find_entry(k, name);
  if (!entry) {
    std::cerr << "no " << kind << " entry matches '" << name << "'\n";
    return kExitInput;
  }
  std::cout << entry->canonical << ":";
  for (const auto& s : entry->synonyms) std::cout << " " << s << ";";
  std::cout << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Domain-vocabulary reward scoring, desk-scale GRPO training, "
               "judge filtering, stratified sampling, and keyword-accuracy "
               "evaluation for agricultural VQA"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  if (const char* env = std::getenv("CROPDX_CONFIG")) config_path = env;
  // Config file values become defaults; flags parsed afterwards override.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  }
  if (!config_path.empty()) {
    try {
      apply_config_file(cfg, config_path);
    } catch (const std::exception& e) {
      std::cerr << "input error: " << e.what() << "\n";
      return kExitInput;
    }
  }
  std::string vocab_path, in_path, out_path, rejects_path;
  std::string judge_scripts, endpoint;
  std::string vocab_kind = "dump", vocab_name;
  int concurrency = 1;

  app.add_option("--config", config_path,
                 "JSON config file (default: $CROPDX_CONFIG)");

  auto add_common = [&](CLI::App* sub, bool needs_out = true) {
    sub->fallthrough();  // lets --config appear after the subcommand
    sub->add_option("input", in_path, "input JSONL file")->required();
    if (needs_out)
      sub->add_option("--out", out_path, "output file")->required();
    sub->add_option("--vocab", vocab_path, "vocabulary JSON file");
    sub->add_option("--seed", cfg.seed, "RNG seed");
  };

  auto* score = app.add_subcommand("score",
                                   "score responses with the reward function");
  add_common(score);
  score->add_option("--w-format", cfg.w_f, "format reward weight");
  score->add_option("--w-answer", cfg.w_a, "answer reward weight");
  score->add_option("--w-reasoning", cfg.w_r, "reasoning reward weight");

  auto* train = app.add_subcommand("train",
                                   "GRPO training over template banks");
  add_common(train);
  train->add_option("--steps", cfg.train.steps, "training steps");
  train->add_option("--beta", cfg.train.beta, "KL coefficient");
  train->add_option("--clip", cfg.train.clip, "PPO clip range");
  train->add_option("--group-size", cfg.train.group_size, "group size G");
  train->add_option("--temperature", cfg.train.temperature,
                    "sampling temperature");
  train->add_option("--lr", cfg.train.learning_rate, "learning rate");
  train->add_option("--kl-target", cfg.train.kl_target,
                    "adaptive-beta KL target");
  train->add_flag("--adaptive-beta", cfg.train.adaptive_beta,
                  "auto-tune beta toward the KL target");

  auto* filter = app.add_subcommand("filter",
                                    "judge-filter reasoning data");
  add_common(filter);
  filter->add_option("--tau", cfg.tau, "acceptance threshold");
  filter->add_option("--max-regens", cfg.max_regens,
                     "regeneration attempts after the first");
  filter->add_option("--rejects", rejects_path,
                     "rejection log path (default: <out>.rejects)");
  filter->add_option("--judge-scripts", judge_scripts,
                     "JSON map id -> [totals] for the scripted mock judge");
  filter->add_option("--endpoint", endpoint,
                     "HTTP base URL for real generator/judge clients");
  filter->add_option("--concurrency", concurrency,
                     "max in-flight samples");

  auto* sample = app.add_subcommand("sample", "stratified dataset subset");
  add_common(sample);
  sample->add_option("--fraction", cfg.fraction, "subset fraction")
      ->check(CLI::Range(0.0, 1.0));

  auto* eval = app.add_subcommand("eval", "keyword-accuracy evaluation");
  add_common(eval);

  auto* vocab = app.add_subcommand("vocab", "inspect the vocabulary");
  vocab->add_option("kind", vocab_kind, "plant | disease | dump");
  vocab->add_option("name", vocab_name, "name or synonym to look up");
  vocab->add_option("--vocab", vocab_path, "vocabulary JSON file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (score->parsed()) return cmd_score(in_path, out_path, vocab_path, cfg);
    if (train->parsed()) return cmd_train(in_path, out_path, vocab_path, cfg);
    if (filter->parsed()) {
      if (rejects_path.empty()) rejects_path = out_path + ".rejects";
      return cmd_filter(in_path, out_path, rejects_path, cfg, judge_scripts,
                        endpoint, concurrency);
    }
    if (sample->parsed()) return cmd_sample(in_path, out_path, cfg);
    if (eval->parsed()) return cmd_eval(in_path, out_path, vocab_path);
    if (vocab->parsed()) return cmd_vocab(vocab_kind, vocab_name, vocab_path);
  } catch (const cropdx::JsonlError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const cropdx::VocabError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

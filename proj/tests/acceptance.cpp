// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failed criteria. Golden files live under CROPDX_GOLDEN_DIR; set
// CROPDX_UPDATE_GOLDEN=1 to regenerate them.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cropdx/eval.hpp"
#include "cropdx/grpo.hpp"
#include "cropdx/pipeline.hpp"
#include "cropdx/reward.hpp"
#include "cropdx/vocab.hpp"
#include "reference_matcher.hpp"

using namespace cropdx;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass,
            const std::string& detail = "") {
  std::printf("criterion %2d [%s]: %s%s%s\n", criterion,
              pass ? "PASS" : "FAIL", name.c_str(),
              detail.empty() ? "" : " — ", detail.c_str());
  if (!pass) ++g_failures;
}

const Vocabulary& vocab() {
  static const Vocabulary v = load_default();
  return v;
}

double diag_answer(const std::string& generated, const std::string& reference) {
  auto p = parse_response(generated);
  auto targets = extract_targets(reference, vocab());
  return answer_reward_diag(p, targets, vocab()).total;
}

std::string make_think(int n_steps, std::size_t body_len,
                       std::size_t total_len) {
  std::string core;
  for (int i = 1; i <= n_steps; ++i) {
    if (!core.empty()) core += ' ';
    core += "Step " + std::to_string(i) + ": " + std::string(body_len, 'a');
  }
  if (total_len <= core.size()) return core;
  return std::string(total_len - core.size() - 1, 'x') + " " + core;
}

std::string wrap(const std::string& think, std::size_t answer_len) {
  return "<think>" + think + "</think><answer>" +
         std::string(answer_len, 'y') + "</answer>";
}

// --- criteria -------------------------------------------------------------

void criterion_1_reward_oracle() {
  double got = diag_answer("apple tree with white powdery coating",
                           "Apple Powdery Mildew");
  report(1, "answer reward on the exact-match worked pair",
         std::abs(got - 2.0) <= 1e-9, "got " + std::to_string(got));
}

void criterion_2_deviations_pinned() {
  // These two pairs score 2.0 and 1.82 under the normative synonym tables;
  // the originally published walkthrough lists 1.82 and 1.40 for the same
  // pairs. DEVIATIONS.md documents the discrepancy; this test fails if
  // either side of it drifts.
  const double published_walkthrough_1 = 1.82;
  const double published_walkthrough_3 = 1.40;
  double got1 = diag_answer("tomato plant with alternaria leaf spot",
                            "Tomato Early Blight (Alternaria solani)");
  double got3 = diag_answer("tomato with bacterial infection",
                            "Tomato Bacterial Spot");
  double oracle1 = cropdx_oracle::reference_answer_diag(
      "tomato plant with alternaria leaf spot",
      "Tomato Early Blight (Alternaria solani)", vocab());
  double oracle3 = cropdx_oracle::reference_answer_diag(
      "tomato with bacterial infection", "Tomato Bacterial Spot", vocab());
  bool pass = std::abs(got1 - 2.0) <= 1e-9 && std::abs(got3 - 1.82) <= 1e-9 &&
              std::abs(oracle1 - got1) <= 1e-9 &&
              std::abs(oracle3 - got3) <= 1e-9 &&
              std::abs(got1 - published_walkthrough_1) > 1e-9 &&
              std::abs(got3 - published_walkthrough_3) > 1e-9;
  report(2, "tiered-matcher deviations from the published walkthrough pinned",
         pass,
         "got " + std::to_string(got1) + " / " + std::to_string(got3));
}

void criterion_3_format_golden() {
  struct Case {
    std::string raw;
    double expected;
  };
  const std::vector<Case> cases = {
      {"no tags at all", 0.0},
      {"<think>" + make_think(2, 10, 90) + "</think>", 0.0},
      {wrap(std::string(79, 'x'), 4), 0.15},
      {wrap(make_think(1, 10, 80), 5), 0.20},
      {wrap(make_think(2, 10, 90), 3), 0.24},
      {wrap(make_think(2, 30, 100), 10), 0.34},
      {wrap(make_think(3, 31, 150), 15), 0.45},
      {wrap(make_think(4, 10, 487), 69), 0.40},
      {wrap(make_think(4, 35, 487), 69), 0.50},
      {wrap(make_think(5, 30, 800), 200), 0.50},
      {wrap(make_think(4, 29, 1000), 300), 0.36},
      {wrap(make_think(4, 30, 1001), 301), 0.42},
  };
  int bad = -1;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    double got = format_reward(parse_response(cases[i].raw)).total;
    if (std::abs(got - cases[i].expected) > 1e-12) {
      bad = static_cast<int>(i);
      break;
    }
  }
  report(3, "12-case structural reward tier table", bad < 0,
         bad < 0 ? "all boundaries match"
                 : "case " + std::to_string(bad) + " mismatched");
}

void criterion_4_boundedness_fuzz() {
  std::mt19937_64 rng(0xC0FFEE);
  std::uniform_int_distribution<int> len(0, 160);
  std::uniform_int_distribution<int> byte(0, 255);
  Sample diag;
  diag.question = "What is the content of this picture?";
  diag.reference_answer = "Tomato Early Blight";
  Sample ctrl;
  ctrl.question = "How to control this disease?";
  ctrl.reference_answer = "Tomato Early Blight";
  bool ok = true;
  for (int i = 0; i < 100000 && ok; ++i) {
    std::string raw(static_cast<std::size_t>(len(rng)), '\0');
    for (auto& c : raw) c = static_cast<char>(byte(rng));
    const Sample& s = (i % 2) ? ctrl : diag;
    auto b = total_reward(raw, s, vocab());
    ok = b.total >= 0.0 && b.total <= 3.0 && b.format.total >= 0.0 &&
         b.format.total <= 0.5 && b.answer.total >= 0.0 &&
         b.answer.total <= 2.0 && b.reasoning.total >= 0.0 &&
         b.reasoning.total <= 0.5;
  }
  report(4, "reward bounded over 100k random byte strings", ok);
}

void criterion_5_advantage_properties() {
  std::mt19937_64 rng(517);
  std::uniform_int_distribution<int> size(2, 16);
  std::uniform_real_distribution<double> rw(0.0, 3.0);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  bool ok = true;
  for (int t = 0; t < 10000 && ok; ++t) {
    int g = size(rng);
    std::vector<double> r(g);
    for (auto& x : r) x = rw(rng);
    auto a = compute_advantages(r);
    double mean = 0.0;
    for (double x : a) mean += x;
    if (std::abs(mean / g) > 1e-9) ok = false;

    const double c = shift(rng);
    std::vector<double> rs = r;
    for (auto& x : rs) x += c;
    auto as = compute_advantages(rs);
    for (int i = 0; i < g; ++i) {
      if (std::abs(a[i] - as[i]) > 1e-12) ok = false;
    }

    std::vector<double> flat(g, r[0]);
    for (double x : compute_advantages(flat)) {
      if (x != 0.0) ok = false;
    }
  }
  report(5, "group advantage: zero mean, shift invariance, flat groups", ok);
}

void criterion_6_gradient_check() {
  std::mt19937_64 rng(90210);
  std::uniform_real_distribution<double> base(-0.5, 0.5);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  std::uniform_real_distribution<double> rw(0.0, 3.0);
  TrainConfig cfg;  // defaults: clip 0.2, beta 0.01, temperature 0.7
  double max_rel = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<int> ksize(2, 8);
    const int k = ksize(rng);
    PolicyParams old_policy, policy, ref;
    for (int j = 0; j < k; ++j) {
      double z = base(rng);
      old_policy.logits.push_back(z);
      policy.logits.push_back(z + jitter(rng));  // ratios stay inside clip
      ref.logits.push_back(base(rng));
    }
    std::uniform_int_distribution<int> pick(0, k - 1);
    Group group;
    for (int i = 0; i < 4; ++i) {
      group.responses.push_back(pick(rng));
      group.rewards.push_back(rw(rng));
    }
    group.advantages = compute_advantages(group.rewards);
    group.ratios.assign(4, 1.0);

    auto res = grpo_objective(group, policy, old_policy, ref, cfg);
    const double h = 1e-5;
    for (int j = 0; j < k; ++j) {
      PolicyParams up = policy, down = policy;
      up.logits[j] += h;
      down.logits[j] -= h;
      double fd = (grpo_objective(group, up, old_policy, ref, cfg).value -
                   grpo_objective(group, down, old_policy, ref, cfg).value) /
                  (2.0 * h);
      double denom = std::max({std::abs(fd), std::abs(res.gradient[j]), 1e-8});
      max_rel = std::max(max_rel, std::abs(fd - res.gradient[j]) / denom);
    }
  }
  report(6, "analytic objective gradient vs central differences",
         max_rel < 1e-4, "max rel err " + std::to_string(max_rel));
}

void criterion_7_toy_convergence() {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> nsize(2, 5);
  std::uniform_real_distribution<double> rw(0.0, 2.0);
  std::vector<TemplateBank> banks;
  std::vector<int> best_index;
  for (int b = 0; b < 20; ++b) {
    TemplateBank bank;
    bank.sample_id = "bank" + std::to_string(b);
    const int n = nsize(rng);
    double best = -1.0;
    int best_i = 0;
    for (int i = 0; i < n; ++i) {
      bank.templates.push_back("t" + std::to_string(i));
      double r = rw(rng);
      bank.rewards.push_back(r);
      if (r > best) {
        best = r;
        best_i = i;
      }
    }
    bank.rewards[best_i] = best + 0.8;  // distinct, clearly-best template
    banks.push_back(std::move(bank));
    best_index.push_back(best_i);
  }

  TrainConfig cfg;  // group_size 3, clip 0.2, temperature 0.7
  cfg.steps = 500;
  cfg.seed = 42;
  auto run = train(banks, cfg);
  int converged = 0;
  bool finite = true;
  for (std::size_t b = 0; b < banks.size(); ++b) {
    auto p = run.final_policies[b].probs(cfg.temperature);
    if (p[best_index[b]] >= 0.9) ++converged;
  }
  for (const auto& step : run.trajectory) {
    if (!std::isfinite(step.kl) || !std::isfinite(step.expected_reward))
      finite = false;
  }

  // Separate run with the adaptive divergence controller: the final KL
  // must settle inside [0, 0.1].
  TrainConfig acfg = cfg;
  acfg.adaptive_beta = true;
  acfg.kl_target = 0.04;
  auto arun = train(banks, acfg);
  const double final_kl = arun.trajectory.back().kl;
  bool kl_band = final_kl >= 0.0 && final_kl <= 0.1;

  report(7, "toy policy training convergence and divergence control",
         converged >= 18 && finite && kl_band,
         std::to_string(converged) + "/20 banks at p>=0.9, adaptive KL " +
             std::to_string(final_kl));
}

void criterion_8_filter_loop() {
  Sample s;
  s.id = "f1";
  s.question = "What is this?";
  s.reference_answer = "Tomato Early Blight";

  ScriptedGenerator gen_a;
  ScriptedJudge judge_a;
  judge_a.set_script("f1", {JudgeScore::raw_total(8.0)});
  auto at_tau = filter_sample(s, gen_a, judge_a, 8.0, 2);

  ScriptedGenerator gen_b;
  ScriptedJudge judge_b;
  judge_b.set_script("f1", {JudgeScore::raw_total(7.9, "needs more detail")});
  auto below = filter_sample(s, gen_b, judge_b, 8.0, 2);

  auto calls = gen_b.calls();
  bool critique_ok = calls.size() == 3 && !calls[0].critique.has_value() &&
                     calls[1].critique.has_value() &&
                     *calls[1].critique == "needs more detail" &&
                     calls[1].prompt.find("needs more detail") !=
                         std::string::npos;
  bool pass = at_tau.status == FilterStatus::Accepted && at_tau.attempts == 1 &&
              below.status == FilterStatus::Rejected && below.attempts == 3 &&
              critique_ok;
  report(8, "judge filter threshold boundary, attempt cap, critique feedback",
         pass);
}

void criterion_9_stratified_sampling() {
  // Crop histogram proportioned like the published training distribution,
  // scaled to 10,000 samples (residual mass in a catch-all class).
  const std::vector<std::pair<std::string, int>> histogram = {
      {"tomato", 3719}, {"apple", 2948},     {"corn", 835},
      {"potato", 421},  {"pepper", 315},     {"grape", 128},
      {"cherry", 137},  {"strawberry", 118}, {"other", 1379}};
  std::vector<Sample> dataset;
  int id = 0;
  for (const auto& [crop, count] : histogram) {
    for (int i = 0; i < count; ++i) {
      Sample s;
      s.id = "s" + std::to_string(id++);
      s.crop = crop;
      s.disease = "d";
      dataset.push_back(std::move(s));
    }
  }
  auto subset = stratified_sample(dataset, 0.19, 77);
  std::map<std::string, int> got;
  for (const auto& s : subset) got[s.crop]++;
  bool ok = static_cast<long long>(subset.size()) ==
            std::llround(0.19 * dataset.size());
  for (const auto& [crop, count] : histogram) {
    const double want = 0.19 * count;
    if (std::abs(got[crop] - want) > 1.0) ok = false;
  }
  report(9, "proportional subset counts at fraction 0.19", ok,
         "total " + std::to_string(subset.size()));
}

void criterion_10_eval_stratification() {
  const std::map<std::string, double> freqs = {
      {"tomato", 0.3719}, {"apple", 0.2948}, {"corn", 0.0835},
      {"potato", 0.0421}, {"pepper", 0.0315}, {"grape", 0.0128},
      {"cherry", 0.0137}, {"strawberry", 0.0118}};
  const std::map<std::string, double> accs = {
      {"tomato", 0.9605}, {"apple", 0.9769}, {"corn", 0.9587},
      {"potato", 0.9423}, {"pepper", 0.9387}, {"grape", 1.0000},
      {"cherry", 0.3188}, {"strawberry", 0.8654}};

  auto stats = stratify(accs, freqs);
  std::map<FreqBucket, BucketStats> by_bucket;
  for (const auto& s : stats) by_bucket[s.bucket] = s;
  bool partition_ok =
      stats.size() == 3 &&
      by_bucket[FreqBucket::High].classes ==
          std::vector<std::string>{"apple", "corn", "tomato"} &&
      by_bucket[FreqBucket::Mid].classes ==
          std::vector<std::string>{"pepper", "potato"} &&
      by_bucket[FreqBucket::Low].classes ==
          std::vector<std::string>{"cherry", "grape", "strawberry"};

  // Independent population-sigma oracle for the low bucket.
  const std::vector<double> low = {0.3188, 1.0000, 0.8654};
  double mean = 0.0;
  for (double a : low) mean += a;
  mean /= low.size();
  double var = 0.0;
  for (double a : low) var += (a - mean) * (a - mean);
  const double sigma_oracle = std::sqrt(var / low.size());
  bool sigma_ok =
      std::abs(by_bucket[FreqBucket::Low].sigma - sigma_oracle) <= 1e-12;

  // Golden report over a deterministic two-record fixture.
  std::vector<EvalRecord> records;
  EvalRecord a;
  a.id = "e1";
  a.prediction = "Tomato Early Blight";
  a.reference = "Tomato Early Blight";
  a.crop = "tomato";
  records.push_back(a);
  EvalRecord b;
  b.id = "e2";
  b.prediction = "cherry leaf with no clear disease signs";
  b.reference = "Cherry Powdery Mildew";
  b.crop = "cherry";
  records.push_back(b);
  auto result = keyword_accuracy(records, vocab());
  std::string json_text = render_report_json(result, stats, accs, freqs);
  std::string table_text = render_report_table(stats, accs, freqs);

  const fs::path golden_dir = CROPDX_GOLDEN_DIR;
  const fs::path json_path = golden_dir / "eval_report.json";
  const fs::path table_path = golden_dir / "eval_report.txt";
  bool golden_ok = true;
  if (std::getenv("CROPDX_UPDATE_GOLDEN")) {
    fs::create_directories(golden_dir);
    std::ofstream(json_path) << json_text;
    std::ofstream(table_path) << table_text;
  } else {
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      return in.good() || in.eof() ? ss.str() : std::string();
    };
    golden_ok = slurp(json_path) == json_text &&
                slurp(table_path) == table_text;
  }

  report(10, "frequency-bucket partition, sigma oracle, stable report",
         partition_ok && sigma_ok && golden_ok,
         "low-bucket sigma " +
             std::to_string(by_bucket[FreqBucket::Low].sigma));
}

}  // namespace

int main() {
  criterion_1_reward_oracle();
  criterion_2_deviations_pinned();
  criterion_3_format_golden();
  criterion_4_boundedness_fuzz();
  criterion_5_advantage_properties();
  criterion_6_gradient_check();
  criterion_7_toy_convergence();
  criterion_8_filter_loop();
  criterion_9_stratified_sampling();
  criterion_10_eval_stratification();
  if (g_failures == 0) {
    std::printf("all 10 acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criteria FAILED\n", g_failures);
  }
  return g_failures;
}

#include "cropdx/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "cropdx/reward.hpp"

namespace cropdx {

JudgeScore JudgeScore::from_criteria(int accuracy, int completeness,
                                     int detail, int relevance, int clarity,
                                     std::string critique) {
  for (int c : {accuracy, completeness, detail, relevance, clarity}) {
    if (c < 0 || c > 2)
      throw ClientError("rubric criterion out of range [0,2]: " +
                        std::to_string(c));
  }
  JudgeScore s;
  s.accuracy = accuracy;
  s.completeness = completeness;
  s.detail = detail;
  s.relevance = relevance;
  s.clarity = clarity;
  s.total = accuracy + completeness + detail + relevance + clarity;
  s.critique = std::move(critique);
  return s;
}

JudgeScore JudgeScore::raw_total(double total, std::string critique) {
  JudgeScore s;
  s.total = total;
  s.critique = std::move(critique);
  return s;
}

FilterOutcome filter_sample(const Sample& sample, GeneratorClient& gen,
                            JudgeClient& judge, double tau, int max_regens) {
  if (tau < 0.0 || tau > 10.0)
    throw ClientError("tau must lie in [0, 10]");
  FilterOutcome out;
  std::optional<std::string> critique;
  const int max_attempts = 1 + std::max(max_regens, 0);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    std::string candidate;
    JudgeScore score;
    try {
      candidate = gen.generate(sample, critique);
      score = judge.score(sample, candidate);
    } catch (const std::exception& e) {
      throw ClientError("sample '" + sample.id + "' attempt " +
                        std::to_string(attempt) + ": " + e.what());
    }
    out.attempts = attempt;
    out.history.push_back(score);
    out.final_score = score;
    out.final_candidate = candidate;
    if (score.total >= tau) {
      out.status = FilterStatus::Accepted;
      return out;
    }
    critique = score.critique;
  }
  out.status = FilterStatus::Rejected;
  return out;
}

PipelineResult run_pipeline(const std::vector<Sample>& dataset,
                            GeneratorClient& gen, JudgeClient& judge,
                            double tau, int max_regens, int concurrency) {
  PipelineResult result;
  std::mutex mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= dataset.size()) return;
      const Sample& sample = dataset[i];
      try {
        FilterOutcome outcome =
            filter_sample(sample, gen, judge, tau, max_regens);
        std::lock_guard lock(mutex);
        if (outcome.status == FilterStatus::Accepted) {
          ParsedResponse parsed = parse_response(outcome.final_candidate);
          AcceptedRecord rec;
          rec.sample = sample;
          rec.think = parsed.think.value_or("");
          rec.answer = parsed.answer.value_or("");
          rec.judge_total = outcome.final_score.total;
          rec.attempts = outcome.attempts;
          result.accepted.push_back(std::move(rec));
        } else {
          RejectionRecord rec;
          rec.id = sample.id;
          rec.attempts = outcome.attempts;
          for (const auto& s : outcome.history) rec.scores.push_back(s.total);
          result.rejected.push_back(std::move(rec));
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex);
        result.errors.emplace_back(sample.id, e.what());
      }
    }
  };

  const int n_threads = std::clamp(concurrency, 1, 64);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(result.accepted.begin(), result.accepted.end(),
            [](const auto& a, const auto& b) {
              return a.sample.id < b.sample.id;
            });
  std::sort(result.rejected.begin(), result.rejected.end(), by_id);
  std::sort(result.errors.begin(), result.errors.end());
  return result;
}

std::vector<Sample> stratified_sample(const std::vector<Sample>& dataset,
                                      double fraction, std::uint64_t seed,
                                      std::vector<std::string>* warnings) {
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("fraction must lie in [0, 1]");

  // Group indices by (crop, disease) class, classes in first-seen order.
  std::vector<std::string> class_order;
  std::map<std::string, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    std::string key = dataset[i].crop + "|" + dataset[i].disease;
    auto [it, inserted] = classes.try_emplace(key);
    if (inserted) class_order.push_back(key);
    it->second.push_back(i);
  }

  const long long target_total =
      std::llround(fraction * static_cast<double>(dataset.size()));

  // Largest-remainder apportionment over floor(fraction * size).
  struct ClassQuota {
    std::string key;
    long long base;
    double remainder;
  };
  std::vector<ClassQuota> quotas;
  long long base_sum = 0;
  for (const auto& key : class_order) {
    const double exact = fraction * static_cast<double>(classes[key].size());
    const long long base = static_cast<long long>(std::floor(exact));
    quotas.push_back({key, base, exact - static_cast<double>(base)});
    base_sum += base;
  }
  long long leftover = target_total - base_sum;
  std::stable_sort(quotas.begin(), quotas.end(),
                   [](const ClassQuota& a, const ClassQuota& b) {
                     return a.remainder > b.remainder;
                   });
  std::map<std::string, long long> counts;
  for (auto& q : quotas) {
    long long c = q.base;
    if (leftover > 0) {
      ++c;
      --leftover;
    }
    counts[q.key] = c;
  }

  std::vector<std::size_t> picked;
  std::mt19937_64 rng(seed);
  for (const auto& key : class_order) {
    auto& members = classes[key];
    const long long want = counts[key];
    if (want == 0 && warnings) {
      warnings->push_back("class '" + key + "' rounds to 0 samples");
    }
    std::shuffle(members.begin(), members.end(), rng);
    picked.insert(picked.end(), members.begin(),
                  members.begin() +
                      std::min<std::size_t>(want, members.size()));
  }
  // Emit in original dataset order; fraction 1.0 reproduces the input.
  std::sort(picked.begin(), picked.end());
  std::vector<Sample> out;
  out.reserve(picked.size());
  for (std::size_t i : picked) out.push_back(dataset[i]);
  return out;
}

std::string ScriptedGenerator::generate(
    const Sample& sample, const std::optional<std::string>& critique) {
  std::string prompt = build_generation_prompt(sample, critique);
  {
    std::lock_guard lock(mutex_);
    calls_.push_back({sample.id, critique, prompt});
  }
  // Canned but plausibly structured output keyed to the reference.
  std::string think =
      "Step 1: Observe the plant material in the image and note overall "
      "condition of the foliage. "
      "Step 2: Describe visible symptoms such as lesion color, size and "
      "distribution across the leaf surface. "
      "Step 3: Analyze the symptom pattern; the evidence may indicate a "
      "recognized disease for this crop. "
      "Step 4: Conclude with the diagnosis and suggest treatment or control "
      "options where relevant.";
  return "<think>" + think + "</think><answer>" + sample.reference_answer +
         "</answer>";
}

std::vector<ScriptedGenerator::Call> ScriptedGenerator::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

ScriptedJudge::ScriptedJudge(double fallback_total)
    : fallback_total_(fallback_total) {}

void ScriptedJudge::set_script(const std::string& id,
                               std::vector<JudgeScore> scores) {
  std::lock_guard lock(mutex_);
  scripts_[id] = std::move(scores);
  cursor_[id] = 0;
}

JudgeScore ScriptedJudge::score(const Sample& sample,
                                const std::string& /*candidate*/) {
  std::lock_guard lock(mutex_);
  auto it = scripts_.find(sample.id);
  if (it == scripts_.end() || it->second.empty()) {
    return JudgeScore::raw_total(fallback_total_);
  }
  std::size_t& cur = cursor_[sample.id];
  const JudgeScore& s = it->second[std::min(cur, it->second.size() - 1)];
  ++cur;
  return s;
}

namespace {

// Mirrors core/assets/generation_system_prompt.txt.
const char kGenerationPrompt[] =
    R"(You are a plant disease diagnosis assistant.

## Core Requirements:
1. Output must be in English and structured into 3-4 explicit steps
   labeled "Step 1:", "Step 2:", etc.
2. Distinguish question types: PREVENTION/CONTROL questions reason about
   methods; IDENTIFICATION questions reason about visual evidence.
3. Keep reasoning concise (80-120 words) and practical.

## Output Format:
JSON with two fields: {"think": "Step 1: ...", "answer": "Final diagnosis"}
)";

// Mirrors core/assets/grpo_system_prompt.txt.
const char kGrpoPrompt[] =
    R"(You are a plant disease management expert.
Carefully analyze the given image and question,
following these guidelines:

## Core Requirements:
1. Output must be in English and structured
   into explicit steps labeled
   "Step 1: ... Step 2: ..."
2. For PREVENTION/CONTROL questions: Focus
   ONLY on method reasoning - DO NOT
   re-diagnose the disease
3. For IDENTIFICATION questions: Focus on
   visual evidence and diagnostic reasoning
4. Keep reasoning concise (80-120 words)
   and practical

## Question Type Guidelines:

### FOR PREVENTION/CONTROL METHODS QUESTIONS:
- Step 1: Analyze disease characteristics
  that influence control strategies
  (pathogen biology, transmission)
- Step 2: Recommend cultural/preventive
  practices based on disease biology
  (rotation, sanitation, spacing)
- Step 3: Outline chemical control timing
  and selection (fungicide types,
  application intervals)
- Step 4: Integrate application methods
  and safety precautions (spray coverage,
  protective gear)

### FOR DISEASE IDENTIFICATION QUESTIONS:
- Step 1: Plant identification based on
  morphological features (leaf shape,
  margins, venation pattern)
- Step 2: Symptom observation and
  description (lesion color, size,
  distribution, shape)
- Step 3: Disease pattern analysis
  (spatial distribution, temporal
  progression, environmental conditions)
- Step 4: Preliminary diagnosis with
  confidence level (pathogen
  identification, differential diagnosis)

## CRITICAL RULES:
- If question asks about CONTROL/MANAGEMENT/
  PREVENTION/TREATMENT/METHODS: Use
  PREVENTION/CONTROL guideline
- If question asks about IDENTIFICATION/
  WHAT/NAME/DISEASE: Use IDENTIFICATION
  guideline
- NEVER mix guidelines - choose one based
  on question type

## Output Format:
<think>Step 1: ... Step 2: ... Step 3: ...
Step 4: ...</think>
<answer>Your final answer here</answer>
)";

}  // namespace

const std::string& generation_system_prompt() {
  static const std::string prompt(kGenerationPrompt);
  return prompt;
}

const std::string& grpo_system_prompt() {
  static const std::string prompt(kGrpoPrompt);
  return prompt;
}

std::string build_generation_prompt(
    const Sample& sample, const std::optional<std::string>& critique) {
  std::string prompt = generation_system_prompt();
  prompt += "\nQuestion: " + sample.question + "\n";
  prompt += "Reference answer: " + sample.reference_answer + "\n";
  if (critique && !critique->empty()) {
    prompt += "\n## Reviewer critique of the previous attempt:\n";
    prompt += *critique;
    prompt += "\nAddress every point above in the regenerated reasoning.\n";
  }
  return prompt;
}

}  // namespace cropdx

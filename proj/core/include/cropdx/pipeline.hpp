#ifndef CROPDX_PIPELINE_HPP_
#define CROPDX_PIPELINE_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cropdx/sample.hpp"

namespace cropdx {

class ClientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Five-criterion, 10-point rubric score. Criteria are integers in {0,1,2};
// total is kept as a double so scripted judges can probe the acceptance
// threshold at fractional values.
struct JudgeScore {
  int accuracy = 0;
  int completeness = 0;
  int detail = 0;
  int relevance = 0;
  int clarity = 0;
  double total = 0.0;
  std::string critique;

  static JudgeScore from_criteria(int accuracy, int completeness, int detail,
                                  int relevance, int clarity,
                                  std::string critique = {});
  static JudgeScore raw_total(double total, std::string critique = {});
};

enum class FilterStatus { Accepted, Rejected };

struct FilterOutcome {
  FilterStatus status = FilterStatus::Rejected;
  int attempts = 0;  // 1..(1 + max_regens)
  JudgeScore final_score;
  std::string final_candidate;
  std::vector<JudgeScore> history;  // one score per attempt
};

// Abstracts the reasoning generator model. `critique` carries the judge's
// feedback from the previous attempt, when regenerating.
class GeneratorClient {
 public:
  virtual ~GeneratorClient() = default;
  virtual std::string generate(const Sample& sample,
                               const std::optional<std::string>& critique) = 0;
};

class JudgeClient {
 public:
  virtual ~JudgeClient() = default;
  virtual JudgeScore score(const Sample& sample,
                           const std::string& candidate) = 0;
};

// Generate, judge, and regenerate with critique feedback up to max_regens
// times; accept when total >= tau.
FilterOutcome filter_sample(const Sample& sample, GeneratorClient& gen,
                            JudgeClient& judge, double tau = 8.0,
                            int max_regens = 2);

struct AcceptedRecord {
  Sample sample;
  std::string think;
  std::string answer;
  double judge_total = 0.0;
  int attempts = 0;
};

struct RejectionRecord {
  std::string id;
  int attempts = 0;
  std::vector<double> scores;
};

struct PipelineResult {
  std::vector<AcceptedRecord> accepted;    // sorted by sample id
  std::vector<RejectionRecord> rejected;   // sorted by sample id
  std::vector<std::pair<std::string, std::string>> errors;  // (id, what)
};

// Filter every sample; per-sample failures are logged and the run
// continues. Samples are processed concurrently up to `concurrency`;
// results are aggregated by id, so output is order-independent.
PipelineResult run_pipeline(const std::vector<Sample>& dataset,
                            GeneratorClient& gen, JudgeClient& judge,
                            double tau = 8.0, int max_regens = 2,
                            int concurrency = 1);

// Class-preserving subset: per-(crop,disease)-class counts follow
// round(fraction * class_size) with largest-remainder correction so the
// global total equals round(fraction * N). Deterministic under seed.
std::vector<Sample> stratified_sample(const std::vector<Sample>& dataset,
                                      double fraction, std::uint64_t seed,
                                      std::vector<std::string>* warnings =
                                          nullptr);

// --- Deterministic scripted clients (used by tests and the CLI mock mode).

// Emits a canned structured response derived from the sample's reference
// answer; records every prompt it was asked to produce, including the
// critique text appended on regeneration.
class ScriptedGenerator : public GeneratorClient {
 public:
  struct Call {
    std::string id;
    std::optional<std::string> critique;
    std::string prompt;  // full prompt including any critique section
  };

  std::string generate(const Sample& sample,
                       const std::optional<std::string>& critique) override;
  std::vector<Call> calls() const;

 private:
  mutable std::mutex mutex_;
  std::vector<Call> calls_;
};

// Replays per-sample score scripts; ids without a script get the fallback
// score. Each call consumes the next entry of the sample's script (the
// last entry repeats).
class ScriptedJudge : public JudgeClient {
 public:
  explicit ScriptedJudge(double fallback_total = 9.0);
  void set_script(const std::string& id, std::vector<JudgeScore> scores);

  JudgeScore score(const Sample& sample, const std::string& candidate)
      override;

 private:
  mutable std::mutex mutex_;
  double fallback_total_;
  std::map<std::string, std::vector<JudgeScore>> scripts_;
  std::map<std::string, std::size_t> cursor_;
};

// System prompts shipped with the pipeline (also under core/assets/).
const std::string& generation_system_prompt();
const std::string& grpo_system_prompt();

// Prompt assembled for a generation call; the critique, when present, is
// appended as a clearly labeled section.
std::string build_generation_prompt(const Sample& sample,
                                    const std::optional<std::string>& critique);

}  // namespace cropdx

#endif  // CROPDX_PIPELINE_HPP_

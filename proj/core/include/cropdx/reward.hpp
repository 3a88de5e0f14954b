#ifndef CROPDX_REWARD_HPP_
#define CROPDX_REWARD_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cropdx/matcher.hpp"
#include "cropdx/sample.hpp"
#include "cropdx/vocab.hpp"

namespace cropdx {

// A candidate output decomposed into its think block, answer block, and
// enumerated steps. Lengths are Unicode scalar counts.
struct ParsedResponse {
  std::string raw;
  std::optional<std::string> think;
  std::optional<std::string> answer;
  std::vector<std::string> steps;
  std::size_t think_len = 0;
  std::size_t answer_len = 0;
};

enum class QuestionKind { Identification, PreventionControl };

// Format sub-scores, already weighted to their point values; total <= 0.5.
struct FormatScore {
  double structure = 0.0;   // 0.15 when both tag blocks present
  double steps = 0.0;       // up to 0.15 by step count
  double content = 0.0;     // up to 0.10 by steps of >=30 chars
  double think_len = 0.0;   // up to 0.05 by think length band
  double answer_len = 0.0;  // up to 0.05 by answer length band
  double total = 0.0;
};

// Answer sub-scores; total <= 2.0. Diagnostic questions fill plant/disease,
// control questions fill the four category scores.
struct AnswerScore {
  QuestionKind kind = QuestionKind::Identification;
  double plant = 0.0;    // 0.8 x plant match tier
  double disease = 0.0;  // 1.2 x disease match tier
  std::optional<MatchResult> plant_match;
  std::optional<MatchResult> disease_match;
  std::array<double, 4> categories = {0.0, 0.0, 0.0, 0.0};
  std::array<int, 4> keyword_counts = {0, 0, 0, 0};
  double total = 0.0;
};

// Reasoning sub-scores; total <= 0.5.
struct ReasoningScore {
  double logic = 0.0;  // up to 0.25
  double prof = 0.0;   // up to 0.15
  double comp = 0.0;   // up to 0.10
  double total = 0.0;
};

struct RewardBreakdown {
  FormatScore format;
  AnswerScore answer;
  ReasoningScore reasoning;
  double total = 0.0;

  // Sub-rewards normalized to [0,1] for reporting.
  double format_fraction() const { return format.total / 0.5; }
  double answer_fraction() const { return answer.total / 2.0; }
  double reasoning_fraction() const { return reasoning.total / 0.5; }
};

// Keyword-pair and phase-keyword tables driving the reasoning reward.
// Stems are matched as token prefixes of the normalized think block.
struct PatternTables {
  std::vector<std::pair<std::string, std::string>> causal_pairs;
  std::vector<std::pair<std::string, std::string>> context_pairs;
  std::vector<std::string> terminology;
  std::vector<std::string> observation_keywords;
  std::vector<std::string> analysis_keywords;
  std::vector<std::string> conclusion_keywords;
};

PatternTables default_patterns();
PatternTables load_patterns_file(const std::filesystem::path& path);

ParsedResponse parse_response(std::string_view raw);

// PreventionControl when the question mentions control / management /
// prevention / treatment / methods; Identification otherwise.
QuestionKind classify_question(std::string_view question);

FormatScore format_reward(const ParsedResponse& p);

AnswerScore answer_reward_diag(const ParsedResponse& p,
                               const ReferenceTargets& targets,
                               const Vocabulary& vocab);

AnswerScore answer_reward_ctrl(const ParsedResponse& p,
                               const Vocabulary& vocab);

ReasoningScore reasoning_reward(const ParsedResponse& p);
ReasoningScore reasoning_reward(const ParsedResponse& p,
                                const PatternTables& tables);

// Full three-component reward; total in [0, 3.0]. Never throws: responses
// and references that match nothing simply score zero on the answer part.
RewardBreakdown total_reward(std::string_view raw, const Sample& sample,
                             const Vocabulary& vocab);

}  // namespace cropdx

#endif  // CROPDX_REWARD_HPP_

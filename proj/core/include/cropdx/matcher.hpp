#ifndef CROPDX_MATCHER_HPP_
#define CROPDX_MATCHER_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cropdx/vocab.hpp"

namespace cropdx {

class NoTargetFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Five-tier lexical match ladder. Scores are fixed per tier.
enum class MatchTier {
  None,         // 0.0
  Weak,         // 0.25  related term via weak_relations
  Keyword,      // 0.5   core synonym word (>3 chars) present as a token
  Partial,      // 0.7   first-6-character stem shared with a token
  HighQuality,  // 0.85  multi-word synonym missing exactly one word
  Exact,        // 1.0   full synonym phrase contiguous in the candidate
};

double tier_score(MatchTier tier);

struct MatchResult {
  MatchTier tier = MatchTier::None;
  double score = 0.0;
  std::optional<std::string> matched_synonym;
  std::vector<std::string> evidence;
};

// Highest-scoring tier over all synonyms; tiers evaluated Exact ->
// HighQuality -> Partial -> Keyword -> Weak, ties within a tier broken by
// synonym order. Pure function.
MatchResult match_entry(std::string_view candidate, const VocabEntry& entry,
                        const WeakRelations& weak_relations);

// Healthy status is all-or-nothing: Exact when a full healthy synonym
// phrase appears contiguously, otherwise None.
MatchResult match_healthy(std::string_view candidate,
                          const VocabEntry& healthy_entry);

struct ReferenceTargets {
  const VocabEntry* plant = nullptr;
  const VocabEntry* disease = nullptr;
};

// Locate the plant and disease entries named by a reference answer.
// Longest contiguous synonym wins within and across entries; ties go to
// table order. Throws NoTargetFound when neither matches.
ReferenceTargets extract_targets(std::string_view reference_answer,
                                 const Vocabulary& vocab);

}  // namespace cropdx

#endif  // CROPDX_MATCHER_HPP_

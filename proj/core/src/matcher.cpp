#include "cropdx/matcher.hpp"

#include <algorithm>
#include <unordered_set>

#include "cropdx/text.hpp"

namespace cropdx {

namespace {

constexpr std::size_t kStemLength = 6;
constexpr std::size_t kCoreWordMinLength = 4;  // "word length > 3"

std::vector<std::string> split_phrase(const std::string& phrase) {
  return tokenize(phrase);
}

}  // namespace

double tier_score(MatchTier tier) {
  switch (tier) {
    case MatchTier::Exact:
      return 1.0;
    case MatchTier::HighQuality:
      return 0.85;
    case MatchTier::Partial:
      return 0.7;
    case MatchTier::Keyword:
      return 0.5;
    case MatchTier::Weak:
      return 0.25;
    case MatchTier::None:
      return 0.0;
  }
  return 0.0;
}

MatchResult match_entry(std::string_view candidate, const VocabEntry& entry,
                        const WeakRelations& weak_relations) {
  const std::vector<std::string> cand_tokens = tokenize(candidate);
  std::unordered_set<std::string> cand_set(cand_tokens.begin(),
                                           cand_tokens.end());

  // Tier 1: full synonym phrase contiguous in the candidate.
  for (const auto& syn : entry.synonyms) {
    auto phrase = split_phrase(syn);
    if (contains_phrase(cand_tokens, phrase)) {
      return {MatchTier::Exact, 1.0, syn, std::move(phrase)};
    }
  }

  // Tier 2: multi-word synonym with all but exactly one word present.
  for (const auto& syn : entry.synonyms) {
    auto phrase = split_phrase(syn);
    if (phrase.size() < 2) continue;
    std::vector<std::string> present;
    for (const auto& t : phrase) {
      if (cand_set.count(t)) present.push_back(t);
    }
    if (present.size() + 1 == phrase.size()) {
      return {MatchTier::HighQuality, 0.85, syn, std::move(present)};
    }
  }

  // Tier 3: stem match on the first 6 characters.
  for (const auto& syn : entry.synonyms) {
    for (const auto& t : split_phrase(syn)) {
      if (t.size() < kStemLength) continue;
      for (const auto& c : cand_tokens) {
        if (c.size() >= kStemLength &&
            c.compare(0, kStemLength, t, 0, kStemLength) == 0) {
          return {MatchTier::Partial, 0.7, syn, {c}};
        }
      }
    }
  }

  // Tier 4: core synonym word present as an exact token.
  for (const auto& syn : entry.synonyms) {
    for (const auto& t : split_phrase(syn)) {
      if (t.size() >= kCoreWordMinLength && cand_set.count(t)) {
        return {MatchTier::Keyword, 0.5, syn, {t}};
      }
    }
  }

  // Tier 5: candidate mentions a weakly related term of a synonym word.
  for (const auto& syn : entry.synonyms) {
    for (const auto& t : split_phrase(syn)) {
      auto it = weak_relations.find(t);
      if (it == weak_relations.end()) continue;
      for (const auto& related : it->second) {
        auto phrase = split_phrase(related);
        if (contains_phrase(cand_tokens, phrase)) {
          return {MatchTier::Weak, 0.25, syn, {related}};
        }
      }
    }
  }

  return {};
}

MatchResult match_healthy(std::string_view candidate,
                          const VocabEntry& healthy_entry) {
  const std::vector<std::string> cand_tokens = tokenize(candidate);
  for (const auto& syn : healthy_entry.synonyms) {
    auto phrase = split_phrase(syn);
    if (contains_phrase(cand_tokens, phrase)) {
      return {MatchTier::Exact, 1.0, syn, std::move(phrase)};
    }
  }
  return {};
}

namespace {

// Longest contiguous synonym over all entries of one kind; ties go to the
// earlier entry (table order), then the earlier synonym.
const VocabEntry* best_target(const std::vector<std::string>& ref_tokens,
                              const std::vector<VocabEntry>& entries) {
  const VocabEntry* best = nullptr;
  std::size_t best_len = 0;
  for (const auto& e : entries) {
    for (const auto& syn : e.synonyms) {
      auto phrase = split_phrase(syn);
      if (!contains_phrase(ref_tokens, phrase)) continue;
      if (syn.size() > best_len) {
        best = &e;
        best_len = syn.size();
      }
    }
  }
  return best;
}

}  // namespace

ReferenceTargets extract_targets(std::string_view reference_answer,
                                 const Vocabulary& vocab) {
  const std::vector<std::string> ref_tokens = tokenize(reference_answer);
  ReferenceTargets targets;
  targets.plant = best_target(ref_tokens, vocab.plants);
  targets.disease = best_target(ref_tokens, vocab.diseases);
  if (!targets.plant && !targets.disease) {
    throw NoTargetFound("no plant or disease vocabulary term in reference: " +
                        std::string(reference_answer));
  }
  return targets;
}

}  // namespace cropdx

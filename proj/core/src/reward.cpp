#include "cropdx/reward.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <unordered_set>

#include "cropdx/text.hpp"
#include "json.hpp"

namespace cropdx {

namespace {

// First well-formed block between open/close tags, or nullopt.
std::optional<std::string> extract_block(std::string_view raw,
                                         std::string_view open,
                                         std::string_view close) {
  std::size_t start = raw.find(open);
  if (start == std::string_view::npos) return std::nullopt;
  std::size_t body = start + open.size();
  std::size_t end = raw.find(close, body);
  if (end == std::string_view::npos) return std::nullopt;
  return std::string(raw.substr(body, end - body));
}

std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return c == ' ' || c == '\t' ||
                                           c == '\n' || c == '\r'; };
  std::size_t b = 0, e = s.size();
  while (b < e && issp(s[b])) ++b;
  while (e > b && issp(s[e - 1])) --e;
  return s.substr(b, e - b);
}

bool token_has_stem(const std::vector<std::string>& tokens,
                    const std::string& stem) {
  for (const auto& t : tokens) {
    if (t.size() >= stem.size() && t.compare(0, stem.size(), stem) == 0)
      return true;
  }
  return false;
}

// Index of the first token with the given prefix at or after `from`, or -1.
int first_stem_at(const std::vector<std::string>& tokens,
                  const std::string& stem, std::size_t from) {
  for (std::size_t i = from; i < tokens.size(); ++i) {
    if (tokens[i].size() >= stem.size() &&
        tokens[i].compare(0, stem.size(), stem) == 0)
      return static_cast<int>(i);
  }
  return -1;
}

// "a ... b" pattern: first stem occurs, second stem occurs after it.
bool pair_fires(const std::vector<std::string>& tokens,
                const std::pair<std::string, std::string>& pattern) {
  int i = first_stem_at(tokens, pattern.first, 0);
  if (i < 0) return false;
  return first_stem_at(tokens, pattern.second, static_cast<std::size_t>(i) + 1)
         >= 0;
}

}  // namespace

PatternTables default_patterns() {
  PatternTables t;
  t.causal_pairs = {
      {"observe", "because"},
      {"symptom", "indicate"},
      {"characteristic", "suggest"},
  };
  t.context_pairs = {
      {"pathogen", "infect"},
      {"symptom", "show"},
      {"diagnosis", "based"},
      {"lesion", "circular"},
      {"lesion", "brown"},
  };
  t.terminology = {"chlorosis", "necrosis", "pustule"};
  t.observation_keywords = {"observe", "see", "visible"};
  t.analysis_keywords = {"analyze", "indicate", "disease"};
  t.conclusion_keywords = {"conclude", "control", "treatment"};
  return t;
}

PatternTables load_patterns_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open pattern file: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  PatternTables t;
  auto load_pairs = [&](const char* key,
                        std::vector<std::pair<std::string, std::string>>& out) {
    for (const auto& p : doc.at(key)) {
      if (!p.is_array() || p.size() != 2)
        throw SchemaError(std::string(key) + ": each pattern is a 2-element "
                          "array");
      out.emplace_back(normalize(p[0].get<std::string>()),
                       normalize(p[1].get<std::string>()));
    }
  };
  auto load_words = [&](const char* key, std::vector<std::string>& out) {
    for (const auto& w : doc.at(key)) out.push_back(normalize(w.get<std::string>()));
  };
  load_pairs("causal_pairs", t.causal_pairs);
  load_pairs("context_pairs", t.context_pairs);
  load_words("terminology", t.terminology);
  load_words("observation_keywords", t.observation_keywords);
  load_words("analysis_keywords", t.analysis_keywords);
  load_words("conclusion_keywords", t.conclusion_keywords);
  return t;
}

ParsedResponse parse_response(std::string_view raw) {
  ParsedResponse p;
  p.raw = std::string(raw);
  p.think = extract_block(raw, "<think>", "</think>");
  p.answer = extract_block(raw, "<answer>", "</answer>");
  if (p.think) p.think_len = utf8_length(*p.think);
  if (p.answer) p.answer_len = utf8_length(*p.answer);

  if (p.think) {
    // Steps are "step <n>:" markers whose indices run 1, 2, 3, ... ; a
    // marker breaking that chain folds into the preceding step's text.
    static const std::regex step_re(R"(\bstep\s*([0-9]+)\s*:)",
                                    std::regex::icase);
    const std::string& think = *p.think;
    std::vector<std::pair<std::size_t, std::size_t>> starts;  // (body, from)
    int expected = 1;
    for (auto it = std::sregex_iterator(think.begin(), think.end(), step_re);
         it != std::sregex_iterator(); ++it) {
      int idx = std::stoi((*it)[1].str());
      if (idx != expected) continue;
      starts.emplace_back(it->position(0) + it->length(0), it->position(0));
      ++expected;
    }
    for (std::size_t i = 0; i < starts.size(); ++i) {
      std::size_t body = starts[i].first;
      std::size_t end = (i + 1 < starts.size()) ? starts[i + 1].second
                                                : think.size();
      p.steps.push_back(trim(think.substr(body, end - body)));
    }
  }
  return p;
}

QuestionKind classify_question(std::string_view question) {
  static const std::unordered_set<std::string> kControlWords = {
      "control", "manage", "management", "prevention", "prevent",
      "treatment", "treat", "method", "methods"};
  for (const auto& t : tokenize(question)) {
    if (kControlWords.count(t)) return QuestionKind::PreventionControl;
  }
  return QuestionKind::Identification;
}

FormatScore format_reward(const ParsedResponse& p) {
  FormatScore f;
  if (!p.think || !p.answer) return f;  // missing tags zero everything
  f.structure = 0.15;

  const std::size_t n_steps = p.steps.size();
  if (n_steps >= 4)
    f.steps = 0.15;
  else if (n_steps == 3)
    f.steps = 0.12;
  else if (n_steps == 2)
    f.steps = 0.08;
  else if (n_steps == 1)
    f.steps = 0.03;

  std::size_t rich = 0;
  for (const auto& s : p.steps) {
    if (utf8_length(s) >= 30) ++rich;
  }
  if (rich >= 4)
    f.content = 0.10;
  else if (rich == 3)
    f.content = 0.08;
  else if (rich == 2)
    f.content = 0.05;

  const std::size_t tl = p.think_len;
  if (tl >= 150 && tl <= 800)
    f.think_len = 0.05;
  else if (tl >= 100 && tl <= 1000)
    f.think_len = 0.03;
  else if (tl >= 80)
    f.think_len = 0.01;

  const std::size_t al = p.answer_len;
  if (al >= 15 && al <= 200)
    f.answer_len = 0.05;
  else if (al >= 10 && al <= 300)
    f.answer_len = 0.03;
  else if (al >= 5)
    f.answer_len = 0.01;

  f.total = f.structure + f.steps + f.content + f.think_len + f.answer_len;
  return f;
}

namespace {

// Answer matching scans the think and answer blocks when present (phrases
// like symptom descriptions live in the think text), or the raw response
// when untagged.
std::string matchable_text(const ParsedResponse& p) {
  if (!p.think && !p.answer) return p.raw;
  std::string text;
  if (p.think) text += *p.think;
  if (p.answer) {
    if (!text.empty()) text += ' ';
    text += *p.answer;
  }
  return text;
}

}  // namespace

AnswerScore answer_reward_diag(const ParsedResponse& p,
                               const ReferenceTargets& targets,
                               const Vocabulary& vocab) {
  AnswerScore a;
  a.kind = QuestionKind::Identification;
  const std::string text = matchable_text(p);
  if (targets.plant) {
    a.plant_match = match_entry(text, *targets.plant, vocab.weak_relations);
    a.plant = 0.8 * a.plant_match->score;
  }
  if (targets.disease) {
    if (targets.disease->canonical == "healthy") {
      a.disease_match = match_healthy(text, *targets.disease);
    } else {
      a.disease_match =
          match_entry(text, *targets.disease, vocab.weak_relations);
    }
    a.disease = 1.2 * a.disease_match->score;
  }
  a.total = a.plant + a.disease;
  return a;
}

AnswerScore answer_reward_ctrl(const ParsedResponse& p,
                               const Vocabulary& vocab) {
  AnswerScore a;
  a.kind = QuestionKind::PreventionControl;
  const std::vector<std::string> tokens = tokenize(matchable_text(p));

  // Tiered score ladders per category, indexed by min(count, 3).
  static constexpr double kTiers[4][4] = {
      {0.0, 0.3, 0.45, 0.6},   // pesticides
      {0.0, 0.2, 0.35, 0.5},   // cultural practices
      {0.0, 0.2, 0.35, 0.5},   // application methods
      {0.0, 0.15, 0.3, 0.4},   // application timing
  };

  for (int c = 0; c < 4; ++c) {
    int distinct = 0;
    for (const auto& kw : vocab.treatments[c].keywords) {
      if (contains_phrase(tokens, tokenize(kw))) ++distinct;
    }
    a.keyword_counts[c] = distinct;
    a.categories[c] = kTiers[c][std::min(distinct, 3)];
    a.total += a.categories[c];
  }
  return a;
}

ReasoningScore reasoning_reward(const ParsedResponse& p) {
  static const PatternTables tables = default_patterns();
  return reasoning_reward(p, tables);
}

ReasoningScore reasoning_reward(const ParsedResponse& p,
                                const PatternTables& tables) {
  ReasoningScore r;
  if (!p.think) return r;
  const std::vector<std::string> tokens = tokenize(*p.think);
  if (tokens.empty()) return r;

  // Logic: causal pattern checks plus one inter-step connection check.
  int logic_total = static_cast<int>(tables.causal_pairs.size()) + 1;
  int logic_fired = 0;
  for (const auto& pat : tables.causal_pairs) {
    if (pair_fires(tokens, pat)) ++logic_fired;
  }
  for (std::size_t i = 0; i + 1 < p.steps.size(); ++i) {
    std::unordered_set<std::string> prev;
    for (const auto& t : tokenize(p.steps[i])) {
      if (t.size() > 3) prev.insert(t);
    }
    bool connected = false;
    for (const auto& t : tokenize(p.steps[i + 1])) {
      if (t.size() > 3 && prev.count(t)) {
        connected = true;
        break;
      }
    }
    if (connected) {
      ++logic_fired;
      break;
    }
  }
  r.logic = 0.25 * static_cast<double>(logic_fired) / logic_total;

  // Professionalism: diagnostic context patterns plus a terminology check.
  int prof_total = static_cast<int>(tables.context_pairs.size()) + 1;
  int prof_fired = 0;
  for (const auto& pat : tables.context_pairs) {
    if (pair_fires(tokens, pat)) ++prof_fired;
  }
  for (const auto& term : tables.terminology) {
    if (token_has_stem(tokens, term)) {
      ++prof_fired;
      break;
    }
  }
  r.prof = 0.15 * static_cast<double>(prof_fired) / prof_total;

  // Completeness: observation/analysis/conclusion phase presence. Phase
  // shares sum to 1.10; clamp to 1.0 before scaling.
  auto phase_hit = [&](const std::vector<std::string>& keywords) {
    for (const auto& kw : keywords) {
      if (token_has_stem(tokens, kw)) return true;
    }
    return false;
  };
  double comp = 0.0;
  if (phase_hit(tables.observation_keywords)) comp += 0.40;
  if (phase_hit(tables.analysis_keywords)) comp += 0.35;
  if (phase_hit(tables.conclusion_keywords)) comp += 0.35;
  r.comp = 0.10 * std::min(comp, 1.0);

  r.total = r.logic + r.prof + r.comp;
  return r;
}

RewardBreakdown total_reward(std::string_view raw, const Sample& sample,
                             const Vocabulary& vocab) {
  RewardBreakdown b;
  ParsedResponse p = parse_response(raw);
  b.format = format_reward(p);
  b.reasoning = reasoning_reward(p);

  if (classify_question(sample.question) == QuestionKind::PreventionControl) {
    b.answer = answer_reward_ctrl(p, vocab);
  } else {
    try {
      ReferenceTargets targets = extract_targets(sample.reference_answer,
                                                 vocab);
      b.answer = answer_reward_diag(p, targets, vocab);
    } catch (const NoTargetFound&) {
      b.answer.kind = QuestionKind::Identification;  // scores stay zero
    }
  }
  b.total = b.format.total + b.answer.total + b.reasoning.total;
  return b;
}

}  // namespace cropdx

#ifndef CROPDX_VOCAB_HPP_
#define CROPDX_VOCAB_HPP_

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cropdx {

class VocabError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class MissingFileError : public VocabError {
 public:
  using VocabError::VocabError;
};
class SchemaError : public VocabError {
 public:
  using VocabError::VocabError;
};
class DuplicateSynonymError : public VocabError {
 public:
  using VocabError::VocabError;
};

enum class EntryKind { Plant, Disease };

// One plant or disease with its recognized name variations. All phrases
// are stored normalized (lowercase, single-spaced); the canonical name is
// always among the synonyms.
struct VocabEntry {
  std::string canonical;
  std::vector<std::string> synonyms;
  EntryKind kind = EntryKind::Plant;

  bool operator==(const VocabEntry&) const = default;
};

enum class TreatmentId : int {
  Pesticides = 0,
  CulturalPractices = 1,
  ApplicationMethods = 2,
  ApplicationTiming = 3,
};

const char* treatment_name(TreatmentId id);

struct TreatmentCategory {
  TreatmentId id = TreatmentId::Pesticides;
  double weight = 0.0;
  std::vector<std::string> keywords;

  bool operator==(const TreatmentCategory&) const = default;
};

using WeakRelations = std::map<std::string, std::vector<std::string>>;

// Immutable after construction; safe for unrestricted concurrent reads.
struct Vocabulary {
  std::vector<VocabEntry> plants;
  std::vector<VocabEntry> diseases;
  std::array<TreatmentCategory, 4> treatments;
  WeakRelations weak_relations;

  // Entry whose synonyms contain the normalized name, or nullptr.
  const VocabEntry* find_entry(EntryKind kind, std::string_view name) const;

  // The special exact-match-only disease entry ("healthy").
  const VocabEntry* healthy_entry() const;

  bool operator==(const Vocabulary&) const = default;
};

// The embedded default vocabulary: 15 plants, 20 diseases (incl. healthy),
// 4 treatment-keyword categories, and the blight<->disease/infection weak
// relations.
Vocabulary load_default();

// Load from a JSON vocabulary file (see docs/file-formats.md). All phrases
// are normalized on load. Throws MissingFileError / SchemaError /
// DuplicateSynonymError.
Vocabulary load_from_file(const std::filesystem::path& path);

// Serialize a vocabulary back to the same JSON schema.
std::string to_json_string(const Vocabulary& vocab);
void save_to_file(const Vocabulary& vocab, const std::filesystem::path& path);

}  // namespace cropdx

#endif  // CROPDX_VOCAB_HPP_

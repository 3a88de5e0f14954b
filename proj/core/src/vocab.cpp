#include "cropdx/vocab.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "cropdx/text.hpp"
#include "json.hpp"

namespace cropdx {

namespace {

using json = nlohmann::ordered_json;

VocabEntry make_entry(EntryKind kind, std::string canonical,
                      std::vector<std::string> synonyms) {
  VocabEntry e;
  e.kind = kind;
  e.canonical = normalize(canonical);
  for (auto& s : synonyms) e.synonyms.push_back(normalize(s));
  return e;
}

void validate_entry(const VocabEntry& e, const std::string& where) {
  if (e.canonical.empty())
    throw SchemaError(where + ": empty canonical name");
  std::set<std::string> seen;
  bool canonical_present = false;
  for (const auto& s : e.synonyms) {
    if (s.empty()) throw SchemaError(where + ": empty synonym");
    if (!seen.insert(s).second)
      throw DuplicateSynonymError(where + ": duplicate synonym '" + s + "'");
    if (s == e.canonical) canonical_present = true;
  }
  if (!canonical_present)
    throw SchemaError(where + ": canonical '" + e.canonical +
                      "' not among synonyms");
}

}  // namespace

const char* treatment_name(TreatmentId id) {
  switch (id) {
    case TreatmentId::Pesticides:
      return "pesticides";
    case TreatmentId::CulturalPractices:
      return "cultural_practices";
    case TreatmentId::ApplicationMethods:
      return "application_methods";
    case TreatmentId::ApplicationTiming:
      return "application_timing";
  }
  return "unknown";
}

const VocabEntry* Vocabulary::find_entry(EntryKind kind,
                                         std::string_view name) const {
  const auto& entries = (kind == EntryKind::Plant) ? plants : diseases;
  std::string needle = normalize(name);
  for (const auto& e : entries) {
    for (const auto& s : e.synonyms) {
      if (s == needle) return &e;
    }
  }
  return nullptr;
}

const VocabEntry* Vocabulary::healthy_entry() const {
  for (const auto& e : diseases) {
    if (e.canonical == "healthy") return &e;
  }
  return nullptr;
}

Vocabulary load_default() {
  Vocabulary v;
  const auto P = EntryKind::Plant;
  const auto D = EntryKind::Disease;

  v.plants = {
      make_entry(P, "tomato",
                 {"tomato", "tomato plant", "tomatoes", "solanum lycopersicum",
                  "lycopersicon esculentum", "nightshade", "tomato leaf",
                  "tomato crop"}),
      make_entry(P, "potato",
                 {"potato", "potato plant", "potatoes", "solanum tuberosum",
                  "white potato", "irish potato", "potato tuber",
                  "potato crop"}),
      make_entry(P, "corn",
                 {"corn", "corn plant", "maize", "zea mays", "sweet corn",
                  "field corn", "corn leaf", "maize plant"}),
      make_entry(P, "apple",
                 {"apple", "apple tree", "malus domestica", "apple crop",
                  "apple leaf", "apple plant"}),
      make_entry(P, "grape",
                 {"grape", "grapevine", "vitis vinifera", "grape plant",
                  "vineyard", "grape leaf"}),
      make_entry(P, "wheat",
                 {"wheat", "wheat plant", "triticum aestivum", "wheat crop",
                  "wheat leaf"}),
      make_entry(P, "rice",
                 {"rice", "rice plant", "oryza sativa", "rice crop",
                  "paddy rice"}),
      make_entry(P, "soybean",
                 {"soybean", "soy plant", "glycine max", "soya bean",
                  "soy crop"}),
      make_entry(P, "bell pepper",
                 {"bell pepper", "pepper plant", "capsicum annuum",
                  "sweet pepper", "pepper crop"}),
      make_entry(P, "cherry",
                 {"cherry", "cherry tree", "prunus avium", "sweet cherry",
                  "cherry plant"}),
      make_entry(P, "peach",
                 {"peach", "peach tree", "prunus persica", "peach crop"}),
      make_entry(P, "strawberry",
                 {"strawberry", "strawberry plant", "fragaria",
                  "strawberry crop"}),
      make_entry(P, "blueberry",
                 {"blueberry", "blueberry plant", "vaccinium",
                  "blueberry crop"}),
      make_entry(P, "raspberry",
                 {"raspberry", "raspberry plant", "rubus", "raspberry crop"}),
      make_entry(P, "pumpkin",
                 {"pumpkin", "pumpkin plant", "cucurbita", "pumpkin crop"}),
  };

  v.diseases = {
      make_entry(D, "early blight",
                 {"early blight", "alternaria solani", "alternaria",
                  "target spot", "alternaria leaf spot", "early leaf blight"}),
      make_entry(D, "late blight",
                 {"late blight", "phytophthora infestans", "phytophthora",
                  "oomycete disease", "late leaf blight"}),
      make_entry(D, "powdery mildew",
                 {"powdery mildew", "erysiphales", "white powdery coating",
                  "mildew", "powdery fungus"}),
      make_entry(D, "septoria leaf spot",
                 {"septoria leaf spot", "septoria", "leaf spot disease",
                  "septoria blight"}),
      make_entry(D, "mosaic virus",
                 {"mosaic virus", "viral mosaic", "mosaic disease",
                  "virus infection", "viral disease", "mosaic pattern"}),
      make_entry(D, "leaf mold",
                 {"leaf mold", "fulvia fulva", "tomato leaf mold",
                  "fungal leaf mold", "leaf mould"}),
      make_entry(D, "bacterial spot",
                 {"bacterial spot", "bacterial disease", "bacterial leaf spot",
                  "bacteria infection", "bacterial blight"}),
      make_entry(D, "yellow leaf curl virus",
                 {"yellow leaf curl virus", "ylcv", "leaf curl virus",
                  "yellow leaf curl", "viral leaf curl",
                  "tomato yellow leaf curl"}),
      make_entry(D, "spider mites",
                 {"spider mites", "mite damage", "mite infestation",
                  "two-spotted spider mite"}),
      make_entry(D, "target spot",
                 {"target spot", "corynespora cassiicola",
                  "concentric lesions", "target leaf spot"}),
      make_entry(D, "leaf rust",
                 {"leaf rust", "rust disease", "rust fungus",
                  "leaf rust disease"}),
      make_entry(D, "common rust",
                 {"common rust", "corn rust", "puccinia sorghi", "maize rust"}),
      make_entry(D, "northern leaf blight",
                 {"northern leaf blight", "turcicum leaf blight",
                  "leaf blight", "northern corn leaf blight"}),
      make_entry(D, "gray leaf spot",
                 {"gray leaf spot", "grey leaf spot", "cercospora",
                  "gray spot"}),
      make_entry(D, "leaf scorch",
                 {"leaf scorch", "marginal leaf burn", "leaf tip burn",
                  "scorch"}),
      make_entry(D, "healthy",
                 {"healthy", "no disease", "disease-free", "normal plant",
                  "no symptoms", "healthy plant", "uninfected"}),
      make_entry(D, "black rot",
                 {"black rot", "rot disease", "rotting", "fungal rot",
                  "black root rot"}),
      make_entry(D, "apple scab",
                 {"apple scab", "scab disease", "venturia inaequalis",
                  "scab"}),
      make_entry(D, "alternaria blotch",
                 {"alternaria blotch", "alternaria", "blotch disease",
                  "alternaria leaf blotch"}),
      make_entry(D, "leaf blight",
                 {"leaf blight", "blight disease", "blight",
                  "leaf blight disease"}),
  };

  auto treatment = [](TreatmentId id, double w,
                      std::vector<std::string> keywords) {
    TreatmentCategory c;
    c.id = id;
    c.weight = w;
    for (auto& k : keywords) c.keywords.push_back(normalize(k));
    return c;
  };
  v.treatments = {
      treatment(TreatmentId::Pesticides, 0.6,
                {"fungicide", "copper", "chlorothalonil", "mancozeb",
                 "metalaxyl", "azoxystrobin", "propiconazole", "captan",
                 "thiophanate", "benomyl", "bordeaux mixture",
                 "wettable powder"}),
      treatment(TreatmentId::CulturalPractices, 0.5,
                {"crop rotation", "air circulation", "spacing",
                 "debris removal", "resistant varieties", "drainage",
                 "mulching", "pruning", "sanitation"}),
      treatment(TreatmentId::ApplicationMethods, 0.5,
                {"spray", "application", "protective gear", "dosage",
                 "dilution", "foliar application"}),
      treatment(TreatmentId::ApplicationTiming, 0.4,
                {"timing", "early stage", "first sign", "onset",
                 "every 7-14 days", "repeat", "preventive application"}),
  };

  v.weak_relations = {
      {"blight", {"disease", "infection"}},
      {"disease", {"blight"}},
      {"infection", {"blight"}},
  };
  return v;
}

namespace {

VocabEntry entry_from_json(const json& j, EntryKind kind,
                           const std::string& where) {
  if (!j.is_object() || !j.contains("canonical") || !j.contains("synonyms"))
    throw SchemaError(where + ": entry needs 'canonical' and 'synonyms'");
  if (!j["canonical"].is_string())
    throw SchemaError(where + ": 'canonical' must be a string");
  if (!j["synonyms"].is_array())
    throw SchemaError(where + ": 'synonyms' must be an array");
  std::vector<std::string> syns;
  for (const auto& s : j["synonyms"]) {
    if (!s.is_string())
      throw SchemaError(where + ": synonyms must be strings");
    std::string norm = normalize(s.get<std::string>());
    if (norm.empty())
      throw SchemaError(where + ": empty synonym after normalization");
    syns.push_back(std::move(norm));
  }
  VocabEntry e = make_entry(kind, j["canonical"].get<std::string>(), {});
  e.synonyms = std::move(syns);
  validate_entry(e, where);
  return e;
}

TreatmentId treatment_id_from_name(const std::string& name,
                                   const std::string& where) {
  for (int i = 0; i < 4; ++i) {
    auto id = static_cast<TreatmentId>(i);
    if (name == treatment_name(id)) return id;
  }
  throw SchemaError(where + ": unknown treatment category '" + name + "'");
}

constexpr double kTreatmentWeights[4] = {0.6, 0.5, 0.5, 0.4};

}  // namespace

Vocabulary load_from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open vocabulary file: " +
                                  path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }

  Vocabulary v;
  if (!doc.contains("plants") || !doc.contains("diseases") ||
      !doc.contains("treatments"))
    throw SchemaError(path.string() +
                      ": need 'plants', 'diseases' and 'treatments' sections");

  int idx = 0;
  for (const auto& j : doc["plants"])
    v.plants.push_back(entry_from_json(
        j, EntryKind::Plant, "plants[" + std::to_string(idx++) + "]"));
  idx = 0;
  for (const auto& j : doc["diseases"])
    v.diseases.push_back(entry_from_json(
        j, EntryKind::Disease, "diseases[" + std::to_string(idx++) + "]"));

  bool have[4] = {false, false, false, false};
  for (const auto& j : doc["treatments"]) {
    if (!j.is_object() || !j.contains("category") || !j.contains("weight") ||
        !j.contains("keywords"))
      throw SchemaError("treatments: entry needs 'category', 'weight', "
                        "'keywords'");
    auto id = treatment_id_from_name(j["category"].get<std::string>(),
                                     "treatments");
    int slot = static_cast<int>(id);
    double w = j["weight"].get<double>();
    if (w != kTreatmentWeights[slot])
      throw SchemaError(std::string("treatments: '") + treatment_name(id) +
                        "' weight must be " +
                        std::to_string(kTreatmentWeights[slot]));
    TreatmentCategory c;
    c.id = id;
    c.weight = w;
    for (const auto& k : j["keywords"]) {
      std::string norm = normalize(k.get<std::string>());
      if (norm.empty()) throw SchemaError("treatments: empty keyword");
      c.keywords.push_back(std::move(norm));
    }
    v.treatments[slot] = std::move(c);
    have[slot] = true;
  }
  for (int i = 0; i < 4; ++i) {
    if (!have[i])
      throw SchemaError(std::string("treatments: missing category '") +
                        treatment_name(static_cast<TreatmentId>(i)) + "'");
  }

  if (doc.contains("weak_relations")) {
    for (const auto& [key, vals] : doc["weak_relations"].items()) {
      std::vector<std::string> related;
      for (const auto& r : vals) related.push_back(normalize(r.get<std::string>()));
      v.weak_relations[normalize(key)] = std::move(related);
    }
  }
  return v;
}

std::string to_json_string(const Vocabulary& vocab) {
  json doc;
  auto dump_entries = [](const std::vector<VocabEntry>& entries) {
    json arr = json::array();
    for (const auto& e : entries) {
      json j;
      j["canonical"] = e.canonical;
      j["synonyms"] = e.synonyms;
      arr.push_back(std::move(j));
    }
    return arr;
  };
  doc["plants"] = dump_entries(vocab.plants);
  doc["diseases"] = dump_entries(vocab.diseases);
  json treatments = json::array();
  for (const auto& c : vocab.treatments) {
    json j;
    j["category"] = treatment_name(c.id);
    j["weight"] = c.weight;
    j["keywords"] = c.keywords;
    treatments.push_back(std::move(j));
  }
  doc["treatments"] = std::move(treatments);
  json weak = json::object();
  for (const auto& [k, vals] : vocab.weak_relations) weak[k] = vals;
  doc["weak_relations"] = std::move(weak);
  return doc.dump(2);
}

void save_to_file(const Vocabulary& vocab,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw VocabError("cannot write vocabulary file: " + path.string());
  out << to_json_string(vocab) << "\n";
}

}  // namespace cropdx

#include "cropdx/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "cropdx/matcher.hpp"
#include "json.hpp"

namespace cropdx {

const char* bucket_name(FreqBucket b) {
  switch (b) {
    case FreqBucket::High:
      return "high";
    case FreqBucket::Mid:
      return "mid";
    case FreqBucket::Low:
      return "low";
  }
  return "unknown";
}

AccuracyResult keyword_accuracy(const std::vector<EvalRecord>& records,
                                const Vocabulary& vocab) {
  AccuracyResult res;
  for (const auto& rec : records) {
    ReferenceTargets targets;
    try {
      targets = extract_targets(rec.reference, vocab);
    } catch (const NoTargetFound&) {
      res.skipped.push_back(rec.id);
      continue;
    }
    if (targets.plant) {
      ++res.crop_scored;
      const bool hit =
          match_entry(rec.prediction, *targets.plant, vocab.weak_relations)
              .tier == MatchTier::Exact;
      if (hit) ++res.crop_hits;
      auto& cls = res.per_crop_class[rec.crop.empty()
                                         ? targets.plant->canonical
                                         : rec.crop];
      cls.second += 1;
      if (hit) cls.first += 1;
    }
    if (targets.disease) {
      ++res.disease_scored;
      const MatchResult m =
          (targets.disease->canonical == "healthy")
              ? match_healthy(rec.prediction, *targets.disease)
              : match_entry(rec.prediction, *targets.disease,
                            vocab.weak_relations);
      if (m.tier == MatchTier::Exact) ++res.disease_hits;
    }
  }
  if (res.crop_scored > 0)
    res.crop_accuracy =
        static_cast<double>(res.crop_hits) / res.crop_scored;
  if (res.disease_scored > 0)
    res.disease_accuracy =
        static_cast<double>(res.disease_hits) / res.disease_scored;
  return res;
}

std::vector<BucketStats> stratify(
    const std::map<std::string, double>& per_class_accuracy,
    const std::map<std::string, double>& class_frequency) {
  if (per_class_accuracy.size() != class_frequency.size())
    throw std::invalid_argument("accuracy and frequency class sets differ");
  std::map<FreqBucket, std::vector<std::pair<std::string, double>>> buckets;
  for (const auto& [cls, acc] : per_class_accuracy) {
    auto it = class_frequency.find(cls);
    if (it == class_frequency.end())
      throw std::invalid_argument("missing frequency for class '" + cls + "'");
    const double f = it->second;
    FreqBucket b = (f > 0.05) ? FreqBucket::High
                   : (f >= 0.02) ? FreqBucket::Mid
                                 : FreqBucket::Low;
    buckets[b].emplace_back(cls, acc);
  }

  std::vector<BucketStats> out;
  for (FreqBucket b : {FreqBucket::High, FreqBucket::Mid, FreqBucket::Low}) {
    auto it = buckets.find(b);
    if (it == buckets.end()) continue;  // empty bucket: absent, not zero
    BucketStats s;
    s.bucket = b;
    double sum = 0.0;
    for (const auto& [cls, acc] : it->second) {
      s.classes.push_back(cls);
      sum += acc;
    }
    const double n = static_cast<double>(it->second.size());
    s.mean_accuracy = sum / n;
    double var = 0.0;
    for (const auto& [cls, acc] : it->second) {
      var += (acc - s.mean_accuracy) * (acc - s.mean_accuracy);
    }
    s.sigma = std::sqrt(var / n);
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_report_json(
    const AccuracyResult& accuracy, const std::vector<BucketStats>& stats,
    const std::map<std::string, double>& per_class_accuracy,
    const std::map<std::string, double>& class_frequency) {
  nlohmann::ordered_json doc;
  doc["crop_accuracy"] = accuracy.crop_accuracy;
  doc["disease_accuracy"] = accuracy.disease_accuracy;
  doc["crop_scored"] = accuracy.crop_scored;
  doc["crop_hits"] = accuracy.crop_hits;
  doc["disease_scored"] = accuracy.disease_scored;
  doc["disease_hits"] = accuracy.disease_hits;
  doc["skipped"] = accuracy.skipped;

  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const auto& [cls, acc] : per_class_accuracy) {
    nlohmann::ordered_json j;
    j["class"] = cls;
    j["accuracy"] = acc;
    auto it = class_frequency.find(cls);
    j["frequency"] = (it != class_frequency.end()) ? it->second : 0.0;
    classes.push_back(std::move(j));
  }
  doc["classes"] = std::move(classes);

  nlohmann::ordered_json buckets = nlohmann::ordered_json::array();
  for (const auto& s : stats) {
    nlohmann::ordered_json j;
    j["bucket"] = bucket_name(s.bucket);
    j["classes"] = s.classes;
    j["mean_accuracy"] = s.mean_accuracy;
    j["sigma"] = s.sigma;
    buckets.push_back(std::move(j));
  }
  doc["buckets"] = std::move(buckets);
  return doc.dump(2);
}

std::string render_report_table(
    const std::vector<BucketStats>& stats,
    const std::map<std::string, double>& per_class_accuracy,
    const std::map<std::string, double>& class_frequency) {
  char line[160];
  std::string out;
  out += "Class              Freq.     Accuracy\n";
  out += "-------------------------------------\n";
  const char* headers[] = {"High-freq. (>5%)", "Mid-freq. (2-5%)",
                           "Low-freq. (<2%)"};
  for (const auto& s : stats) {
    std::snprintf(line, sizeof(line), "%s -- sigma=%.2f%%\n",
                  headers[static_cast<int>(s.bucket)], 100.0 * s.sigma);
    out += line;
    for (const auto& cls : s.classes) {
      std::snprintf(line, sizeof(line), "  %-16s %6.2f%%   %7.2f%%\n",
                    cls.c_str(), 100.0 * class_frequency.at(cls),
                    100.0 * per_class_accuracy.at(cls));
      out += line;
    }
  }
  return out;
}

void write_report(const AccuracyResult& accuracy,
                  const std::vector<BucketStats>& stats,
                  const std::map<std::string, double>& per_class_accuracy,
                  const std::map<std::string, double>& class_frequency,
                  const std::filesystem::path& out_path) {
  std::ofstream out(out_path);
  if (!out) throw WriteError("cannot write report: " + out_path.string());
  out << render_report_json(accuracy, stats, per_class_accuracy,
                            class_frequency)
      << "\n";
  if (!out) throw WriteError("write failed: " + out_path.string());

  std::filesystem::path table_path = out_path;
  table_path += ".txt";
  std::ofstream table(table_path);
  if (!table) throw WriteError("cannot write report: " + table_path.string());
  table << render_report_table(stats, per_class_accuracy, class_frequency);
  if (!table) throw WriteError("write failed: " + table_path.string());
}

}  // namespace cropdx

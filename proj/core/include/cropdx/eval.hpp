#ifndef CROPDX_EVAL_HPP_
#define CROPDX_EVAL_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cropdx/vocab.hpp"

namespace cropdx {

class WriteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalRecord {
  std::string id;
  std::string prediction;
  std::string reference;
  std::string crop;
  std::string disease;
  double frequency = 0.0;  // class share of the training set, in [0,1]
};

enum class FreqBucket { High, Mid, Low };  // >5%, 2-5%, <2%

const char* bucket_name(FreqBucket b);

struct BucketStats {
  FreqBucket bucket = FreqBucket::High;
  std::vector<std::string> classes;
  double mean_accuracy = 0.0;
  double sigma = 0.0;  // population std across classes
};

struct AccuracyResult {
  double crop_accuracy = 0.0;
  double disease_accuracy = 0.0;
  int crop_scored = 0;
  int crop_hits = 0;
  int disease_scored = 0;
  int disease_hits = 0;
  // Per crop-class hit rate (hits, scored), keyed by the record's crop
  // label.
  std::map<std::string, std::pair<int, int>> per_crop_class;
  std::vector<std::string> skipped;  // ids whose reference had no targets
};

// A prediction scores a hit only when its match against the reference's
// extracted entry is tier Exact.
AccuracyResult keyword_accuracy(const std::vector<EvalRecord>& records,
                                const Vocabulary& vocab);

// Partition classes by frequency thresholds 5% and 2%; per-bucket mean
// and population sigma of class accuracies. Empty buckets are omitted.
std::vector<BucketStats> stratify(
    const std::map<std::string, double>& per_class_accuracy,
    const std::map<std::string, double>& class_frequency);

// JSON report plus an aligned text table, deterministic field order.
void write_report(const AccuracyResult& accuracy,
                  const std::vector<BucketStats>& stats,
                  const std::map<std::string, double>& per_class_accuracy,
                  const std::map<std::string, double>& class_frequency,
                  const std::filesystem::path& out_path);

std::string render_report_json(
    const AccuracyResult& accuracy, const std::vector<BucketStats>& stats,
    const std::map<std::string, double>& per_class_accuracy,
    const std::map<std::string, double>& class_frequency);

std::string render_report_table(
    const std::vector<BucketStats>& stats,
    const std::map<std::string, double>& per_class_accuracy,
    const std::map<std::string, double>& class_frequency);

}  // namespace cropdx

#endif  // CROPDX_EVAL_HPP_

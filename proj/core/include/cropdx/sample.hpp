#ifndef CROPDX_SAMPLE_HPP_
#define CROPDX_SAMPLE_HPP_

#include <string>

namespace cropdx {

// One VQA item. Images are opaque at this layer; the crop/disease class
// labels and the training-set class frequency ride along for sampling and
// evaluation.
struct Sample {
  std::string id;
  std::string question;
  std::string reference_answer;
  std::string crop;
  std::string disease;
  double frequency = 0.0;

  bool operator==(const Sample&) const = default;
};

}  // namespace cropdx

#endif  // CROPDX_SAMPLE_HPP_

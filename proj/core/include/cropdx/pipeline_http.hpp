#ifndef CROPDX_PIPELINE_HTTP_HPP_
#define CROPDX_PIPELINE_HTTP_HPP_

#include <string>

#include "cropdx/pipeline.hpp"
#include "httplib.h"
#include "json.hpp"

namespace cropdx {

// Generic HTTP-JSON clients conforming to the generator/judge interfaces.
// POST /generate {"id", "question", "reference_answer", "prompt"} ->
// {"candidate": "..."}; POST /score {"id", "question", "reference_answer",
// "candidate"} -> {"accuracy", "completeness", "detail", "relevance",
// "clarity", "critique"}. Never used by tests; wire a real model behind
// these endpoints to run the pipeline for real.
class HttpGeneratorClient : public GeneratorClient {
 public:
  explicit HttpGeneratorClient(std::string base_url)
      : base_url_(std::move(base_url)) {}

  std::string generate(const Sample& sample,
                       const std::optional<std::string>& critique) override {
    nlohmann::json body = {
        {"id", sample.id},
        {"question", sample.question},
        {"reference_answer", sample.reference_answer},
        {"prompt", build_generation_prompt(sample, critique)},
    };
    httplib::Client client(base_url_);
    auto res = client.Post("/generate", body.dump(), "application/json");
    if (!res || res->status != 200) {
      throw ClientError("generator endpoint failed for sample '" + sample.id +
                        "'");
    }
    return nlohmann::json::parse(res->body).at("candidate")
        .get<std::string>();
  }

 private:
  std::string base_url_;
};

class HttpJudgeClient : public JudgeClient {
 public:
  explicit HttpJudgeClient(std::string base_url)
      : base_url_(std::move(base_url)) {}

  JudgeScore score(const Sample& sample, const std::string& candidate)
      override {
    nlohmann::json body = {
        {"id", sample.id},
        {"question", sample.question},
        {"reference_answer", sample.reference_answer},
        {"candidate", candidate},
    };
    httplib::Client client(base_url_);
    auto res = client.Post("/score", body.dump(), "application/json");
    if (!res || res->status != 200) {
      throw ClientError("judge endpoint failed for sample '" + sample.id +
                        "'");
    }
    auto j = nlohmann::json::parse(res->body);
    return JudgeScore::from_criteria(
        j.at("accuracy").get<int>(), j.at("completeness").get<int>(),
        j.at("detail").get<int>(), j.at("relevance").get<int>(),
        j.at("clarity").get<int>(), j.value("critique", std::string{}));
  }

 private:
  std::string base_url_;
};

}  // namespace cropdx

#endif  // CROPDX_PIPELINE_HTTP_HPP_

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "cropdx/grpo.hpp"
#include "cropdx/matcher.hpp"
#include "cropdx/reward.hpp"
#include "cropdx/text.hpp"
#include "cropdx/vocab.hpp"

namespace {

const cropdx::Vocabulary& vocab() {
  static const cropdx::Vocabulary v = cropdx::load_default();
  return v;
}

const std::string kResponse =
    "<think>Step 1: Observe the tomato leaf and note circular brown lesions "
    "with concentric rings across the surface. "
    "Step 2: The symptom pattern and target spot appearance indicate a "
    "fungal disease rather than bacterial spot. "
    "Step 3: The lesion distribution is consistent with early blight caused "
    "by alternaria solani on tomato. "
    "Step 4: Conclude early blight; control with crop rotation and a "
    "chlorothalonil spray at first sign of symptoms.</think>"
    "<answer>Tomato Early Blight</answer>";

void BM_Normalize(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(cropdx::normalize(kResponse));
  }
}
BENCHMARK(BM_Normalize);

void BM_MatchEntry(benchmark::State& state) {
  const auto* entry = vocab().find_entry(cropdx::EntryKind::Disease,
                                         "early blight");
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cropdx::match_entry(kResponse, *entry, vocab().weak_relations));
  }
}
BENCHMARK(BM_MatchEntry);

void BM_TotalRewardIdentification(benchmark::State& state) {
  cropdx::Sample s;
  s.question = "What is the content of this picture?";
  s.reference_answer = "Tomato Early Blight";
  for (auto _ : state) {
    benchmark::DoNotOptimize(cropdx::total_reward(kResponse, s, vocab()));
  }
}
BENCHMARK(BM_TotalRewardIdentification);

void BM_TotalRewardControl(benchmark::State& state) {
  cropdx::Sample s;
  s.question = "How to prevent and control tomato early blight?";
  s.reference_answer = "Tomato Early Blight";
  for (auto _ : state) {
    benchmark::DoNotOptimize(cropdx::total_reward(kResponse, s, vocab()));
  }
}
BENCHMARK(BM_TotalRewardControl);

void BM_TrainStep(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rw(0.0, 3.0);
  std::vector<cropdx::TemplateBank> banks(8);
  for (std::size_t b = 0; b < banks.size(); ++b) {
    banks[b].sample_id = "b" + std::to_string(b);
    for (int i = 0; i < 5; ++i) {
      banks[b].templates.push_back("t");
      banks[b].rewards.push_back(rw(rng));
    }
  }
  cropdx::TrainConfig cfg;
  cfg.steps = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cropdx::train(banks, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainStep)->Arg(10)->Arg(100);

}  // namespace

BENCHMARK_MAIN();

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "socialmotion/grammar.h"
#include "socialmotion/transformer.h"
#include "socialmotion/vocabulary.h"

namespace socialmotion {

// A captioned scene after both tokenizers ran: per-person motion codes and
// reference-relative pose bins.
struct TokenizedScene {
  std::string caption;
  SocialTokens motion;
  int frames = 0;
  double fps = 20.0;

  int persons() const {
    return static_cast<int>(motion.persons.size());
  }
};

enum class PretrainTask { TextToMotion, MotionToText, Forecast, Reaction, Inbetween };

std::string_view task_name(PretrainTask task);
PretrainTask parse_task(std::string_view name);
inline constexpr PretrainTask kPretrainTasks[] = {PretrainTask::TextToMotion, PretrainTask::MotionToText,
                                                  PretrainTask::Forecast, PretrainTask::Reaction,
                                                  PretrainTask::Inbetween};

// Replaces ~ratio of the tokens with sentinel-marked spans. The target lists
// each removed span after its sentinel and ends with one more sentinel. The
// input must not already contain sentinels.
TaskPair span_corrupt(std::span<const int> sequence, const Vocabulary& vocab, double ratio = 0.15,
                      double mean_span = 3.0, std::uint64_t seed = 0);
// Inverse of span_corrupt.
std::vector<int> splice_back(std::span<const int> input, std::span<const int> target, const Vocabulary& vocab);

// Motion condition and target for the motion-only tasks, both as id
// sequences without any text prefix.
struct MotionTaskParts {
  std::vector<int> condition;
  std::vector<int> target;
  int masked_person = -1; // reaction only
};

// First floor(run/2) codes of every person as the condition, the rest as the
// target; both halves keep all triplets. Every run needs at least 2 codes.
MotionTaskParts forecast_parts(const TokenizedScene& scene, const Vocabulary& vocab);
// One seeded person's run replaced by <sentinel_0>; target wraps that run in
// Motion_S/Motion_E. Needs at least 2 persons.
MotionTaskParts reaction_parts(const TokenizedScene& scene, const Vocabulary& vocab, std::uint64_t seed);
// The middle half of each run (codes [L/4, L/4 + L/2)) replaced by
// <sentinel_p> for person p; the target is the full motion.
MotionTaskParts inbetween_parts(const TokenizedScene& scene, const Vocabulary& vocab);

// Rebuilds the full block from a reaction condition and a generated target.
std::vector<int> splice_reaction(std::span<const int> condition, std::span<const int> target,
                                 const Vocabulary& vocab);

struct TaskOptions {
  int max_length = 512;
};

// Text prompts prepended to the motion-only pretraining inputs.
std::string_view task_prefix(PretrainTask task);

// Caption targets end with <eos>; motion targets end with <Motion_E>.
TaskPair build_task_pair(PretrainTask task, const TokenizedScene& scene, const Vocabulary& vocab,
                         std::uint64_t seed, const TaskOptions& options = {});

} // namespace socialmotion

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "socialmotion/tasks.h"
#include "socialmotion/templates.h"
#include "socialmotion/transformer.h"

namespace socialmotion {

struct StageConfig {
  int epochs = 1;
  int batch_size = 8;
  double learning_rate = 2e-4;
  int warmup_steps = 100;
  double weight_decay = 0.01;
  double max_grad_norm = 1.0;
};

struct PipelineConfig {
  ModelConfig model;
  StageConfig pretrain;
  StageConfig instruct;
  // Unsupervised (span-corruption) share of each pretraining epoch; 0.5 is 1:1.
  double unsupervised_share = 0.5;
  double corruption_ratio = 0.15;
  double mean_span = 3.0;
  std::uint64_t seed = 0;

  void validate() const;
  std::string to_json() const;
  static PipelineConfig from_json(const std::string& text);
};

enum class TrainingStage { Pretrain, Instruct };
std::string_view stage_name(TrainingStage stage);

struct LMCheckpoint {
  Seq2SeqTransformer model;
  TrainingStage stage = TrainingStage::Pretrain;

  void save(const std::string& path) const;
  static LMCheckpoint load(const std::string& path);
};

struct EpochMix {
  long long unsupervised = 0;
  long long supervised = 0;
};

struct StageReport {
  std::string stage;
  long long steps = 0;
  std::vector<double> losses; // one per step
  std::vector<EpochMix> mix; // per epoch
  long long skipped_pairs = 0; // over the length limit or not applicable
};

// Every pretraining task that applies to each scene.
std::vector<TaskPair> build_supervised_pairs(std::span<const TokenizedScene> scenes, const Vocabulary& vocab,
                                             std::uint64_t seed, const TaskOptions& options,
                                             long long* skipped = nullptr);
// Caption followed by the motion block, the sequence span corruption runs on.
std::vector<int> corruption_source(const TokenizedScene& scene, const Vocabulary& vocab);

// One pretraining epoch: the supervised pairs plus freshly corrupted
// sequences in the configured share, shuffled.
std::vector<TaskPair> mixed_epoch(std::span<const TaskPair> supervised,
                                  std::span<const std::vector<int>> corruption_sources, const Vocabulary& vocab,
                                  const PipelineConfig& config, std::uint64_t epoch_seed, EpochMix* mix = nullptr);

// Every applicable instruction family for each scene.
std::vector<TaskPair> build_instruction_pairs(std::span<const TokenizedScene> scenes, const Vocabulary& vocab,
                                              const TemplateRegistry& registry, std::uint64_t seed,
                                              const TaskOptions& options, long long* skipped = nullptr);

using StepCallback = std::function<void(const std::string& stage, long long step, double loss)>;

struct StageResult {
  LMCheckpoint checkpoint;
  StageReport report;
};

StageResult run_pretraining(std::span<const TokenizedScene> scenes, const Vocabulary& vocab,
                            const PipelineConfig& config, const StepCallback& callback = nullptr);
// Requires a pretraining checkpoint; throws Error(PipelineOrder) otherwise.
StageResult run_instruction_tuning(const LMCheckpoint& pretrained, std::span<const TokenizedScene> scenes,
                                   const Vocabulary& vocab, const PipelineConfig& config,
                                   const TemplateRegistry& registry = TemplateRegistry::builtin(),
                                   const StepCallback& callback = nullptr);

// Shared optimizer loop over fixed or per-epoch pair lists.
StageReport train_pairs(Seq2SeqTransformer& model, const StageConfig& stage, const std::string& name,
                        const std::function<std::vector<TaskPair>(int epoch, EpochMix* mix)>& epoch_pairs,
                        std::uint64_t seed, const StepCallback& callback = nullptr);

struct LengthConditioningReport {
  int prompts = 0; // frame-conditioned prompts evaluated
  int parsed = 0; // generations holding a well-formed motion block
  int within = 0; // parsed generations within the tolerance
  double mean_abs_error = 0.0; // frames, over parsed generations

  double accuracy() const {
    return prompts > 0 ? static_cast<double>(within) / prompts : 0.0;
  }
};

// Greedy generation from each scene's "text_to_motion_frames" prompt. A
// generation's length is 4 frames per code of its first person; it counts as
// within when that is at most `tolerance_frames` from the requested length.
LengthConditioningReport length_conditioning_report(const Seq2SeqTransformer& model, const Vocabulary& vocab,
                                                    std::span<const TokenizedScene> scenes,
                                                    const TemplateRegistry& registry = TemplateRegistry::builtin(),
                                                    int tolerance_frames = 8, std::uint64_t seed = 0);

} // namespace socialmotion

#include "socialmotion/lm_pipeline.h"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "socialmotion/error.h"
#include "socialmotion/rng.h"

namespace socialmotion {

namespace {

StageConfig stage_from_json(const nlohmann::json& j, StageConfig s) {
  s.epochs = j.value("epochs", s.epochs);
  s.batch_size = j.value("batch_size", s.batch_size);
  s.learning_rate = j.value("learning_rate", s.learning_rate);
  s.warmup_steps = j.value("warmup_steps", s.warmup_steps);
  s.weight_decay = j.value("weight_decay", s.weight_decay);
  s.max_grad_norm = j.value("max_grad_norm", s.max_grad_norm);
  return s;
}

nlohmann::json stage_to_json(const StageConfig& s) {
  return {{"epochs", s.epochs},
          {"batch_size", s.batch_size},
          {"learning_rate", s.learning_rate},
          {"warmup_steps", s.warmup_steps},
          {"weight_decay", s.weight_decay},
          {"max_grad_norm", s.max_grad_norm}};
}

void validate_stage(const StageConfig& s, const char* name) {
  if (s.epochs < 0 || s.batch_size < 1 || !(s.learning_rate > 0.0) || s.warmup_steps < 0 ||
      s.weight_decay < 0.0 || s.max_grad_norm < 0.0) {
    fail(ErrorCode::InvalidArgument, std::string("invalid ") + name + " stage settings");
  }
}

} // namespace

void PipelineConfig::validate() const {
  model.validate();
  validate_stage(pretrain, "pretraining");
  validate_stage(instruct, "instruction");
  if (!(unsupervised_share >= 0.0 && unsupervised_share < 1.0)) {
    fail(ErrorCode::InvalidArgument, "unsupervised_share must lie in [0, 1)");
  }
  if (!(corruption_ratio >= 0.0 && corruption_ratio < 1.0)) {
    fail(ErrorCode::InvalidArgument, "corruption_ratio must lie in [0, 1)");
  }
}

std::string PipelineConfig::to_json() const {
  nlohmann::json j;
  j["model"] = nlohmann::json::parse(model.to_json());
  j["pretrain"] = stage_to_json(pretrain);
  j["instruct"] = stage_to_json(instruct);
  j["unsupervised_share"] = unsupervised_share;
  j["corruption_ratio"] = corruption_ratio;
  j["mean_span"] = mean_span;
  j["seed"] = seed;
  return j.dump(2);
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  PipelineConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("model")) {
      nlohmann::json m = j["model"];
      if (!m.contains("vocab_size")) {
        m["vocab_size"] = 1; // filled in from the vocabulary before training
      }
      c.model = ModelConfig::from_json(m.dump());
    }
    if (j.contains("pretrain")) {
      c.pretrain = stage_from_json(j["pretrain"], c.pretrain);
    }
    if (j.contains("instruct")) {
      c.instruct = stage_from_json(j["instruct"], c.instruct);
    }
    c.unsupervised_share = j.value("unsupervised_share", c.unsupervised_share);
    c.corruption_ratio = j.value("corruption_ratio", c.corruption_ratio);
    c.mean_span = j.value("mean_span", c.mean_span);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("pipeline config: ") + e.what());
  }
  return c;
}

std::string_view stage_name(TrainingStage stage) {
  return stage == TrainingStage::Pretrain ? "pretrain" : "instruct";
}

void LMCheckpoint::save(const std::string& path) const {
  nlohmann::json meta;
  meta["stage"] = std::string(stage_name(stage));
  write_container(path, model.to_container(meta.dump()));
}

LMCheckpoint LMCheckpoint::load(const std::string& path) {
  std::string meta_text;
  Seq2SeqTransformer model = Seq2SeqTransformer::from_container(read_container(path, "XHLM", 1), &meta_text);
  const auto meta = nlohmann::json::parse(meta_text);
  const std::string stage = meta.value("stage", std::string());
  if (stage == "pretrain") {
    return {std::move(model), TrainingStage::Pretrain};
  }
  if (stage == "instruct") {
    return {std::move(model), TrainingStage::Instruct};
  }
  fail(ErrorCode::Format, "checkpoint '" + path + "' has no training stage tag");
}

std::vector<TaskPair> build_supervised_pairs(std::span<const TokenizedScene> scenes, const Vocabulary& vocab,
                                             std::uint64_t seed, const TaskOptions& options, long long* skipped) {
  std::vector<TaskPair> out;
  long long skip = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    for (PretrainTask task : kPretrainTasks) {
      try {
        out.push_back(build_task_pair(task, scenes[i], vocab, seed + 7919 * i + static_cast<int>(task), options));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InvalidArgument && e.code() != ErrorCode::OutOfRange) {
          throw;
        }
        ++skip;
      }
    }
  }
  if (skipped != nullptr) {
    *skipped = skip;
  }
  return out;
}

std::vector<int> corruption_source(const TokenizedScene& scene, const Vocabulary& vocab) {
  std::vector<int> out = vocab.encode_text(scene.caption);
  const std::vector<int> motion = serialize_social(scene.motion, vocab);
  out.insert(out.end(), motion.begin(), motion.end());
  return out;
}

std::vector<TaskPair> mixed_epoch(std::span<const TaskPair> supervised,
                                  std::span<const std::vector<int>> corruption_sources, const Vocabulary& vocab,
                                  const PipelineConfig& config, std::uint64_t epoch_seed, EpochMix* mix) {
  Rng rng(epoch_seed);
  std::vector<TaskPair> out(supervised.begin(), supervised.end());
  const double share = config.unsupervised_share;
  const auto wanted = static_cast<long long>(std::llround(supervised.size() * share / (1.0 - share)));
  long long made = 0;
  if (!corruption_sources.empty()) {
    for (long long k = 0; k < wanted; ++k) {
      const auto& src = corruption_sources[rng.index(corruption_sources.size())];
      out.push_back(span_corrupt(src, vocab, config.corruption_ratio, config.mean_span, rng.next_u64()));
      ++made;
    }
  }
  rng.shuffle(out);
  if (mix != nullptr) {
    *mix = {made, static_cast<long long>(supervised.size())};
  }
  return out;
}

std::vector<TaskPair> build_instruction_pairs(std::span<const TokenizedScene> scenes, const Vocabulary& vocab,
                                              const TemplateRegistry& registry, std::uint64_t seed,
                                              const TaskOptions& options, long long* skipped) {
  std::vector<TaskPair> out;
  long long skip = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    std::size_t f = 0;
    for (const TemplateFamily& family : registry.families()) {
      ++f;
      if (!family_applicable(family, scenes[i])) {
        ++skip;
        continue;
      }
      try {
        out.push_back(build_instruction_pair(registry, family.task, scenes[i], vocab, seed + 104729 * i + f, options));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::OutOfRange) {
          throw;
        }
        ++skip;
      }
    }
  }
  if (skipped != nullptr) {
    *skipped = skip;
  }
  return out;
}

StageReport train_pairs(Seq2SeqTransformer& model, const StageConfig& stage, const std::string& name,
                        const std::function<std::vector<TaskPair>(int epoch, EpochMix* mix)>& epoch_pairs,
                        std::uint64_t seed, const StepCallback& callback) {
  AdamWOptions opt;
  opt.learning_rate = stage.learning_rate;
  opt.weight_decay = stage.weight_decay;
  opt.max_grad_norm = stage.max_grad_norm;
  AdamW optimizer(model.parameters(), opt);
  Rng dropout_rng(seed ^ 0xD0D0D0D0ULL);
  StageReport report;
  report.stage = name;
  for (int epoch = 0; epoch < stage.epochs; ++epoch) {
    EpochMix mix;
    const std::vector<TaskPair> pairs = epoch_pairs(epoch, &mix);
    report.mix.push_back(mix);
    for (std::size_t start = 0; start < pairs.size(); start += stage.batch_size) {
      const std::size_t count = std::min<std::size_t>(stage.batch_size, pairs.size() - start);
      const double lr = warmup_learning_rate(stage.learning_rate, report.steps, stage.warmup_steps);
      const LMStepResult r = lm_train_step(std::span<const TaskPair>(pairs).subspan(start, count), model, optimizer,
                                           lr, Vocabulary::pad_id(), &dropout_rng);
      report.losses.push_back(r.loss);
      ++report.steps;
      if (callback) {
        callback(name, report.steps, r.loss);
      }
    }
  }
  return report;
}

StageResult run_pretraining(std::span<const TokenizedScene> scenes, const Vocabulary& vocab,
                            const PipelineConfig& config, const StepCallback& callback) {
  PipelineConfig cfg = config;
  cfg.model.vocab_size = vocab.size();
  cfg.validate();
  if (scenes.empty()) {
    fail(ErrorCode::InvalidArgument, "pretraining needs at least one scene");
  }
  TaskOptions options;
  options.max_length = cfg.model.max_length;
  long long skipped = 0;
  const std::vector<TaskPair> supervised = build_supervised_pairs(scenes, vocab, cfg.seed, options, &skipped);
  std::vector<std::vector<int>> sources;
  for (const TokenizedScene& s : scenes) {
    std::vector<int> src = corruption_source(s, vocab);
    if (src.size() >= 2 && static_cast<int>(src.size()) <= cfg.model.max_length) {
      sources.push_back(std::move(src));
    }
  }
  StageResult result{LMCheckpoint{Seq2SeqTransformer(cfg.model), TrainingStage::Pretrain}, {}};
  Rng epoch_rng(cfg.seed ^ 0x5151ULL);
  std::vector<std::uint64_t> epoch_seeds(cfg.pretrain.epochs);
  for (auto& s : epoch_seeds) {
    s = epoch_rng.next_u64();
  }
  result.report = train_pairs(
      result.checkpoint.model, cfg.pretrain, "pretrain",
      [&](int epoch, EpochMix* mix) { return mixed_epoch(supervised, sources, vocab, cfg, epoch_seeds[epoch], mix); },
      cfg.seed, callback);
  result.report.skipped_pairs = skipped;
  return result;
}

StageResult run_instruction_tuning(const LMCheckpoint& pretrained, std::span<const TokenizedScene> scenes,
                                   const Vocabulary& vocab, const PipelineConfig& config,
                                   const TemplateRegistry& registry, const StepCallback& callback) {
  if (pretrained.stage != TrainingStage::Pretrain) {
    fail(ErrorCode::PipelineOrder, "instruction tuning needs a pretraining checkpoint, got stage '" +
                                       std::string(stage_name(pretrained.stage)) + "'");
  }
  if (pretrained.model.config().vocab_size != vocab.size()) {
    fail(ErrorCode::ShapeMismatch, "checkpoint vocabulary size " +
                                       std::to_string(pretrained.model.config().vocab_size) +
                                       " does not match the vocabulary (" + std::to_string(vocab.size()) + ")");
  }
  validate_stage(config.instruct, "instruction");
  TaskOptions options;
  options.max_length = pretrained.model.config().max_length;
  long long skipped = 0;
  const std::vector<TaskPair> pairs = build_instruction_pairs(scenes, vocab, registry, config.seed, options, &skipped);
  if (pairs.empty()) {
    fail(ErrorCode::InvalidArgument, "no instruction pairs could be built");
  }
  StageResult result{LMCheckpoint{pretrained.model, TrainingStage::Instruct}, {}};
  result.report = train_pairs(
      result.checkpoint.model, config.instruct, "instruct",
      [&](int epoch, EpochMix* mix) {
        std::vector<TaskPair> shuffled = pairs;
        Rng rng(config.seed + 31 * static_cast<std::uint64_t>(epoch) + 1);
        rng.shuffle(shuffled);
        *mix = {0, static_cast<long long>(shuffled.size())};
        return shuffled;
      },
      config.seed + 1, callback);
  result.report.skipped_pairs = skipped;
  return result;
}

LengthConditioningReport length_conditioning_report(const Seq2SeqTransformer& model, const Vocabulary& vocab,
                                                    std::span<const TokenizedScene> scenes,
                                                    const TemplateRegistry& registry, int tolerance_frames,
                                                    std::uint64_t seed) {
  const TemplateFamily& family = registry.family("text_to_motion_frames");
  TaskOptions options;
  options.max_length = model.config().max_length;
  const int stops[] = {Vocabulary::eos_id(), vocab.motion_end_id()};
  LengthConditioningReport r;
  double error_sum = 0.0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (!family_applicable(family, scenes[i])) {
      continue;
    }
    TaskPair pair;
    try {
      pair = build_instruction_pair(registry, family.task, scenes[i], vocab, seed + i, options);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::OutOfRange) {
        continue;
      }
      throw;
    }
    ++r.prompts;
    const int max_new = std::min(model.config().max_length, 2 * static_cast<int>(pair.target.size()) + 8);
    const GenerationResult g = generate(model, pair.input, SamplingOptions{}, max_new, stops);
    const auto block = find_motion_block(g.ids, vocab);
    if (!block) {
      continue;
    }
    const ParseResult parsed = parse_social(*block, vocab);
    if (!parsed.ok()) {
      continue;
    }
    ++r.parsed;
    const int frames = 4 * static_cast<int>(parsed.value->persons.front().size());
    const int error = std::abs(frames - scenes[i].frames);
    error_sum += error;
    r.within += error <= tolerance_frames ? 1 : 0;
  }
  r.mean_abs_error = r.parsed > 0 ? error_sum / r.parsed : 0.0;
  return r;
}

} // namespace socialmotion

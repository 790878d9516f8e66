#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "socialmotion/error.h"
#include "socialmotion/lm_pipeline.h"
#include "socialmotion/tasks.h"
#include "socialmotion/templates.h"
#include "socialmotion/transformer.h"
#include "socialmotion/vocabulary.h"
#include "test_support.h"

namespace socialmotion {
namespace {

constexpr int kCodes = 16;
constexpr int kBins = 16;

const Vocabulary& vocab() {
  static const Vocabulary v = [] {
    std::vector<std::string> corpus = template_corpus();
    corpus.push_back("two people shake hands");
    corpus.push_back("three people walk together");
    return Vocabulary::build(corpus, {.motion_codes = kCodes, .rel_bins = kBins});
  }();
  return v;
}

TokenizedScene two_person_scene() {
  TokenizedScene s;
  s.caption = "two people shake hands";
  s.motion = {{{1, 2, 3, 4, 5, 6, 7, 8}, {9, 10, 11, 12, 13}}, {{3, 4, 5}}};
  s.frames = 32;
  return s;
}

TokenizedScene three_person_scene() {
  TokenizedScene s;
  s.caption = "three people walk together";
  s.motion = {{{1, 2, 3, 4}, {5, 6, 7, 8, 9, 10}, {11, 12, 13, 14, 15}}, {{1, 2, 3}, {4, 5, 6}}};
  s.frames = 24;
  return s;
}

ModelConfig tiny_model(int vocab_size, std::uint64_t seed = 1) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.width = 16;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.heads = 2;
  c.ff_width = 32;
  c.max_length = 64;
  c.dropout = 0.0;
  c.seed = seed;
  return c;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

// Replaces each sentinel of the input with the target tokens that follow the
// same sentinel, scanning the target left to right.
std::vector<int> oracle_splice(const std::vector<int>& input, const std::vector<int>& target, const Vocabulary& v) {
  std::vector<int> out;
  for (int id : input) {
    if (!v.is_sentinel(id)) {
      out.push_back(id);
      continue;
    }
    std::size_t k = 0;
    while (k < target.size() && target[k] != id) {
      ++k;
    }
    for (++k; k < target.size() && !v.is_sentinel(target[k]); ++k) {
      out.push_back(target[k]);
    }
  }
  return out;
}

std::vector<int> random_text_sequence(Rng& rng, int length) {
  const Vocabulary& v = vocab();
  std::vector<int> seq;
  while (static_cast<int>(seq.size()) < length) {
    const int id = static_cast<int>(rng.index(static_cast<std::size_t>(v.size())));
    if (!v.is_sentinel(id)) {
      seq.push_back(id);
    }
  }
  return seq;
}

TEST(SpanCorrupt, ZeroRatioKeepsInput) {
  Rng rng(1);
  const std::vector<int> seq = random_text_sequence(rng, 40);
  const TaskPair p = span_corrupt(seq, vocab(), 0.0);
  EXPECT_EQ(p.input, seq);
  EXPECT_EQ(p.target, std::vector<int>{vocab().sentinel_id(0)});
}

TEST(SpanCorrupt, SpliceBackMatchesOracle) {
  Rng rng(2);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::vector<int> seq = random_text_sequence(rng, 100);
    const TaskPair p = span_corrupt(seq, vocab(), 0.15, 3.0, seed);
    EXPECT_EQ(oracle_splice(p.input, p.target, vocab()), seq);
    EXPECT_EQ(splice_back(p.input, p.target, vocab()), seq);
    EXPECT_TRUE(vocab().is_sentinel(p.target.back()));
  }
}

TEST(SpanCorrupt, RealizedRatio) {
  Rng rng(3);
  double total = 0.0;
  const int runs = 300;
  for (int r = 0; r < runs; ++r) {
    const std::vector<int> seq = random_text_sequence(rng, 100);
    const TaskPair p = span_corrupt(seq, vocab(), 0.15, 3.0, static_cast<std::uint64_t>(r));
    int removed = 0;
    for (int id : p.target) {
      removed += vocab().is_sentinel(id) ? 0 : 1;
    }
    total += removed / 100.0;
  }
  EXPECT_NEAR(total / runs, 0.15, 0.05);
}

TEST(SpanCorrupt, RejectsBadInput) {
  Rng rng(4);
  const std::vector<int> seq = random_text_sequence(rng, 20);
  EXPECT_THROW(span_corrupt(seq, vocab(), 1.0), Error);
  EXPECT_THROW(span_corrupt(seq, vocab(), -0.1), Error);
  EXPECT_THROW(span_corrupt(std::vector<int>{5}, vocab(), 0.15), Error);
  std::vector<int> with_sentinel = seq;
  with_sentinel[3] = vocab().sentinel_id(2);
  EXPECT_THROW(span_corrupt(with_sentinel, vocab(), 0.15), Error);
}

TEST(TaskPairs, TextToMotionAndBack) {
  const Vocabulary& v = vocab();
  const TokenizedScene s = two_person_scene();
  const TaskPair t2m = build_task_pair(PretrainTask::TextToMotion, s, v, 0);
  EXPECT_EQ(t2m.task, "t2m");
  EXPECT_EQ(t2m.input, v.encode_text(s.caption));
  EXPECT_EQ(t2m.target, serialize_social(s.motion, v));
  const TaskPair m2t = build_task_pair(PretrainTask::MotionToText, s, v, 0);
  EXPECT_EQ(m2t.input, serialize_social(s.motion, v));
  EXPECT_EQ(m2t.target.back(), Vocabulary::eos_id());
}

TEST(TaskPairs, ForecastSplitsEachRunInHalf) {
  const Vocabulary& v = vocab();
  const TokenizedScene s = three_person_scene();
  const MotionTaskParts parts = forecast_parts(s, v);
  const SocialTokens first = parse_social_or_throw(parts.condition, v);
  const SocialTokens second = parse_social_or_throw(parts.target, v);
  for (std::size_t p = 0; p < s.motion.persons.size(); ++p) {
    const auto& run = s.motion.persons[p];
    EXPECT_EQ(first.persons[p].size(), run.size() / 2);
    std::vector<int> joined = first.persons[p];
    joined.insert(joined.end(), second.persons[p].begin(), second.persons[p].end());
    EXPECT_EQ(joined, run);
  }
  EXPECT_EQ(first.relposes, s.motion.relposes);
  const TaskPair a = build_task_pair(PretrainTask::Forecast, s, v, 5);
  const TaskPair b = build_task_pair(PretrainTask::Forecast, s, v, 5);
  EXPECT_EQ(a.input, b.input);
  const std::vector<int> prefix = v.encode_text(task_prefix(PretrainTask::Forecast));
  EXPECT_TRUE(std::equal(prefix.begin(), prefix.end(), a.input.begin()));
}

TEST(TaskPairs, ReactionSplicesToGrammaticalBlock) {
  const Vocabulary& v = vocab();
  const TokenizedScene s = two_person_scene();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MotionTaskParts parts = reaction_parts(s, v, seed);
    ASSERT_GE(parts.masked_person, 0);
    const SocialTokens target = parse_social_or_throw(parts.target, v);
    EXPECT_EQ(target.persons.size(), 1u);
    EXPECT_EQ(target.persons[0], s.motion.persons[static_cast<std::size_t>(parts.masked_person)]);
    const std::vector<int> spliced = splice_reaction(parts.condition, parts.target, v);
    EXPECT_EQ(spliced, serialize_social(s.motion, v));
  }
  TokenizedScene solo = s;
  solo.motion.persons.resize(1);
  solo.motion.relposes.clear();
  EXPECT_THROW(build_task_pair(PretrainTask::Reaction, solo, v, 0), Error);
}

TEST(TaskPairs, InbetweenMasksMiddleHalf) {
  const Vocabulary& v = vocab();
  const TokenizedScene s = two_person_scene();
  const MotionTaskParts parts = inbetween_parts(s, v);
  // person 0 has 8 codes: keep [0,2) and [6,8)
  const std::vector<int> expected_head{v.motion_start_id(), v.motion_id(1), v.motion_id(2), v.sentinel_id(0),
                                       v.motion_id(7), v.motion_id(8)};
  EXPECT_TRUE(std::equal(expected_head.begin(), expected_head.end(), parts.condition.begin()));
  EXPECT_EQ(parts.target, serialize_social(s.motion, v));
}

TEST(TaskPairs, TooLongIsRejected) {
  const TokenizedScene s = two_person_scene();
  EXPECT_EQ(code_of([&] { build_task_pair(PretrainTask::TextToMotion, s, vocab(), 0, {.max_length = 8}); }),
            ErrorCode::OutOfRange);
}

TEST(TaskPairs, TaskNames) {
  for (PretrainTask t : kPretrainTasks) {
    EXPECT_EQ(parse_task(task_name(t)), t);
  }
  EXPECT_THROW(parse_task("dance"), Error);
}

TEST(Templates, EssenceTemplate) {
  const std::string out = render_instruction(TemplateRegistry::builtin(), "text_to_motion/input/0",
                                             {{"Caption", "two people hug"}});
  EXPECT_EQ(out, "Show me a motion that captures the essence of two people hug.");
}

TEST(Templates, RegistryCoversTaskFamilies) {
  const TemplateRegistry& r = TemplateRegistry::builtin();
  EXPECT_GE(r.task_tags().size(), 25u);
  std::map<std::string, std::string> slots;
  for (const std::string& name : known_slots()) {
    slots[name] = "value";
  }
  for (const InstructionTemplate& t : r.all()) {
    const std::string out = render_instruction(r, t.id, slots);
    EXPECT_EQ(out.find('<'), std::string::npos) << t.id << ": " << out;
    for (const std::string& slot : t.slots) {
      EXPECT_NE(std::find(known_slots().begin(), known_slots().end(), slot), known_slots().end());
    }
  }
}

TEST(Templates, ErrorsAndSinglePassSubstitution) {
  const TemplateRegistry& r = TemplateRegistry::builtin();
  EXPECT_THROW(render_instruction(r, "text_to_motion/input/0", {}), Error);
  EXPECT_THROW(render_instruction(r, "nope/input/0", {{"Caption", "x"}}), Error);
  EXPECT_EQ(render_pattern("a <Caption> b", {{"Caption", "<Caption>"}}), "a <Caption> b");
  EXPECT_EQ(pattern_slots("<Human> then <Caption> and <Human>"), (std::vector<std::string>{"Human", "Caption"}));
}

TEST(Templates, JsonRoundTrip) {
  const TemplateRegistry& r = TemplateRegistry::builtin();
  const TemplateRegistry back = TemplateRegistry::from_json(r.to_json());
  EXPECT_EQ(back.task_tags(), r.task_tags());
  EXPECT_EQ(back.to_json(), r.to_json());
}

TEST(Templates, InstructionPairsUseValidIds) {
  const Vocabulary& v = vocab();
  const TemplateRegistry& r = TemplateRegistry::builtin();
  for (const TokenizedScene& s : {two_person_scene(), three_person_scene()}) {
    for (const TemplateFamily& f : r.families()) {
      if (!family_applicable(f, s)) {
        continue;
      }
      const TaskPair p = build_instruction_pair(r, f.task, s, v, 3);
      EXPECT_EQ(p.task, "instruct:" + f.task);
      EXPECT_FALSE(p.input.empty());
      EXPECT_FALSE(p.target.empty());
      for (int id : p.input) {
        EXPECT_NE(id, Vocabulary::unk_id()) << f.task;
      }
    }
  }
}

TEST(ModelConfig, Validation) {
  ModelConfig c = tiny_model(64);
  EXPECT_NO_THROW(c.validate());
  c.heads = 3;
  EXPECT_THROW(c.validate(), Error);
  c = tiny_model(64);
  c.max_length = 8;
  EXPECT_THROW(c.validate(), Error);
  const ModelConfig back = ModelConfig::from_json(tiny_model(64).to_json());
  EXPECT_EQ(back.width, 16);
  EXPECT_EQ(back.vocab_size, 64);
}

TEST(Transformer, ShiftRight) {
  EXPECT_EQ(shift_right(std::vector<int>{5, 6, 7}, 0), (std::vector<int>{0, 5, 6}));
}

TEST(Transformer, DecoderIsCausal) {
  Seq2SeqTransformer model(tiny_model(64));
  const std::vector<int> src{4, 5, 6};
  std::vector<int> a{0, 10, 11, 12, 13};
  std::vector<int> b = a;
  b[3] = 40;
  ad::Tape tape;
  const ad::Var memory = model.encode(tape, src, nullptr);
  const Eigen::MatrixXd la = model.decode(tape, memory, a, nullptr).value();
  const Eigen::MatrixXd lb = model.decode(tape, memory, b, nullptr).value();
  EXPECT_LT((la.topRows(3) - lb.topRows(3)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT((la.bottomRows(2) - lb.bottomRows(2)).cwiseAbs().maxCoeff(), 1e-9);
  const Eigen::RowVectorXd next = model.next_logits(model.encode_memory(src), std::span<const int>(a).first(3));
  EXPECT_LT((next - la.row(2)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Transformer, UniformModelLossIsLogVocab) {
  Seq2SeqTransformer model(tiny_model(64));
  model.parameter("output.weight").value.setZero();
  model.parameter("output.bias").value.setZero();
  const std::vector<TaskPair> batch{{"t", {4, 5, 6}, {7, 8, 9, 10}}, {"t", {11}, {12, 0, 13}}};
  const LMLoss loss = lm_loss(model, batch, 0, false);
  EXPECT_NEAR(loss.mean, std::log(64.0), 1e-6);
  EXPECT_EQ(loss.tokens, 6);
}

TEST(Transformer, GradientsMatchFiniteDifferences) {
  Seq2SeqTransformer model(tiny_model(64, 7));
  const std::vector<TaskPair> batch{{"t", {4, 5, 6, 7}, {8, 9, 10}}, {"t", {11, 12}, {13, 14, 15, 16}}};
  const auto params = model.parameters();
  const auto r = testing::check_gradients(
      params, [&] { return lm_loss(model, batch, 0, false).mean; }, [&] { lm_loss(model, batch, 0, true); }, 5,
      1e-5, 3);
  EXPECT_LT(r.worst_relative, 1e-3) << r.worst_parameter;
}

TEST(Transformer, TrainStepRejectsNonFiniteLoss) {
  Seq2SeqTransformer model(tiny_model(64));
  model.parameter("output.bias").value(0, 9) = std::numeric_limits<double>::quiet_NaN();
  AdamW opt(model.parameters(), {});
  const Eigen::MatrixXd before = model.parameter("output.weight").value;
  const std::vector<TaskPair> batch{{"t", {4, 5}, {9, 10}}};
  EXPECT_EQ(code_of([&] { lm_train_step(batch, model, opt, 1e-3, 0); }), ErrorCode::NonFinite);
  EXPECT_EQ(model.parameter("output.weight").value, before);
}

TEST(Transformer, LossDecreasesOnMemorizationCorpus) {
  const std::vector<TokenizedScene> scenes = testing::random_token_scenes(32, kCodes, kBins, 4);
  std::vector<TaskPair> pairs;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    pairs.push_back(build_task_pair(PretrainTask::TextToMotion, scenes[i], vocab(), i));
    pairs.back().target.resize(std::min<std::size_t>(pairs.back().target.size(), 12));
  }
  ModelConfig c = tiny_model(vocab().size());
  c.width = 32;
  c.ff_width = 64;
  Seq2SeqTransformer model(c);
  AdamW opt(model.parameters(), {.learning_rate = 3e-3});
  std::vector<double> losses;
  for (int step = 0; step < 200; ++step) {
    losses.push_back(lm_train_step(pairs, model, opt, 3e-3, 0).loss);
  }
  // Means over consecutive 20-step windows fall every time.
  double previous = std::numeric_limits<double>::infinity();
  for (int w = 0; w < 10; ++w) {
    double mean = 0.0;
    for (int k = 0; k < 20; ++k) {
      mean += losses[static_cast<std::size_t>(w * 20 + k)] / 20.0;
    }
    EXPECT_LT(mean, previous) << "window " << w;
    previous = mean;
  }
  EXPECT_LT(losses.back(), 0.5 * losses.front());
}

TEST(Generate, ZeroTemperatureEqualsGreedy) {
  Seq2SeqTransformer model(tiny_model(64, 9));
  const std::vector<int> prompt{4, 8, 15, 16};
  const std::vector<int> stop{1};
  const GenerationResult greedy = generate(model, prompt, {.greedy = true}, 20, stop);
  const GenerationResult cold =
      generate(model, prompt, {.greedy = false, .top_k = 64, .temperature = 1e-9, .seed = 5}, 20, stop);
  EXPECT_EQ(greedy.ids, cold.ids);
  EXPECT_EQ(generate(model, prompt, {.greedy = true}, 20, stop).ids, greedy.ids);
}

TEST(Generate, TruncationIsFlagged) {
  Seq2SeqTransformer model(tiny_model(64, 9));
  const std::vector<int> prompt{4, 8};
  const GenerationResult r = generate(model, prompt, {}, 3, std::vector<int>{});
  EXPECT_EQ(r.ids.size(), 3u);
  EXPECT_TRUE(r.truncated);
}

TEST(Generate, SamplingIsSeeded) {
  Seq2SeqTransformer model(tiny_model(64, 9));
  const std::vector<int> prompt{4, 8};
  const SamplingOptions s{.greedy = false, .top_k = 10, .temperature = 1.0, .seed = 11};
  EXPECT_EQ(generate(model, prompt, s, 10, std::vector<int>{}).ids, generate(model, prompt, s, 10, std::vector<int>{}).ids);
}

PipelineConfig tiny_pipeline() {
  PipelineConfig c;
  c.model = tiny_model(vocab().size());
  c.model.max_length = 128;
  c.pretrain.epochs = 1;
  c.pretrain.batch_size = 8;
  c.pretrain.warmup_steps = 2;
  c.instruct = c.pretrain;
  c.seed = 2;
  return c;
}

TEST(Pipeline, MixingRatioIsOneToOne) {
  const std::vector<TokenizedScene> scenes = testing::random_token_scenes(20, kCodes, kBins, 5);
  const std::vector<TaskPair> supervised = build_supervised_pairs(scenes, vocab(), 1, {});
  std::vector<std::vector<int>> sources;
  for (const auto& s : scenes) {
    sources.push_back(corruption_source(s, vocab()));
  }
  for (std::uint64_t epoch = 0; epoch < 3; ++epoch) {
    EpochMix mix;
    const std::vector<TaskPair> pairs = mixed_epoch(supervised, sources, vocab(), tiny_pipeline(), epoch, &mix);
    long long corrupted = 0;
    for (const auto& p : pairs) {
      corrupted += p.task == "span_corruption" ? 1 : 0;
    }
    EXPECT_EQ(corrupted, mix.unsupervised);
    EXPECT_EQ(static_cast<long long>(pairs.size()) - corrupted, mix.supervised);
    EXPECT_NEAR(static_cast<double>(corrupted) / static_cast<double>(pairs.size()), 0.5, 0.05);
  }
}

TEST(Pipeline, InstructionTuningNeedsPretrainCheckpoint) {
  const std::vector<TokenizedScene> scenes = testing::random_token_scenes(4, kCodes, kBins, 6);
  const PipelineConfig c = tiny_pipeline();
  const LMCheckpoint tuned{Seq2SeqTransformer(c.model), TrainingStage::Instruct};
  EXPECT_EQ(code_of([&] { run_instruction_tuning(tuned, scenes, vocab(), c); }), ErrorCode::PipelineOrder);
}

TEST(Pipeline, EndToEndToyRun) {
  const std::vector<TokenizedScene> scenes = testing::random_token_scenes(6, kCodes, kBins, 7);
  const PipelineConfig c = tiny_pipeline();
  const StageResult pre = run_pretraining(scenes, vocab(), c);
  EXPECT_EQ(pre.checkpoint.stage, TrainingStage::Pretrain);
  EXPECT_GT(pre.report.steps, 0);
  ASSERT_EQ(pre.report.mix.size(), 1u);
  const StageResult inst = run_instruction_tuning(pre.checkpoint, scenes, vocab(), c);
  EXPECT_EQ(inst.checkpoint.stage, TrainingStage::Instruct);

  testing::TempDir dir;
  pre.checkpoint.save(dir.file("pre.ckpt"));
  inst.checkpoint.save(dir.file("lm.ckpt"));
  EXPECT_EQ(LMCheckpoint::load(dir.file("pre.ckpt")).stage, TrainingStage::Pretrain);
  const LMCheckpoint loaded = LMCheckpoint::load(dir.file("lm.ckpt"));
  EXPECT_EQ(loaded.stage, TrainingStage::Instruct);
  loaded.save(dir.file("lm2.ckpt"));
  const LMCheckpoint again = LMCheckpoint::load(dir.file("lm2.ckpt"));
  const std::vector<int> prompt = vocab().encode_text(scenes[0].caption);
  const std::vector<int> stop{vocab().motion_end_id()};
  EXPECT_EQ(generate(loaded.model, prompt, {}, 20, stop).ids, generate(again.model, prompt, {}, 20, stop).ids);

  // deterministic under seed
  const StageResult pre2 = run_pretraining(scenes, vocab(), c);
  EXPECT_EQ(pre.report.losses, pre2.report.losses);
}

TEST(Pipeline, ConfigJsonRoundTrip) {
  const PipelineConfig c = tiny_pipeline();
  const PipelineConfig back = PipelineConfig::from_json(c.to_json());
  EXPECT_EQ(back.model.width, 16);
  EXPECT_EQ(back.unsupervised_share, 0.5);
  EXPECT_EQ(back.pretrain.warmup_steps, 2);
  EXPECT_EQ(stage_name(TrainingStage::Instruct), "instruct");
}

TEST(Grammar, FindMotionBlock) {
  const Vocabulary& v = vocab();
  const int s = v.motion_start_id();
  const int e = v.motion_end_id();
  EXPECT_FALSE(find_motion_block(std::vector<int>{4, 5}, v));
  EXPECT_EQ(*find_motion_block(std::vector<int>{4, s, 9, e, 7}, v), (std::vector<int>{s, 9, e}));
  EXPECT_EQ(*find_motion_block(std::vector<int>{s, 9}, v), (std::vector<int>{s, 9}));
}

TEST(LengthConditioning, UntrainedModelIsCounted) {
  const std::vector<TokenizedScene> scenes = testing::random_token_scenes(5, kCodes, kBins, 8);
  const PipelineConfig c = tiny_pipeline();
  const Seq2SeqTransformer model(c.model);
  const LengthConditioningReport r = length_conditioning_report(model, vocab(), scenes);
  EXPECT_EQ(r.prompts, 5);
  EXPECT_LE(r.within, r.parsed);
  EXPECT_LE(r.parsed, r.prompts);
  EXPECT_GE(r.accuracy(), 0.0);
  EXPECT_LE(r.accuracy(), 1.0);
  const LengthConditioningReport again = length_conditioning_report(model, vocab(), scenes);
  EXPECT_EQ(again.within, r.within);
  EXPECT_EQ(again.mean_abs_error, r.mean_abs_error);
}

TEST(LengthConditioning, MemorizedPromptsAreWithinTolerance) {
  const std::vector<TokenizedScene> scenes = testing::random_token_scenes(3, kCodes, kBins, 9);
  PipelineConfig c = tiny_pipeline();
  c.model.width = 32;
  c.model.ff_width = 64;
  std::vector<TaskPair> pairs;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    pairs.push_back(build_instruction_pair(TemplateRegistry::builtin(), "text_to_motion_frames", scenes[i], vocab(),
                                           i, {.max_length = c.model.max_length}));
  }
  Seq2SeqTransformer model(c.model);
  StageConfig stage;
  stage.epochs = 400;
  stage.batch_size = 3;
  stage.learning_rate = 3e-3;
  stage.warmup_steps = 10;
  stage.weight_decay = 0.0;
  train_pairs(model, stage, "memorize", [&](int, EpochMix*) { return pairs; }, 1);
  const LengthConditioningReport r = length_conditioning_report(model, vocab(), scenes, TemplateRegistry::builtin(), 0);
  EXPECT_EQ(r.prompts, 3);
  EXPECT_EQ(r.parsed, 3);
  EXPECT_EQ(r.within, 3);
  EXPECT_EQ(r.mean_abs_error, 0.0);
}

} // namespace
} // namespace socialmotion

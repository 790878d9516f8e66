#include <filesystem>
#include <iostream>
#include <memory>

#include "commands.h"
#include "socialmotion/error.h"
#include "socialmotion/grammar.h"
#include "socialmotion/lm_pipeline.h"
#include "socialmotion/manifest.h"
#include "socialmotion/scene_file.h"
#include "socialmotion/scene_tokens.h"
#include "socialmotion/templates.h"
#include "socialmotion/vocabulary.h"
#include "socialmotion/vq.h"

namespace socialmotion::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Manifest manifest_for_bins(const std::string& path) {
  require_file(path, "manifest");
  return Manifest::from_json(read_text(path));
}

VQModel load_vq(const std::string& path) {
  require_file(path, "VQ checkpoint");
  return VQModel::load(path);
}

Vocabulary load_vocab(const std::string& path) {
  require_file(path, "vocabulary");
  return Vocabulary::load(path);
}

void tokenize_command(CLI::App& app, std::vector<Command>& commands) {
  struct Options {
    std::string input, vq, manifest, vocab;
    int reference = 0;
  };
  auto o = std::make_shared<Options>();
  CLI::App* sub = app.add_subcommand("tokenize", "Scene file to motion codes and relative-pose bins (.tokens.json)");
  sub->add_option("--input", o->input, "Scene file")->required();
  sub->add_option("--vq", o->vq, "VQ checkpoint")->required();
  sub->add_option("--manifest", o->manifest, "Manifest holding the relative-pose bins")->required();
  sub->add_option("--vocab", o->vocab, "Vocabulary; adds the surface form to the output");
  sub->add_option("--reference", o->reference, "Reference person index")->capture_default_str();
  commands.push_back({sub, [=](RunContext& ctx) {
                        require_file(o->input, "scene file");
                        ctx.config = {{"input", o->input}, {"vq", o->vq}, {"manifest", o->manifest},
                                      {"vocab", o->vocab}, {"reference", o->reference}};
                        const Manifest m = manifest_for_bins(o->manifest);
                        const VQModel vq = load_vq(o->vq);
                        const SceneFile scene = read_scene(o->input);
                        const TokenizedScene t = tokenize_scene(scene, vq, m.bins, ReferenceChoice::fixed(o->reference),
                                                                skeleton_by_id(scene.skeleton_id));
                        json doc = json::parse(tokenized_scene_to_json(t));
                        if (!o->vocab.empty()) {
                          const Vocabulary v = load_vocab(o->vocab);
                          doc["surface"] = v.to_surface(serialize_social(t.motion, v));
                        }
                        const std::string path = ctx.output_path(file_stem(o->input) + ".tokens.json");
                        write_text(path, doc.dump(2) + "\n");
                        ctx.record(path);
                        ctx.write_sidecar(path);
                        std::size_t codes = 0;
                        for (const auto& run : t.motion.persons) {
                          codes += run.size();
                        }
                        emit(ctx, {{"tokens", path}, {"persons", t.persons()}, {"codes", codes}, {"frames", t.frames}});
                      }});
}

void detokenize_command(CLI::App& app, std::vector<Command>& commands) {
  struct Options {
    std::string input, vq, manifest, vocab;
  };
  auto o = std::make_shared<Options>();
  CLI::App* sub = app.add_subcommand("detokenize", "Tokens (.tokens.json) back to a scene file");
  sub->add_option("--input", o->input, "Tokens file")->required();
  sub->add_option("--vq", o->vq, "VQ checkpoint")->required();
  sub->add_option("--manifest", o->manifest, "Manifest holding the relative-pose bins")->required();
  sub->add_option("--vocab", o->vocab, "Vocabulary, needed when the file only has a surface form");
  commands.push_back({sub, [=](RunContext& ctx) {
                        require_file(o->input, "tokens file");
                        ctx.config = {{"input", o->input}, {"vq", o->vq}, {"manifest", o->manifest}, {"vocab", o->vocab}};
                        const std::string text = read_text(o->input);
                        TokenizedScene t;
                        const json doc = json::parse(text, nullptr, false);
                        if (!doc.is_discarded() && doc.contains("persons")) {
                          t = tokenized_scene_from_json(text);
                        } else {
                          const Vocabulary v = load_vocab(o->vocab);
                          const std::string surface = doc.is_discarded() ? text : doc.at("surface").get<std::string>();
                          t.motion = parse_social_or_throw(v.from_surface(surface), v);
                        }
                        const Manifest m = manifest_for_bins(o->manifest);
                        const VQModel vq = load_vq(o->vq);
                        SceneFile scene;
                        scene.motion = detokenize_scene(t.motion, vq, m.bins, t.frames, t.fps);
                        if (!t.caption.empty()) {
                          scene.captions.push_back(t.caption);
                        }
                        const std::string path = ctx.output_path(file_stem(o->input) + ".detok.xhsc");
                        write_scene(path, scene);
                        ctx.record(path);
                        ctx.write_sidecar(path);
                        emit(ctx, {{"scene", path}, {"persons", scene.motion.persons.size()}, {"frames", scene.motion.frames()}});
                      }});
}

std::vector<Eigen::MatrixXd> training_windows(const Manifest& m, int window) {
  std::vector<Eigen::MatrixXd> out;
  for (const ManifestEntry* e : m.split(Split::Train)) {
    const SceneFile scene = read_scene(m.absolute_path(*e));
    const SkeletonDef& skel = skeleton_by_id(scene.skeleton_id);
    for (const RawMotion& person : scene.motion.persons) {
      const Eigen::MatrixXd f = encode_person_h3d(canonicalize_person(person, skel).motion, skel).data;
      for (Eigen::Index start = 0; start + window <= f.rows(); start += window / 2) {
        out.push_back(f.middleRows(start, window));
      }
    }
  }
  if (out.empty()) {
    fail(ErrorCode::InvalidArgument, "no train-split person is at least " + std::to_string(window) + " frames long");
  }
  return out;
}

void train_vq_command(CLI::App& app, std::vector<Command>& commands) {
  struct Options {
    std::string manifest;
    int iterations = -1;
  };
  auto o = std::make_shared<Options>();
  CLI::App* sub = app.add_subcommand("train-vq", "Train the motion VQ tokenizer on the manifest's train split (--config: VQ config JSON)");
  sub->add_option("--manifest", o->manifest, "Manifest")->required();
  sub->add_option("--iterations", o->iterations, "Override the configured iteration count");
  commands.push_back({sub, [=](RunContext& ctx) {
                        require_file(o->manifest, "manifest");
                        const json cfg = ctx.load_config();
                        VQConfig c = cfg.empty() ? VQConfig{} : VQConfig::from_json(cfg.dump());
                        c.seed = ctx.seed;
                        if (o->iterations >= 0) {
                          c.iterations = o->iterations;
                        }
                        const Manifest m = Manifest::load(o->manifest);
                        const auto windows = training_windows(m, c.window);
                        c.feature_width = static_cast<int>(windows.front().cols());
                        ctx.config = json::parse(c.to_json());
                        ctx.config["manifest"] = o->manifest;
                        const int every = std::max(1, c.iterations / 20);
                        const VQTrainResult r = train_vq(windows, c, [&](int it, const VQLossReport& l) {
                          if (it % every == 0) {
                            std::cerr << "train-vq " << it << "/" << c.iterations << " loss " << l.total << std::endl;
                          }
                        });
                        const std::string path = ctx.output_path("vq.ckpt");
                        r.model.save(path);
                        ctx.record(path);
                        ctx.write_sidecar(path);
                        const VQLossReport last = r.curve.empty() ? VQLossReport{} : r.curve.back();
                        emit(ctx, {{"checkpoint", path},
                                   {"windows", windows.size()},
                                   {"iterations", c.iterations},
                                   {"reconstruction", last.reconstruction},
                                   {"total_loss", last.total},
                                   {"utilization", r.utilization}});
                      }});
}

Vocabulary lm_vocabulary(std::span<const TokenizedScene> scenes, int codes, int bins) {
  std::vector<std::string> corpus = template_corpus();
  for (const TokenizedScene& s : scenes) {
    corpus.push_back(s.caption);
  }
  VocabConfig vc;
  vc.motion_codes = codes;
  vc.rel_bins = bins;
  return Vocabulary::build(corpus, vc);
}

void train_lm_command(CLI::App& app, std::vector<Command>& commands) {
  struct Options {
    std::string manifest, vq, pretrained, vocab;
    std::string stage = "both";
  };
  auto o = std::make_shared<Options>();
  CLI::App* sub = app.add_subcommand("train-lm", "Pretrain and instruction-tune the motion language model (--config: pipeline config JSON)");
  sub->add_option("--manifest", o->manifest, "Manifest")->required();
  sub->add_option("--vq", o->vq, "VQ checkpoint")->required();
  sub->add_option("--stage", o->stage, "pretrain, instruct or both")
      ->check(CLI::IsMember({"pretrain", "instruct", "both"}))
      ->capture_default_str();
  sub->add_option("--pretrained", o->pretrained, "Pretraining checkpoint (required for --stage instruct)");
  sub->add_option("--vocab", o->vocab, "Existing vocabulary (required for --stage instruct)");
  commands.push_back({sub, [=](RunContext& ctx) {
                        require_file(o->manifest, "manifest");
                        const json cfg = ctx.load_config();
                        PipelineConfig pc = cfg.empty() ? PipelineConfig{} : PipelineConfig::from_json(cfg.dump());
                        pc.seed = ctx.seed;
                        const Manifest m = Manifest::load(o->manifest);
                        const VQModel vq = load_vq(o->vq);
                        std::vector<TokenizedScene> scenes;
                        std::uint64_t k = 0;
                        for (const ManifestEntry* e : m.split(Split::Train)) {
                          const SceneFile scene = read_scene(m.absolute_path(*e));
                          // Random reference person: the shuffling augmentation.
                          scenes.push_back(tokenize_scene(scene, vq, m.bins, ReferenceChoice::random(ctx.seed + k++),
                                                          skeleton_by_id(scene.skeleton_id)));
                        }
                        const Vocabulary vocab = o->vocab.empty() ? lm_vocabulary(scenes, vq.codebook().size(), m.bins.bins)
                                                                  : load_vocab(o->vocab);
                        pc.model.vocab_size = vocab.size();
                        ctx.config = json::parse(pc.to_json());
                        ctx.config["stage"] = o->stage;
                        const std::string vocab_path = ctx.output_path("vocab.json");
                        vocab.save(vocab_path);
                        ctx.record(vocab_path);
                        auto progress = [](const std::string& stage, long long step, double loss) {
                          if (step % 50 == 0) {
                            std::cerr << stage << " step " << step << " loss " << loss << std::endl;
                          }
                        };
                        json summary = {{"vocab", vocab_path}, {"vocab_size", vocab.size()}, {"train_scenes", scenes.size()}};
                        std::optional<LMCheckpoint> pre;
                        if (o->stage != "instruct") {
                          StageResult r = run_pretraining(scenes, vocab, pc, progress);
                          const std::string path = ctx.output_path("lm_pretrain.ckpt");
                          r.checkpoint.save(path);
                          ctx.record(path);
                          summary["pretrain_checkpoint"] = path;
                          summary["pretrain_steps"] = r.report.steps;
                          summary["pretrain_final_loss"] = r.report.losses.empty() ? 0.0 : r.report.losses.back();
                          pre = std::move(r.checkpoint);
                        } else {
                          if (o->pretrained.empty() || o->vocab.empty()) {
                            fail(ErrorCode::InvalidArgument, "--stage instruct needs --pretrained and --vocab");
                          }
                          require_file(o->pretrained, "pretraining checkpoint");
                          pre = LMCheckpoint::load(o->pretrained);
                        }
                        if (o->stage != "pretrain") {
                          StageResult r = run_instruction_tuning(*pre, scenes, vocab, pc, TemplateRegistry::builtin(), progress);
                          const std::string path = ctx.output_path("lm.ckpt");
                          r.checkpoint.save(path);
                          ctx.record(path);
                          summary["checkpoint"] = path;
                          summary["instruct_steps"] = r.report.steps;
                          summary["instruct_final_loss"] = r.report.losses.empty() ? 0.0 : r.report.losses.back();
                          const std::size_t probe = std::min<std::size_t>(scenes.size(), 16);
                          const LengthConditioningReport lr = length_conditioning_report(
                              r.checkpoint.model, vocab, std::span(scenes).first(probe), TemplateRegistry::builtin(),
                              8, ctx.seed);
                          summary["length_prompts"] = lr.prompts;
                          summary["length_accuracy"] = lr.accuracy();
                          summary["length_mae_frames"] = lr.mean_abs_error;
                        }
                        for (const std::string& out : ctx.outputs) {
                          ctx.write_sidecar(out);
                        }
                        emit(ctx, summary);
                      }});
}

void generate_command(CLI::App& app, std::vector<Command>& commands) {
  struct Options {
    std::string lm, vocab, prompt, vq, manifest;
    int max_new = 256;
    bool sample = false;
    int top_k = 20;
    double temperature = 1.0;
  };
  auto o = std::make_shared<Options>();
  CLI::App* sub = app.add_subcommand("generate", "Run the language model on an instruction prompt");
  sub->add_option("--lm", o->lm, "Language model checkpoint")->required();
  sub->add_option("--vocab", o->vocab, "Vocabulary")->required();
  sub->add_option("--prompt", o->prompt, "Instruction text; motion may be given in surface form")->required();
  sub->add_option("--vq", o->vq, "VQ checkpoint, to decode generated motion");
  sub->add_option("--manifest", o->manifest, "Manifest with relative-pose bins, to decode generated motion");
  auto* max_new = sub->add_option("--max-new", o->max_new, "Maximum generated tokens")->capture_default_str();
  auto* sample = sub->add_flag("--sample", o->sample, "Top-k sampling instead of greedy decoding");
  auto* top_k = sub->add_option("--top-k", o->top_k, "Top-k cutoff when sampling")->capture_default_str();
  auto* temperature = sub->add_option("--temperature", o->temperature, "Sampling temperature")->capture_default_str();
  commands.push_back({sub, [=](RunContext& ctx) {
                        const json cfg = ctx.load_config();
                        apply_config(cfg, "max_new", max_new, o->max_new);
                        apply_config(cfg, "sample", sample, o->sample);
                        apply_config(cfg, "top_k", top_k, o->top_k);
                        apply_config(cfg, "temperature", temperature, o->temperature);
                        require_file(o->lm, "LM checkpoint");
                        const Vocabulary vocab = load_vocab(o->vocab);
                        const LMCheckpoint ck = LMCheckpoint::load(o->lm);
                        ctx.config = {{"lm", o->lm}, {"vocab", o->vocab}, {"prompt", o->prompt},
                                      {"max_new", o->max_new}, {"sample", o->sample}, {"top_k", o->top_k},
                                      {"temperature", o->temperature}, {"vq", o->vq}, {"manifest", o->manifest}};
                        SamplingOptions so;
                        so.greedy = !o->sample;
                        so.top_k = o->top_k;
                        so.temperature = o->temperature;
                        so.seed = ctx.seed;
                        const std::vector<int> prompt = vocab.encode_text(o->prompt);
                        const int stops[] = {Vocabulary::eos_id()};
                        const GenerationResult g = generate(ck.model, prompt, so, o->max_new, stops);
                        std::vector<int> ids = g.ids;
                        if (!ids.empty() && ids.back() == Vocabulary::eos_id()) {
                          ids.pop_back();
                        }
                        const std::string surface = vocab.to_surface(ids);
                        const std::string text_path = ctx.output_path("generated.tokens.txt");
                        write_text(text_path, surface + "\n");
                        ctx.record(text_path);
                        json summary = {{"surface", surface}, {"tokens", text_path}, {"truncated", g.truncated}};
                        const auto block = find_motion_block(ids, vocab);
                        if (block) {
                          const ParseResult parsed = parse_social(*block, vocab);
                          summary["grammatical"] = parsed.ok();
                          if (!parsed.ok()) {
                            summary["grammar_error"] = parsed.error->message;
                          } else if (!o->vq.empty() && !o->manifest.empty()) {
                            const VQModel vq = load_vq(o->vq);
                            const Manifest m = manifest_for_bins(o->manifest);
                            SceneFile scene;
                            scene.motion = detokenize_scene(*parsed.value, vq, m.bins);
                            scene.captions.push_back(o->prompt);
                            const std::string scene_path = ctx.output_path("generated.xhsc");
                            write_scene(scene_path, scene);
                            ctx.record(scene_path);
                            summary["scene"] = scene_path;
                          }
                        }
                        for (const std::string& out : ctx.outputs) {
                          ctx.write_sidecar(out);
                        }
                        emit(ctx, summary);
                      }});
}

} // namespace

void add_model_commands(CLI::App& app, std::vector<Command>& commands) {
  tokenize_command(app, commands);
  detokenize_command(app, commands);
  train_vq_command(app, commands);
  train_lm_command(app, commands);
  generate_command(app, commands);
}

} // namespace socialmotion::cli

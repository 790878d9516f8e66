#include <cstdio>
#include <filesystem>
#include <memory>

#include "commands.h"
#include "socialmotion/container.h"
#include "socialmotion/error.h"
#include "socialmotion/manifest.h"
#include "socialmotion/scene_file.h"
#include "socialmotion/scene_tokens.h"
#include "socialmotion/synth.h"
#include "socialmotion/transformer.h"
#include "socialmotion/vq.h"

namespace socialmotion::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ReferenceChoice parse_reference(const std::string& text, std::uint64_t seed) {
  if (text == "random") {
    return ReferenceChoice::random(seed);
  }
  try {
    std::size_t used = 0;
    const int index = std::stoi(text, &used);
    if (used == text.size() && index >= 0) {
      return ReferenceChoice::fixed(index);
    }
  } catch (const std::exception&) {
  }
  fail(ErrorCode::InvalidArgument, "--reference must be a person index or 'random', got '" + text + "'");
}

void synth_data(CLI::App& app, std::vector<Command>& commands) {
  struct Options {
    int scenes = 100;
    double min_duration = 4.0;
    double max_duration = 8.0;
    double fps = 20.0;
  };
  auto o = std::make_shared<Options>();
  CLI::App* sub = app.add_subcommand("synth-data", "Write a seeded synthetic multi-person corpus of scene files");
  auto* scenes = sub->add_option("--scenes", o->scenes, "Number of scenes")->capture_default_str();
  auto* min_d = sub->add_option("--min-duration", o->min_duration, "Shortest scene in seconds")->capture_default_str();
  auto* max_d = sub->add_option("--max-duration", o->max_duration, "Longest scene in seconds")->capture_default_str();
  auto* fps = sub->add_option("--fps", o->fps, "Frame rate")->capture_default_str();
  commands.push_back({sub, [=](RunContext& ctx) {
                        const json cfg = ctx.load_config();
                        apply_config(cfg, "scenes", scenes, o->scenes);
                        apply_config(cfg, "min_duration", min_d, o->min_duration);
                        apply_config(cfg, "max_duration", max_d, o->max_duration);
                        apply_config(cfg, "fps", fps, o->fps);
                        SynthCorpusSpec spec;
                        spec.scenes = o->scenes;
                        spec.min_duration_s = o->min_duration;
                        spec.max_duration_s = o->max_duration;
                        spec.fps = o->fps;
                        spec.seed = ctx.seed;
                        ctx.config = {{"scenes", o->scenes},
                                      {"min_duration", o->min_duration},
                                      {"max_duration", o->max_duration},
                                      {"fps", o->fps}};
                        const std::string dir = ctx.output_dir(default_data_root());
                        const auto corpus = synth_corpus(spec);
                        long long frames = 0;
                        std::vector<std::string> written;
                        for (std::size_t i = 0; i < corpus.size(); ++i) {
                          char name[32];
                          std::snprintf(name, sizeof name, "scene_%04zu.xhsc", i);
                          const std::string path = (fs::path(dir) / name).string();
                          write_scene(path, corpus[i]);
                          frames += corpus[i].motion.frames();
                          written.push_back(path);
                          ctx.record(path);
                        }
                        for (const std::string& path : written) {
                          ctx.write_sidecar(path);
                        }
                        emit(ctx, {{"scenes", corpus.size()}, {"frames", frames}, {"directory", dir}, {"seed", ctx.seed}});
                      }});
}

void build_manifest_command(CLI::App& app, std::vector<Command>& commands) {
  struct Options {
    std::string root;
    std::vector<double> ratios{0.8, 0.1, 0.1};
    int bins = 512;
  };
  auto o = std::make_shared<Options>();
  CLI::App* sub = app.add_subcommand("build-manifest", "Split a scene directory and fit relative-pose bins and feature statistics on the train split");
  sub->add_option("--root", o->root, "Scene directory (default: data root)");
  auto* ratios = sub->add_option("--ratios", o->ratios, "train,val,test fractions")->delimiter(',')->expected(3)->capture_default_str();
  auto* bins = sub->add_option("--bins", o->bins, "Bins per relative-pose component")->capture_default_str();
  commands.push_back({sub, [=](RunContext& ctx) {
                        const json cfg = ctx.load_config();
                        apply_config(cfg, "ratios", ratios, o->ratios);
                        apply_config(cfg, "bins", bins, o->bins);
                        const std::string root = o->root.empty() ? default_data_root() : o->root;
                        ctx.config = {{"root", root}, {"ratios", o->ratios}, {"bins", o->bins}};
                        const SplitRatios r{o->ratios[0], o->ratios[1], o->ratios[2]};
                        Manifest m = build_manifest(fs::absolute(root).lexically_normal().string(), r, ctx.seed, o->bins);
                        const std::string path = ctx.output_path("manifest.json", root);
                        m.save(path);
                        ctx.record(path);
                        ctx.write_sidecar(path);
                        emit(ctx, {{"manifest", path},
                                   {"train", m.split(Split::Train).size()},
                                   {"val", m.split(Split::Val).size()},
                                   {"test", m.split(Split::Test).size()},
                                   {"x_range", {m.bins.x.min, m.bins.x.max}},
                                   {"z_range", {m.bins.z.min, m.bins.z.max}}});
                      }});
}

void encode_command(CLI::App& app, std::vector<Command>& commands) {
  struct Options {
    std::string input;
    std::string reference = "0";
  };
  auto o = std::make_shared<Options>();
  CLI::App* sub = app.add_subcommand("encode", "Scene file to XH3D social features (.xhft)");
  sub->add_option("--input", o->input, "Scene file")->required();
  sub->add_option("--reference", o->reference, "Reference person index or 'random'")->capture_default_str();
  commands.push_back({sub, [=](RunContext& ctx) {
                        require_file(o->input, "scene file");
                        ctx.config = {{"input", o->input}, {"reference", o->reference}};
                        const SceneFile scene = read_scene(o->input);
                        const SocialFeatures f = encode_social(scene.motion, skeleton_by_id(scene.skeleton_id),
                                                               parse_reference(o->reference, ctx.seed));
                        const std::string path = ctx.output_path(file_stem(o->input) + ".xhft");
                        write_social_features(path, f);
                        ctx.record(path);
                        ctx.write_sidecar(path);
                        emit(ctx, {{"features", path},
                                   {"persons", f.persons.size()},
                                   {"frames", f.persons.front().frames()},
                                   {"width", f.persons.front().data.cols()},
                                   {"order", f.order}});
                      }});
}

void decode_command(CLI::App& app, std::vector<Command>& commands) {
  struct Options {
    std::string input;
    std::string skeleton = "smpl22";
  };
  auto o = std::make_shared<Options>();
  CLI::App* sub = app.add_subcommand("decode", "XH3D social features (.xhft) back to a scene file in the reference frame");
  sub->add_option("--input", o->input, "Feature file")->required();
  sub->add_option("--skeleton", o->skeleton, "Skeleton id")->capture_default_str();
  commands.push_back({sub, [=](RunContext& ctx) {
                        require_file(o->input, "feature file");
                        ctx.config = {{"input", o->input}, {"skeleton", o->skeleton}};
                        const SocialFeatures f = read_social_features(o->input);
                        SceneFile scene;
                        scene.skeleton_id = o->skeleton;
                        scene.motion = decode_social(f, skeleton_by_id(o->skeleton));
                        const std::string path = ctx.output_path(file_stem(o->input) + ".decoded.xhsc");
                        write_scene(path, scene);
                        ctx.record(path);
                        ctx.write_sidecar(path);
                        emit(ctx, {{"scene", path}, {"persons", scene.motion.persons.size()}, {"frames", scene.motion.frames()}});
                      }});
}

json inspect_file(const std::string& path) {
  const std::string head = read_text(path).substr(0, 4);
  json j;
  j["path"] = path;
  if (head == "XHSC") {
    const SceneFile s = read_scene(path);
    j["kind"] = "scene";
    j["skeleton"] = s.skeleton_id;
    j["persons"] = s.motion.persons.size();
    j["frames"] = s.motion.frames();
    j["fps"] = s.motion.fps;
    j["captions"] = s.captions;
  } else if (head == "XHFT") {
    const SocialFeatures f = read_social_features(path);
    j["kind"] = "features";
    j["persons"] = f.persons.size();
    j["frames"] = f.persons.front().frames();
    j["width"] = f.persons.front().data.cols();
    j["order"] = f.order;
  } else if (head == "XHVQ") {
    const VQModel m = VQModel::load(path);
    j["kind"] = "vq-checkpoint";
    j["config"] = json::parse(m.config().to_json());
  } else if (head == "XHLM") {
    std::string meta;
    const Seq2SeqTransformer m = Seq2SeqTransformer::from_container(read_container(path, "XHLM", 1), &meta);
    j["kind"] = "lm-checkpoint";
    j["config"] = json::parse(m.config().to_json());
    j["parameters"] = m.parameter_count();
    j["meta"] = json::parse(meta);
  } else if (!head.empty() && head[0] == '{') {
    const json doc = json::parse(read_text(path));
    const std::string format = doc.value("format", std::string());
    if (format == "socialmotion-manifest") {
      const Manifest m = Manifest::from_json(read_text(path));
      j["kind"] = "manifest";
      j["root"] = m.root;
      j["entries"] = m.entries.size();
      j["train"] = m.split(Split::Train).size();
      j["val"] = m.split(Split::Val).size();
      j["test"] = m.split(Split::Test).size();
      j["bins"] = m.bins.bins;
    } else if (format == "socialmotion-vocabulary") {
      j["kind"] = "vocabulary";
      j["size"] = doc.at("tokens").size();
    } else if (doc.contains("persons") && doc.contains("relposes")) {
      j["kind"] = "tokens";
      j["persons"] = doc.at("persons").size();
      j["frames"] = doc.at("frames");
    } else {
      j["kind"] = "json";
    }
  } else {
    fail(ErrorCode::Format, "'" + path + "' is not a recognized file");
  }
  return j;
}

void inspect_command(CLI::App& app, std::vector<Command>& commands) {
  auto input = std::make_shared<std::string>();
  CLI::App* sub = app.add_subcommand("inspect", "Summarize a scene, feature, checkpoint, manifest, vocabulary or tokens file");
  sub->add_option("--input", *input, "File to inspect")->required();
  commands.push_back({sub, [=](RunContext& ctx) {
                        require_file(*input, "input");
                        emit(ctx, inspect_file(*input));
                      }});
}

} // namespace

void add_data_commands(CLI::App& app, std::vector<Command>& commands) {
  synth_data(app, commands);
  build_manifest_command(app, commands);
  encode_command(app, commands);
  decode_command(app, commands);
  inspect_command(app, commands);
}

} // namespace socialmotion::cli

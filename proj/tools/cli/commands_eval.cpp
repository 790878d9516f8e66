#include <algorithm>
#include <iostream>
#include <memory>
#include <sstream>

#include "commands.h"
#include "socialmotion/embedder.h"
#include "socialmotion/error.h"
#include "socialmotion/metrics.h"
#include "socialmotion/scene_file.h"
#include "socialmotion/xh3d.h"

namespace socialmotion::cli {

using nlohmann::json;

namespace {

struct LoadedScene {
  SceneFile file;
  SocialFeatures features;
  std::vector<JointPositions> positions; // reference frame
};

std::vector<LoadedScene> load_all(const std::vector<std::string>& inputs) {
  std::vector<LoadedScene> out;
  for (const std::string& path : expand_scene_paths(inputs)) {
    LoadedScene s;
    s.file = read_scene(path);
    s.features = encode_social(s.file.motion, skeleton_by_id(s.file.skeleton_id));
    s.positions = decode_social_positions(s.features);
    out.push_back(std::move(s));
  }
  if (out.empty()) {
    fail(ErrorCode::InvalidArgument, "no scene files found");
  }
  return out;
}

JointPositions first_frames(const JointPositions& p, int frames) {
  JointPositions out(frames, p.joints);
  std::copy_n(p.data.begin(), static_cast<std::size_t>(frames) * p.joints, out.data.begin());
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

void evaluate_command(CLI::App& app, std::vector<Command>& commands) {
  struct Options {
    std::vector<std::string> real, generated;
    std::string metrics = "fid,mpjpe,pa_mpjpe,accel";
    int pairs = 300;
    int batch = 32;
  };
  auto o = std::make_shared<Options>();
  CLI::App* sub = app.add_subcommand("evaluate", "Compare generated scenes against real scenes");
  sub->add_option("--real", o->real, "Real scene files or directories")->required();
  sub->add_option("--generated", o->generated, "Generated scene files or directories")->required();
  auto* metrics = sub->add_option("--metrics", o->metrics,
                                  "Comma list of fid, mpjpe, pa_mpjpe, accel, diversity, rprecision")
                      ->capture_default_str();
  auto* pairs = sub->add_option("--pairs", o->pairs, "Diversity pairs")->capture_default_str();
  auto* batch = sub->add_option("--batch", o->batch, "R-Precision batch size")->capture_default_str();
  commands.push_back({sub, [=](RunContext& ctx) {
                        const json cfg = ctx.load_config();
                        apply_config(cfg, "metrics", metrics, o->metrics);
                        apply_config(cfg, "pairs", pairs, o->pairs);
                        apply_config(cfg, "batch", batch, o->batch);
                        const std::vector<std::string> wanted = split_list(o->metrics);
                        static const std::vector<std::string> known = {"fid", "mpjpe", "pa_mpjpe", "accel",
                                                                       "diversity", "rprecision"};
                        for (const std::string& m : wanted) {
                          if (std::find(known.begin(), known.end(), m) == known.end()) {
                            fail(ErrorCode::InvalidArgument, "unknown metric '" + m + "'");
                          }
                        }
                        auto want = [&](const char* m) { return std::find(wanted.begin(), wanted.end(), m) != wanted.end(); };
                        ctx.config = {{"real", o->real}, {"generated", o->generated}, {"metrics", wanted},
                                      {"pairs", o->pairs}, {"batch", o->batch}};
                        const auto real = load_all(o->real);
                        const auto gen = load_all(o->generated);

                        MetricsReport report;
                        report.seed = ctx.seed;
                        report.samples = static_cast<long long>(gen.size());
                        if (want("mpjpe") || want("pa_mpjpe") || want("accel")) {
                          if (real.size() != gen.size()) {
                            fail(ErrorCode::ShapeMismatch, "paired metrics need as many generated as real scenes");
                          }
                          std::vector<JointPositions> pred, gt;
                          for (std::size_t i = 0; i < real.size(); ++i) {
                            if (real[i].positions.size() != gen[i].positions.size()) {
                              fail(ErrorCode::ShapeMismatch, "scene " + std::to_string(i) + ": person counts differ");
                            }
                            for (std::size_t k = 0; k < real[i].positions.size(); ++k) {
                              const int frames = std::min(real[i].positions[k].frames, gen[i].positions[k].frames);
                              gt.push_back(first_frames(real[i].positions[k], frames));
                              pred.push_back(first_frames(gen[i].positions[k], frames));
                            }
                          }
                          if (want("mpjpe")) report.mpjpe_mm = mpjpe_mm(pred, gt);
                          if (want("pa_mpjpe")) report.pa_mpjpe_mm = pa_mpjpe_mm(pred, gt);
                          if (want("accel")) report.accel_mm = accel_error_mm(pred, gt);
                        }
                        const Embedder embedder;
                        std::vector<SocialFeatures> rf, gf;
                        for (const auto& s : real) rf.push_back(s.features);
                        for (const auto& s : gen) gf.push_back(s.features);
                        const Eigen::MatrixXd gen_emb = embedder.embed_motions(gf);
                        if (want("fid")) {
                          report.fid = fid(embedder.embed_motions(rf), gen_emb);
                        }
                        if (want("diversity")) {
                          report.n_pairs = std::min<int>(o->pairs, static_cast<int>(gen.size() / 2));
                          report.diversity = diversity(gen_emb, report.n_pairs, ctx.seed);
                        }
                        if (want("rprecision")) {
                          std::vector<std::string> captions;
                          for (std::size_t i = 0; i < gen.size(); ++i) {
                            const auto& own = gen[i].file.captions;
                            const auto& paired = i < real.size() ? real[i].file.captions : own;
                            captions.push_back(!own.empty() ? own.front() : (!paired.empty() ? paired.front() : ""));
                          }
                          report.r_precision = r_precision(gen_emb, embedder.embed_texts(captions), o->batch, ctx.seed);
                        }
                        if (!ctx.out_dir.empty()) {
                          const std::string path = ctx.output_path("metrics.json");
                          write_text(path, report.to_json() + "\n");
                          ctx.record(path);
                          ctx.write_sidecar(path);
                        }
                        if (ctx.json) {
                          std::cout << report.to_json() << "\n";
                        } else {
                          std::cout << report.to_table();
                        }
                      }});
}

} // namespace

void add_eval_commands(CLI::App& app, std::vector<Command>& commands) {
  evaluate_command(app, commands);
}

} // namespace socialmotion::cli

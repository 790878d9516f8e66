// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. `--only 3,5` restricts the run.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "socialmotion/augment.h"
#include "socialmotion/error.h"
#include "socialmotion/grammar.h"
#include "socialmotion/kinematics.h"
#include "socialmotion/metrics.h"
#include "socialmotion/relpose_bins.h"
#include "socialmotion/tasks.h"
#include "socialmotion/transformer.h"
#include "socialmotion/lm_pipeline.h"
#include "socialmotion/vocabulary.h"
#include "socialmotion/vq.h"
#include "socialmotion/xh3d.h"
#include "test_support.h"

using namespace socialmotion;
using namespace socialmotion::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s; // 0 = no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const SkeletonDef& skel() {
  return default_skeleton();
}

// 1. Codec round trip.
Outcome codec_round_trip() {
  Rng rng(101);
  double worst_joint = 0.0;
  double worst_dist = 0.0;
  for (int s = 0; s < 100; ++s) {
    const int persons = 1 + s % 5;
    const SceneFile scene = random_synth_scene(rng, persons, 400);
    const SocialFeatures f = encode_social(scene.motion, skel(), ReferenceChoice::random(rng.next_u64()));
    const SocialMotion decoded = decode_social(f, skel());
    const PlanarTransform to_ref =
        canonicalize_person(scene.motion.persons[f.order[0]], skel()).removed.inverse();
    std::vector<JointPositions> orig;
    std::vector<JointPositions> dec;
    for (std::size_t k = 0; k < f.order.size(); ++k) {
      orig.push_back(transform_positions(forward_kinematics(scene.motion.persons[f.order[k]], skel()), to_ref));
      dec.push_back(forward_kinematics(decoded.persons[k], skel()));
      for (std::size_t q = 0; q < orig.back().data.size(); ++q) {
        worst_joint = std::max(worst_joint, (orig.back().data[q] - dec.back().data[q]).norm());
      }
    }
    for (std::size_t a = 0; a < orig.size(); ++a) {
      for (std::size_t b = a + 1; b < orig.size(); ++b) {
        for (int j = 0; j < orig[a].joints; ++j) {
          const double d0 = (orig[a].at(0, j) - orig[b].at(0, j)).norm();
          const double d1 = (dec[a].at(0, j) - dec[b].at(0, j)).norm();
          worst_dist = std::max(worst_dist, std::abs(d0 - d1));
        }
      }
    }
  }
  return {worst_joint < 1e-4 && worst_dist < 1e-6,
          "max joint error " + fmt("%.3g", worst_joint) + " m, max pairwise distance change " +
              fmt("%.3g", worst_dist) + " m"};
}

Vocabulary small_vocab(int codes, int bins) {
  VocabConfig vc;
  vc.motion_codes = codes;
  vc.rel_bins = bins;
  vc.sentinels = 20;
  std::vector<std::string> corpus = {"two people walk in a circle", "one person waves", "they meet and greet"};
  return Vocabulary::build(corpus, vc);
}

// Mutations that always break the grammar.
std::vector<int> mutate(const std::vector<int>& seq, const SocialTokens& t, const Vocabulary& v, Rng& rng) {
  std::vector<int> out = seq;
  const int kind = static_cast<int>(rng.index(t.persons.size() > 1 ? 8 : 5));
  const std::size_t inner = 1 + rng.index(out.size() - 2); // strictly inside the block
  switch (kind) {
    case 0:
      out.erase(out.begin());
      break;
    case 1:
      out.pop_back();
      break;
    case 2:
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(inner), *v.lookup("walk"));
      break;
    case 3:
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(inner), v.motion_start_id());
      break;
    case 4:
      out.push_back(v.motion_id(0));
      break;
    default: {
      // Damage the first triplet after person 0's run.
      const std::size_t trip = 1 + t.persons[0].size();
      if (kind == 5) {
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(trip + rng.index(3)));
      } else if (kind == 6) {
        std::swap(out[trip], out[trip + 1 + rng.index(2)]);
      } else {
        // empty run: drop every code of person 1
        const std::size_t begin = trip + 3;
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(begin),
                  out.begin() + static_cast<std::ptrdiff_t>(begin + t.persons[1].size()));
      }
      break;
    }
  }
  return out;
}

// 2. Grammar soundness.
Outcome grammar_soundness() {
  const Vocabulary v = small_vocab(64, 64);
  Rng rng(202);
  int round_trips = 0;
  for (int i = 0; i < 10000; ++i) {
    const SocialTokens t = random_social_tokens(rng, 5, 12, 64, 64);
    const ParseResult r = parse_social(serialize_social(t, v), v);
    round_trips += r.ok() && *r.value == t ? 1 : 0;
  }
  int rejected = 0;
  for (int i = 0; i < 1000; ++i) {
    const SocialTokens t = random_social_tokens(rng, 5, 12, 64, 64);
    const std::vector<int> seq = serialize_social(t, v);
    const std::vector<int> bad = mutate(seq, t, v, rng);
    const ParseResult r = parse_social(bad, v);
    rejected += !r.ok() && r.error && r.error->position <= bad.size() ? 1 : 0;
  }
  return {round_trips == 10000 && rejected == 1000,
          std::to_string(round_trips) + "/10000 round trips, " + std::to_string(rejected) +
              "/1000 mutations rejected with a position"};
}

// 3. Quantization bounds.
Outcome quantization_bounds() {
  Rng rng(303);
  std::vector<RelPose> poses(2000);
  for (RelPose& p : poses) {
    p = {rng.uniform(-4.0, 4.0), rng.uniform(-3.0, 5.0), rng.uniform(-std::numbers::pi, std::numbers::pi)};
  }
  const BinSpec spec = BinSpec::fit(poses, 512);
  int within = 0;
  for (int i = 0; i < 10000; ++i) {
    const RelPose p{rng.uniform(spec.x.min, spec.x.max), rng.uniform(spec.z.min, spec.z.max),
                    rng.uniform(-std::numbers::pi, std::numbers::pi)};
    const RelPose q = spec.decode(spec.encode(p));
    const double dth = std::abs(wrap_angle(q.theta - p.theta));
    const bool ok = std::abs(q.x - p.x) <= 0.5 * spec.width(RelComponent::X) + 1e-12 &&
                    std::abs(q.z - p.z) <= 0.5 * spec.width(RelComponent::Z) + 1e-12 &&
                    dth <= 0.5 * spec.width(RelComponent::Theta) + 1e-12;
    within += ok ? 1 : 0;
  }
  int matches = 0;
  for (int b = 0; b < 1000; ++b) {
    const int k = 1 + static_cast<int>(rng.index(64));
    const int d = 1 + static_cast<int>(rng.index(16));
    const int n = 1 + static_cast<int>(rng.index(32));
    Eigen::MatrixXd emb(k, d);
    Eigen::MatrixXd z(n, d);
    for (Eigen::Index i = 0; i < emb.size(); ++i) {
      emb.data()[i] = rng.normal();
    }
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z.data()[i] = rng.normal();
    }
    if (b % 10 == 0) {
      z.row(0) = emb.row(k - 1); // exact hit
    }
    const Quantization q = quantize_latents(z, Codebook::from_embeddings(emb));
    bool same = true;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (z.row(i) - emb.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double dist = (z.row(i) - emb.row(c)).squaredNorm();
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      same = same && q.indices[i] == best && q.vectors.row(i) == emb.row(best);
    }
    matches += same ? 1 : 0;
  }
  return {within == 10000 && matches == 1000,
          std::to_string(within) + "/10000 within half a bin, " + std::to_string(matches) +
              "/1000 batches equal to brute force"};
}

// 4. Gradient correctness.
Outcome gradient_correctness() {
  std::ostringstream detail;
  double vq_worst = 0.0;
  {
    VQConfig c;
    c.hidden_channels = 6;
    c.latent_dim = 4;
    c.codebook_size = 8;
    c.seed = 4;
    VQModel model(c);
    Rng rng(404);
    std::vector<Eigen::MatrixXd> windows;
    for (int w = 0; w < 2; ++w) {
      Eigen::MatrixXd x(8, c.feature_width);
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.data()[i] = rng.normal();
      }
      windows.push_back(x);
    }
    Eigen::MatrixXd cb(c.codebook_size, c.latent_dim);
    for (Eigen::Index i = 0; i < cb.size(); ++i) {
      cb.data()[i] = rng.normal();
    }
    model.codebook() = Codebook::from_embeddings(cb);
    for (bool bypass : {true, false}) {
      VQGraphOptions o;
      o.bypass_quantizer = bypass;
      o.commitment_weight = c.commitment_weight;
      o.velocity_weight = c.velocity_weight;
      auto loss = [&] {
        ad::Tape tape;
        return build_vq_graph(tape, model, windows, o).report.total;
      };
      auto analytic = [&] {
        ad::Tape tape;
        VQGraph g = build_vq_graph(tape, model, windows, o);
        tape.backward(g.loss);
      };
      std::vector<ad::Parameter*> params = model.parameters();
      if (!bypass) {
        // Straight-through gradients are not derivatives of the quantized
        // loss for the encoder; the decoder sees fixed code vectors.
        std::erase_if(params, [](ad::Parameter* p) { return p->name.rfind("decoder.", 0) != 0; });
      }
      const GradCheckResult r = check_gradients(params, loss, analytic, 12, 1e-6, bypass ? 1 : 2);
      for (ad::Parameter* p : model.parameters()) {
        p->zero_grad();
      }
      vq_worst = std::max(vq_worst, r.worst_relative);
      detail << "VQ " << (bypass ? "bypass" : "quantized") << " " << fmt("%.2e", r.worst_relative) << " ("
             << r.worst_parameter << "), ";
    }
  }
  double lm_worst = 0.0;
  {
    const Vocabulary v = small_vocab(16, 16);
    ModelConfig mc;
    mc.vocab_size = v.size();
    mc.width = 16;
    mc.heads = 2;
    mc.encoder_layers = 1;
    mc.decoder_layers = 1;
    mc.ff_width = 32;
    mc.dropout = 0.0;
    mc.max_length = 32;
    mc.seed = 5;
    Seq2SeqTransformer model(mc);
    Rng rng(405);
    std::vector<TaskPair> batch;
    for (int b = 0; b < 2; ++b) {
      TaskPair p;
      p.task = "t";
      for (int i = 0; i < 6 + b; ++i) {
        p.input.push_back(3 + static_cast<int>(rng.index(static_cast<std::size_t>(v.size() - 3))));
      }
      for (int i = 0; i < 5 - b; ++i) {
        p.target.push_back(3 + static_cast<int>(rng.index(static_cast<std::size_t>(v.size() - 3))));
      }
      batch.push_back(p);
    }
    auto loss = [&] { return lm_loss(model, batch, Vocabulary::pad_id(), false, nullptr).mean; };
    auto analytic = [&] { lm_loss(model, batch, Vocabulary::pad_id(), true, nullptr); };
    const auto params = model.parameters();
    const GradCheckResult r = check_gradients(params, loss, analytic, 12, 1e-5, 3);
    lm_worst = r.worst_relative;
    detail << "LM " << fmt("%.2e", r.worst_relative) << " (" << r.worst_parameter << ")";
  }
  return {vq_worst <= 1e-4 && lm_worst <= 1e-3, detail.str()};
}

VQConfig desk_vq_config(int width, int codebook) {
  VQConfig c;
  c.feature_width = width;
  c.hidden_channels = 48;
  c.latent_dim = 64;
  c.codebook_size = codebook;
  c.batch_size = 16;
  c.window = 64;
  c.iterations = 2000;
  c.learning_rate = 2e-4;
  c.seed = 17;
  return c;
}

std::vector<Eigen::MatrixXd> reconstruct_all(std::span<const Eigen::MatrixXd> windows, const VQModel& model) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    out.push_back(vq_decode_matrix(vq_encode_matrix(w, model), model, static_cast<int>(w.rows())));
  }
  return out;
}

double normalized_mse(std::span<const Eigen::MatrixXd> windows, const VQModel& model) {
  const auto rec = reconstruct_all(windows, model);
  double sum = 0.0;
  double n = 0.0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    sum += (model.normalize(rec[i]) - model.normalize(windows[i])).squaredNorm();
    n += static_cast<double>(windows[i].size());
  }
  return sum / n;
}

// 5. VQ training.
Outcome vq_training() {
  const WindowSet data = synth_windows(500, 64, 505);
  std::ostringstream detail;
  double mse[3] = {0, 0, 0};
  bool curve_ok = false;
  bool util_ok = false;
  const int sizes[3] = {32, 64, 128};
  for (int s = 0; s < 3; ++s) {
    const VQTrainResult r = train_vq(data.xh3d, desk_vq_config(static_cast<int>(data.xh3d[0].cols()), sizes[s]));
    mse[s] = normalized_mse(data.xh3d, r.model);
    if (sizes[s] == 128) {
      const double first = r.curve[10].reconstruction;
      const double last = r.curve.back().reconstruction;
      curve_ok = last <= 0.5 * first;
      util_ok = r.utilization >= 0.30;
      detail << "K=128 recon " << fmt("%.4f", first) << " -> " << fmt("%.4f", last) << ", utilization "
             << fmt("%.2f", r.utilization) << "; ";
    }
  }
  detail << "eval MSE K=32/64/128: " << fmt("%.4f", mse[0]) << "/" << fmt("%.4f", mse[1]) << "/"
         << fmt("%.4f", mse[2]);
  const bool monotone = mse[1] <= mse[0] && mse[2] <= mse[1];
  return {curve_ok && util_ok && monotone, detail.str()};
}

// 6. XH3D vs global positions.
Outcome representation_accel() {
  const WindowSet data = synth_windows(500, 64, 606);
  const VQTrainResult xh = train_vq(data.xh3d, desk_vq_config(static_cast<int>(data.xh3d[0].cols()), 128));
  const VQTrainResult gl = train_vq(data.global, desk_vq_config(static_cast<int>(data.global[0].cols()), 128));
  const auto xh_rec = reconstruct_all(data.xh3d, xh.model);
  const auto gl_rec = reconstruct_all(data.global, gl.model);
  std::vector<JointPositions> xh_pred, xh_gt, gl_pred, gl_gt;
  for (std::size_t i = 0; i < data.xh3d.size(); ++i) {
    xh_pred.push_back(decode_person_positions({data.joints, data.fps, xh_rec[i]}));
    xh_gt.push_back(decode_person_positions({data.joints, data.fps, data.xh3d[i]}));
    gl_pred.push_back(positions_from_global_features(gl_rec[i]));
    gl_gt.push_back(positions_from_global_features(data.global[i]));
  }
  const double a_xh = accel_error_mm(xh_pred, xh_gt);
  const double a_gl = accel_error_mm(gl_pred, gl_gt);
  return {a_xh < a_gl, "Accel XH3D " + fmt("%.3f", a_xh) + " mm vs global " + fmt("%.3f", a_gl) + " mm"};
}

// 7. LM mechanism.
Outcome lm_mechanism() {
  const auto scenes = random_token_scenes(32, 64, 64, 707);
  std::vector<std::string> corpus;
  for (const auto& s : scenes) {
    corpus.push_back(s.caption);
  }
  for (PretrainTask t : kPretrainTasks) {
    corpus.emplace_back(task_prefix(t));
  }
  VocabConfig vc;
  vc.motion_codes = 64;
  vc.rel_bins = 64;
  vc.sentinels = 10;
  const Vocabulary vocab = Vocabulary::build(corpus, vc);
  const PretrainTask cycle[] = {PretrainTask::TextToMotion, PretrainTask::MotionToText, PretrainTask::Forecast,
                                PretrainTask::Reaction, PretrainTask::Inbetween};
  std::vector<TaskPair> pairs;
  for (int i = 0; i < 32; ++i) {
    PretrainTask t = cycle[i % 5];
    if (t == PretrainTask::Reaction && scenes[i].persons() < 2) {
      t = PretrainTask::TextToMotion;
    }
    pairs.push_back(build_task_pair(t, scenes[i], vocab, static_cast<std::uint64_t>(i)));
  }
  ModelConfig mc;
  mc.vocab_size = vocab.size();
  mc.width = 64;
  mc.ff_width = 256;
  mc.dropout = 0.0;
  mc.max_length = 128;
  mc.seed = 7;
  Seq2SeqTransformer model(mc);

  // Uniform model: zero output projection.
  Seq2SeqTransformer uniform = model;
  uniform.parameter("output.weight").value.setZero();
  uniform.parameter("output.bias").value.setZero();
  const double uniform_loss = lm_loss(uniform, pairs, Vocabulary::pad_id(), false, nullptr).mean;
  const double ln_v = std::log(static_cast<double>(vocab.size()));

  StageConfig stage;
  stage.epochs = 150;
  stage.batch_size = 8;
  stage.learning_rate = 1e-3;
  stage.warmup_steps = 20;
  stage.weight_decay = 0.0;
  train_pairs(model, stage, "memorize", [&](int, EpochMix*) { return pairs; }, 7);

  const int stops[] = {Vocabulary::eos_id(), vocab.motion_end_id()};
  int exact = 0;
  int motion_tasks = 0;
  int grammatical = 0;
  for (const TaskPair& p : pairs) {
    const GenerationResult g =
        generate(model, p.input, SamplingOptions{}, static_cast<int>(p.target.size()) + 16, stops);
    exact += g.ids == p.target ? 1 : 0;
    if (p.task != "m2t") {
      ++motion_tasks;
      grammatical += parse_social(g.ids, vocab).ok() ? 1 : 0;
    }
  }
  const double exact_rate = exact / 32.0;
  const double gram_rate = static_cast<double>(grammatical) / motion_tasks;
  return {exact_rate >= 0.90 && gram_rate >= 0.95 && std::abs(uniform_loss - ln_v) <= 1e-6,
          "exact " + std::to_string(exact) + "/32, grammatical " + std::to_string(grammatical) + "/" +
              std::to_string(motion_tasks) + ", uniform loss - ln|V| = " + fmt("%.2e", uniform_loss - ln_v)};
}

// 8. Span corruption.
Outcome span_corruption() {
  const Vocabulary v = small_vocab(64, 64);
  Rng rng(808);
  int lossless = 0;
  double ratio_sum = 0.0;
  double worst = 0.0;
  for (int run = 0; run < 1000; ++run) {
    const int n = 20 + static_cast<int>(rng.index(200));
    std::vector<int> seq(n);
    for (int& id : seq) {
      do {
        id = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(v.size() - 1)));
      } while (v.is_sentinel(id));
    }
    const TaskPair p = span_corrupt(seq, v, 0.15, 3.0, static_cast<std::uint64_t>(run));
    lossless += splice_back(p.input, p.target, v) == seq ? 1 : 0;
    int corrupted = 0;
    for (int id : p.target) {
      corrupted += v.is_sentinel(id) ? 0 : 1;
    }
    const double ratio = static_cast<double>(corrupted) / n;
    ratio_sum += ratio;
    worst = std::max(worst, std::abs(ratio - 0.15));
  }
  const double mean = ratio_sum / 1000.0;
  return {lossless == 1000 && std::abs(mean - 0.15) <= 0.05,
          std::to_string(lossless) + "/1000 lossless, mean ratio " + fmt("%.4f", mean) + ", worst deviation " +
              fmt("%.4f", worst)};
}

// 9. Metrics certification.
Outcome metrics_certification() {
  Rng rng(909);
  std::ostringstream detail;
  bool ok = true;

  Eigen::MatrixXd x(500, 8);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.data()[i] = rng.normal();
  }
  const double self = fid(x, x);
  ok = ok && std::abs(self) <= 1e-6;
  detail << "FID(X,X) " << fmt("%.1e", self);

  Eigen::MatrixXd a(40000, 1);
  Eigen::MatrixXd b(40000, 1);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    a(i, 0) = rng.normal();
    b(i, 0) = 1.0 + rng.normal();
  }
  const double one = fid(a, b);
  ok = ok && std::abs(one - 1.0) <= 0.05;
  detail << ", 1-D FID " << fmt("%.4f", one);

  bool pa_le = true;
  double pa_sim = 0.0;
  double oracle_gap = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int frames = 1 + static_cast<int>(rng.index(4));
    JointPositions gt(frames, 22);
    JointPositions pred(frames, 22);
    for (auto& p : gt.data) {
      p = Vec3(rng.normal(), rng.normal(), rng.normal());
    }
    for (std::size_t i = 0; i < gt.data.size(); ++i) {
      pred.data[i] = gt.data[i] + 0.3 * Vec3(rng.normal(), rng.normal(), rng.normal());
    }
    pa_le = pa_le && pa_mpjpe_mm(pred, gt) <= mpjpe_mm(pred, gt) + 1e-9;

    const Mat3 r = Eigen::AngleAxisd(rng.uniform(-3.0, 3.0), Vec3(rng.normal(), rng.normal(), rng.normal()).normalized())
                       .toRotationMatrix();
    const double s = rng.uniform(0.5, 2.0);
    const Vec3 t(rng.normal(), rng.normal(), rng.normal());
    JointPositions moved = gt;
    for (auto& p : moved.data) {
      p = s * (r * p) + t;
    }
    pa_sim = std::max(pa_sim, pa_mpjpe_mm(moved, gt));

    if (trial < 50) {
      std::span<const Vec3> src(pred.data.data(), 22);
      std::span<const Vec3> dst(gt.data.data(), 22);
      const Similarity closed = procrustes_align(src, dst);
      const Similarity numeric = numeric_similarity_fit(src, dst, static_cast<std::uint64_t>(trial));
      for (const Vec3& p : src) {
        oracle_gap = std::max(oracle_gap, (closed.apply(p) - numeric.apply(p)).norm());
      }
    }
  }
  ok = ok && pa_le && pa_sim < 1e-6 && oracle_gap <= 1e-6;
  detail << ", PA<=MPJPE " << (pa_le ? "yes" : "no") << ", PA under similarity " << fmt("%.1e", pa_sim)
         << " mm, Procrustes vs oracle " << fmt("%.1e", oracle_gap) << " m";

  const Eigen::Index rows = 32 * 10000;
  Eigen::MatrixXd m(rows, 16);
  Eigen::MatrixXd tx(rows, 16);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = rng.normal();
    tx.data()[i] = rng.normal();
  }
  const RPrecision rp = r_precision(m, tx, 32, 9);
  ok = ok && rp.batches == 10000 && std::abs(rp.top1 - 1.0 / 32.0) <= 0.02;
  detail << ", random R-Precision top-1 " << fmt("%.4f", rp.top1);
  return {ok, detail.str()};
}

// 10. Augmentation invariance.
Outcome augmentation_invariance() {
  Rng rng(1010);
  double worst_rigid = 0.0;
  double worst_excess = -1.0;
  for (int s = 0; s < 40; ++s) {
    const int persons = 2 + s % 4;
    const SceneFile scene = random_synth_scene(rng, persons, 200);
    const ShuffledScene shuffled = shuffle_persons(scene.motion, rng.next_u64());
    const SocialFeatures fa = encode_social(scene.motion, skel(), ReferenceChoice::fixed(0));
    const SocialFeatures fb = encode_social(shuffled.scene, skel(), ReferenceChoice::random(rng.next_u64()));
    const auto pa = decode_social_positions(fa);
    const auto pb = decode_social_positions(fb);
    // Decoded persons keyed by original index.
    std::vector<const JointPositions*> by_a(persons), by_b(persons);
    for (int k = 0; k < persons; ++k) {
      by_a[fa.order[k]] = &pa[k];
      by_b[shuffled.permutation[fb.order[k]]] = &pb[k];
    }
    std::vector<Vec3> src, dst;
    for (int p = 0; p < persons; ++p) {
      src.insert(src.end(), by_a[p]->data.begin(), by_a[p]->data.end());
      dst.insert(dst.end(), by_b[p]->data.begin(), by_b[p]->data.end());
    }
    const PlanarTransform t = fit_planar_rigid(src, dst);
    for (std::size_t i = 0; i < src.size(); ++i) {
      worst_rigid = std::max(worst_rigid, (t.apply(src[i]) - dst[i]).norm());
    }

    // Quantized relative poses keep inter-person distances within the bins.
    std::vector<RelPose> poses = fb.relposes;
    const BinSpec bins = BinSpec::fit(poses, 512);
    SocialFeatures fq = fb;
    for (RelPose& rp : fq.relposes) {
      rp = bins.decode(bins.encode(rp));
    }
    const auto pq = decode_social_positions(fq);
    const double tol = std::hypot(0.5 * bins.width(RelComponent::X), 0.5 * bins.width(RelComponent::Z));
    for (int a = 0; a < persons; ++a) {
      for (int b = a + 1; b < persons; ++b) {
        const double d0 = (pb[a].at(0, 0) - pb[b].at(0, 0)).norm();
        const double d1 = (pq[a].at(0, 0) - pq[b].at(0, 0)).norm();
        const double allowed = (a == 0 ? 1.0 : 2.0) * tol + 1e-9;
        worst_excess = std::max(worst_excess, std::abs(d0 - d1) - allowed);
      }
    }
  }
  return {worst_rigid < 1e-6 && worst_excess <= 0.0,
          "max residual after one planar rigid transform " + fmt("%.2e", worst_rigid) +
              " m, worst distance change minus bin tolerance " + fmt("%.2e", worst_excess) + " m"};
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria runner"};
  std::vector<int> only;
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "codec round trip", 60, codec_round_trip},
      {2, "grammar soundness", 60, grammar_soundness},
      {3, "quantization bounds", 60, quantization_bounds},
      {4, "gradient correctness", 300, gradient_correctness},
      {5, "VQ training", 1800, vq_training},
      {6, "XH3D vs global positions (Accel)", 1800, representation_accel},
      {7, "LM mechanism", 1800, lm_mechanism},
      {8, "span corruption", 0, span_corruption},
      {9, "metrics certification", 300, metrics_certification},
      {10, "augmentation invariance", 0, augmentation_invariance},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_s <= 0 || seconds < c.limit_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s  [%d] %s: %s (%.1f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), seconds,
                in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

#include "socialmotion/vq.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "socialmotion/error.h"
#include "socialmotion/rng.h"

namespace socialmotion {

namespace {

constexpr std::uint32_t kVQVersion = 1;
const char* const kVQMagic = "XHVQ";

Eigen::MatrixXd stack_rows(std::span<const Eigen::MatrixXd> parts) {
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    rows += p.rows();
  }
  Eigen::MatrixXd out(rows, parts.empty() ? 0 : parts.front().cols());
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p;
    at += p.rows();
  }
  return out;
}

Eigen::MatrixXd segment_diffs(const Eigen::MatrixXd& x, int segments) {
  const Eigen::Index len = x.rows() / segments;
  Eigen::MatrixXd out(segments * (len - 1), x.cols());
  for (int s = 0; s < segments; ++s) {
    out.middleRows(s * (len - 1), len - 1) =
        x.middleRows(s * len + 1, len - 1) - x.middleRows(s * len, len - 1);
  }
  return out;
}

Eigen::MatrixXd pad_to_multiple(const Eigen::MatrixXd& raw, int multiple) {
  const Eigen::Index frames = raw.rows();
  const Eigen::Index padded = (frames + multiple - 1) / multiple * multiple;
  if (padded == frames) {
    return raw;
  }
  Eigen::MatrixXd out(padded, raw.cols());
  out.topRows(frames) = raw;
  for (Eigen::Index r = frames; r < padded; ++r) {
    out.row(r) = raw.row(frames - 1);
  }
  return out;
}

bool all_finite(const Eigen::MatrixXd& m) {
  return m.allFinite();
}

} // namespace

void VQConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) {
      fail(ErrorCode::InvalidArgument, "VQConfig: " + what);
    }
  };
  require(feature_width > 0, "feature_width must be positive");
  require(codebook_size >= 2, "codebook_size must be at least 2");
  require(latent_dim > 0, "latent_dim must be positive");
  require(hidden_channels > 0, "hidden_channels must be positive");
  require(downsample == 4, "downsample must be 4");
  require(commitment_weight > 0.0, "commitment_weight must be positive");
  require(velocity_weight >= 0.0, "velocity_weight must be non-negative");
  require(ema_decay >= 0.0 && ema_decay <= 1.0, "ema_decay must lie in [0, 1]");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(batch_size > 0, "batch_size must be positive");
  require(window >= 4 && window % 4 == 0, "window must be a positive multiple of 4");
  require(iterations >= 0, "iterations must be non-negative");
  require(dead_code_steps > 0, "dead_code_steps must be positive");
}

std::string VQConfig::to_json() const {
  nlohmann::json j;
  j["feature_width"] = feature_width;
  j["codebook_size"] = codebook_size;
  j["latent_dim"] = latent_dim;
  j["hidden_channels"] = hidden_channels;
  j["downsample"] = downsample;
  j["commitment_weight"] = commitment_weight;
  j["velocity_weight"] = velocity_weight;
  j["ema_decay"] = ema_decay;
  j["learning_rate"] = learning_rate;
  j["batch_size"] = batch_size;
  j["window"] = window;
  j["iterations"] = iterations;
  j["dead_code_steps"] = dead_code_steps;
  j["seed"] = seed;
  return j.dump(2);
}

VQConfig VQConfig::from_json(const std::string& text) {
  VQConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.feature_width = j.value("feature_width", c.feature_width);
    c.codebook_size = j.value("codebook_size", c.codebook_size);
    c.latent_dim = j.value("latent_dim", c.latent_dim);
    c.hidden_channels = j.value("hidden_channels", c.hidden_channels);
    c.downsample = j.value("downsample", c.downsample);
    c.commitment_weight = j.value("commitment_weight", c.commitment_weight);
    c.velocity_weight = j.value("velocity_weight", c.velocity_weight);
    c.ema_decay = j.value("ema_decay", c.ema_decay);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.window = j.value("window", c.window);
    c.iterations = j.value("iterations", c.iterations);
    c.dead_code_steps = j.value("dead_code_steps", c.dead_code_steps);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("VQConfig: ") + e.what());
  }
  c.validate();
  return c;
}

Codebook Codebook::from_embeddings(Eigen::MatrixXd embeddings) {
  Codebook cb;
  cb.counts = Eigen::VectorXd::Ones(embeddings.rows());
  cb.sums = embeddings;
  cb.embeddings = std::move(embeddings);
  return cb;
}

void Codebook::validate() const {
  if (embeddings.rows() == 0 || embeddings.cols() == 0) {
    fail(ErrorCode::InvalidArgument, "codebook is empty");
  }
  if (counts.size() != embeddings.rows() || sums.rows() != embeddings.rows() ||
      sums.cols() != embeddings.cols()) {
    fail(ErrorCode::ShapeMismatch, "codebook statistics do not match the embedding table");
  }
  if (!embeddings.allFinite() || !counts.allFinite() || !sums.allFinite()) {
    fail(ErrorCode::NonFinite, "codebook contains non-finite values");
  }
}

Quantization quantize_latents(const Eigen::MatrixXd& latents, const Codebook& codebook) {
  if (latents.cols() != codebook.dim()) {
    fail(ErrorCode::ShapeMismatch, "quantize: latent width " + std::to_string(latents.cols()) +
                                       " != codebook dim " + std::to_string(codebook.dim()));
  }
  if (!latents.allFinite()) {
    fail(ErrorCode::NonFinite, "quantize: non-finite latent");
  }
  const Eigen::VectorXd norms = codebook.embeddings.rowwise().squaredNorm();
  const Eigen::MatrixXd cross = latents * codebook.embeddings.transpose();
  Quantization q;
  q.indices.resize(latents.rows());
  q.vectors.resize(latents.rows(), codebook.dim());
  q.squared_errors.resize(latents.rows());
  for (Eigen::Index r = 0; r < latents.rows(); ++r) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < codebook.size(); ++k) {
      const double d = norms(k) - 2.0 * cross(r, k);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    q.indices[r] = best;
    q.vectors.row(r) = codebook.embeddings.row(best);
    q.squared_errors(r) = (latents.row(r) - codebook.embeddings.row(best)).squaredNorm();
  }
  return q;
}

void codebook_ema_update(Codebook& codebook, std::span<const int> assignments, const Eigen::MatrixXd& latents,
                         double decay) {
  if (static_cast<Eigen::Index>(assignments.size()) != latents.rows() || latents.cols() != codebook.dim()) {
    fail(ErrorCode::ShapeMismatch, "codebook_ema_update: assignments and latents disagree");
  }
  const int k_size = codebook.size();
  Eigen::VectorXd batch_counts = Eigen::VectorXd::Zero(k_size);
  Eigen::MatrixXd batch_sums = Eigen::MatrixXd::Zero(k_size, codebook.dim());
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const int k = assignments[i];
    if (k < 0 || k >= k_size) {
      fail(ErrorCode::OutOfRange, "codebook_ema_update: code " + std::to_string(k) + " out of range");
    }
    batch_counts(k) += 1.0;
    batch_sums.row(k) += latents.row(static_cast<Eigen::Index>(i));
  }
  codebook.counts = decay * codebook.counts + (1.0 - decay) * batch_counts;
  codebook.sums = decay * codebook.sums + (1.0 - decay) * batch_sums;
  for (int k = 0; k < k_size; ++k) {
    if (batch_counts(k) > 0.0) {
      codebook.embeddings.row(k) = codebook.sums.row(k) / codebook.counts(k);
    }
  }
}

FeatureStats FeatureStats::identity(int width) {
  return {Eigen::RowVectorXd::Zero(width), Eigen::RowVectorXd::Ones(width)};
}

FeatureStats FeatureStats::fit(std::span<const Eigen::MatrixXd> samples) {
  if (samples.empty()) {
    fail(ErrorCode::InvalidArgument, "FeatureStats::fit: no samples");
  }
  const Eigen::Index width = samples.front().cols();
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(width);
  double n = 0.0;
  for (const auto& s : samples) {
    if (s.cols() != width) {
      fail(ErrorCode::ShapeMismatch, "FeatureStats::fit: inconsistent widths");
    }
    sum += s.colwise().sum();
    n += static_cast<double>(s.rows());
  }
  if (n < 1.0) {
    fail(ErrorCode::InvalidArgument, "FeatureStats::fit: no rows");
  }
  FeatureStats st;
  st.mean = sum / n;
  Eigen::RowVectorXd sq = Eigen::RowVectorXd::Zero(width);
  for (const auto& s : samples) {
    sq += (s.rowwise() - st.mean).array().square().colwise().sum().matrix();
  }
  st.std = (sq / n).array().sqrt().matrix();
  for (Eigen::Index c = 0; c < width; ++c) {
    if (!(st.std(c) > 1e-6)) {
      st.std(c) = 1.0;
    }
  }
  return st;
}

VQModel::VQModel(const VQConfig& config) : config_(config) {
  config_.validate();
  params_.reserve(64);
  Rng rng(config_.seed);
  const int f = config_.feature_width;
  const int c = config_.hidden_channels;
  const int d = config_.latent_dim;
  const double relu_gain = std::sqrt(2.0);

  auto conv = [&](const std::string& name, int in, int out, int kernel, int stride, int pad, double gain) {
    Conv cv;
    cv.kernel = kernel;
    cv.stride = stride;
    cv.pad = pad;
    const double sd = gain / std::sqrt(static_cast<double>(kernel * in));
    Eigen::MatrixXd w(kernel * in, out);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      w.data()[i] = sd * rng.normal();
    }
    cv.weight = static_cast<int>(params_.size());
    params_.emplace_back(name + ".weight", std::move(w));
    cv.bias = static_cast<int>(params_.size());
    params_.emplace_back(name + ".bias", Eigen::MatrixXd::Zero(1, out));
    return cv;
  };
  auto res = [&](const std::string& name, int channels) {
    ResBlock b;
    b.first = conv(name + ".conv1", channels, channels, 3, 1, 1, relu_gain);
    b.second = conv(name + ".conv2", channels, channels, 1, 1, 0, 0.5);
    return b;
  };

  enc_in_ = conv("encoder.in", f, c, 3, 1, 1, relu_gain);
  for (int s = 0; s < 2; ++s) {
    const std::string prefix = "encoder.stage" + std::to_string(s);
    enc_down_[s] = conv(prefix + ".down", c, c, 4, 2, 1, relu_gain);
    enc_res_[s] = res(prefix + ".res", c);
  }
  enc_out_ = conv("encoder.out", c, d, 3, 1, 1, 1.0);
  dec_in_ = conv("decoder.in", d, c, 3, 1, 1, relu_gain);
  for (int s = 0; s < 2; ++s) {
    const std::string prefix = "decoder.stage" + std::to_string(s);
    dec_res_[s] = res(prefix + ".res", c);
    dec_up_[s] = conv(prefix + ".up", c, c, 3, 1, 1, relu_gain);
  }
  dec_mid_ = conv("decoder.mid", c, c, 3, 1, 1, relu_gain);
  dec_out_ = conv("decoder.out", c, f, 3, 1, 1, 1.0);

  Eigen::MatrixXd table(config_.codebook_size, d);
  for (Eigen::Index i = 0; i < table.size(); ++i) {
    table.data()[i] = rng.normal();
  }
  codebook_ = Codebook::from_embeddings(std::move(table));
  stats_ = FeatureStats::identity(f);
}

std::vector<ad::Parameter*> VQModel::parameters() {
  std::vector<ad::Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) {
    out.push_back(&p);
  }
  return out;
}

std::vector<const ad::Parameter*> VQModel::parameters() const {
  std::vector<const ad::Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) {
    out.push_back(&p);
  }
  return out;
}

Eigen::MatrixXd VQModel::normalize(const Eigen::MatrixXd& raw) const {
  if (raw.cols() != stats_.mean.size()) {
    fail(ErrorCode::ShapeMismatch, "VQModel: feature width " + std::to_string(raw.cols()) + " != " +
                                       std::to_string(stats_.mean.size()));
  }
  return ((raw.rowwise() - stats_.mean).array().rowwise() / stats_.std.array()).matrix();
}

Eigen::MatrixXd VQModel::denormalize(const Eigen::MatrixXd& normalized) const {
  return ((normalized.array().rowwise() * stats_.std.array()).rowwise() + stats_.mean.array()).matrix();
}

ad::Var VQModel::fetch(ad::Tape& tape, int index, bool trainable) const {
  if (trainable) {
    return tape.param(const_cast<ad::Parameter&>(params_[index]));
  }
  return tape.constant(params_[index].value);
}

ad::Var VQModel::apply(ad::Tape& tape, const Conv& conv, ad::Var x, int segments, bool trainable) const {
  ad::Var cols = ad::im2col(x, segments, conv.kernel, conv.stride, conv.pad);
  return ad::add_bias(ad::matmul(cols, fetch(tape, conv.weight, trainable)), fetch(tape, conv.bias, trainable));
}

ad::Var VQModel::apply(ad::Tape& tape, const ResBlock& block, ad::Var x, int segments, bool trainable) const {
  ad::Var h = apply(tape, block.first, ad::relu(x), segments, trainable);
  h = apply(tape, block.second, ad::relu(h), segments, trainable);
  return ad::add(x, h);
}

ad::Var VQModel::encode_impl(ad::Tape& tape, ad::Var x, int segments, bool trainable) const {
  ad::Var h = ad::relu(apply(tape, enc_in_, x, segments, trainable));
  for (int s = 0; s < 2; ++s) {
    h = apply(tape, enc_down_[s], h, segments, trainable);
    h = apply(tape, enc_res_[s], h, segments, trainable);
  }
  return apply(tape, enc_out_, h, segments, trainable);
}

ad::Var VQModel::decode_impl(ad::Tape& tape, ad::Var q, int segments, bool trainable) const {
  ad::Var h = ad::relu(apply(tape, dec_in_, q, segments, trainable));
  for (int s = 0; s < 2; ++s) {
    h = apply(tape, dec_res_[s], h, segments, trainable);
    h = ad::repeat_rows(h, 2);
    h = ad::relu(apply(tape, dec_up_[s], h, segments, trainable));
  }
  h = ad::relu(apply(tape, dec_mid_, h, segments, trainable));
  return apply(tape, dec_out_, h, segments, trainable);
}

ad::Var VQModel::encode_graph(ad::Tape& tape, ad::Var normalized, int segments) {
  return encode_impl(tape, normalized, segments, true);
}

ad::Var VQModel::decode_graph(ad::Tape& tape, ad::Var quantized, int segments) {
  return decode_impl(tape, quantized, segments, true);
}

Eigen::MatrixXd VQModel::encode_latents(const Eigen::MatrixXd& raw) const {
  if (raw.rows() == 0 || raw.rows() % 4 != 0) {
    fail(ErrorCode::ShapeMismatch, "encode_latents: frame count must be a positive multiple of 4");
  }
  ad::Tape tape;
  return encode_impl(tape, tape.constant(normalize(raw)), 1, false).value();
}

Eigen::MatrixXd VQModel::decode_latents(const Eigen::MatrixXd& quantized) const {
  if (quantized.rows() == 0 || quantized.cols() != config_.latent_dim) {
    fail(ErrorCode::ShapeMismatch, "decode_latents: expected rows x " + std::to_string(config_.latent_dim));
  }
  ad::Tape tape;
  return denormalize(decode_impl(tape, tape.constant(quantized), 1, false).value());
}

Container VQModel::to_container() const {
  Container c;
  c.magic = kVQMagic;
  c.version = kVQVersion;
  c.config_json = config_.to_json();
  for (const auto& p : params_) {
    c.tensors.push_back({p.name, p.value});
  }
  c.tensors.push_back({"codebook.embeddings", codebook_.embeddings});
  c.tensors.push_back({"codebook.counts", codebook_.counts});
  c.tensors.push_back({"codebook.sums", codebook_.sums});
  c.tensors.push_back({"stats.mean", stats_.mean});
  c.tensors.push_back({"stats.std", stats_.std});
  return c;
}

VQModel VQModel::from_container(const Container& c) {
  if (c.magic != kVQMagic) {
    fail(ErrorCode::Format, "not a tokenizer checkpoint (magic '" + c.magic + "')");
  }
  VQModel model(VQConfig::from_json(c.config_json));
  auto load = [&c](const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    const Eigen::MatrixXd& v = c.tensor(name).value;
    if (v.rows() != rows || v.cols() != cols) {
      fail(ErrorCode::ShapeMismatch, "checkpoint tensor '" + name + "' has shape " + std::to_string(v.rows()) +
                                         "x" + std::to_string(v.cols()) + ", expected " + std::to_string(rows) +
                                         "x" + std::to_string(cols));
    }
    return v;
  };
  for (auto& p : model.params_) {
    p.value = load(p.name, p.value.rows(), p.value.cols());
    p.zero_grad();
  }
  const int k = model.config_.codebook_size;
  const int d = model.config_.latent_dim;
  const int f = model.config_.feature_width;
  model.codebook_.embeddings = load("codebook.embeddings", k, d);
  model.codebook_.counts = load("codebook.counts", k, 1);
  model.codebook_.sums = load("codebook.sums", k, d);
  model.stats_.mean = load("stats.mean", 1, f);
  model.stats_.std = load("stats.std", 1, f);
  model.codebook_.validate();
  return model;
}

void VQModel::save(const std::string& path) const {
  write_container(path, to_container());
}

VQModel VQModel::load(const std::string& path) {
  return from_container(read_container(path, kVQMagic, kVQVersion));
}

std::vector<int> vq_encode_matrix(const Eigen::MatrixXd& raw, const VQModel& model) {
  if (raw.rows() < 4) {
    fail(ErrorCode::InvalidArgument,
         "vq_encode: need at least 4 frames, got " + std::to_string(raw.rows()));
  }
  if (!raw.allFinite()) {
    fail(ErrorCode::NonFinite, "vq_encode: non-finite feature value");
  }
  const Eigen::MatrixXd latents = model.encode_latents(pad_to_multiple(raw, 4));
  return quantize_latents(latents, model.codebook()).indices;
}

Eigen::MatrixXd vq_decode_matrix(std::span<const int> tokens, const VQModel& model, std::optional<int> frames) {
  if (tokens.empty()) {
    fail(ErrorCode::InvalidArgument, "vq_decode: empty token sequence");
  }
  const Codebook& cb = model.codebook();
  Eigen::MatrixXd q(static_cast<Eigen::Index>(tokens.size()), cb.dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] < 0 || tokens[i] >= cb.size()) {
      fail(ErrorCode::OutOfRange, "vq_decode: code " + std::to_string(tokens[i]) + " outside [0, " +
                                      std::to_string(cb.size()) + ")");
    }
    q.row(static_cast<Eigen::Index>(i)) = cb.embeddings.row(tokens[i]);
  }
  Eigen::MatrixXd out = model.decode_latents(q);
  if (frames) {
    if (*frames < 1 || *frames > out.rows()) {
      fail(ErrorCode::OutOfRange, "vq_decode: requested " + std::to_string(*frames) + " frames from " +
                                      std::to_string(out.rows()));
    }
    out.conservativeResize(*frames, Eigen::NoChange);
  }
  return out;
}

std::vector<int> vq_encode(const PersonFeatures& features, const VQModel& model) {
  if (features.data.cols() != model.config().feature_width) {
    fail(ErrorCode::ShapeMismatch, "vq_encode: feature width " + std::to_string(features.data.cols()) +
                                       " != tokenizer width " + std::to_string(model.config().feature_width));
  }
  return vq_encode_matrix(features.data, model);
}

PersonFeatures vq_decode(std::span<const int> tokens, const VQModel& model, std::optional<int> frames) {
  const auto joints = FeatureLayout::joints_for_width(model.config().feature_width);
  if (!joints) {
    fail(ErrorCode::InvalidArgument, "vq_decode: tokenizer width does not match the per-person layout");
  }
  PersonFeatures out;
  out.joints = *joints;
  out.data = vq_decode_matrix(tokens, model, frames);
  return out;
}

VQGraph build_vq_graph(ad::Tape& tape, VQModel& model, std::span<const Eigen::MatrixXd> windows,
                       const VQGraphOptions& options) {
  if (windows.empty()) {
    fail(ErrorCode::InvalidArgument, "VQ batch is empty");
  }
  const Eigen::Index len = windows.front().rows();
  if (len < 4 || len % 4 != 0) {
    fail(ErrorCode::ShapeMismatch, "VQ window length must be a positive multiple of 4");
  }
  std::vector<Eigen::MatrixXd> normalized;
  normalized.reserve(windows.size());
  for (const auto& w : windows) {
    if (w.rows() != len) {
      fail(ErrorCode::ShapeMismatch, "VQ batch windows differ in length");
    }
    normalized.push_back(model.normalize(w));
  }
  const int segments = static_cast<int>(windows.size());
  const Eigen::MatrixXd x = stack_rows(normalized);
  if (!x.allFinite()) {
    fail(ErrorCode::NonFinite, "VQ batch contains non-finite features");
  }

  VQGraph g;
  g.latents = model.encode_graph(tape, tape.constant(x), segments);
  if (options.bypass_quantizer) {
    g.quantized = g.latents;
  } else {
    g.assignment = quantize_latents(g.latents.value(), model.codebook());
    g.quantized = ad::straight_through(g.latents, g.assignment.vectors);
  }
  g.reconstruction = model.decode_graph(tape, g.quantized, segments);

  ad::Var rec = ad::smooth_l1_mean(g.reconstruction, x);
  ad::Var vel = ad::smooth_l1_mean(ad::diff_rows(g.reconstruction, segments), segment_diffs(x, segments));
  ad::Var total = ad::add(rec, ad::scale(vel, options.velocity_weight));
  g.report.reconstruction = rec.value()(0, 0);
  g.report.velocity = vel.value()(0, 0);
  if (!options.bypass_quantizer) {
    const double commit = g.assignment.squared_errors.sum() / static_cast<double>(g.latents.value().size());
    g.report.commitment = commit;
    g.report.embedding = commit;
    if (options.commitment_weight != 0.0) {
      total = ad::add(total, ad::scale(ad::mse_mean(g.latents, g.assignment.vectors), options.commitment_weight));
    }
  }
  g.loss = total;
  g.report.total = total.value()(0, 0);
  return g;
}

VQStepResult vq_train_step(std::span<const Eigen::MatrixXd> windows, VQModel& model, const VQConfig& config,
                           AdamW& optimizer) {
  ad::Tape tape;
  VQGraphOptions options;
  options.commitment_weight = config.commitment_weight;
  options.velocity_weight = config.velocity_weight;
  VQGraph g = build_vq_graph(tape, model, windows, options);
  if (!std::isfinite(g.report.total)) {
    optimizer.zero_grad();
    fail(ErrorCode::NonFinite, "VQ step rejected: loss is not finite (reconstruction " +
                                   std::to_string(g.report.reconstruction) + ", commitment " +
                                   std::to_string(g.report.commitment) + ")");
  }
  tape.backward(g.loss);
  optimizer.step(config.learning_rate);
  VQStepResult r;
  r.losses = g.report;
  r.latents = g.latents.value();
  r.assignments = std::move(g.assignment.indices);
  return r;
}

double codebook_utilization(std::span<const Eigen::MatrixXd> windows, const VQModel& model) {
  std::set<int> used;
  for (const auto& w : windows) {
    for (int code : vq_encode_matrix(w, model)) {
      used.insert(code);
    }
  }
  return static_cast<double>(used.size()) / static_cast<double>(model.codebook().size());
}

VQTrainResult train_vq(std::span<const Eigen::MatrixXd> windows, const VQConfig& config,
                       const VQProgress& progress) {
  config.validate();
  if (windows.empty()) {
    fail(ErrorCode::InvalidArgument, "train_vq: no training windows");
  }
  for (const auto& w : windows) {
    if (w.rows() != config.window || w.cols() != config.feature_width) {
      fail(ErrorCode::ShapeMismatch, "train_vq: windows must be " + std::to_string(config.window) + " x " +
                                         std::to_string(config.feature_width));
    }
    if (!all_finite(w)) {
      fail(ErrorCode::NonFinite, "train_vq: non-finite training features");
    }
  }

  VQTrainResult result{VQModel(config), {}, {}, 0.0};
  VQModel& model = result.model;
  model.stats() = FeatureStats::fit(windows);
  Rng rng(config.seed * 0x9E3779B97F4A7C15ULL + 1);
  const std::size_t n = windows.size();
  const int k_size = config.codebook_size;

  auto draw_batch = [&]() {
    std::vector<Eigen::MatrixXd> batch;
    batch.reserve(config.batch_size);
    for (int b = 0; b < config.batch_size; ++b) {
      batch.push_back(windows[rng.index(n)]);
    }
    return batch;
  };

  // Seed the codebook with encoder outputs so every entry starts near data.
  {
    std::vector<Eigen::MatrixXd> pool;
    Eigen::Index rows = 0;
    std::vector<std::size_t> order = rng.permutation(n);
    for (std::size_t i = 0; i < n && rows < k_size; ++i) {
      pool.push_back(model.encode_latents(windows[order[i]]));
      rows += pool.back().rows();
    }
    const Eigen::MatrixXd latents = stack_rows(pool);
    Eigen::MatrixXd table(k_size, config.latent_dim);
    if (latents.rows() >= k_size) {
      std::vector<std::size_t> pick = rng.permutation(static_cast<std::size_t>(latents.rows()));
      for (int k = 0; k < k_size; ++k) {
        table.row(k) = latents.row(static_cast<Eigen::Index>(pick[k]));
      }
    } else {
      const double spread = std::max(1e-3, std::sqrt(latents.array().square().mean()) * 1e-2);
      for (int k = 0; k < k_size; ++k) {
        table.row(k) = latents.row(static_cast<Eigen::Index>(rng.index(latents.rows())));
        for (int c = 0; c < config.latent_dim; ++c) {
          table(k, c) += spread * rng.normal();
        }
      }
    }
    model.codebook() = Codebook::from_embeddings(std::move(table));
  }

  AdamWOptions opt;
  opt.learning_rate = config.learning_rate;
  AdamW optimizer(model.parameters(), opt);
  std::vector<int> idle(k_size, 0);
  result.curve.reserve(config.iterations);
  result.dead_code_resets.reserve(config.iterations);

  for (int it = 0; it < config.iterations; ++it) {
    const std::vector<Eigen::MatrixXd> batch = draw_batch();
    VQStepResult step;
    try {
      step = vq_train_step(batch, model, config, optimizer);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NonFinite) {
        fail(ErrorCode::Divergence, "VQ training diverged at iteration " + std::to_string(it) + ": " + e.what());
      }
      throw;
    }
    if (step.losses.total > 1e6) {
      fail(ErrorCode::Divergence, "VQ training diverged at iteration " + std::to_string(it) + ": total loss " +
                                      std::to_string(step.losses.total));
    }
    codebook_ema_update(model.codebook(), step.assignments, step.latents, config.ema_decay);

    std::vector<char> hit(k_size, 0);
    for (int a : step.assignments) {
      hit[a] = 1;
    }
    int resets = 0;
    Codebook& cb = model.codebook();
    for (int k = 0; k < k_size; ++k) {
      if (hit[k]) {
        idle[k] = 0;
        continue;
      }
      if (++idle[k] >= config.dead_code_steps) {
        const Eigen::RowVectorXd row = step.latents.row(static_cast<Eigen::Index>(rng.index(step.latents.rows())));
        cb.embeddings.row(k) = row;
        cb.sums.row(k) = row;
        cb.counts(k) = 1.0;
        idle[k] = 0;
        ++resets;
      }
    }
    result.curve.push_back(step.losses);
    result.dead_code_resets.push_back(resets);
    if (progress) {
      progress(it, step.losses);
    }
  }
  result.utilization = codebook_utilization(windows, model);
  return result;
}

} // namespace socialmotion

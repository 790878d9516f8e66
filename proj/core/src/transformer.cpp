#include "socialmotion/transformer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "socialmotion/error.h"

namespace socialmotion {

namespace {

constexpr std::uint32_t kLMVersion = 1;
const char* const kLMMagic = "XHLM";

Eigen::MatrixXd causal_mask(Eigen::Index n) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = r + 1; c < n; ++c) {
      m(r, c) = -1e9;
    }
  }
  return m;
}

} // namespace

void ModelConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) {
      fail(ErrorCode::InvalidArgument, "ModelConfig: " + what);
    }
  };
  require(vocab_size > 0, "vocab_size must be positive");
  require(width > 0 && heads > 0 && width % heads == 0, "width must be a positive multiple of heads");
  require(encoder_layers >= 0 && decoder_layers >= 1, "need at least one decoder layer");
  require(ff_width > 0, "ff_width must be positive");
  require(max_length >= 16, "max_length must be at least 16");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
}

std::string ModelConfig::to_json() const {
  nlohmann::json j;
  j["vocab_size"] = vocab_size;
  j["width"] = width;
  j["encoder_layers"] = encoder_layers;
  j["decoder_layers"] = decoder_layers;
  j["heads"] = heads;
  j["ff_width"] = ff_width;
  j["max_length"] = max_length;
  j["dropout"] = dropout;
  j["seed"] = seed;
  return j.dump(2);
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  ModelConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.width = j.value("width", c.width);
    c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
    c.decoder_layers = j.value("decoder_layers", c.decoder_layers);
    c.heads = j.value("heads", c.heads);
    c.ff_width = j.value("ff_width", c.ff_width);
    c.max_length = j.value("max_length", c.max_length);
    c.dropout = j.value("dropout", c.dropout);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("ModelConfig: ") + e.what());
  }
  c.validate();
  return c;
}

Seq2SeqTransformer::Seq2SeqTransformer(const ModelConfig& config) : config_(config) {
  config_.validate();
  Rng rng(config_.seed);
  const int w = config_.width;
  const int f = config_.ff_width;
  const int v = config_.vocab_size;

  auto add = [&](const std::string& name, int rows, int cols, double sd) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = sd * rng.normal();
    }
    params_.emplace_back(name, std::move(m));
    return static_cast<int>(params_.size()) - 1;
  };
  auto zeros = [&](const std::string& name, int rows, int cols) { return add(name, rows, cols, 0.0); };
  auto norm = [&](const std::string& name) {
    Norm n;
    n.gain = zeros(name + ".gain", 1, w);
    params_[n.gain].value.setOnes();
    n.bias = zeros(name + ".bias", 1, w);
    return n;
  };
  const double sd_w = 1.0 / std::sqrt(static_cast<double>(w));
  const double sd_f = 1.0 / std::sqrt(static_cast<double>(f));
  auto attention = [&](const std::string& name) {
    Attention a;
    a.wq = add(name + ".q", w, w, sd_w);
    a.wk = add(name + ".k", w, w, sd_w);
    a.wv = add(name + ".v", w, w, sd_w);
    a.wo = add(name + ".o", w, w, sd_w);
    return a;
  };
  auto feed_forward = [&](const std::string& name) {
    FeedForward ff;
    ff.w1 = add(name + ".w1", w, f, sd_w);
    ff.b1 = zeros(name + ".b1", 1, f);
    ff.w2 = add(name + ".w2", f, w, sd_f);
    ff.b2 = zeros(name + ".b2", 1, w);
    return ff;
  };

  params_.reserve(16 + 16 * (config_.encoder_layers + config_.decoder_layers));
  token_embedding_ = add("embedding.tokens", v, w, 0.3);
  encoder_positions_ = add("embedding.encoder_positions", config_.max_length, w, 0.1);
  decoder_positions_ = add("embedding.decoder_positions", config_.max_length, w, 0.1);
  for (int l = 0; l < config_.encoder_layers; ++l) {
    const std::string p = "encoder.layer" + std::to_string(l);
    EncoderLayer layer;
    layer.norm1 = norm(p + ".norm1");
    layer.attn = attention(p + ".attn");
    layer.norm2 = norm(p + ".norm2");
    layer.ff = feed_forward(p + ".ff");
    encoder_.push_back(layer);
  }
  encoder_final_ = norm("encoder.final_norm");
  for (int l = 0; l < config_.decoder_layers; ++l) {
    const std::string p = "decoder.layer" + std::to_string(l);
    DecoderLayer layer;
    layer.norm1 = norm(p + ".norm1");
    layer.self_attn = attention(p + ".self_attn");
    layer.norm2 = norm(p + ".norm2");
    layer.cross_attn = attention(p + ".cross_attn");
    layer.norm3 = norm(p + ".norm3");
    layer.ff = feed_forward(p + ".ff");
    decoder_.push_back(layer);
  }
  decoder_final_ = norm("decoder.final_norm");
  output_weight_ = add("output.weight", w, v, sd_w);
  output_bias_ = zeros("output.bias", 1, v);
}

std::vector<ad::Parameter*> Seq2SeqTransformer::parameters() {
  std::vector<ad::Parameter*> out;
  for (auto& p : params_) {
    out.push_back(&p);
  }
  return out;
}

ad::Parameter& Seq2SeqTransformer::parameter(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) {
      return p;
    }
  }
  fail(ErrorCode::InvalidArgument, "no parameter named '" + name + "'");
}

std::size_t Seq2SeqTransformer::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    n += static_cast<std::size_t>(p.value.size());
  }
  return n;
}

ad::Var Seq2SeqTransformer::fetch(ad::Tape& tape, int index, bool trainable) const {
  if (trainable) {
    return tape.param(const_cast<ad::Parameter&>(params_[index]));
  }
  return tape.constant(params_[index].value);
}

ad::Var Seq2SeqTransformer::norm(ad::Tape& tape, const Norm& n, ad::Var x, bool trainable) const {
  return ad::layer_norm_rows(x, fetch(tape, n.gain, trainable), fetch(tape, n.bias, trainable));
}

ad::Var Seq2SeqTransformer::attend(ad::Tape& tape, const Attention& a, ad::Var x, ad::Var memory, bool causal,
                                   bool trainable, Rng* rng) const {
  const int heads = config_.heads;
  const int dh = config_.width / heads;
  ad::Var q = ad::matmul(x, fetch(tape, a.wq, trainable));
  ad::Var k = ad::matmul(memory, fetch(tape, a.wk, trainable));
  ad::Var v = ad::matmul(memory, fetch(tape, a.wv, trainable));
  ad::Var mask;
  if (causal) {
    mask = tape.constant(causal_mask(x.rows()));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<ad::Var> outputs;
  outputs.reserve(heads);
  for (int h = 0; h < heads; ++h) {
    ad::Var qh = ad::slice_cols(q, h * dh, dh);
    ad::Var kh = ad::slice_cols(k, h * dh, dh);
    ad::Var vh = ad::slice_cols(v, h * dh, dh);
    ad::Var scores = ad::scale(ad::matmul_transposed(qh, kh), scale);
    if (causal) {
      scores = ad::add(scores, mask);
    }
    ad::Var probs = ad::softmax_rows(scores);
    if (rng != nullptr && config_.dropout > 0.0) {
      probs = ad::dropout(probs, config_.dropout, *rng);
    }
    outputs.push_back(ad::matmul(probs, vh));
  }
  ad::Var joined = heads == 1 ? outputs.front() : ad::concat_cols(outputs);
  return ad::matmul(joined, fetch(tape, a.wo, trainable));
}

ad::Var Seq2SeqTransformer::feed_forward(ad::Tape& tape, const FeedForward& f, ad::Var x, bool trainable,
                                         Rng* rng) const {
  ad::Var h = ad::gelu(ad::add_bias(ad::matmul(x, fetch(tape, f.w1, trainable)), fetch(tape, f.b1, trainable)));
  if (rng != nullptr && config_.dropout > 0.0) {
    h = ad::dropout(h, config_.dropout, *rng);
  }
  return ad::add_bias(ad::matmul(h, fetch(tape, f.w2, trainable)), fetch(tape, f.b2, trainable));
}

void Seq2SeqTransformer::check_ids(std::span<const int> ids, const char* what) const {
  if (ids.empty()) {
    fail(ErrorCode::InvalidArgument, std::string(what) + " is empty");
  }
  if (static_cast<int>(ids.size()) > config_.max_length) {
    fail(ErrorCode::OutOfRange, std::string(what) + " has " + std::to_string(ids.size()) +
                                    " ids, above the maximum length " + std::to_string(config_.max_length));
  }
  for (int id : ids) {
    if (id < 0 || id >= config_.vocab_size) {
      fail(ErrorCode::OutOfRange, std::string(what) + " contains id " + std::to_string(id) +
                                      " outside the vocabulary");
    }
  }
}

ad::Var Seq2SeqTransformer::embed(ad::Tape& tape, int pos_table, std::span<const int> ids, bool trainable,
                                  Rng* rng) const {
  ad::Var tokens = ad::embedding(fetch(tape, token_embedding_, trainable), ids);
  ad::Var pos = ad::slice_rows(fetch(tape, pos_table, trainable), 0, static_cast<Eigen::Index>(ids.size()));
  ad::Var x = ad::add(tokens, pos);
  if (rng != nullptr && config_.dropout > 0.0) {
    x = ad::dropout(x, config_.dropout, *rng);
  }
  return x;
}

ad::Var Seq2SeqTransformer::encode_impl(ad::Tape& tape, std::span<const int> source, bool trainable,
                                        Rng* rng) const {
  check_ids(source, "source sequence");
  ad::Var x = embed(tape, encoder_positions_, source, trainable, rng);
  for (const EncoderLayer& layer : encoder_) {
    ad::Var h = norm(tape, layer.norm1, x, trainable);
    x = ad::add(x, attend(tape, layer.attn, h, h, false, trainable, rng));
    x = ad::add(x, feed_forward(tape, layer.ff, norm(tape, layer.norm2, x, trainable), trainable, rng));
  }
  return norm(tape, encoder_final_, x, trainable);
}

ad::Var Seq2SeqTransformer::decode_impl(ad::Tape& tape, ad::Var memory, std::span<const int> decoder_input,
                                        bool trainable, Rng* rng) const {
  check_ids(decoder_input, "decoder input");
  ad::Var x = embed(tape, decoder_positions_, decoder_input, trainable, rng);
  for (const DecoderLayer& layer : decoder_) {
    ad::Var h = norm(tape, layer.norm1, x, trainable);
    x = ad::add(x, attend(tape, layer.self_attn, h, h, true, trainable, rng));
    h = norm(tape, layer.norm2, x, trainable);
    x = ad::add(x, attend(tape, layer.cross_attn, h, memory, false, trainable, rng));
    x = ad::add(x, feed_forward(tape, layer.ff, norm(tape, layer.norm3, x, trainable), trainable, rng));
  }
  x = norm(tape, decoder_final_, x, trainable);
  return ad::add_bias(ad::matmul(x, fetch(tape, output_weight_, trainable)), fetch(tape, output_bias_, trainable));
}

ad::Var Seq2SeqTransformer::encode(ad::Tape& tape, std::span<const int> source, Rng* rng) {
  return encode_impl(tape, source, true, rng);
}

ad::Var Seq2SeqTransformer::decode(ad::Tape& tape, ad::Var memory, std::span<const int> decoder_input, Rng* rng) {
  return decode_impl(tape, memory, decoder_input, true, rng);
}

Eigen::MatrixXd Seq2SeqTransformer::encode_memory(std::span<const int> source) const {
  ad::Tape tape;
  return encode_impl(tape, source, false, nullptr).value();
}

Eigen::RowVectorXd Seq2SeqTransformer::next_logits(const Eigen::MatrixXd& memory, std::span<const int> prefix) const {
  ad::Tape tape;
  ad::Var logits = decode_impl(tape, tape.constant(memory), prefix, false, nullptr);
  return logits.value().row(logits.rows() - 1);
}

Container Seq2SeqTransformer::to_container(const std::string& meta_json) const {
  Container c;
  c.magic = kLMMagic;
  c.version = kLMVersion;
  nlohmann::json j;
  j["model"] = nlohmann::json::parse(config_.to_json());
  try {
    j["meta"] = nlohmann::json::parse(meta_json);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("checkpoint metadata is not JSON: ") + e.what());
  }
  c.config_json = j.dump(2);
  for (const auto& p : params_) {
    c.tensors.push_back({p.name, p.value});
  }
  return c;
}

Seq2SeqTransformer Seq2SeqTransformer::from_container(const Container& c, std::string* meta_json) {
  if (c.magic != kLMMagic) {
    fail(ErrorCode::Format, "not a language-model checkpoint (magic '" + c.magic + "')");
  }
  if (c.version == 0 || c.version > kLMVersion) {
    fail(ErrorCode::UnsupportedVersion, "language-model checkpoint version " + std::to_string(c.version) +
                                            " (supported: " + std::to_string(kLMVersion) + ")");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(c.config_json);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("checkpoint header: ") + e.what());
  }
  if (!j.contains("model")) {
    fail(ErrorCode::Format, "checkpoint header lacks a model config");
  }
  Seq2SeqTransformer model(ModelConfig::from_json(j["model"].dump()));
  for (auto& p : model.params_) {
    const Eigen::MatrixXd& v = c.tensor(p.name).value;
    if (v.rows() != p.value.rows() || v.cols() != p.value.cols()) {
      fail(ErrorCode::ShapeMismatch, "checkpoint tensor '" + p.name + "' has the wrong shape");
    }
    p.value = v;
    p.zero_grad();
  }
  if (meta_json != nullptr) {
    *meta_json = j.contains("meta") ? j["meta"].dump() : "{}";
  }
  return model;
}

std::vector<int> shift_right(std::span<const int> target, int pad_id) {
  std::vector<int> out;
  out.reserve(target.size());
  out.push_back(pad_id);
  for (std::size_t i = 0; i + 1 < target.size(); ++i) {
    out.push_back(target[i]);
  }
  return out;
}

LMLoss lm_loss(Seq2SeqTransformer& model, std::span<const TaskPair> batch, int pad_id, bool backward,
               Rng* dropout_rng) {
  if (batch.empty()) {
    fail(ErrorCode::InvalidArgument, "lm_loss: empty batch");
  }
  long long tokens = 0;
  for (const TaskPair& p : batch) {
    if (p.target.empty()) {
      fail(ErrorCode::InvalidArgument, "lm_loss: empty target in task '" + p.task + "'");
    }
    for (int t : p.target) {
      tokens += t != pad_id ? 1 : 0;
    }
  }
  if (tokens == 0) {
    fail(ErrorCode::InvalidArgument, "lm_loss: batch has no non-pad targets");
  }
  ad::Tape tape;
  std::vector<ad::Var> losses;
  for (const TaskPair& p : batch) {
    ad::Var memory = model.encode(tape, p.input, dropout_rng);
    const std::vector<int> dec_in = shift_right(p.target, pad_id);
    ad::Var logits = model.decode(tape, memory, dec_in, dropout_rng);
    losses.push_back(ad::cross_entropy_sum(logits, p.target, pad_id));
  }
  ad::Var total = losses.size() == 1 ? losses.front() : ad::sum_all(ad::concat_rows(losses));
  ad::Var mean = ad::scale(total, 1.0 / static_cast<double>(tokens));
  LMLoss out{mean.value()(0, 0), tokens};
  if (backward && std::isfinite(out.mean)) {
    tape.backward(mean);
  }
  return out;
}

LMStepResult lm_train_step(std::span<const TaskPair> batch, Seq2SeqTransformer& model, AdamW& optimizer,
                           double learning_rate, int pad_id, Rng* dropout_rng) {
  optimizer.zero_grad();
  const LMLoss loss = lm_loss(model, batch, pad_id, true, dropout_rng);
  if (!std::isfinite(loss.mean)) {
    optimizer.zero_grad();
    fail(ErrorCode::NonFinite, "language-model step rejected: loss is not finite");
  }
  LMStepResult r;
  r.loss = loss.mean;
  r.tokens = loss.tokens;
  r.grad_norm = optimizer.step(learning_rate);
  return r;
}

GenerationResult generate(const Seq2SeqTransformer& model, std::span<const int> prompt,
                          const SamplingOptions& sampling, int max_new, std::span<const int> stop_ids, int pad_id) {
  if (max_new < 0) {
    fail(ErrorCode::InvalidArgument, "generate: max_new must be non-negative");
  }
  const Eigen::MatrixXd memory = model.encode_memory(prompt);
  Rng rng(sampling.seed);
  const bool argmax = sampling.greedy || sampling.temperature < 1e-6 || sampling.top_k == 1;
  std::vector<int> prefix{pad_id};
  GenerationResult out;
  for (int step = 0; step < max_new; ++step) {
    if (static_cast<int>(prefix.size()) > model.config().max_length) {
      out.truncated = true;
      return out;
    }
    const Eigen::RowVectorXd logits = model.next_logits(memory, prefix);
    int next = 0;
    if (argmax) {
      logits.maxCoeff(&next);
    } else {
      const int k = std::clamp(sampling.top_k <= 0 ? static_cast<int>(logits.size()) : sampling.top_k, 1,
                               static_cast<int>(logits.size()));
      std::vector<int> order(logits.size());
      std::iota(order.begin(), order.end(), 0);
      std::partial_sort(order.begin(), order.begin() + k, order.end(), [&logits](int a, int b) {
        return logits(a) > logits(b) || (logits(a) == logits(b) && a < b);
      });
      std::vector<double> weights(k);
      const double top = logits(order[0]);
      double total = 0.0;
      for (int i = 0; i < k; ++i) {
        weights[i] = std::exp((logits(order[i]) - top) / sampling.temperature);
        total += weights[i];
      }
      double u = rng.uniform() * total;
      next = order[k - 1];
      for (int i = 0; i < k; ++i) {
        u -= weights[i];
        if (u < 0.0) {
          next = order[i];
          break;
        }
      }
    }
    out.ids.push_back(next);
    prefix.push_back(next);
    if (std::find(stop_ids.begin(), stop_ids.end(), next) != stop_ids.end()) {
      return out;
    }
  }
  out.truncated = true;
  return out;
}

} // namespace socialmotion

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "socialmotion/autograd.h"
#include "socialmotion/container.h"
#include "socialmotion/optim.h"
#include "socialmotion/rng.h"

namespace socialmotion {

struct ModelConfig {
  int vocab_size = 0;
  int width = 64;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int heads = 4;
  int ff_width = 256;
  int max_length = 512;
  double dropout = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
};

struct TaskPair {
  std::string task;
  std::vector<int> input;
  std::vector<int> target;
};

// Pre-norm encoder-decoder transformer with learned positional embeddings.
// The decoder is fed <pad> followed by the target shifted right.
class Seq2SeqTransformer {
 public:
  explicit Seq2SeqTransformer(const ModelConfig& config);

  const ModelConfig& config() const {
    return config_;
  }
  std::vector<ad::Parameter*> parameters();
  ad::Parameter& parameter(const std::string& name);
  std::size_t parameter_count() const;

  // Training graphs; `rng` drives dropout and may be null to disable it.
  ad::Var encode(ad::Tape& tape, std::span<const int> source, Rng* rng);
  ad::Var decode(ad::Tape& tape, ad::Var memory, std::span<const int> decoder_input, Rng* rng);

  // Inference: next-token logits after `prefix` (which starts with <pad>).
  Eigen::MatrixXd encode_memory(std::span<const int> source) const;
  Eigen::RowVectorXd next_logits(const Eigen::MatrixXd& memory, std::span<const int> prefix) const;

  Container to_container(const std::string& meta_json = "{}") const;
  static Seq2SeqTransformer from_container(const Container& c, std::string* meta_json = nullptr);

 private:
  struct Norm {
    int gain = -1;
    int bias = -1;
  };
  struct Attention {
    int wq = -1, wk = -1, wv = -1, wo = -1;
  };
  struct FeedForward {
    int w1 = -1, b1 = -1, w2 = -1, b2 = -1;
  };
  struct EncoderLayer {
    Norm norm1;
    Attention attn;
    Norm norm2;
    FeedForward ff;
  };
  struct DecoderLayer {
    Norm norm1;
    Attention self_attn;
    Norm norm2;
    Attention cross_attn;
    Norm norm3;
    FeedForward ff;
  };

  ad::Var fetch(ad::Tape& tape, int index, bool trainable) const;
  ad::Var norm(ad::Tape& tape, const Norm& n, ad::Var x, bool trainable) const;
  ad::Var attend(ad::Tape& tape, const Attention& a, ad::Var x, ad::Var memory, bool causal, bool trainable,
                 Rng* rng) const;
  ad::Var feed_forward(ad::Tape& tape, const FeedForward& f, ad::Var x, bool trainable, Rng* rng) const;
  ad::Var embed(ad::Tape& tape, int pos_table, std::span<const int> ids, bool trainable, Rng* rng) const;
  ad::Var encode_impl(ad::Tape& tape, std::span<const int> source, bool trainable, Rng* rng) const;
  ad::Var decode_impl(ad::Tape& tape, ad::Var memory, std::span<const int> decoder_input, bool trainable,
                      Rng* rng) const;
  void check_ids(std::span<const int> ids, const char* what) const;

  ModelConfig config_;
  std::vector<ad::Parameter> params_;
  int token_embedding_ = -1;
  int encoder_positions_ = -1;
  int decoder_positions_ = -1;
  std::vector<EncoderLayer> encoder_;
  Norm encoder_final_;
  std::vector<DecoderLayer> decoder_;
  Norm decoder_final_;
  int output_weight_ = -1;
  int output_bias_ = -1;
};

// Teacher-forced decoder input: <pad> followed by target[0 .. L-2].
std::vector<int> shift_right(std::span<const int> target, int pad_id);

struct LMLoss {
  double mean = 0.0; // per non-pad target token
  long long tokens = 0;
};

// Mean cross-entropy over non-pad target positions. When `backward` is set the
// gradient of the mean is accumulated into the parameters.
LMLoss lm_loss(Seq2SeqTransformer& model, std::span<const TaskPair> batch, int pad_id, bool backward,
               Rng* dropout_rng = nullptr);

struct LMStepResult {
  double loss = 0.0;
  double grad_norm = 0.0;
  long long tokens = 0;
};

// One optimizer step; throws Error(NonFinite) and leaves parameters untouched
// if the loss is not finite.
LMStepResult lm_train_step(std::span<const TaskPair> batch, Seq2SeqTransformer& model, AdamW& optimizer,
                           double learning_rate, int pad_id, Rng* dropout_rng = nullptr);

struct SamplingOptions {
  bool greedy = true;
  int top_k = 20;
  double temperature = 1.0; // below 1e-6 behaves as argmax
  std::uint64_t seed = 0;
};

struct GenerationResult {
  std::vector<int> ids; // emitted tokens, including the stop token if any
  bool truncated = false; // stopped by max_new or max_length
};

// Autoregressive decoding that stops after emitting any id in `stop_ids`.
GenerationResult generate(const Seq2SeqTransformer& model, std::span<const int> prompt,
                          const SamplingOptions& sampling, int max_new, std::span<const int> stop_ids,
                          int pad_id = 0);

} // namespace socialmotion

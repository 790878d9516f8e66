#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "socialmotion/autograd.h"
#include "socialmotion/container.h"
#include "socialmotion/optim.h"
#include "socialmotion/xh3d.h"

namespace socialmotion {

struct VQConfig {
  int feature_width = 263;
  int codebook_size = 512; // K
  int latent_dim = 512; // d
  int hidden_channels = 512;
  int downsample = 4; // two stride-2 stages; fixed
  double commitment_weight = 0.25; // beta
  double velocity_weight = 0.5;
  double ema_decay = 0.99;
  double learning_rate = 2e-4;
  int batch_size = 32;
  int window = 64; // frames, multiple of 4
  int iterations = 3000;
  int dead_code_steps = 256;
  std::uint64_t seed = 0;

  void validate() const;
  std::string to_json() const;
  static VQConfig from_json(const std::string& text);
};

struct Codebook {
  Eigen::MatrixXd embeddings; // K x d
  Eigen::VectorXd counts; // EMA cluster sizes
  Eigen::MatrixXd sums; // EMA cluster sums, K x d

  int size() const {
    return static_cast<int>(embeddings.rows());
  }
  int dim() const {
    return static_cast<int>(embeddings.cols());
  }
  // counts = 1 and sums = embeddings, so sums/counts reproduces each entry.
  static Codebook from_embeddings(Eigen::MatrixXd embeddings);
  void validate() const;
};

struct Quantization {
  std::vector<int> indices;
  Eigen::MatrixXd vectors; // exact codebook rows
  Eigen::VectorXd squared_errors;
};

// Nearest codebook row per latent row (Euclidean); ties go to the lowest index.
Quantization quantize_latents(const Eigen::MatrixXd& latents, const Codebook& codebook);

// Decayed re-estimation from assigned latents. Entries with no assignment in
// this batch keep their embedding.
void codebook_ema_update(Codebook& codebook, std::span<const int> assignments, const Eigen::MatrixXd& latents,
                         double decay);

struct FeatureStats {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd std;

  static FeatureStats identity(int width);
  // Per-column mean/std over every row of every matrix; std floors at 1e-6
  // (replaced by 1).
  static FeatureStats fit(std::span<const Eigen::MatrixXd> samples);
};

// Temporal convolutional autoencoder with a codebook bottleneck. The encoder
// maps T x F to T/4 x d through two stride-2 stages; the decoder mirrors it
// with nearest-neighbour upsampling.
class VQModel {
 public:
  explicit VQModel(const VQConfig& config);

  const VQConfig& config() const {
    return config_;
  }
  Codebook& codebook() {
    return codebook_;
  }
  const Codebook& codebook() const {
    return codebook_;
  }
  FeatureStats& stats() {
    return stats_;
  }
  const FeatureStats& stats() const {
    return stats_;
  }

  std::vector<ad::Parameter*> parameters();
  std::vector<const ad::Parameter*> parameters() const;

  Eigen::MatrixXd normalize(const Eigen::MatrixXd& raw) const;
  Eigen::MatrixXd denormalize(const Eigen::MatrixXd& normalized) const;

  // Graph builders over `segments` stacked equal-length sequences.
  ad::Var encode_graph(ad::Tape& tape, ad::Var normalized, int segments);
  ad::Var decode_graph(ad::Tape& tape, ad::Var quantized, int segments);

  // Inference on raw feature matrices (rows = frames, multiple of 4).
  Eigen::MatrixXd encode_latents(const Eigen::MatrixXd& raw) const;
  Eigen::MatrixXd decode_latents(const Eigen::MatrixXd& quantized) const;

  Container to_container() const;
  static VQModel from_container(const Container& c);
  void save(const std::string& path) const;
  static VQModel load(const std::string& path);

 private:
  struct Conv {
    int weight = -1; // index into params_
    int bias = -1;
    int kernel = 3;
    int stride = 1;
    int pad = 1;
  };
  struct ResBlock {
    Conv first;
    Conv second;
  };

  ad::Var fetch(ad::Tape& tape, int index, bool trainable) const;
  ad::Var apply(ad::Tape& tape, const Conv& conv, ad::Var x, int segments, bool trainable) const;
  ad::Var apply(ad::Tape& tape, const ResBlock& block, ad::Var x, int segments, bool trainable) const;
  ad::Var encode_impl(ad::Tape& tape, ad::Var x, int segments, bool trainable) const;
  ad::Var decode_impl(ad::Tape& tape, ad::Var q, int segments, bool trainable) const;

  VQConfig config_;
  std::vector<ad::Parameter> params_;
  Conv enc_in_;
  Conv enc_down_[2];
  ResBlock enc_res_[2];
  Conv enc_out_;
  Conv dec_in_;
  ResBlock dec_res_[2];
  Conv dec_up_[2];
  Conv dec_mid_;
  Conv dec_out_;
  Codebook codebook_;
  FeatureStats stats_;
};

// Token ids for a raw feature matrix; frames are padded to a multiple of 4 by
// repeating the final frame. Throws when fewer than 4 frames.
std::vector<int> vq_encode_matrix(const Eigen::MatrixXd& raw, const VQModel& model);
// Reconstruction of 4 frames per token, optionally truncated to `frames`.
Eigen::MatrixXd vq_decode_matrix(std::span<const int> tokens, const VQModel& model,
                                 std::optional<int> frames = std::nullopt);

std::vector<int> vq_encode(const PersonFeatures& features, const VQModel& model);
PersonFeatures vq_decode(std::span<const int> tokens, const VQModel& model,
                         std::optional<int> frames = std::nullopt);

struct VQLossReport {
  double reconstruction = 0.0; // smooth-L1, normalized feature space
  double velocity = 0.0; // smooth-L1 on first differences
  double commitment = 0.0; // ||z - sg[e]||^2 (mean)
  double embedding = 0.0; // ||sg[z] - e||^2 (diagnostic only; EMA owns the codebook)
  double total = 0.0; // reconstruction + w_v * velocity + beta * commitment
};

struct VQGraphOptions {
  bool bypass_quantizer = false; // decoder sees the raw latents
  double commitment_weight = 0.25;
  double velocity_weight = 0.5;
};

struct VQGraph {
  ad::Var latents; // encoder output z
  ad::Var quantized; // decoder input
  ad::Var reconstruction; // normalized space
  ad::Var loss;
  Quantization assignment;
  VQLossReport report;
};

// Builds the full training graph for a batch of raw windows of equal length.
VQGraph build_vq_graph(ad::Tape& tape, VQModel& model, std::span<const Eigen::MatrixXd> windows,
                       const VQGraphOptions& options);

struct VQStepResult {
  VQLossReport losses;
  Eigen::MatrixXd latents;
  std::vector<int> assignments;
};

// One gradient step on encoder and decoder; the codebook is left alone.
// A non-finite loss rejects the step and throws Error(NonFinite).
VQStepResult vq_train_step(std::span<const Eigen::MatrixXd> windows, VQModel& model, const VQConfig& config,
                           AdamW& optimizer);

struct VQTrainResult {
  VQModel model;
  std::vector<VQLossReport> curve;
  std::vector<int> dead_code_resets; // per iteration
  double utilization = 0.0; // fraction of codes used over one pass of the data
};

using VQProgress = std::function<void(int iteration, const VQLossReport&)>;

// Alternates gradient steps and EMA codebook updates with dead-code reset.
// Throws Error(Divergence) if the loss exceeds 1e6 or becomes non-finite.
VQTrainResult train_vq(std::span<const Eigen::MatrixXd> windows, const VQConfig& config,
                       const VQProgress& progress = nullptr);

// Fraction of codes hit when encoding every window once.
double codebook_utilization(std::span<const Eigen::MatrixXd> windows, const VQModel& model);

} // namespace socialmotion

// core/include/zr/models.hpp
// SPDX-License-Identifier: Apache-2.0
//
// The three trainable models. The correspondence autoencoder (CAE)
// reconstructs the aligned partner frame; the Triamese network embeds
// frames under a cosine triplet loss with tied branches; the CTriamese
// model uses one shared CAE as every branch and adds the triplet term on
// the bottlenecks. Training is mini-batch gradient descent with the
// optimizer fixed per model kind.

#ifndef ZR_MODELS_HPP
#define ZR_MODELS_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "zr/alignment.hpp"
#include "zr/features.hpp"
#include "zr/neuralnet.hpp"
#include "zr/pairing.hpp"
#include "zr/segments.hpp"

namespace zr {

enum class ModelKind : std::uint8_t { kCae = 0, kTriamese = 1, kCTriamese = 2 };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

// Learned per-speaker vectors, keyed by speaker id. Only the decoder ever
// reads them; extraction works without the table.
struct SpeakerTable {
  std::vector<std::string> ids;
  Eigen::MatrixXd embeddings;  // dim x ids.size()
  std::unordered_map<std::string, int> index;

  static SpeakerTable init(const std::vector<std::string>& speaker_ids, int dim,
                           std::uint64_t seed);
  int dim() const { return static_cast<int>(embeddings.rows()); }
  bool empty() const { return ids.empty(); }
  int index_of(const std::string& speaker_id) const;
  void rebuild_index();
};

struct CaeModel {
  NetworkSpec encoder_spec;  // input -> hidden ReLU stack -> linear bottleneck
  NetworkSpec decoder_spec;  // bottleneck [+ speaker dim] -> ... -> linear out
  Parameters encoder;
  Parameters decoder;
  bool speaker_conditioned = false;
  SpeakerTable speakers;

  int input_dim() const { return encoder_spec.input_dim; }
  int bottleneck_dim() const { return encoder_spec.output_dim(); }
};

// preset "default": six 100-unit ReLU layers per stack.
// preset "small": three 50-unit ReLU layers, for quick experiments.
// preset "tiny": one 50-unit ReLU layer. preset "linear": no hidden stack.
CaeModel make_cae_model(int input_dim, std::uint64_t seed,
                        bool speaker_conditioned = false,
                        const std::vector<std::string>& speaker_ids = {},
                        int speaker_dim = 100,
                        const std::string& preset = "default");

struct TriameseModel {
  NetworkSpec branch_spec;
  Parameters branch;
  double margin = 0.15;
};

// preset "default": hidden 100-unit ReLU stack, embedding dim = input dim.
// preset "small": three 50-unit ReLU layers, embedding dim = input dim.
// preset "triamese-100": four 1000-unit ReLU layers, 100-unit embedding.
TriameseModel make_triamese_model(int input_dim, std::uint64_t seed,
                                  double margin = 0.15,
                                  const std::string& preset = "default");

struct CTriameseModel {
  CaeModel cae;  // shared by all three branches
  double margin = 0.15;
};

CTriameseModel make_ctriamese_model(
    int input_dim, std::uint64_t seed, double margin = 0.15,
    bool speaker_conditioned = false,
    const std::vector<std::string>& speaker_ids = {}, int speaker_dim = 100,
    const std::string& preset = "default");

// Scalar losses.
double cae_loss(const CaeModel& model, const Eigen::VectorXd& x_a,
                const Eigen::VectorXd& x_b,
                const std::string* out_speaker = nullptr);
double triplet_loss(const Eigen::VectorXd& e_a, const Eigen::VectorXd& e_b,
                    const Eigen::VectorXd& e_neg, double margin);
double ctriamese_loss(const CTriameseModel& model, const FrameQuadruplet& quad);

// Batched losses with analytic gradients; items are matrix columns. Each
// returns the mean loss over the batch and, when `grads` is non-null, the
// mean gradients in matching shapes.
struct CaeGradients {
  Parameters encoder;
  Parameters decoder;
  Eigen::MatrixXd speakers;  // dim x n_speakers; empty when unconditioned
};

double cae_compute(const CaeModel& model, const Eigen::MatrixXd& x_a,
                   const Eigen::MatrixXd& x_b,
                   const std::vector<int>& out_speakers, CaeGradients* grads);

struct TriameseGradients {
  Parameters branch;
};

double triamese_compute(const TriameseModel& model,
                        const Eigen::MatrixXd& anchor,
                        const Eigen::MatrixXd& positive,
                        const Eigen::MatrixXd& negative,
                        TriameseGradients* grads);

struct CTriameseGradients {
  CaeGradients cae;
};

double ctriamese_compute(const CTriameseModel& model,
                         const Eigen::MatrixXd& x_a,
                         const Eigen::MatrixXd& x_b,
                         const Eigen::MatrixXd& neg_a,
                         const Eigen::MatrixXd& neg_b,
                         const std::vector<int>& speakers_b,
                         const std::vector<int>& speakers_a,
                         const std::vector<int>& speakers_neg_b,
                         CTriameseGradients* grads);

// Flattened trainable-buffer views in a fixed order (encoder, decoder,
// speaker table / branch). Gradient views follow the same order.
std::vector<ParamView> model_views(CaeModel& model);
std::vector<ParamView> grad_views(CaeGradients& grads, bool conditioned);
std::vector<ParamView> model_views(TriameseModel& model);
std::vector<ParamView> grad_views(TriameseGradients& grads);

struct TrainConfig {
  ModelKind kind = ModelKind::kCae;
  int epochs = 20;
  int batch_size = 256;
  std::uint64_t seed = 0;
  double margin = 0.15;
  double learning_rate = 0.0;  // 0 keeps the optimizer default
  bool speaker_conditioning = false;
  std::string arch_preset = "default";
  int patience = 5;           // early-stopping patience in epochs
  bool layerwise_pretrain = false;
  int speaker_dim = 100;

  void validate() const;
  std::string canonical_string() const;
  std::uint32_t digest() const;
};

struct EpochLogEntry {
  int epoch = 0;      // 1-based
  double loss = 0.0;  // mean training loss over the epoch's items
  bool has_val = false;
  double val_ap = 0.0;
};

struct ModelCheckpoint {
  ModelKind kind = ModelKind::kCae;
  std::uint32_t config_digest = 0;
  CaeModel cae;              // kind == kCae
  TriameseModel triamese;    // kind == kTriamese
  CTriameseModel ctriamese;  // kind == kCTriamese
  bool has_optimizer = false;
  Optimizer optimizer;
  std::uint32_t epoch = 0;  // epoch the retained parameters come from
  std::uint64_t seed = 0;
};

struct TrainResult {
  ModelCheckpoint checkpoint;
  std::vector<EpochLogEntry> log;
  int best_epoch = 0;
  bool early_stopped = false;
};

// Optional per-epoch validation: same-different AP on features extracted
// with the current parameters; the best-AP checkpoint is retained.
struct ValidationData {
  std::vector<LabeledWord> words;
  const FeatureSet* features = nullptr;
  Metric metric = Metric::kCosine;
  int num_threads = 1;
};

TrainResult train(const Dataset& data, const TrainConfig& config,
                  const ValidationData* validation = nullptr);

// Bottleneck (CAE, CTriamese) or branch-embedding (Triamese) features.
// Never consults the speaker table.
RowMatrixF extract_frames(const ModelCheckpoint& checkpoint,
                          const Eigen::Ref<const RowMatrixF>& frames);
FeatureSequence extract_features(const ModelCheckpoint& checkpoint,
                                 const FeatureSequence& seq);
FeatureSet extract_set(const ModelCheckpoint& checkpoint, const FeatureSet& set,
                       int num_threads = 1);

void save_checkpoint(const ModelCheckpoint& checkpoint,
                     const std::string& path);
// `expected_digest` of 0 skips the check; on mismatch `digest_mismatch` is
// set (when given) and loading continues.
ModelCheckpoint load_checkpoint(const std::string& path,
                                std::uint32_t expected_digest = 0,
                                bool* digest_mismatch = nullptr);

}  // namespace zr

#endif  // ZR_MODELS_HPP

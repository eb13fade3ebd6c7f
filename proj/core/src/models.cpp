// core/src/models.cpp
// SPDX-License-Identifier: Apache-2.0

#include "zr/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

#include "binio.hpp"
#include "zr/evaluation.hpp"
#include "zr/parallel.hpp"
#include "zr/rng.hpp"

namespace zr {

namespace {

// Sub-stream tags for seed derivation.
constexpr std::uint64_t kSeedEncoder = 10;
constexpr std::uint64_t kSeedDecoder = 11;
constexpr std::uint64_t kSeedSpeakers = 12;
constexpr std::uint64_t kSeedBranch = 13;
constexpr std::uint64_t kSeedShuffle = 20;
constexpr std::uint64_t kSeedPretrainShuffle = 21;
constexpr std::uint64_t kSeedPretrainLayer = 30;

constexpr int kHiddenUnits = 100;
constexpr int kHiddenLayers = 6;

}  // namespace

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "cae") return ModelKind::kCae;
  if (name == "triamese") return ModelKind::kTriamese;
  if (name == "ctriamese") return ModelKind::kCTriamese;
  throw DataError("unknown model kind '" + name +
                  "' (want cae, triamese, or ctriamese)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kCae:
      return "cae";
    case ModelKind::kTriamese:
      return "triamese";
    default:
      return "ctriamese";
  }
}

SpeakerTable SpeakerTable::init(const std::vector<std::string>& speaker_ids,
                                int dim, std::uint64_t seed) {
  if (dim < 1) throw DataError("speaker embedding dim must be positive");
  SpeakerTable table;
  table.ids = speaker_ids;
  table.embeddings.resize(dim, static_cast<Eigen::Index>(speaker_ids.size()));
  Rng rng(seed);
  for (Eigen::Index c = 0; c < table.embeddings.cols(); ++c) {
    for (int r = 0; r < dim; ++r) {
      table.embeddings(r, c) = rng.uniform(-0.05, 0.05);
    }
  }
  table.rebuild_index();
  return table;
}

void SpeakerTable::rebuild_index() {
  index.clear();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!index.emplace(ids[i], static_cast<int>(i)).second) {
      throw DataError("duplicate speaker id '" + ids[i] + "'");
    }
  }
}

int SpeakerTable::index_of(const std::string& speaker_id) const {
  const auto it = index.find(speaker_id);
  if (it == index.end()) {
    throw DataError("unknown speaker id '" + speaker_id + "'");
  }
  return it->second;
}

namespace {

NetworkSpec hidden_stack_spec(int input_dim, int hidden_units,
                              int hidden_layers, int out_units,
                              Activation out_act, std::uint64_t seed) {
  NetworkSpec spec;
  spec.input_dim = input_dim;
  spec.seed = seed;
  for (int l = 0; l < hidden_layers; ++l) {
    spec.layers.push_back({hidden_units, Activation::kRelu});
  }
  spec.layers.push_back({out_units, out_act});
  return spec;
}

struct StackShape {
  int units = kHiddenUnits;
  int layers = kHiddenLayers;
};

StackShape cae_stack_shape(const std::string& preset) {
  if (preset == "default") return {kHiddenUnits, kHiddenLayers};
  if (preset == "small") return {50, 3};
  if (preset == "tiny") return {50, 1};
  if (preset == "linear") return {0, 0};
  throw DataError("unknown architecture preset '" + preset + "'");
}

}  // namespace

CaeModel make_cae_model(int input_dim, std::uint64_t seed,
                        bool speaker_conditioned,
                        const std::vector<std::string>& speaker_ids,
                        int speaker_dim, const std::string& preset) {
  if (input_dim < 1) throw DataError("input dim must be positive");
  const StackShape shape = cae_stack_shape(preset);
  CaeModel model;
  model.speaker_conditioned = speaker_conditioned;
  model.encoder_spec =
      hidden_stack_spec(input_dim, shape.units, shape.layers, input_dim,
                        Activation::kLinear, derive_seed(seed, kSeedEncoder));
  const int dec_in =
      input_dim + (speaker_conditioned ? speaker_dim : 0);
  model.decoder_spec =
      hidden_stack_spec(dec_in, shape.units, shape.layers, input_dim,
                        Activation::kLinear, derive_seed(seed, kSeedDecoder));
  model.encoder = init_parameters(model.encoder_spec);
  model.decoder = init_parameters(model.decoder_spec);
  if (speaker_conditioned) {
    if (speaker_ids.empty()) {
      throw DataError("speaker conditioning needs at least one speaker id");
    }
    model.speakers = SpeakerTable::init(speaker_ids, speaker_dim,
                                        derive_seed(seed, kSeedSpeakers));
  }
  return model;
}

TriameseModel make_triamese_model(int input_dim, std::uint64_t seed,
                                  double margin, const std::string& preset) {
  if (input_dim < 1) throw DataError("input dim must be positive");
  if (!(margin > 0.0)) throw DataError("margin must be positive");
  TriameseModel model;
  model.margin = margin;
  const std::uint64_t branch_seed = derive_seed(seed, kSeedBranch);
  if (preset == "triamese-100") {
    model.branch_spec = hidden_stack_spec(input_dim, 1000, 4, 100,
                                          Activation::kRelu, branch_seed);
  } else {
    const StackShape shape = cae_stack_shape(preset);
    model.branch_spec = hidden_stack_spec(
        input_dim, shape.units, shape.layers, input_dim,
        preset == "linear" ? Activation::kLinear : Activation::kRelu,
        branch_seed);
  }
  model.branch = init_parameters(model.branch_spec);
  if (preset == "linear") {
    // Identity start: epoch zero reproduces the input features, training
    // then refines the map instead of recovering from a random basin.
    model.branch[0].weights.setIdentity();
    model.branch[0].bias.setZero();
  }
  return model;
}

CTriameseModel make_ctriamese_model(int input_dim, std::uint64_t seed,
                                    double margin, bool speaker_conditioned,
                                    const std::vector<std::string>& speaker_ids,
                                    int speaker_dim,
                                    const std::string& preset) {
  if (!(margin > 0.0)) throw DataError("margin must be positive");
  CTriameseModel model;
  model.margin = margin;
  model.cae = make_cae_model(input_dim, seed, speaker_conditioned, speaker_ids,
                             speaker_dim, preset);
  return model;
}

namespace {

// Cosine distance plus its gradients. Zero-norm inputs and the clamped
// region (numerical cosine above 1) yield distance 0 with zero gradient.
double cosine_distance_grad(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                            Eigen::VectorXd* du, Eigen::VectorXd* dv) {
  const double uu = u.dot(u);
  const double vv = v.dot(v);
  if (uu < 1e-24 || vv < 1e-24) {
    if (du != nullptr) du->setZero(u.size());
    if (dv != nullptr) dv->setZero(v.size());
    return 0.0;
  }
  const double c = u.dot(v);
  const double s = std::sqrt(uu * vv);
  const double raw = 1.0 - c / s;
  if (raw <= 0.0) {
    if (du != nullptr) du->setZero(u.size());
    if (dv != nullptr) dv->setZero(v.size());
    return 0.0;
  }
  if (du != nullptr) *du = (c / (s * uu)) * u - v / s;
  if (dv != nullptr) *dv = (c / (s * vv)) * v - u / s;
  return raw;
}

Parameters zero_like(const Parameters& params) {
  Parameters z;
  z.reserve(params.size());
  for (const auto& layer : params) {
    LayerParams l;
    l.weights = Eigen::MatrixXd::Zero(layer.weights.rows(),
                                      layer.weights.cols());
    l.bias = Eigen::VectorXd::Zero(layer.bias.size());
    z.push_back(std::move(l));
  }
  return z;
}

void add_into(Parameters& acc, const Parameters& delta) {
  for (std::size_t l = 0; l < acc.size(); ++l) {
    acc[l].weights += delta[l].weights;
    acc[l].bias += delta[l].bias;
  }
}

void check_batch(const Eigen::MatrixXd& m, int dim, const char* name) {
  if (m.rows() != dim) {
    throw DataError(std::string(name) + " dimension " +
                    std::to_string(m.rows()) + " does not match model input " +
                    std::to_string(dim));
  }
}

}  // namespace

double cae_compute(const CaeModel& model, const Eigen::MatrixXd& x_a,
                   const Eigen::MatrixXd& x_b,
                   const std::vector<int>& out_speakers, CaeGradients* grads) {
  check_batch(x_a, model.input_dim(), "x_a");
  check_batch(x_b, model.input_dim(), "x_b");
  if (x_a.cols() != x_b.cols()) throw DataError("cae batch size mismatch");
  const Eigen::Index batch = x_a.cols();
  if (batch == 0) throw DataError("empty batch");
  if (model.speaker_conditioned &&
      out_speakers.size() != static_cast<std::size_t>(batch)) {
    throw DataError("conditioned model needs one output speaker per item");
  }

  const Activations enc_acts = forward(model.encoder, model.encoder_spec, x_a);
  const Eigen::MatrixXd& bottleneck = enc_acts.back();
  Eigen::MatrixXd dec_in;
  if (model.speaker_conditioned) {
    const int sdim = model.speakers.dim();
    dec_in.resize(bottleneck.rows() + sdim, batch);
    dec_in.topRows(bottleneck.rows()) = bottleneck;
    for (Eigen::Index i = 0; i < batch; ++i) {
      dec_in.block(bottleneck.rows(), i, sdim, 1) =
          model.speakers.embeddings.col(out_speakers[i]);
    }
  } else {
    dec_in = bottleneck;
  }
  const Activations dec_acts = forward(model.decoder, model.decoder_spec,
                                       dec_in);
  const Eigen::MatrixXd residual = dec_acts.back() - x_b;
  const double inv_batch = 1.0 / static_cast<double>(batch);
  const double loss = residual.squaredNorm() * inv_batch;

  if (grads != nullptr) {
    const Eigen::MatrixXd d_out = (2.0 * inv_batch) * residual;
    Gradients dec_g =
        backward(model.decoder, model.decoder_spec, dec_acts, d_out);
    grads->decoder = std::move(dec_g.layers);
    Eigen::MatrixXd d_bottleneck;
    if (model.speaker_conditioned) {
      const int bdim = static_cast<int>(bottleneck.rows());
      const int sdim = model.speakers.dim();
      d_bottleneck = dec_g.input.topRows(bdim);
      grads->speakers = Eigen::MatrixXd::Zero(
          sdim, model.speakers.embeddings.cols());
      for (Eigen::Index i = 0; i < batch; ++i) {
        grads->speakers.col(out_speakers[i]) +=
            dec_g.input.block(bdim, i, sdim, 1);
      }
    } else {
      d_bottleneck = std::move(dec_g.input);
      grads->speakers.resize(0, 0);
    }
    Gradients enc_g = backward(model.encoder, model.encoder_spec, enc_acts,
                               d_bottleneck);
    grads->encoder = std::move(enc_g.layers);
  }
  return loss;
}

double triamese_compute(const TriameseModel& model,
                        const Eigen::MatrixXd& anchor,
                        const Eigen::MatrixXd& positive,
                        const Eigen::MatrixXd& negative,
                        TriameseGradients* grads) {
  const int dim = model.branch_spec.input_dim;
  check_batch(anchor, dim, "anchor");
  check_batch(positive, dim, "positive");
  check_batch(negative, dim, "negative");
  if (anchor.cols() != positive.cols() || anchor.cols() != negative.cols()) {
    throw DataError("triamese batch size mismatch");
  }
  const Eigen::Index batch = anchor.cols();
  if (batch == 0) throw DataError("empty batch");

  const Activations acts_a = forward(model.branch, model.branch_spec, anchor);
  const Activations acts_p = forward(model.branch, model.branch_spec, positive);
  const Activations acts_n = forward(model.branch, model.branch_spec, negative);
  const Eigen::MatrixXd& ea = acts_a.back();
  const Eigen::MatrixXd& ep = acts_p.back();
  const Eigen::MatrixXd& en = acts_n.back();

  const double inv_batch = 1.0 / static_cast<double>(batch);
  const Eigen::Index edim = ea.rows();
  Eigen::MatrixXd ga, gp, gn;
  if (grads != nullptr) {
    ga = Eigen::MatrixXd::Zero(edim, batch);
    gp = Eigen::MatrixXd::Zero(edim, batch);
    gn = Eigen::MatrixXd::Zero(edim, batch);
  }
  double loss_sum = 0.0;
  Eigen::VectorXd du_p(edim), dv_p(edim), du_n(edim), dv_n(edim);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const bool want = grads != nullptr;
    const double d_pos = cosine_distance_grad(
        ea.col(i), ep.col(i), want ? &du_p : nullptr, want ? &dv_p : nullptr);
    const double d_neg = cosine_distance_grad(
        ea.col(i), en.col(i), want ? &du_n : nullptr, want ? &dv_n : nullptr);
    const double hinge = model.margin + d_pos - d_neg;
    if (hinge > 0.0) {
      loss_sum += hinge;
      if (want) {
        ga.col(i) = (du_p - du_n) * inv_batch;
        gp.col(i) = dv_p * inv_batch;
        gn.col(i) = -dv_n * inv_batch;
      }
    }
  }
  const double loss = loss_sum * inv_batch;

  if (grads != nullptr) {
    Gradients g1 = backward(model.branch, model.branch_spec, acts_a, ga);
    const Gradients g2 = backward(model.branch, model.branch_spec, acts_p, gp);
    const Gradients g3 = backward(model.branch, model.branch_spec, acts_n, gn);
    add_into(g1.layers, g2.layers);
    add_into(g1.layers, g3.layers);
    grads->branch = std::move(g1.layers);
  }
  return loss;
}

double ctriamese_compute(const CTriameseModel& model,
                         const Eigen::MatrixXd& x_a,
                         const Eigen::MatrixXd& x_b,
                         const Eigen::MatrixXd& neg_a,
                         const Eigen::MatrixXd& neg_b,
                         const std::vector<int>& speakers_b,
                         const std::vector<int>& speakers_a,
                         const std::vector<int>& speakers_neg_b,
                         CTriameseGradients* grads) {
  const CaeModel& cae = model.cae;
  const int dim = cae.input_dim();
  check_batch(x_a, dim, "x_a");
  check_batch(x_b, dim, "x_b");
  check_batch(neg_a, dim, "neg_a");
  check_batch(neg_b, dim, "neg_b");
  const Eigen::Index batch = x_a.cols();
  if (batch == 0) throw DataError("empty batch");
  if (x_b.cols() != batch || neg_a.cols() != batch || neg_b.cols() != batch) {
    throw DataError("ctriamese batch size mismatch");
  }
  if (cae.speaker_conditioned) {
    const auto n = static_cast<std::size_t>(batch);
    if (speakers_b.size() != n || speakers_a.size() != n ||
        speakers_neg_b.size() != n) {
      throw DataError("conditioned model needs one output speaker per item");
    }
  }

  const Activations enc1 = forward(cae.encoder, cae.encoder_spec, x_a);
  const Activations enc2 = forward(cae.encoder, cae.encoder_spec, x_b);
  const Activations enc3 = forward(cae.encoder, cae.encoder_spec, neg_a);
  const Eigen::MatrixXd& e1 = enc1.back();
  const Eigen::MatrixXd& e2 = enc2.back();
  const Eigen::MatrixXd& e3 = enc3.back();
  const Eigen::Index bdim = e1.rows();

  const auto make_dec_in = [&](const Eigen::MatrixXd& bottleneck,
                               const std::vector<int>& spk) {
    if (!cae.speaker_conditioned) return bottleneck;
    const int sdim = cae.speakers.dim();
    Eigen::MatrixXd dec_in(bdim + sdim, batch);
    dec_in.topRows(bdim) = bottleneck;
    for (Eigen::Index i = 0; i < batch; ++i) {
      dec_in.block(bdim, i, sdim, 1) = cae.speakers.embeddings.col(spk[i]);
    }
    return dec_in;
  };
  const Eigen::MatrixXd din1 = make_dec_in(e1, speakers_b);
  const Eigen::MatrixXd din2 = make_dec_in(e2, speakers_a);
  const Eigen::MatrixXd din3 = make_dec_in(e3, speakers_neg_b);
  const Activations dec1 = forward(cae.decoder, cae.decoder_spec, din1);
  const Activations dec2 = forward(cae.decoder, cae.decoder_spec, din2);
  const Activations dec3 = forward(cae.decoder, cae.decoder_spec, din3);

  const double inv_batch = 1.0 / static_cast<double>(batch);
  const Eigen::MatrixXd r1 = dec1.back() - x_b;
  const Eigen::MatrixXd r2 = dec2.back() - x_a;
  const Eigen::MatrixXd r3 = dec3.back() - neg_b;
  double loss = (r1.squaredNorm() + r2.squaredNorm() + r3.squaredNorm()) *
                inv_batch;

  Eigen::MatrixXd g1, g2, g3;
  if (grads != nullptr) {
    g1 = Eigen::MatrixXd::Zero(bdim, batch);
    g2 = Eigen::MatrixXd::Zero(bdim, batch);
    g3 = Eigen::MatrixXd::Zero(bdim, batch);
  }
  double triplet_sum = 0.0;
  Eigen::VectorXd du_p(bdim), dv_p(bdim), du_n(bdim), dv_n(bdim);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const bool want = grads != nullptr;
    const double d_pos = cosine_distance_grad(
        e1.col(i), e2.col(i), want ? &du_p : nullptr, want ? &dv_p : nullptr);
    const double d_neg = cosine_distance_grad(
        e1.col(i), e3.col(i), want ? &du_n : nullptr, want ? &dv_n : nullptr);
    const double hinge = model.margin + d_pos - d_neg;
    if (hinge > 0.0) {
      triplet_sum += hinge;
      if (want) {
        g1.col(i) = (du_p - du_n) * inv_batch;
        g2.col(i) = dv_p * inv_batch;
        g3.col(i) = -dv_n * inv_batch;
      }
    }
  }
  loss += triplet_sum * inv_batch;

  if (grads != nullptr) {
    CaeGradients& cg = grads->cae;
    cg.encoder = zero_like(cae.encoder);
    cg.decoder = zero_like(cae.decoder);
    const bool cond = cae.speaker_conditioned;
    if (cond) {
      cg.speakers = Eigen::MatrixXd::Zero(cae.speakers.dim(),
                                          cae.speakers.embeddings.cols());
    } else {
      cg.speakers.resize(0, 0);
    }
    const auto branch_backward = [&](const Activations& dec_acts,
                                     const Eigen::MatrixXd& residual,
                                     const Activations& enc_acts,
                                     const Eigen::MatrixXd& triplet_grad,
                                     const std::vector<int>& spk) {
      const Eigen::MatrixXd d_out = (2.0 * inv_batch) * residual;
      Gradients dg = backward(cae.decoder, cae.decoder_spec, dec_acts, d_out);
      add_into(cg.decoder, dg.layers);
      Eigen::MatrixXd d_bottleneck;
      if (cond) {
        const int sdim = cae.speakers.dim();
        d_bottleneck = dg.input.topRows(bdim);
        for (Eigen::Index i = 0; i < batch; ++i) {
          cg.speakers.col(spk[i]) += dg.input.block(bdim, i, sdim, 1);
        }
      } else {
        d_bottleneck = std::move(dg.input);
      }
      d_bottleneck += triplet_grad;
      const Gradients eg =
          backward(cae.encoder, cae.encoder_spec, enc_acts, d_bottleneck);
      add_into(cg.encoder, eg.layers);
    };
    branch_backward(dec1, r1, enc1, g1, speakers_b);
    branch_backward(dec2, r2, enc2, g2, speakers_a);
    branch_backward(dec3, r3, enc3, g3, speakers_neg_b);
  }
  return loss;
}

double cae_loss(const CaeModel& model, const Eigen::VectorXd& x_a,
                const Eigen::VectorXd& x_b, const std::string* out_speaker) {
  std::vector<int> spk;
  if (model.speaker_conditioned) {
    if (out_speaker == nullptr) {
      throw DataError("speaker id required for a speaker-conditioned model");
    }
    spk.push_back(model.speakers.index_of(*out_speaker));
  } else if (out_speaker != nullptr) {
    throw DataError("model is not speaker-conditioned");
  }
  return cae_compute(model, x_a, x_b, spk, nullptr);
}

double triplet_loss(const Eigen::VectorXd& e_a, const Eigen::VectorXd& e_b,
                    const Eigen::VectorXd& e_neg, double margin) {
  if (e_a.size() != e_b.size() || e_a.size() != e_neg.size()) {
    throw DataError("triplet embeddings must have equal dimension");
  }
  return std::max(0.0, margin + cosine_distance(e_a, e_b) -
                           cosine_distance(e_a, e_neg));
}

double ctriamese_loss(const CTriameseModel& model,
                      const FrameQuadruplet& quad) {
  const FramePair& pair = quad.triplet.pair;
  std::vector<int> spk_b, spk_a, spk_nb;
  if (model.cae.speaker_conditioned) {
    spk_b.push_back(model.cae.speakers.index_of(pair.speaker_b));
    spk_a.push_back(model.cae.speakers.index_of(pair.speaker_a));
    spk_nb.push_back(model.cae.speakers.index_of(quad.neg_b_speaker));
  }
  return ctriamese_compute(model, pair.x_a.cast<double>(),
                           pair.x_b.cast<double>(),
                           quad.triplet.x_neg.cast<double>(),
                           quad.x_neg_b.cast<double>(), spk_b, spk_a, spk_nb,
                           nullptr);
}

std::vector<ParamView> model_views(CaeModel& model) {
  std::vector<ParamView> views = param_views(model.encoder);
  for (auto v : param_views(model.decoder)) views.push_back(v);
  if (model.speaker_conditioned) {
    views.push_back(
        {model.speakers.embeddings.data(), model.speakers.embeddings.size()});
  }
  return views;
}

std::vector<ParamView> grad_views(CaeGradients& grads, bool conditioned) {
  std::vector<ParamView> views = param_views(grads.encoder);
  for (auto v : param_views(grads.decoder)) views.push_back(v);
  if (conditioned) {
    views.push_back({grads.speakers.data(), grads.speakers.size()});
  }
  return views;
}

std::vector<ParamView> model_views(TriameseModel& model) {
  return param_views(model.branch);
}

std::vector<ParamView> grad_views(TriameseGradients& grads) {
  return param_views(grads.branch);
}

void TrainConfig::validate() const {
  if (epochs < 1) throw DataError("epochs must be positive");
  if (batch_size < 1) throw DataError("batch size must be positive");
  if (!(margin > 0.0 && margin < 2.0)) {
    throw DataError("margin must be in (0, 2)");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw DataError("learning rate must be finite and non-negative");
  }
  if (patience < 1) throw DataError("patience must be positive");
  if (speaker_dim < 1) throw DataError("speaker dim must be positive");
  if (arch_preset != "default" && arch_preset != "small" &&
      arch_preset != "tiny" && arch_preset != "linear" &&
      arch_preset != "triamese-100") {
    throw DataError("unknown architecture preset '" + arch_preset + "'");
  }
}

std::string TrainConfig::canonical_string() const {
  std::string s;
  s += "kind=" + to_string(kind);
  s += ";epochs=" + std::to_string(epochs);
  s += ";batch_size=" + std::to_string(batch_size);
  s += ";seed=" + std::to_string(seed);
  s += ";margin=" + format_double(margin);
  s += ";learning_rate=" + format_double(learning_rate);
  s += ";speaker_conditioning=" + std::string(speaker_conditioning ? "1" : "0");
  s += ";arch_preset=" + arch_preset;
  s += ";patience=" + std::to_string(patience);
  s += ";layerwise_pretrain=" + std::string(layerwise_pretrain ? "1" : "0");
  s += ";speaker_dim=" + std::to_string(speaker_dim);
  return s;
}

std::uint32_t TrainConfig::digest() const {
  return fnv1a32(canonical_string());
}

namespace {

Optimizer make_optimizer(Optimizer::Kind kind, double learning_rate) {
  if (kind == Optimizer::Kind::kAdadelta) {
    AdadeltaConfig config;
    if (learning_rate > 0.0) config.learning_rate = learning_rate;
    return Optimizer::adadelta(config);
  }
  SgdConfig config;
  if (learning_rate > 0.0) config.learning_rate = learning_rate;
  return Optimizer::sgd(config);
}

// Greedy warm start: each stack layer is trained for one pass as the hidden
// layer of a shallow autoencoder over the previous layers' output, then
// adopted.
void pretrain_stack(Parameters& stack, const NetworkSpec& stack_spec,
                    const Eigen::MatrixXd& data, Optimizer::Kind opt_kind,
                    const TrainConfig& config) {
  Eigen::MatrixXd cur = data;
  Rng shuffle_rng(derive_seed(config.seed, kSeedPretrainShuffle));
  const Eigen::Index n = data.cols();
  for (std::size_t l = 0; l < stack.size(); ++l) {
    NetworkSpec sub;
    sub.input_dim = static_cast<int>(cur.rows());
    sub.layers.push_back(stack_spec.layers[l]);
    sub.layers.push_back(
        {static_cast<int>(cur.rows()), Activation::kLinear});
    sub.seed = derive_seed(config.seed, kSeedPretrainLayer + l);
    Parameters sub_params = init_parameters(sub);
    Optimizer opt = make_optimizer(opt_kind, config.learning_rate);
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(order);
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index bn = std::min<Eigen::Index>(config.batch_size,
                                                     n - start);
      Eigen::MatrixXd x(cur.rows(), bn);
      for (Eigen::Index c = 0; c < bn; ++c) {
        x.col(c) = cur.col(order[start + c]);
      }
      const Activations acts = forward(sub_params, sub, x);
      const Eigen::MatrixXd d_out =
          (2.0 / static_cast<double>(bn)) * (acts.back() - x);
      const Gradients g = backward(sub_params, sub, acts, d_out);
      opt.step(param_views(sub_params),
               param_views(const_cast<Parameters&>(g.layers)));
    }
    stack[l] = sub_params[0];
    Eigen::MatrixXd z = (stack[l].weights * cur).colwise() + stack[l].bias;
    if (stack_spec.layers[l].activation == Activation::kRelu) {
      z = z.cwiseMax(0.0);
    }
    cur = std::move(z);
  }
}

void round_f32(Eigen::MatrixXd& m) {
  m = m.cast<float>().cast<double>().eval();
}

void round_f32(Eigen::VectorXd& v) {
  v = v.cast<float>().cast<double>().eval();
}

void round_f32(Parameters& params) {
  for (auto& layer : params) {
    round_f32(layer.weights);
    round_f32(layer.bias);
  }
}

void round_f32(Optimizer& opt) {
  for (auto& v : opt.grad_sq()) round_f32(v);
  for (auto& v : opt.delta_sq()) round_f32(v);
}

void round_checkpoint_f32(ModelCheckpoint& ckpt) {
  switch (ckpt.kind) {
    case ModelKind::kCae:
      round_f32(ckpt.cae.encoder);
      round_f32(ckpt.cae.decoder);
      round_f32(ckpt.cae.speakers.embeddings);
      break;
    case ModelKind::kTriamese:
      round_f32(ckpt.triamese.branch);
      break;
    default:
      round_f32(ckpt.ctriamese.cae.encoder);
      round_f32(ckpt.ctriamese.cae.decoder);
      round_f32(ckpt.ctriamese.cae.speakers.embeddings);
      break;
  }
  if (ckpt.has_optimizer) round_f32(ckpt.optimizer);
}

RowMatrixF extract_with(const Parameters& params, const NetworkSpec& spec,
                        const Eigen::Ref<const RowMatrixF>& frames) {
  if (frames.cols() != spec.input_dim) {
    throw DataError("feature dim " + std::to_string(frames.cols()) +
                    " does not match model input " +
                    std::to_string(spec.input_dim));
  }
  const Eigen::MatrixXd batch = frames.cast<double>().transpose();
  const Activations acts = forward(params, spec, batch);
  return acts.back().transpose().cast<float>();
}

double validation_ap(const Parameters& params, const NetworkSpec& spec,
                     const ValidationData& val) {
  FeatureSet extracted;
  for (const auto& word : val.words) {
    if (extracted.contains(word.segment.utterance_id)) continue;
    const FeatureSequence& seq = val.features->at(word.segment.utterance_id);
    extracted.add({seq.utterance_id, extract_with(params, spec, seq.frames),
                   seq.frame_rate_hz});
  }
  SameDifferentOptions options;
  options.metric = val.metric;
  options.num_threads = val.num_threads;
  return same_different_ap(val.words, extracted, options).ap;
}

}  // namespace

TrainResult train(const Dataset& data, const TrainConfig& config,
                  const ValidationData* validation) {
  config.validate();
  if (data.size() == 0) throw DataError("empty training set");
  const DatasetKind want = config.kind == ModelKind::kCae
                               ? DatasetKind::kFramePairs
                               : config.kind == ModelKind::kTriamese
                                     ? DatasetKind::kFrameTriplets
                                     : DatasetKind::kFrameQuadruplets;
  if (data.kind != want) {
    throw DataError("model kind '" + to_string(config.kind) + "' needs a " +
                    to_string(want) + " dataset, got " + to_string(data.kind));
  }
  if (validation != nullptr && validation->features == nullptr) {
    throw DataError("validation set has no features");
  }
  const int dim = data.dim;

  CaeModel cae;
  TriameseModel triamese;
  CTriameseModel ctriamese;
  const std::vector<std::string> speaker_ids =
      config.speaker_conditioning ? data.speaker_ids()
                                  : std::vector<std::string>{};
  switch (config.kind) {
    case ModelKind::kCae:
      cae = make_cae_model(dim, config.seed, config.speaker_conditioning,
                           speaker_ids, config.speaker_dim,
                           config.arch_preset);
      break;
    case ModelKind::kTriamese:
      triamese = make_triamese_model(dim, config.seed, config.margin,
                                     config.arch_preset);
      break;
    default:
      ctriamese =
          make_ctriamese_model(dim, config.seed, config.margin,
                               config.speaker_conditioning, speaker_ids,
                               config.speaker_dim, config.arch_preset);
      break;
  }

  Optimizer optimizer = make_optimizer(config.kind == ModelKind::kTriamese
                                           ? Optimizer::Kind::kSgd
                                           : Optimizer::Kind::kAdadelta,
                                       config.learning_rate);

  if (config.layerwise_pretrain) {
    const std::size_t n = data.size();
    Eigen::MatrixXd anchors(dim, n);
    for (std::size_t i = 0; i < n; ++i) {
      switch (config.kind) {
        case ModelKind::kCae:
          anchors.col(i) = data.pairs[i].x_a.cast<double>();
          break;
        case ModelKind::kTriamese:
          anchors.col(i) = data.triplets[i].pair.x_a.cast<double>();
          break;
        default:
          anchors.col(i) = data.quadruplets[i].triplet.pair.x_a.cast<double>();
          break;
      }
    }
    switch (config.kind) {
      case ModelKind::kCae:
        pretrain_stack(cae.encoder, cae.encoder_spec, anchors,
                       Optimizer::Kind::kAdadelta, config);
        break;
      case ModelKind::kTriamese:
        pretrain_stack(triamese.branch, triamese.branch_spec, anchors,
                       Optimizer::Kind::kSgd, config);
        break;
      default:
        pretrain_stack(ctriamese.cae.encoder, ctriamese.cae.encoder_spec,
                       anchors, Optimizer::Kind::kAdadelta, config);
        break;
    }
  }

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(derive_seed(config.seed, kSeedShuffle));

  TrainResult result;
  double best_ap = -std::numeric_limits<double>::infinity();
  int epochs_without_improvement = 0;
  CaeModel best_cae;
  TriameseModel best_triamese;
  CTriameseModel best_ctriamese;
  Optimizer best_optimizer;
  int epochs_run = 0;

  CaeGradients cae_grads;
  TriameseGradients tri_grads;
  CTriameseGradients ctri_grads;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t bn =
          std::min<std::size_t>(config.batch_size, n - start);
      double batch_loss = 0.0;
      if (config.kind == ModelKind::kCae) {
        Eigen::MatrixXd xa(dim, bn), xb(dim, bn);
        std::vector<int> spk;
        if (cae.speaker_conditioned) spk.reserve(bn);
        for (std::size_t c = 0; c < bn; ++c) {
          const FramePair& p = data.pairs[order[start + c]];
          xa.col(c) = p.x_a.cast<double>();
          xb.col(c) = p.x_b.cast<double>();
          if (cae.speaker_conditioned) {
            spk.push_back(cae.speakers.index_of(p.speaker_b));
          }
        }
        batch_loss = cae_compute(cae, xa, xb, spk, &cae_grads);
        optimizer.step(model_views(cae),
                       grad_views(cae_grads, cae.speaker_conditioned));
      } else if (config.kind == ModelKind::kTriamese) {
        Eigen::MatrixXd xa(dim, bn), xb(dim, bn), xn(dim, bn);
        for (std::size_t c = 0; c < bn; ++c) {
          const FrameTriplet& t = data.triplets[order[start + c]];
          xa.col(c) = t.pair.x_a.cast<double>();
          xb.col(c) = t.pair.x_b.cast<double>();
          xn.col(c) = t.x_neg.cast<double>();
        }
        batch_loss = triamese_compute(triamese, xa, xb, xn, &tri_grads);
        optimizer.step(model_views(triamese), grad_views(tri_grads));
      } else {
        Eigen::MatrixXd xa(dim, bn), xb(dim, bn), na(dim, bn), nb(dim, bn);
        std::vector<int> spk_b, spk_a, spk_nb;
        const bool cond = ctriamese.cae.speaker_conditioned;
        for (std::size_t c = 0; c < bn; ++c) {
          const FrameQuadruplet& q = data.quadruplets[order[start + c]];
          xa.col(c) = q.triplet.pair.x_a.cast<double>();
          xb.col(c) = q.triplet.pair.x_b.cast<double>();
          na.col(c) = q.triplet.x_neg.cast<double>();
          nb.col(c) = q.x_neg_b.cast<double>();
          if (cond) {
            const SpeakerTable& table = ctriamese.cae.speakers;
            spk_b.push_back(table.index_of(q.triplet.pair.speaker_b));
            spk_a.push_back(table.index_of(q.triplet.pair.speaker_a));
            spk_nb.push_back(table.index_of(q.neg_b_speaker));
          }
        }
        batch_loss = ctriamese_compute(ctriamese, xa, xb, na, nb, spk_b,
                                       spk_a, spk_nb, &ctri_grads);
        optimizer.step(model_views(ctriamese.cae),
                       grad_views(ctri_grads.cae, cond));
      }
      loss_sum += batch_loss * static_cast<double>(bn);
    }
    epochs_run = epoch;

    EpochLogEntry entry;
    entry.epoch = epoch;
    entry.loss = loss_sum / static_cast<double>(n);
    if (validation != nullptr) {
      entry.has_val = true;
      switch (config.kind) {
        case ModelKind::kCae:
          entry.val_ap = validation_ap(cae.encoder, cae.encoder_spec,
                                       *validation);
          break;
        case ModelKind::kTriamese:
          entry.val_ap = validation_ap(triamese.branch, triamese.branch_spec,
                                       *validation);
          break;
        default:
          entry.val_ap = validation_ap(ctriamese.cae.encoder,
                                       ctriamese.cae.encoder_spec,
                                       *validation);
          break;
      }
      if (entry.val_ap > best_ap) {
        best_ap = entry.val_ap;
        result.best_epoch = epoch;
        best_cae = cae;
        best_triamese = triamese;
        best_ctriamese = ctriamese;
        best_optimizer = optimizer;
        epochs_without_improvement = 0;
      } else {
        ++epochs_without_improvement;
      }
    }
    result.log.push_back(entry);
    if (validation != nullptr &&
        epochs_without_improvement >= config.patience) {
      result.early_stopped = true;
      break;
    }
  }

  ModelCheckpoint& ckpt = result.checkpoint;
  ckpt.kind = config.kind;
  ckpt.config_digest = config.digest();
  ckpt.seed = config.seed;
  ckpt.has_optimizer = true;
  if (validation != nullptr) {
    ckpt.cae = std::move(best_cae);
    ckpt.triamese = std::move(best_triamese);
    ckpt.ctriamese = std::move(best_ctriamese);
    ckpt.optimizer = std::move(best_optimizer);
    ckpt.epoch = static_cast<std::uint32_t>(result.best_epoch);
  } else {
    ckpt.cae = std::move(cae);
    ckpt.triamese = std::move(triamese);
    ckpt.ctriamese = std::move(ctriamese);
    ckpt.optimizer = std::move(optimizer);
    ckpt.epoch = static_cast<std::uint32_t>(epochs_run);
    result.best_epoch = epochs_run;
  }
  round_checkpoint_f32(ckpt);
  return result;
}

RowMatrixF extract_frames(const ModelCheckpoint& checkpoint,
                          const Eigen::Ref<const RowMatrixF>& frames) {
  switch (checkpoint.kind) {
    case ModelKind::kCae:
      return extract_with(checkpoint.cae.encoder, checkpoint.cae.encoder_spec,
                          frames);
    case ModelKind::kTriamese:
      return extract_with(checkpoint.triamese.branch,
                          checkpoint.triamese.branch_spec, frames);
    default:
      return extract_with(checkpoint.ctriamese.cae.encoder,
                          checkpoint.ctriamese.cae.encoder_spec, frames);
  }
}

FeatureSequence extract_features(const ModelCheckpoint& checkpoint,
                                 const FeatureSequence& seq) {
  return {seq.utterance_id, extract_frames(checkpoint, seq.frames),
          seq.frame_rate_hz};
}

FeatureSet extract_set(const ModelCheckpoint& checkpoint,
                       const FeatureSet& set, int num_threads) {
  std::vector<FeatureSequence> out(set.size());
  parallel_for(set.size(), num_threads, [&](std::size_t i) {
    out[i] = extract_features(checkpoint, set.sequences()[i]);
  });
  return FeatureSet(std::move(out));
}

namespace {

using io::read_bytes;
using io::read_pod;
using io::read_string16;
using io::write_bytes;
using io::write_pod;
using io::write_string16;

constexpr char kCheckpointMagic[6] = {'Z', 'R', 'C', 'K', '1', '\0'};

void write_spec(std::ostream& os, const NetworkSpec& spec) {
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(spec.input_dim));
  write_pod<std::uint64_t>(os, spec.seed);
  write_pod<std::uint16_t>(os, static_cast<std::uint16_t>(spec.layers.size()));
  for (const auto& layer : spec.layers) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(layer.units));
    write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(layer.activation));
  }
}

NetworkSpec read_spec(std::istream& is) {
  NetworkSpec spec;
  spec.input_dim =
      static_cast<int>(read_pod<std::uint32_t>(is, "network input dim"));
  spec.seed = read_pod<std::uint64_t>(is, "network seed");
  const auto n_layers = read_pod<std::uint16_t>(is, "layer count");
  for (std::uint16_t l = 0; l < n_layers; ++l) {
    NetworkSpec::Layer layer;
    layer.units = static_cast<int>(read_pod<std::uint32_t>(is, "layer units"));
    const auto act = read_pod<std::uint8_t>(is, "layer activation");
    if (act > 1) throw DataError("corrupt checkpoint: bad activation code");
    layer.activation = static_cast<Activation>(act);
    spec.layers.push_back(layer);
  }
  spec.validate();
  return spec;
}

void write_params(std::ostream& os, const Parameters& params) {
  write_pod<std::uint16_t>(os, static_cast<std::uint16_t>(params.size()));
  for (const auto& layer : params) {
    write_pod<std::uint32_t>(os,
                             static_cast<std::uint32_t>(layer.weights.rows()));
    write_pod<std::uint32_t>(os,
                             static_cast<std::uint32_t>(layer.weights.cols()));
    const RowMatrixF w = layer.weights.cast<float>();
    write_bytes(os, w.data(), sizeof(float) * w.size());
    const Eigen::VectorXf b = layer.bias.cast<float>();
    write_bytes(os, b.data(), sizeof(float) * b.size());
  }
}

Parameters read_params(std::istream& is, const NetworkSpec& spec) {
  const auto n_layers = read_pod<std::uint16_t>(is, "parameter layer count");
  if (n_layers != spec.layers.size()) {
    throw DataError("corrupt checkpoint: parameter/spec layer count mismatch");
  }
  Parameters params;
  int fan_in = spec.input_dim;
  for (std::uint16_t l = 0; l < n_layers; ++l) {
    const auto rows = read_pod<std::uint32_t>(is, "weight rows");
    const auto cols = read_pod<std::uint32_t>(is, "weight cols");
    if (rows != static_cast<std::uint32_t>(spec.layers[l].units) ||
        cols != static_cast<std::uint32_t>(fan_in)) {
      throw DataError("corrupt checkpoint: weight shape mismatch");
    }
    RowMatrixF w(rows, cols);
    read_bytes(is, w.data(), sizeof(float) * w.size(), "weights");
    Eigen::VectorXf b(rows);
    read_bytes(is, b.data(), sizeof(float) * b.size(), "bias");
    LayerParams layer;
    layer.weights = w.cast<double>();
    layer.bias = b.cast<double>();
    params.push_back(std::move(layer));
    fan_in = static_cast<int>(rows);
  }
  return params;
}

void write_cae(std::ostream& os, const CaeModel& model) {
  write_pod<std::uint8_t>(os, model.speaker_conditioned ? 1 : 0);
  write_spec(os, model.encoder_spec);
  write_params(os, model.encoder);
  write_spec(os, model.decoder_spec);
  write_params(os, model.decoder);
  if (model.speaker_conditioned) {
    const auto n = static_cast<std::uint32_t>(model.speakers.ids.size());
    write_pod<std::uint32_t>(os, n);
    write_pod<std::uint32_t>(
        os, static_cast<std::uint32_t>(model.speakers.dim()));
    for (std::uint32_t i = 0; i < n; ++i) {
      write_string16(os, model.speakers.ids[i]);
      const Eigen::VectorXf col = model.speakers.embeddings.col(i).cast<float>();
      write_bytes(os, col.data(), sizeof(float) * col.size());
    }
  }
}

CaeModel read_cae(std::istream& is) {
  CaeModel model;
  model.speaker_conditioned =
      read_pod<std::uint8_t>(is, "conditioning flag") != 0;
  model.encoder_spec = read_spec(is);
  model.encoder = read_params(is, model.encoder_spec);
  model.decoder_spec = read_spec(is);
  model.decoder = read_params(is, model.decoder_spec);
  if (model.speaker_conditioned) {
    const auto n = read_pod<std::uint32_t>(is, "speaker count");
    const auto dim = read_pod<std::uint32_t>(is, "speaker dim");
    model.speakers.embeddings.resize(dim, n);
    model.speakers.ids.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      model.speakers.ids[i] = read_string16(is, "speaker id");
      Eigen::VectorXf col(dim);
      read_bytes(is, col.data(), sizeof(float) * col.size(),
                 "speaker embedding");
      model.speakers.embeddings.col(i) = col.cast<double>();
    }
    model.speakers.rebuild_index();
  }
  return model;
}

void write_optimizer(std::ostream& os, const Optimizer& opt) {
  write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(opt.kind()));
  write_pod<std::uint64_t>(os, opt.step_count());
  if (opt.kind() == Optimizer::Kind::kAdadelta) {
    const AdadeltaConfig& c = opt.adadelta_config();
    write_pod<double>(os, c.rho);
    write_pod<double>(os, c.epsilon);
    write_pod<double>(os, c.learning_rate);
    const auto n = static_cast<std::uint32_t>(opt.grad_sq().size());
    write_pod<std::uint32_t>(os, n);
    for (std::uint32_t i = 0; i < n; ++i) {
      const Eigen::VectorXf g = opt.grad_sq()[i].cast<float>();
      const Eigen::VectorXf d = opt.delta_sq()[i].cast<float>();
      write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(g.size()));
      write_bytes(os, g.data(), sizeof(float) * g.size());
      write_bytes(os, d.data(), sizeof(float) * d.size());
    }
  } else {
    const SgdConfig& c = opt.sgd_config();
    write_pod<double>(os, c.learning_rate);
    write_pod<double>(os, c.decay);
  }
}

Optimizer read_optimizer(std::istream& is) {
  const auto kind = read_pod<std::uint8_t>(is, "optimizer kind");
  if (kind > 1) throw DataError("corrupt checkpoint: bad optimizer kind");
  const auto steps = read_pod<std::uint64_t>(is, "optimizer step count");
  if (kind == 0) {
    AdadeltaConfig config;
    config.rho = read_pod<double>(is, "adadelta rho");
    config.epsilon = read_pod<double>(is, "adadelta epsilon");
    config.learning_rate = read_pod<double>(is, "adadelta lr");
    Optimizer opt = Optimizer::adadelta(config);
    const auto n = read_pod<std::uint32_t>(is, "accumulator count");
    opt.grad_sq().resize(n);
    opt.delta_sq().resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto size = read_pod<std::uint64_t>(is, "accumulator size");
      Eigen::VectorXf g(static_cast<Eigen::Index>(size));
      Eigen::VectorXf d(static_cast<Eigen::Index>(size));
      read_bytes(is, g.data(), sizeof(float) * g.size(), "grad accumulator");
      read_bytes(is, d.data(), sizeof(float) * d.size(), "delta accumulator");
      opt.grad_sq()[i] = g.cast<double>();
      opt.delta_sq()[i] = d.cast<double>();
    }
    opt.set_step_count(steps);
    return opt;
  }
  SgdConfig config;
  config.learning_rate = read_pod<double>(is, "sgd lr");
  config.decay = read_pod<double>(is, "sgd decay");
  Optimizer opt = Optimizer::sgd(config);
  opt.set_step_count(steps);
  return opt;
}

}  // namespace

void save_checkpoint(const ModelCheckpoint& checkpoint,
                     const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write '" + path + "'");
  write_bytes(os, kCheckpointMagic, sizeof(kCheckpointMagic));
  write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(checkpoint.kind));
  write_pod<std::uint32_t>(os, checkpoint.config_digest);
  write_pod<std::uint32_t>(os, checkpoint.epoch);
  write_pod<std::uint64_t>(os, checkpoint.seed);
  switch (checkpoint.kind) {
    case ModelKind::kCae:
      write_cae(os, checkpoint.cae);
      break;
    case ModelKind::kTriamese:
      write_pod<double>(os, checkpoint.triamese.margin);
      write_spec(os, checkpoint.triamese.branch_spec);
      write_params(os, checkpoint.triamese.branch);
      break;
    default:
      write_pod<double>(os, checkpoint.ctriamese.margin);
      write_cae(os, checkpoint.ctriamese.cae);
      break;
  }
  write_pod<std::uint8_t>(os, checkpoint.has_optimizer ? 1 : 0);
  if (checkpoint.has_optimizer) write_optimizer(os, checkpoint.optimizer);
  if (!os.good()) throw DataError("short write to '" + path + "'");
}

ModelCheckpoint load_checkpoint(const std::string& path,
                                std::uint32_t expected_digest,
                                bool* digest_mismatch) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open '" + path + "'");
  char magic[sizeof(kCheckpointMagic)];
  read_bytes(is, magic, sizeof(magic), "checkpoint magic");
  if (!std::equal(magic, magic + sizeof(magic), kCheckpointMagic)) {
    throw DataError("'" + path + "' is not a checkpoint file");
  }
  ModelCheckpoint checkpoint;
  const auto kind = read_pod<std::uint8_t>(is, "model kind");
  if (kind > 2) throw DataError("corrupt checkpoint: unknown model kind");
  checkpoint.kind = static_cast<ModelKind>(kind);
  checkpoint.config_digest = read_pod<std::uint32_t>(is, "config digest");
  checkpoint.epoch = read_pod<std::uint32_t>(is, "epoch");
  checkpoint.seed = read_pod<std::uint64_t>(is, "seed");
  if (digest_mismatch != nullptr) *digest_mismatch = false;
  if (expected_digest != 0 && expected_digest != checkpoint.config_digest &&
      digest_mismatch != nullptr) {
    *digest_mismatch = true;
  }
  switch (checkpoint.kind) {
    case ModelKind::kCae:
      checkpoint.cae = read_cae(is);
      break;
    case ModelKind::kTriamese:
      checkpoint.triamese.margin = read_pod<double>(is, "margin");
      checkpoint.triamese.branch_spec = read_spec(is);
      checkpoint.triamese.branch =
          read_params(is, checkpoint.triamese.branch_spec);
      break;
    default:
      checkpoint.ctriamese.margin = read_pod<double>(is, "margin");
      checkpoint.ctriamese.cae = read_cae(is);
      break;
  }
  checkpoint.has_optimizer =
      read_pod<std::uint8_t>(is, "optimizer flag") != 0;
  if (checkpoint.has_optimizer) {
    checkpoint.optimizer = read_optimizer(is);
  }
  return checkpoint;
}

}  // namespace zr

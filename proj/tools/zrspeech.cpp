// tools/zrspeech.cpp
// SPDX-License-Identifier: Apache-2.0
//
// Pipeline driver. Every subcommand echoes its effective configuration and
// a stable digest of it; commands with a file output also write a JSON
// manifest next to that output. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 numeric failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zr/alignment.hpp"
#include "zr/common.hpp"
#include "zr/evaluation.hpp"
#include "zr/features.hpp"
#include "zr/models.hpp"
#include "zr/pairing.hpp"
#include "zr/parallel.hpp"
#include "zr/rng.hpp"
#include "zr/segments.hpp"
#include "zr/synthetic.hpp"
#include "zr/wav.hpp"

namespace fs = std::filesystem;
using namespace zr;

namespace {

std::string hex32(std::uint32_t value) {
  static const char* digits = "0123456789abcdef";
  std::string s(8, '0');
  for (int i = 7; i >= 0; --i) {
    s[i] = digits[value & 0xF];
    value >>= 4;
  }
  return s;
}

class RunConfig {
 public:
  explicit RunConfig(std::string command) {
    set("command", std::move(command));
  }
  void set(const std::string& key, std::string value) {
    values_.emplace_back(key, std::move(value));
  }
  void set(const std::string& key, const char* value) {
    set(key, std::string(value));
  }
  void set(const std::string& key, bool value) {
    set(key, std::string(value ? "1" : "0"));
  }
  void set(const std::string& key, double value) {
    set(key, format_double(value));
  }
  template <typename T>
  void set(const std::string& key, T value) {
    set(key, std::to_string(value));
  }

  std::string canonical() const {
    std::string s;
    for (const auto& [k, v] : values_) {
      if (!s.empty()) s += ';';
      s += k + '=' + v;
    }
    return s;
  }
  std::uint32_t digest() const { return fnv1a32(canonical()); }

  // Echoes to stdout; writes `<output>.manifest.json` when an output path
  // is given.
  void echo(const std::string& output_path = "") const {
    std::cout << "config " << canonical() << "\n";
    std::cout << "config_digest " << hex32(digest()) << "\n";
    if (output_path.empty()) return;
    nlohmann::ordered_json j;
    for (const auto& [k, v] : values_) j[k] = v;
    nlohmann::ordered_json manifest;
    manifest["config"] = std::move(j);
    manifest["config_digest"] = hex32(digest());
    const std::string path = output_path + ".manifest.json";
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write '" + path + "'");
    os << manifest.dump(2) << "\n";
  }

 private:
  std::vector<std::pair<std::string, std::string>> values_;
};

// ---------------------------------------------------------------------------
// featurize

struct FeaturizeOptions {
  std::string input;
  std::string speakers;
  std::string out;
  std::string cmvn = "speaker";
};

std::vector<std::pair<std::string, std::string>> wav_inputs(
    const std::string& input) {
  std::vector<std::pair<std::string, std::string>> items;  // (utt, path)
  if (fs::is_directory(input)) {
    for (const auto& entry : fs::directory_iterator(input)) {
      if (entry.path().extension() == ".wav") {
        items.emplace_back(entry.path().stem().string(),
                           entry.path().string());
      }
    }
    std::sort(items.begin(), items.end());
    return items;
  }
  std::ifstream is(input);
  if (!is) throw DataError("cannot open '" + input + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("expected `utterance<TAB>path` in " + input + " line " +
                      std::to_string(line_no));
    }
    items.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return items;
}

void cmd_featurize(const FeaturizeOptions& opt) {
  RunConfig rc("featurize");
  rc.set("input", opt.input);
  rc.set("speakers", opt.speakers);
  rc.set("out", opt.out);
  rc.set("cmvn", opt.cmvn);

  const SpeakerMap speakers = read_speaker_map(opt.speakers);
  const auto inputs = wav_inputs(opt.input);
  if (inputs.empty()) throw DataError("no WAV inputs found in " + opt.input);

  std::vector<FeatureSequence> mfccs;
  mfccs.reserve(inputs.size());
  for (const auto& [utt, path] : inputs) {
    speakers.speaker_of(utt);  // fail early, naming the utterance
    const WavData wav = read_wav(path);
    mfccs.push_back(compute_mfcc(wav.samples, wav.sample_rate_hz, utt));
  }
  const CmvnGrouping grouping = opt.cmvn == "utterance"
                                    ? CmvnGrouping::kUtterance
                                    : CmvnGrouping::kSpeaker;
  std::vector<FeatureSequence> normalized =
      apply_cmvn(mfccs, speakers, grouping);
  std::vector<FeatureSequence> out;
  out.reserve(normalized.size());
  for (const auto& seq : normalized) out.push_back(add_deltas(seq));
  write_archive(out, opt.out);
  rc.echo(opt.out);
  std::cout << "records " << out.size() << "\n";
}

// ---------------------------------------------------------------------------
// pairs

struct PairsOptions {
  std::string features;
  std::string speakers;
  std::string pairs;
  std::string out;
  std::string model = "cae";
  std::string metric = "cosine";
  std::uint64_t seed = 0;
};

void cmd_pairs(const PairsOptions& opt) {
  RunConfig rc("pairs");
  rc.set("features", opt.features);
  rc.set("speakers", opt.speakers);
  rc.set("pairs", opt.pairs);
  rc.set("out", opt.out);
  rc.set("model", opt.model);
  rc.set("metric", opt.metric);
  rc.set("seed", opt.seed);

  const ModelKind kind = model_kind_from_string(opt.model);
  const Metric metric = metric_from_string(opt.metric);
  const FeatureSet features(read_archive(opt.features));
  const SpeakerMap speakers = read_speaker_map(opt.speakers);
  const auto discovered = load_pair_list(opt.pairs, features, speakers);
  const auto segments = collect_segments(discovered);
  const auto frame_pairs = build_frame_pairs(discovered, features, metric);
  std::cout << "frame_pairs " << frame_pairs.size() << "\n";

  Dataset dataset;
  dataset.dim = features.size() > 0 ? features.sequences()[0].dim() : 1;
  if (!frame_pairs.empty()) {
    dataset.dim = static_cast<int>(frame_pairs[0].x_a.size());
  }
  if (kind == ModelKind::kCae) {
    dataset.kind = DatasetKind::kFramePairs;
    dataset.pairs = frame_pairs;
  } else {
    SamplingSummary triplet_summary;
    auto triplets = sample_triplets(frame_pairs, segments, features, opt.seed,
                                    &triplet_summary);
    std::cout << "triplets " << triplet_summary.emitted << " (dropped "
              << triplet_summary.dropped << ")\n";
    if (kind == ModelKind::kTriamese) {
      dataset.kind = DatasetKind::kFrameTriplets;
      dataset.triplets = std::move(triplets);
    } else {
      SamplingSummary quad_summary;
      dataset.kind = DatasetKind::kFrameQuadruplets;
      dataset.quadruplets = sample_quadruplets(triplets, segments, features,
                                               opt.seed, metric, &quad_summary);
      std::cout << "quadruplets " << quad_summary.emitted << " (dropped "
                << quad_summary.dropped << ")\n";
    }
  }
  if (dataset.size() == 0) {
    std::cerr << "warning: no training items produced\n";
  }
  write_dataset(dataset, opt.out);
  rc.echo(opt.out);
  std::cout << "items " << dataset.size() << "\n";
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string data;
  std::string model = "cae";
  std::string out;
  std::string log;
  int epochs = 20;
  int batch_size = 256;
  std::uint64_t seed = 0;
  double margin = 0.15;
  double lr = 0.0;
  std::string conditioning = "auto";
  std::string arch_preset = "default";
  int patience = 5;
  bool layerwise_pretrain = false;
  int speaker_dim = 100;
  std::string val_words;
  std::string val_features;
  std::string val_speakers;
  std::string metric = "cosine";
  int threads = 0;
};

void cmd_train(const TrainOptions& opt) {
  const ModelKind kind = model_kind_from_string(opt.model);
  bool conditioning = false;
  if (opt.conditioning == "auto") {
    conditioning = kind == ModelKind::kCTriamese;
  } else if (opt.conditioning == "on") {
    conditioning = true;
  } else if (opt.conditioning != "off") {
    throw DataError("--speaker-conditioning wants auto, on, or off");
  }
  if (conditioning && kind == ModelKind::kTriamese) {
    throw DataError("the triamese model has no decoder to condition");
  }

  TrainConfig config;
  config.kind = kind;
  config.epochs = opt.epochs;
  config.batch_size = opt.batch_size;
  config.seed = opt.seed;
  config.margin = opt.margin;
  config.learning_rate = opt.lr;
  config.speaker_conditioning = conditioning;
  config.arch_preset = opt.arch_preset;
  config.patience = opt.patience;
  config.layerwise_pretrain = opt.layerwise_pretrain;
  config.speaker_dim = opt.speaker_dim;
  config.validate();

  RunConfig rc("train");
  rc.set("data", opt.data);
  rc.set("out", opt.out);
  rc.set("train_config", config.canonical_string());
  rc.set("val_words", opt.val_words);
  rc.set("metric", opt.metric);

  const Dataset dataset = read_dataset(opt.data);
  ValidationData validation;
  FeatureSet val_features;
  const bool has_val = !opt.val_words.empty();
  if (has_val) {
    if (opt.val_features.empty() || opt.val_speakers.empty()) {
      throw DataError(
          "--val-words needs --val-features and --val-speakers as well");
    }
    val_features = FeatureSet(read_archive(opt.val_features));
    const SpeakerMap speakers = read_speaker_map(opt.val_speakers);
    validation.words = read_word_list(opt.val_words, val_features, speakers);
    validation.features = &val_features;
    validation.metric = metric_from_string(opt.metric);
    validation.num_threads = resolve_threads(opt.threads);
  }

  const TrainResult result =
      train(dataset, config, has_val ? &validation : nullptr);
  save_checkpoint(result.checkpoint, opt.out);

  const std::string log_path = opt.log.empty() ? opt.out + ".log.csv" : opt.log;
  std::ofstream log(log_path, std::ios::binary);
  if (!log) throw DataError("cannot write '" + log_path + "'");
  log << (has_val ? "epoch,loss,val_ap\n" : "epoch,loss\n");
  for (const auto& entry : result.log) {
    log << entry.epoch << ',' << format_double(entry.loss);
    if (entry.has_val) log << ',' << format_double(entry.val_ap);
    log << '\n';
  }
  if (!log.good()) throw DataError("short write to '" + log_path + "'");

  rc.echo(opt.out);
  std::cout << "epochs_run " << result.log.size() << "\n";
  std::cout << "best_epoch " << result.best_epoch << "\n";
  std::cout << "early_stopped " << (result.early_stopped ? "true" : "false")
            << "\n";
}

// ---------------------------------------------------------------------------
// extract

struct ExtractOptions {
  std::string checkpoint;
  std::string features;
  std::string out;
  int threads = 0;
};

void cmd_extract(const ExtractOptions& opt) {
  RunConfig rc("extract");
  rc.set("checkpoint", opt.checkpoint);
  rc.set("features", opt.features);
  rc.set("out", opt.out);

  const ModelCheckpoint checkpoint = load_checkpoint(opt.checkpoint);
  const FeatureSet input(read_archive(opt.features));
  const FeatureSet output =
      extract_set(checkpoint, input, resolve_threads(opt.threads));
  write_archive(output.sequences(), opt.out);
  rc.echo(opt.out);
  std::cout << "records " << output.size() << "\n";
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string features;
  std::string speakers;
  std::string list;
  std::string task = "samediff";
  std::string metric = "cosine";
  bool cross_speaker_only = false;
  int min_frames = 0;
  std::string pr_csv;
  int threads = 0;
};

void cmd_eval(const EvalOptions& opt) {
  RunConfig rc("eval");
  rc.set("features", opt.features);
  rc.set("speakers", opt.speakers);
  rc.set("list", opt.list);
  rc.set("task", opt.task);
  rc.set("metric", opt.metric);
  rc.set("cross_speaker_only", opt.cross_speaker_only);
  rc.set("min_frames", opt.min_frames);

  const FeatureSet features(read_archive(opt.features));
  const SpeakerMap speakers = read_speaker_map(opt.speakers);
  EvalReport report;
  if (opt.task == "samediff") {
    SameDifferentOptions options;
    options.metric = metric_from_string(opt.metric);
    options.cross_speaker_only = opt.cross_speaker_only;
    options.min_frames = opt.min_frames;
    options.num_threads = resolve_threads(opt.threads);
    report = same_different_ap(read_word_list(opt.list, features, speakers),
                               features, options);
  } else if (opt.task == "abx") {
    if (!opt.pr_csv.empty()) {
      throw DataError("--pr-csv only applies to --task samediff");
    }
    AbxOptions options;
    options.metric = metric_from_string(opt.metric);
    options.num_threads = resolve_threads(opt.threads);
    report = abx_error(read_abx_list(opt.list, features, speakers), features,
                       options);
  } else {
    throw DataError("--task wants samediff or abx");
  }
  rc.echo();
  std::cout << report_to_text(report);
  if (!opt.pr_csv.empty()) emit_pr_curve(report, opt.pr_csv);
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::string out;
  SyntheticConfig config;
};

void cmd_synth(const SynthOptions& opt) {
  const SyntheticConfig& c = opt.config;
  RunConfig rc("synth");
  rc.set("out", opt.out);
  rc.set("types", c.n_types);
  rc.set("speakers", c.n_speakers);
  rc.set("eval_speakers", c.n_eval_speakers);
  rc.set("words_per_speaker_per_type", c.words_per_speaker_per_type);
  rc.set("frames_min", c.frames_min);
  rc.set("frames_max", c.frames_max);
  rc.set("dim", c.dim);
  rc.set("distortion", c.speaker_distortion);
  rc.set("noise", c.noise_sigma);
  rc.set("warp", c.warp_jitter);
  rc.set("spike_rate", c.spike_rate);
  rc.set("spike_scale", c.spike_scale);
  rc.set("spike_dims", c.spike_dims);
  rc.set("corruption", c.pair_corruption);
  rc.set("seed", c.seed);

  if (c.n_speakers == 1) {
    std::cerr << "warning: single speaker: no cross-speaker pairs and no ABX "
                 "cells; triplet negatives all come from that speaker\n";
  }
  const SyntheticCorpus corpus = generate_synthetic_corpus(c);
  fs::create_directories(opt.out);
  const auto path = [&](const char* name) {
    return (fs::path(opt.out) / name).string();
  };

  write_archive(corpus.features, path("features.zrfa"));
  write_speaker_map(corpus.speakers, path("speakers.tsv"));
  write_pair_list(corpus.pairs, path("pairs.tsv"));
  write_word_list(corpus.words, path("words.tsv"));
  std::vector<AbxItem> abx_items;
  std::vector<std::string> abx_gold;
  for (std::size_t w = 0; w < corpus.words.size(); ++w) {
    abx_items.push_back({corpus.words[w].segment, corpus.triphones[w]});
    abx_gold.push_back(corpus.words[w].gold_type);
  }
  write_abx_list(abx_items, abx_gold, path("abx.tsv"));

  // Held-out-speaker lists for evaluation.
  std::vector<LabeledWord> eval_words;
  std::vector<AbxItem> eval_items;
  std::vector<std::string> eval_gold;
  for (std::size_t w = 0; w < corpus.words.size(); ++w) {
    if (!corpus.is_eval[w]) continue;
    eval_words.push_back(corpus.words[w]);
    eval_items.push_back({corpus.words[w].segment, corpus.triphones[w]});
    eval_gold.push_back(corpus.words[w].gold_type);
  }
  write_word_list(eval_words, path("words_eval.tsv"));
  write_abx_list(eval_items, eval_gold, path("abx_eval.tsv"));

  rc.echo((fs::path(opt.out) / "corpus").string());
  std::cout << "utterances " << corpus.features.size() << "\n";
  std::cout << "words " << corpus.words.size() << "\n";
  std::cout << "train_pairs " << corpus.pairs.size() << "\n";
  std::cout << "eval_words " << eval_words.size() << "\n";
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckOptions {
  std::string model = "all";
  std::uint64_t seed = 0;
};

Eigen::MatrixXd gaussian_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.gaussian();
  }
  return m;
}

std::vector<Eigen::VectorXd> collect(const std::vector<ParamView>& views) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(views.size());
  for (const auto& v : views) {
    out.emplace_back(Eigen::Map<const Eigen::VectorXd>(v.data, v.size));
  }
  return out;
}

NetworkSpec small_spec(int input_dim, int out_dim, Activation out_act,
                       std::uint64_t seed) {
  NetworkSpec spec;
  spec.input_dim = input_dim;
  spec.seed = seed;
  spec.layers = {{9, Activation::kRelu},
                 {8, Activation::kRelu},
                 {out_dim, out_act}};
  return spec;
}

// Zero-init biases leave half the toy units dead; a small positive bias
// keeps them active so the check exercises every weight.
void lift_biases(Parameters& params) {
  for (auto& layer : params) layer.bias.setConstant(0.1);
}

CaeModel small_cae(std::uint64_t seed, int dim, int speaker_dim) {
  CaeModel model;
  model.speaker_conditioned = true;
  model.encoder_spec =
      small_spec(dim, dim, Activation::kLinear, derive_seed(seed, 201));
  model.decoder_spec = small_spec(dim + speaker_dim, dim, Activation::kLinear,
                                  derive_seed(seed, 202));
  model.encoder = init_parameters(model.encoder_spec);
  model.decoder = init_parameters(model.decoder_spec);
  lift_biases(model.encoder);
  lift_biases(model.decoder);
  model.speakers = SpeakerTable::init({"s0", "s1", "s2"}, speaker_dim,
                                      derive_seed(seed, 203));
  return model;
}

// Hinge terms near the kink would foil the finite-difference comparison, so
// batches are redrawn until every item is clearly on one side.
bool hinges_safe(const Eigen::MatrixXd& ea, const Eigen::MatrixXd& eb,
                 const Eigen::MatrixXd& en, double margin) {
  for (Eigen::Index i = 0; i < ea.cols(); ++i) {
    // Small embedding norms blow up the curvature of the cosine term and
    // with it the finite-difference truncation error.
    if (ea.col(i).norm() < 0.1 || eb.col(i).norm() < 0.1 ||
        en.col(i).norm() < 0.1) {
      return false;
    }
    const double h = margin + cosine_distance(ea.col(i), eb.col(i)) -
                     cosine_distance(ea.col(i), en.col(i));
    if (std::abs(h) < 0.02) return false;
  }
  return true;
}

constexpr double kFdEpsilon = 1e-5;

// Same story for ReLU units: a pre-activation within the finite-difference
// step of zero makes the two-sided estimate straddle the kink. The step is
// 1e-5 and activations are O(1), so 1e-4 keeps every unit on one side.
bool relu_safe(const Parameters& params, const NetworkSpec& spec,
               const Activations& acts) {
  for (std::size_t l = 0; l < params.size(); ++l) {
    if (spec.layers[l].activation != Activation::kRelu) continue;
    const Eigen::MatrixXd z =
        (params[l].weights * acts[l]).colwise() + params[l].bias;
    if (z.cwiseAbs().minCoeff() < 1e-4) return false;
  }
  return true;
}


bool cae_safe(const CaeModel& model, const Eigen::MatrixXd& xa,
              const std::vector<int>& spk) {
  const Activations enc = forward(model.encoder, model.encoder_spec, xa);
  if (!relu_safe(model.encoder, model.encoder_spec, enc)) return false;
  const Eigen::MatrixXd& bn = enc.back();
  Eigen::MatrixXd dec_in(bn.rows() + model.speakers.dim(), bn.cols());
  dec_in.topRows(bn.rows()) = bn;
  for (Eigen::Index i = 0; i < bn.cols(); ++i) {
    dec_in.block(bn.rows(), i, model.speakers.dim(), 1) =
        model.speakers.embeddings.col(spk[i]);
  }
  const Activations dec = forward(model.decoder, model.decoder_spec, dec_in);
  return relu_safe(model.decoder, model.decoder_spec, dec);
}

double gradcheck_model(ModelKind kind, std::uint64_t seed) {
  const int dim = 7;
  const int batch = 4;
  const int speaker_dim = 5;
  const double margin = 0.15;
  const std::vector<int> spk_a = {0, 1, 2, 0};
  const std::vector<int> spk_b = {1, 2, 0, 2};
  const std::vector<int> spk_n = {2, 0, 1, 1};

  if (kind == ModelKind::kCae) {
    CaeModel model = small_cae(seed, dim, speaker_dim);
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (attempt == 64) {
        throw NumericError("gradcheck: no kink-safe batch found");
      }
      Rng rng(derive_seed(seed, 210 + attempt));
      const Eigen::MatrixXd xa = gaussian_matrix(rng, dim, batch);
      const Eigen::MatrixXd xb = gaussian_matrix(rng, dim, batch);
      if (!cae_safe(model, xa, spk_b)) continue;
      CaeGradients grads;
      cae_compute(model, xa, xb, spk_b, &grads);
      const auto analytic = collect(grad_views(grads, true));
      return gradient_check(
          model_views(model),
          [&] { return cae_compute(model, xa, xb, spk_b, nullptr); },
          analytic, kFdEpsilon);
    }
  }

  if (kind == ModelKind::kTriamese) {
    TriameseModel model;
    model.margin = margin;
    model.branch_spec =
        small_spec(dim, 6, Activation::kRelu, derive_seed(seed, 204));
    model.branch = init_parameters(model.branch_spec);
    lift_biases(model.branch);
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (attempt == 64) {
        throw NumericError("gradcheck: no hinge-safe batch found");
      }
      Rng rng(derive_seed(seed, 220 + attempt));
      const Eigen::MatrixXd xa = gaussian_matrix(rng, dim, batch);
      const Eigen::MatrixXd xb = gaussian_matrix(rng, dim, batch);
      const Eigen::MatrixXd xn = gaussian_matrix(rng, dim, batch);
      const Activations fa = forward(model.branch, model.branch_spec, xa);
      const Activations fb = forward(model.branch, model.branch_spec, xb);
      const Activations fn = forward(model.branch, model.branch_spec, xn);
      if (!relu_safe(model.branch, model.branch_spec, fa) ||
          !relu_safe(model.branch, model.branch_spec, fb) ||
          !relu_safe(model.branch, model.branch_spec, fn)) {
        continue;
      }
      const Eigen::MatrixXd& ea = fa.back();
      const Eigen::MatrixXd& eb = fb.back();
      const Eigen::MatrixXd& en = fn.back();
      if (!hinges_safe(ea, eb, en, margin)) continue;
      TriameseGradients grads;
      triamese_compute(model, xa, xb, xn, &grads);
      const auto analytic = collect(grad_views(grads));
      return gradient_check(
          model_views(model),
          [&] { return triamese_compute(model, xa, xb, xn, nullptr); },
          analytic, kFdEpsilon);
    }
  }

  CTriameseModel model;
  model.margin = margin;
  model.cae = small_cae(seed, dim, speaker_dim);
  for (std::uint64_t attempt = 0;; ++attempt) {
    if (attempt == 64) {
      throw NumericError("gradcheck: no hinge-safe batch found");
    }
    Rng rng(derive_seed(seed, 240 + attempt));
    const Eigen::MatrixXd xa = gaussian_matrix(rng, dim, batch);
    const Eigen::MatrixXd xb = gaussian_matrix(rng, dim, batch);
    const Eigen::MatrixXd na = gaussian_matrix(rng, dim, batch);
    const Eigen::MatrixXd nb = gaussian_matrix(rng, dim, batch);
    if (!cae_safe(model.cae, xa, spk_b) || !cae_safe(model.cae, xb, spk_a) ||
        !cae_safe(model.cae, na, spk_n)) {
      continue;
    }
    const auto& enc = model.cae.encoder;
    const auto& spec = model.cae.encoder_spec;
    const auto ea = forward(enc, spec, xa).back();
    const auto eb = forward(enc, spec, xb).back();
    const auto en = forward(enc, spec, na).back();
    if (!hinges_safe(ea, eb, en, margin)) continue;
    CTriameseGradients grads;
    ctriamese_compute(model, xa, xb, na, nb, spk_b, spk_a, spk_n, &grads);
    const auto analytic = collect(grad_views(grads.cae, true));
    return gradient_check(
        model_views(model.cae),
        [&] {
          return ctriamese_compute(model, xa, xb, na, nb, spk_b, spk_a, spk_n,
                                   nullptr);
        },
        analytic, kFdEpsilon);
  }
}

void cmd_gradcheck(const GradcheckOptions& opt) {
  RunConfig rc("gradcheck");
  rc.set("model", opt.model);
  rc.set("seed", opt.seed);
  rc.echo();

  std::vector<ModelKind> kinds;
  if (opt.model == "all") {
    kinds = {ModelKind::kCae, ModelKind::kTriamese, ModelKind::kCTriamese};
  } else {
    kinds = {model_kind_from_string(opt.model)};
  }
  bool failed = false;
  for (ModelKind kind : kinds) {
    const double err = gradcheck_model(kind, opt.seed);
    std::cout << to_string(kind) << " max_rel_err " << format_double(err)
              << "\n";
    if (!(err < 1e-4)) failed = true;
  }
  if (failed) {
    throw NumericError("gradient check exceeded 1e-4 relative error");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zrspeech: unsupervised acoustic feature learning pipeline"};
  app.require_subcommand(1);

  FeaturizeOptions featurize_opt;
  auto* featurize = app.add_subcommand(
      "featurize", "WAV files to normalized 39-dim features");
  featurize
      ->add_option("input", featurize_opt.input,
                   "WAV directory or `utterance<TAB>path` list file")
      ->required();
  featurize->add_option("--speakers", featurize_opt.speakers,
                        "utterance-to-speaker TSV")
      ->required();
  featurize->add_option("--out", featurize_opt.out, "output feature archive")
      ->required();
  featurize
      ->add_option("--cmvn", featurize_opt.cmvn,
                   "normalization grouping: speaker or utterance")
      ->check(CLI::IsMember({"speaker", "utterance"}));
  featurize->callback([&] { cmd_featurize(featurize_opt); });

  PairsOptions pairs_opt;
  auto* pairs = app.add_subcommand(
      "pairs", "discovered word pairs to a frame-level training set");
  pairs->add_option("--features", pairs_opt.features, "feature archive")
      ->required();
  pairs->add_option("--speakers", pairs_opt.speakers, "speaker TSV")
      ->required();
  pairs->add_option("--pairs", pairs_opt.pairs, "discovered pair list")
      ->required();
  pairs->add_option("--out", pairs_opt.out, "output dataset")->required();
  pairs->add_option("--model", pairs_opt.model, "cae, triamese, or ctriamese")
      ->check(CLI::IsMember({"cae", "triamese", "ctriamese"}));
  pairs->add_option("--metric", pairs_opt.metric, "cosine or euclidean")
      ->check(CLI::IsMember({"cosine", "euclidean"}));
  pairs->add_option("--seed", pairs_opt.seed, "sampling seed");
  pairs->callback([&] { cmd_pairs(pairs_opt); });

  TrainOptions train_opt;
  auto* train_cmd = app.add_subcommand("train", "train a model on a dataset");
  train_cmd->add_option("--data", train_opt.data, "training dataset")
      ->required();
  train_cmd
      ->add_option("--model", train_opt.model, "cae, triamese, or ctriamese")
      ->check(CLI::IsMember({"cae", "triamese", "ctriamese"}));
  train_cmd->add_option("--out", train_opt.out, "output checkpoint")
      ->required();
  train_cmd->add_option("--log", train_opt.log,
                        "per-epoch CSV (default <out>.log.csv)");
  train_cmd->add_option("--epochs", train_opt.epochs, "training epochs");
  train_cmd->add_option("--batch-size", train_opt.batch_size, "batch size");
  train_cmd->add_option("--seed", train_opt.seed, "run seed");
  train_cmd->add_option("--margin", train_opt.margin, "triplet margin");
  train_cmd->add_option("--lr", train_opt.lr,
                        "learning rate (0 keeps the optimizer default)");
  train_cmd
      ->add_option("--speaker-conditioning", train_opt.conditioning,
                   "auto, on, or off")
      ->check(CLI::IsMember({"auto", "on", "off"}));
  train_cmd
      ->add_option("--arch-preset", train_opt.arch_preset,
                   "default, small, tiny, linear, or triamese-100")
      ->check(CLI::IsMember(
          {"default", "small", "tiny", "linear", "triamese-100"}));
  train_cmd->add_option("--patience", train_opt.patience,
                        "early-stopping patience (epochs)");
  train_cmd->add_flag("--layerwise-pretrain", train_opt.layerwise_pretrain,
                      "greedy layerwise warm start");
  train_cmd->add_option("--speaker-dim", train_opt.speaker_dim,
                        "speaker embedding dimension");
  train_cmd->add_option("--val-words", train_opt.val_words,
                        "validation word list (enables early stopping)");
  train_cmd->add_option("--val-features", train_opt.val_features,
                        "feature archive for the validation words");
  train_cmd->add_option("--val-speakers", train_opt.val_speakers,
                        "speaker TSV for the validation words");
  train_cmd->add_option("--metric", train_opt.metric,
                        "validation distance metric")
      ->check(CLI::IsMember({"cosine", "euclidean"}));
  train_cmd->add_option("--threads", train_opt.threads,
                        "worker threads (default $ZR_THREADS or 1)");
  train_cmd->callback([&] { cmd_train(train_opt); });

  ExtractOptions extract_opt;
  auto* extract = app.add_subcommand(
      "extract", "bottleneck features for a feature archive");
  extract
      ->add_option("--checkpoint", extract_opt.checkpoint, "model checkpoint")
      ->required();
  extract->add_option("--features", extract_opt.features, "input archive")
      ->required();
  extract->add_option("--out", extract_opt.out, "output archive")->required();
  extract->add_option("--threads", extract_opt.threads,
                      "worker threads (default $ZR_THREADS or 1)");
  extract->callback([&] { cmd_extract(extract_opt); });

  EvalOptions eval_opt;
  auto* eval = app.add_subcommand("eval", "same-different AP or ABX error");
  eval->add_option("--features", eval_opt.features, "feature archive")
      ->required();
  eval->add_option("--speakers", eval_opt.speakers, "speaker TSV")->required();
  eval->add_option("--list", eval_opt.list, "word list or ABX item list")
      ->required();
  eval->add_option("--task", eval_opt.task, "samediff or abx")
      ->check(CLI::IsMember({"samediff", "abx"}));
  eval->add_option("--metric", eval_opt.metric, "cosine or euclidean")
      ->check(CLI::IsMember({"cosine", "euclidean"}));
  eval->add_flag("--cross-speaker-only", eval_opt.cross_speaker_only,
                 "score only cross-speaker pairs");
  eval->add_option("--min-frames", eval_opt.min_frames,
                   "drop words shorter than this many frames");
  eval->add_option("--pr-csv", eval_opt.pr_csv,
                   "write the precision-recall curve here");
  eval->add_option("--threads", eval_opt.threads,
                   "worker threads (default $ZR_THREADS or 1)");
  eval->callback([&] { cmd_eval(eval_opt); });

  SynthOptions synth_opt;
  auto* synth = app.add_subcommand(
      "synth", "generate a synthetic word corpus with gold pairs");
  synth->add_option("--out", synth_opt.out, "output directory")->required();
  synth->add_option("--types", synth_opt.config.n_types, "word types");
  synth->add_option("--speakers", synth_opt.config.n_speakers, "speakers");
  synth->add_option("--eval-speakers", synth_opt.config.n_eval_speakers,
                    "held-out speakers (no training pairs)");
  synth->add_option("--words-per-speaker-per-type",
                    synth_opt.config.words_per_speaker_per_type,
                    "tokens per speaker per type");
  synth->add_option("--frames-min", synth_opt.config.frames_min,
                    "minimum prototype length");
  synth->add_option("--frames-max", synth_opt.config.frames_max,
                    "maximum prototype length");
  synth->add_option("--dim", synth_opt.config.dim, "feature dimension");
  synth->add_option("--distortion", synth_opt.config.speaker_distortion,
                    "per-speaker affine distortion");
  synth->add_option("--noise", synth_opt.config.noise_sigma,
                    "additive noise sigma");
  synth->add_option("--warp", synth_opt.config.warp_jitter,
                    "time-warp jitter in [0,1)");
  synth->add_option("--spike-rate", synth_opt.config.spike_rate,
                    "per-frame chance of an impulsive channel artifact");
  synth->add_option("--spike-scale", synth_opt.config.spike_scale,
                    "artifact magnitude scale");
  synth->add_option("--spike-dims", synth_opt.config.spike_dims,
                    "restrict artifacts to the first k dims (0 = any dim)");
  synth->add_option("--corruption", synth_opt.config.pair_corruption,
                    "fraction of wrong-type training pairs");
  synth->add_option("--seed", synth_opt.config.seed, "corpus seed");
  synth->callback([&] { cmd_synth(synth_opt); });

  GradcheckOptions gradcheck_opt;
  auto* gradcheck = app.add_subcommand(
      "gradcheck", "analytic gradients vs central finite differences");
  gradcheck
      ->add_option("--model", gradcheck_opt.model,
                   "cae, triamese, ctriamese, or all")
      ->check(CLI::IsMember({"cae", "triamese", "ctriamese", "all"}));
  gradcheck->add_option("--seed", gradcheck_opt.seed, "instance seed");
  gradcheck->callback([&] { cmd_gradcheck(gradcheck_opt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

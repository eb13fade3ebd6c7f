// core/include/zr/neuralnet.hpp
// SPDX-License-Identifier: Apache-2.0
//
// Dense feed-forward core with exact reverse-mode gradients. Batches are
// stored column-wise (dim x batch); all arithmetic is double precision, so
// the same code path serves training and finite-difference checks.

#ifndef ZR_NEURALNET_HPP
#define ZR_NEURALNET_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "zr/common.hpp"

namespace zr {

enum class Activation : std::uint8_t { kLinear = 0, kRelu = 1 };

struct NetworkSpec {
  struct Layer {
    int units = 0;
    Activation activation = Activation::kLinear;
  };
  int input_dim = 0;
  std::vector<Layer> layers;
  std::uint64_t seed = 0;

  int output_dim() const { return layers.back().units; }
  void validate() const;
};

struct LayerParams {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

using Parameters = std::vector<LayerParams>;

// Glorot-uniform weights, zero biases, seeded from spec.seed.
Parameters init_parameters(const NetworkSpec& spec);

// activations[0] is the input batch; activations[l] the output of layer l.
using Activations = std::vector<Eigen::MatrixXd>;

Activations forward(const Parameters& params, const NetworkSpec& spec,
                    const Eigen::MatrixXd& batch);

struct Gradients {
  Parameters layers;         // same shapes as the parameters
  Eigen::MatrixXd input;     // dL/d(input batch)
};

// Exact gradients for the given upstream gradient dL/d(output). Sums over
// the batch; any 1/B normalisation belongs to the loss. The ReLU
// subgradient at 0 is 0.
Gradients backward(const Parameters& params, const NetworkSpec& spec,
                   const Activations& activations,
                   const Eigen::MatrixXd& output_gradient);

// A flattened view of every trainable buffer of a model, in a fixed order.
struct ParamView {
  double* data = nullptr;
  std::ptrdiff_t size = 0;
};

std::vector<ParamView> param_views(Parameters& params);
std::vector<ParamView> param_views(const Parameters& params);  // const-cast free copy views

struct AdadeltaConfig {
  double rho = 0.95;
  double epsilon = 1e-6;
  double learning_rate = 0.001;
};

struct SgdConfig {
  double learning_rate = 0.01;
  double decay = 1e-6;  // inverse time decay per update step
};

// Per-buffer accumulator state plus the update rules named in the training
// recipes. One step() call advances the SGD step counter once.
class Optimizer {
 public:
  enum class Kind : std::uint8_t { kAdadelta = 0, kSgd = 1 };

  static Optimizer adadelta(const AdadeltaConfig& config = {});
  static Optimizer sgd(const SgdConfig& config = {});

  void step(const std::vector<ParamView>& params,
            const std::vector<ParamView>& grads);

  Kind kind() const { return kind_; }
  const AdadeltaConfig& adadelta_config() const { return adadelta_; }
  const SgdConfig& sgd_config() const { return sgd_; }
  std::uint64_t step_count() const { return step_count_; }
  double current_sgd_lr() const {
    return sgd_.learning_rate /
           (1.0 + sgd_.decay * static_cast<double>(step_count_));
  }

  // Accumulators, exposed for serialization. For Adadelta: one pair of
  // buffers per parameter view.
  std::vector<Eigen::VectorXd>& grad_sq() { return grad_sq_; }
  std::vector<Eigen::VectorXd>& delta_sq() { return delta_sq_; }
  const std::vector<Eigen::VectorXd>& grad_sq() const { return grad_sq_; }
  const std::vector<Eigen::VectorXd>& delta_sq() const { return delta_sq_; }
  void set_step_count(std::uint64_t t) { step_count_ = t; }

 private:
  Kind kind_ = Kind::kAdadelta;
  AdadeltaConfig adadelta_;
  SgdConfig sgd_;
  std::vector<Eigen::VectorXd> grad_sq_;
  std::vector<Eigen::VectorXd> delta_sq_;
  std::uint64_t step_count_ = 0;
};

// Convenience wrapper for a single network's parameters.
void optimizer_step(Optimizer& optimizer, Parameters& params,
                    const Gradients& grads);

// Central finite differences (step epsilon) against an analytic gradient.
// `loss` re-evaluates the loss from the current parameter values; `views`
// and `analytic` must be index-aligned. Returns the max relative error with
// denominator max(|analytic|, |numeric|, floor).
double gradient_check(const std::vector<ParamView>& views,
                      const std::function<double()>& loss,
                      const std::vector<Eigen::VectorXd>& analytic,
                      double epsilon = 1e-4, double floor = 1e-3);

}  // namespace zr

#endif  // ZR_NEURALNET_HPP

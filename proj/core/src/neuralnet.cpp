// core/src/neuralnet.cpp
// SPDX-License-Identifier: Apache-2.0

#include "zr/neuralnet.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "zr/rng.hpp"

namespace zr {

void NetworkSpec::validate() const {
  if (input_dim < 1) {
    throw DataError("network input dimension must be positive");
  }
  if (layers.empty()) {
    throw DataError("network needs at least one layer");
  }
  for (const auto& layer : layers) {
    if (layer.units < 1) {
      throw DataError("layer width must be positive");
    }
  }
}

Parameters init_parameters(const NetworkSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Parameters params;
  params.reserve(spec.layers.size());
  int fan_in = spec.input_dim;
  for (const auto& layer : spec.layers) {
    const int fan_out = layer.units;
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    LayerParams p;
    p.weights.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) {
        p.weights(r, c) = rng.uniform(-limit, limit);
      }
    }
    p.bias = Eigen::VectorXd::Zero(fan_out);
    params.push_back(std::move(p));
    fan_in = fan_out;
  }
  return params;
}

Activations forward(const Parameters& params, const NetworkSpec& spec,
                    const Eigen::MatrixXd& batch) {
  if (batch.rows() != spec.input_dim) {
    throw DataError("batch dimension " + std::to_string(batch.rows()) +
                    " does not match network input " +
                    std::to_string(spec.input_dim));
  }
  Activations acts;
  acts.reserve(params.size() + 1);
  acts.push_back(batch);
  for (std::size_t l = 0; l < params.size(); ++l) {
    Eigen::MatrixXd z =
        (params[l].weights * acts.back()).colwise() + params[l].bias;
    if (spec.layers[l].activation == Activation::kRelu) {
      z = z.cwiseMax(0.0);
    }
    acts.push_back(std::move(z));
  }
  return acts;
}

Gradients backward(const Parameters& params, const NetworkSpec& spec,
                   const Activations& activations,
                   const Eigen::MatrixXd& output_gradient) {
  Gradients grads;
  grads.layers.resize(params.size());
  Eigen::MatrixXd delta = output_gradient;
  for (std::size_t l = params.size(); l-- > 0;) {
    if (spec.layers[l].activation == Activation::kRelu) {
      // max(0, z) > 0 iff z > 0; the subgradient at 0 is taken as 0.
      delta = (activations[l + 1].array() > 0.0)
                  .select(delta.array(), 0.0)
                  .matrix();
    }
    grads.layers[l].weights.noalias() = delta * activations[l].transpose();
    grads.layers[l].bias = delta.rowwise().sum();
    if (l > 0) {
      delta = params[l].weights.transpose() * delta;
    } else {
      grads.input.noalias() = params[l].weights.transpose() * delta;
    }
  }
  return grads;
}

std::vector<ParamView> param_views(Parameters& params) {
  std::vector<ParamView> views;
  views.reserve(params.size() * 2);
  for (auto& layer : params) {
    views.push_back({layer.weights.data(), layer.weights.size()});
    views.push_back({layer.bias.data(), layer.bias.size()});
  }
  return views;
}

std::vector<ParamView> param_views(const Parameters& params) {
  return param_views(const_cast<Parameters&>(params));
}

Optimizer Optimizer::adadelta(const AdadeltaConfig& config) {
  Optimizer opt;
  opt.kind_ = Kind::kAdadelta;
  opt.adadelta_ = config;
  return opt;
}

Optimizer Optimizer::sgd(const SgdConfig& config) {
  Optimizer opt;
  opt.kind_ = Kind::kSgd;
  opt.sgd_ = config;
  return opt;
}

void Optimizer::step(const std::vector<ParamView>& params,
                     const std::vector<ParamView>& grads) {
  if (params.size() != grads.size()) {
    throw DataError("optimizer step: parameter/gradient view mismatch");
  }
  if (kind_ == Kind::kAdadelta) {
    if (grad_sq_.size() != params.size()) {
      grad_sq_.assign(params.size(), Eigen::VectorXd());
      delta_sq_.assign(params.size(), Eigen::VectorXd());
      for (std::size_t i = 0; i < params.size(); ++i) {
        grad_sq_[i] = Eigen::VectorXd::Zero(params[i].size);
        delta_sq_[i] = Eigen::VectorXd::Zero(params[i].size);
      }
    }
    const double rho = adadelta_.rho;
    const double eps = adadelta_.epsilon;
    const double lr = adadelta_.learning_rate;
    for (std::size_t i = 0; i < params.size(); ++i) {
      Eigen::Map<Eigen::VectorXd> x(params[i].data, params[i].size);
      Eigen::Map<const Eigen::VectorXd> g(grads[i].data, grads[i].size);
      Eigen::VectorXd& eg = grad_sq_[i];
      Eigen::VectorXd& ed = delta_sq_[i];
      eg = rho * eg.array() + (1.0 - rho) * g.array().square();
      Eigen::ArrayXd delta = -lr *
                             ((ed.array() + eps).sqrt() /
                              (eg.array() + eps).sqrt()) *
                             g.array();
      x.array() += delta;
      ed = rho * ed.array() + (1.0 - rho) * delta.square();
    }
  } else {
    const double lr = current_sgd_lr();
    for (std::size_t i = 0; i < params.size(); ++i) {
      Eigen::Map<Eigen::VectorXd> x(params[i].data, params[i].size);
      Eigen::Map<const Eigen::VectorXd> g(grads[i].data, grads[i].size);
      x.array() -= lr * g.array();
    }
  }
  ++step_count_;
}

void optimizer_step(Optimizer& optimizer, Parameters& params,
                    const Gradients& grads) {
  optimizer.step(param_views(params),
                 param_views(const_cast<Parameters&>(grads.layers)));
}

double gradient_check(const std::vector<ParamView>& views,
                      const std::function<double()>& loss,
                      const std::vector<Eigen::VectorXd>& analytic,
                      double epsilon, double floor) {
  if (views.size() != analytic.size()) {
    throw DataError("gradient check: view/gradient count mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (views[i].size != analytic[i].size()) {
      throw DataError("gradient check: view/gradient size mismatch");
    }
    for (std::ptrdiff_t j = 0; j < views[i].size; ++j) {
      double& x = views[i].data[j];
      const double saved = x;
      x = saved + epsilon;
      const double up = loss();
      x = saved - epsilon;
      const double down = loss();
      x = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic[i][j];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), floor});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > worst) worst = rel;
    }
  }
  return worst;
}

}  // namespace zr

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mecoff/errors.hpp"
#include "mecoff/rng.hpp"

namespace mecoff {

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Fully connected network with rectifier hidden layers and a logistic
/// output layer, stored as one flat parameter vector (row-major weight
/// blocks followed by the bias of each layer). The flat layout keeps the
/// optimizer, checkpointing and finite-difference checks trivial.
class Mlp {
 public:
  explicit Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw ConfigError("network needs at least input and output layers");
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      offsets_.push_back(count);
      count += static_cast<std::size_t>(sizes_[l]) * static_cast<std::size_t>(sizes_[l + 1]) +
               static_cast<std::size_t>(sizes_[l + 1]);
    }
    params_.assign(count, 0.0);
  }

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  std::size_t parameter_count() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  /// Zero-mean normal weights scaled by 1/sqrt(fan-in); zero biases.
  void init_weights(Prng& rng) {
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const int fan_in = sizes_[l];
      const int fan_out = sizes_[l + 1];
      const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
      double* w = params_.data() + offsets_[l];
      for (int i = 0; i < fan_out * fan_in; ++i) w[i] = scale * rng.normal();
      double* b = w + static_cast<std::size_t>(fan_out) * static_cast<std::size_t>(fan_in);
      for (int i = 0; i < fan_out; ++i) b[i] = 0.0;
    }
  }

  /// Forward pass; every output lies strictly inside (0, 1).
  std::vector<double> forward(std::span<const double> input) const {
    if (static_cast<int>(input.size()) != sizes_.front())
      throw DimensionMismatch("input size " + std::to_string(input.size()) +
                              " != expected " + std::to_string(sizes_.front()));
    std::vector<double> act(input.begin(), input.end());
    std::vector<double> next;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      affine(l, act, next);
      const bool last = l + 2 == sizes_.size();
      for (double& z : next) z = last ? logistic(z) : std::max(z, 0.0);
      act.swap(next);
    }
    return act;
  }

  /// Mean binary cross-entropy over a batch, plus its gradient with respect
  /// to every parameter. The loss sums over the output entries of each
  /// sample and averages across the batch; probabilities are clamped to
  /// [1e-9, 1 - 1e-9] inside the logarithms.
  double loss_and_gradient(const std::vector<std::vector<double>>& inputs,
                           const std::vector<std::vector<std::uint8_t>>& targets,
                           std::vector<double>& grad) const {
    if (inputs.empty() || inputs.size() != targets.size())
      throw DimensionMismatch("batch inputs and targets must be non-empty and equal-sized");
    grad.assign(params_.size(), 0.0);
    const std::size_t layers = sizes_.size() - 1;
    double loss = 0.0;

    std::vector<std::vector<double>> act(layers + 1);
    std::vector<double> delta, delta_prev;
    for (std::size_t s = 0; s < inputs.size(); ++s) {
      if (static_cast<int>(targets[s].size()) != sizes_.back())
        throw DimensionMismatch("target size does not match output layer");
      act[0].assign(inputs[s].begin(), inputs[s].end());
      if (static_cast<int>(act[0].size()) != sizes_.front())
        throw DimensionMismatch("input size does not match input layer");
      for (std::size_t l = 0; l < layers; ++l) {
        affine(l, act[l], act[l + 1]);
        const bool last = l + 1 == layers;
        for (double& z : act[l + 1]) z = last ? logistic(z) : std::max(z, 0.0);
      }

      const std::vector<double>& out = act[layers];
      delta.resize(out.size());
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double y = static_cast<double>(targets[s][i]);
        const double p = std::min(std::max(out[i], 1e-9), 1.0 - 1e-9);
        loss -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
        delta[i] = out[i] - y;  // d(loss)/d(pre-activation) for logistic + BCE
      }

      for (std::size_t l = layers; l-- > 0;) {
        const int in = sizes_[l];
        const int outn = sizes_[l + 1];
        double* gw = grad.data() + offsets_[l];
        double* gb = gw + static_cast<std::size_t>(outn) * static_cast<std::size_t>(in);
        const double* w = params_.data() + offsets_[l];
        const std::vector<double>& a = act[l];
        for (int r = 0; r < outn; ++r) {
          const double d = delta[static_cast<std::size_t>(r)];
          double* gw_row = gw + static_cast<std::size_t>(r) * static_cast<std::size_t>(in);
          for (int c = 0; c < in; ++c) gw_row[c] += d * a[static_cast<std::size_t>(c)];
          gb[r] += d;
        }
        if (l == 0) break;
        delta_prev.assign(static_cast<std::size_t>(in), 0.0);
        for (int r = 0; r < outn; ++r) {
          const double d = delta[static_cast<std::size_t>(r)];
          const double* w_row = w + static_cast<std::size_t>(r) * static_cast<std::size_t>(in);
          for (int c = 0; c < in; ++c) delta_prev[static_cast<std::size_t>(c)] += d * w_row[c];
        }
        // Rectifier gate: pre-activation sign equals activation sign here.
        for (int c = 0; c < in; ++c)
          if (act[l][static_cast<std::size_t>(c)] <= 0.0)
            delta_prev[static_cast<std::size_t>(c)] = 0.0;
        delta.swap(delta_prev);
      }
    }

    const double inv = 1.0 / static_cast<double>(inputs.size());
    for (double& g : grad) g *= inv;
    return loss * inv;
  }

 private:
  void affine(std::size_t layer, const std::vector<double>& in, std::vector<double>& out) const {
    const int n_in = sizes_[layer];
    const int n_out = sizes_[layer + 1];
    const double* w = params_.data() + offsets_[layer];
    const double* b = w + static_cast<std::size_t>(n_out) * static_cast<std::size_t>(n_in);
    out.assign(static_cast<std::size_t>(n_out), 0.0);
    for (int r = 0; r < n_out; ++r) {
      const double* w_row = w + static_cast<std::size_t>(r) * static_cast<std::size_t>(n_in);
      double acc = b[r];
      for (int c = 0; c < n_in; ++c) acc += w_row[c] * in[static_cast<std::size_t>(c)];
      out[static_cast<std::size_t>(r)] = acc;
    }
  }

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

/// Adam optimizer with standard moment estimates and bias correction.
class Adam {
 public:
  explicit Adam(std::size_t param_count, double lr = 0.01, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
        m_(param_count, 0.0), v_(param_count, 0.0) {}

  double learning_rate() const { return lr_; }
  long step_count() const { return t_; }
  std::vector<double>& first_moment() { return m_; }
  std::vector<double>& second_moment() { return v_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }
  void set_step_count(long t) { t_ = t; }

  void step(std::vector<double>& params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
      throw DimensionMismatch("optimizer state does not match parameter vector");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
      const double mhat = m_[i] / bc1;
      const double vhat = v_[i] / bc2;
      params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace mecoff

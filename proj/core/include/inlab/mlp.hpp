#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "inlab/error.hpp"

namespace inlab {

// Fully connected network with tanh hidden layers and a linear output layer.
// All weights and biases live in one flat parameter vector so optimizers,
// gradient clipping and checkpoints can treat the network as a single array.
// Layer l stores W_l (out x in, column-major) followed by b_l (out).
template <typename S>
class Mlp {
 public:
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  // Post-activation outputs of every layer; acts[0] is the input batch.
  struct Cache {
    std::vector<Mat> acts;
  };

  Mlp() = default;

  explicit Mlp(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw ConfigError("an MLP needs at least an input and an output size");
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      if (dims_[l] <= 0 || dims_[l + 1] <= 0) throw ConfigError("MLP layer sizes must be positive");
      w_off_.push_back(off);
      off += static_cast<std::size_t>(dims_[l]) * dims_[l + 1];
      b_off_.push_back(off);
      off += dims_[l + 1];
    }
    params_ = Vec::Zero(static_cast<Eigen::Index>(off));
  }

  const std::vector<int>& dims() const { return dims_; }
  int layers() const { return static_cast<int>(dims_.size()) - 1; }
  int in_dim() const { return dims_.front(); }
  int out_dim() const { return dims_.back(); }
  Eigen::Index size() const { return params_.size(); }

  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  Eigen::Map<Mat> W(int l) { return {params_.data() + w_off_[l], dims_[l + 1], dims_[l]}; }
  Eigen::Map<const Mat> W(int l) const { return {params_.data() + w_off_[l], dims_[l + 1], dims_[l]}; }
  Eigen::Map<Vec> b(int l) { return {params_.data() + b_off_[l], dims_[l + 1]}; }
  Eigen::Map<const Vec> b(int l) const { return {params_.data() + b_off_[l], dims_[l + 1]}; }

  // Gaussian init with std gain / sqrt(fan_in); the last layer uses `final_gain`.
  template <typename Rng>
  void init(Rng& rng, double hidden_gain, double final_gain) {
    params_.setZero();
    for (int l = 0; l < layers(); ++l) {
      const double gain = l + 1 == layers() ? final_gain : hidden_gain;
      std::normal_distribution<double> dist(0.0, gain / std::sqrt(static_cast<double>(dims_[l])));
      auto w = W(l);
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = static_cast<S>(dist(rng));
      }
    }
  }

  // X: in_dim x batch. Returns out_dim x batch.
  Mat forward(const Mat& X, Cache* cache = nullptr) const {
    if (X.rows() != in_dim()) throw ConfigError("MLP input dimension mismatch");
    if (cache) {
      cache->acts.resize(dims_.size());
      cache->acts[0] = X;
    }
    Mat h = X;
    for (int l = 0; l < layers(); ++l) {
      Mat z = W(l) * h;
      z.colwise() += b(l);
      if (l + 1 < layers()) z = z.array().tanh().matrix();
      h = std::move(z);
      if (cache) cache->acts[l + 1] = h;
    }
    return h;
  }

  // Accumulates dLoss/dparams into `grad` given dLoss/dOutput for the cached batch.
  void backward(const Cache& cache, const Mat& dY, Vec& grad) const {
    if (grad.size() != params_.size()) grad = Vec::Zero(params_.size());
    Mat delta = dY;
    for (int l = layers() - 1; l >= 0; --l) {
      if (l + 1 < layers()) {
        const auto& a = cache.acts[l + 1].array();
        delta = (delta.array() * (S(1) - a * a)).matrix();
      }
      Eigen::Map<Mat> gW(grad.data() + w_off_[l], dims_[l + 1], dims_[l]);
      Eigen::Map<Vec> gb(grad.data() + b_off_[l], dims_[l + 1]);
      gW.noalias() += delta * cache.acts[l].transpose();
      gb.noalias() += delta.rowwise().sum();
      if (l > 0) delta = W(l).transpose() * delta;
    }
  }

  template <typename T>
  Mlp<T> cast() const {
    Mlp<T> out(dims_);
    out.params() = params_.template cast<T>();
    return out;
  }

 private:
  std::vector<int> dims_;
  std::vector<std::size_t> w_off_, b_off_;
  Vec params_;
};

}  // namespace inlab

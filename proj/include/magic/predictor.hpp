#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "magic/image.hpp"
#include "magic/rng.hpp"

namespace magic {

/// Dense rectifier network: affine layers with ReLU on hidden layers and a
/// linear scalar output. Templated on the scalar so the production model can
/// run in float32 while numerical tests instantiate double.
template <typename Scalar>
struct Mlp {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<Matrix> W;  // W[l] maps layer l activations to layer l+1
  std::vector<Vector> b;

  std::vector<Index> sizes() const {
    std::vector<Index> s;
    if (W.empty()) return s;
    s.push_back(W.front().cols());
    for (const Matrix& w : W) s.push_back(w.rows());
    return s;
  }

  Index input_size() const { return W.empty() ? 0 : W.front().cols(); }

  template <typename OtherScalar>
  Mlp<OtherScalar> cast() const {
    Mlp<OtherScalar> o;
    for (const Matrix& w : W) o.W.push_back(w.template cast<OtherScalar>());
    for (const Vector& v : b) o.b.push_back(v.template cast<OtherScalar>());
    return o;
  }
};

/// Per-layer gradients of the batch mean-squared-error loss.
template <typename Scalar>
struct MlpGradients {
  std::vector<typename Mlp<Scalar>::Matrix> dW;
  std::vector<typename Mlp<Scalar>::Vector> db;
};

/// Feature matrix (one sample per row) with integer pattern labels.
/// dict_size fixes the label scale: training targets are label/(dict_size-1).
struct TrainingSet {
  Eigen::MatrixXd inputs;
  std::vector<std::uint32_t> targets;
  std::uint32_t dict_size = 0;
};

/// Per-epoch mean training loss, in target (scaled) units.
struct TrainReport {
  std::vector<double> epoch_loss;
};

/// Glorot-uniform initialized network; biases start at zero. Weight draw
/// order is fixed (layer, row, column), so a seed fully determines the model.
template <typename Scalar>
Mlp<Scalar> make_mlp(const std::vector<Index>& sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw std::invalid_argument("make_mlp: need >= 2 layers");
  using Matrix = typename Mlp<Scalar>::Matrix;
  using Vector = typename Mlp<Scalar>::Vector;
  Mlp<Scalar> m;
  SplitMix64 rng(seed);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const Index in = sizes[l], out = sizes[l + 1];
    if (in < 1 || out < 1) throw std::invalid_argument("make_mlp: bad layer size");
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Matrix w(out, in);
    for (Index r = 0; r < out; ++r)
      for (Index c = 0; c < in; ++c)
        w(r, c) = static_cast<Scalar>((2.0 * rng.next_unit() - 1.0) * limit);
    m.W.push_back(std::move(w));
    m.b.push_back(Vector::Zero(out));
  }
  return m;
}

namespace detail {

/// Forward pass keeping every layer's activation for backprop; acts[0] is
/// the input, acts.back() the (linear) output.
template <typename Scalar>
std::vector<typename Mlp<Scalar>::Vector> forward_acts(
    const Mlp<Scalar>& m, const typename Mlp<Scalar>::Vector& x) {
  std::vector<typename Mlp<Scalar>::Vector> acts;
  acts.push_back(x);
  for (std::size_t l = 0; l < m.W.size(); ++l) {
    typename Mlp<Scalar>::Vector z = m.W[l] * acts.back() + m.b[l];
    if (l + 1 < m.W.size()) z = z.cwiseMax(Scalar(0));
    acts.push_back(std::move(z));
  }
  return acts;
}

}  // namespace detail

/// Unclamped scalar output. Throws std::invalid_argument on an input size
/// mismatch or a non-scalar output layer.
template <typename Scalar>
Scalar forward(const Mlp<Scalar>& m, const typename Mlp<Scalar>::Vector& x) {
  if (m.W.empty() || x.size() != m.input_size())
    throw std::invalid_argument("forward: input dimension mismatch");
  if (m.W.back().rows() != 1)
    throw std::invalid_argument("forward: output layer is not scalar");
  return detail::forward_acts(m, x).back()(0);
}

/// Gradients of L = mean over the batch of (forward(x) - y)^2. Rows of X are
/// samples; y holds the scaled targets.
template <typename Scalar>
MlpGradients<Scalar> mse_gradients(const Mlp<Scalar>& m,
                                   const typename Mlp<Scalar>::Matrix& X,
                                   const typename Mlp<Scalar>::Vector& y,
                                   Scalar* loss = nullptr) {
  using Matrix = typename Mlp<Scalar>::Matrix;
  using Vector = typename Mlp<Scalar>::Vector;
  const Index n = X.rows();
  if (n == 0 || n != y.size())
    throw std::invalid_argument("mse_gradients: batch shape mismatch");

  MlpGradients<Scalar> g;
  for (std::size_t l = 0; l < m.W.size(); ++l) {
    g.dW.push_back(Matrix::Zero(m.W[l].rows(), m.W[l].cols()));
    g.db.push_back(Vector::Zero(m.b[l].size()));
  }

  Scalar total = 0;
  for (Index i = 0; i < n; ++i) {
    const auto acts = detail::forward_acts<Scalar>(m, X.row(i).transpose());
    const Scalar err = acts.back()(0) - y(i);
    total += err * err;

    // delta = dL/dz for the current layer, walking backwards.
    Vector delta(1);
    delta(0) = Scalar(2) * err / static_cast<Scalar>(n);
    for (std::size_t l = m.W.size(); l-- > 0;) {
      g.dW[l] += delta * acts[l].transpose();
      g.db[l] += delta;
      if (l > 0) {
        Vector up = m.W[l].transpose() * delta;
        // ReLU gate: the hidden activation is zero exactly where z <= 0.
        delta = up.array() * (acts[l].array() > Scalar(0)).template cast<Scalar>();
      }
    }
  }
  if (loss) *loss = total / static_cast<Scalar>(n);
  return g;
}

inline constexpr Index kTrainBatchSize = 32;

/// Mini-batch gradient descent on MSE over targets scaled by
/// 1/(dict_size - 1). Deterministic: one SplitMix64 stream drives every
/// epoch's shuffle. Throws std::invalid_argument on empty data and
/// std::runtime_error if the loss leaves the finite range (divergence; the
/// caller should lower lr).
template <typename Scalar>
Mlp<Scalar> train(Mlp<Scalar> m, const TrainingSet& data, int epochs, double lr,
                  std::uint64_t seed, TrainReport* report = nullptr) {
  const Index n = data.inputs.rows();
  if (n == 0 || data.targets.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("train: empty or inconsistent training set");
  if (data.dict_size < 2) throw std::invalid_argument("train: dict_size must be >= 2");
  if (data.inputs.cols() != m.input_size())
    throw std::invalid_argument("train: feature width mismatch");

  const double scale = 1.0 / static_cast<double>(data.dict_size - 1);
  typename Mlp<Scalar>::Matrix X = data.inputs.template cast<Scalar>();
  typename Mlp<Scalar>::Vector y(n);
  for (Index i = 0; i < n; ++i)
    y(i) = static_cast<Scalar>(static_cast<double>(data.targets[i]) * scale);

  SplitMix64 rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  for (int e = 0; e < epochs; ++e) {
    shuffle(order, rng);
    double epochLoss = 0.0;
    for (Index start = 0; start < n; start += kTrainBatchSize) {
      const Index bs = std::min<Index>(kTrainBatchSize, n - start);
      typename Mlp<Scalar>::Matrix bx(bs, X.cols());
      typename Mlp<Scalar>::Vector by(bs);
      for (Index i = 0; i < bs; ++i) {
        bx.row(i) = X.row(order[static_cast<std::size_t>(start + i)]);
        by(i) = y(order[static_cast<std::size_t>(start + i)]);
      }
      Scalar loss = 0;
      const MlpGradients<Scalar> g = mse_gradients(m, bx, by, &loss);
      if (!std::isfinite(static_cast<double>(loss)))
        throw std::runtime_error("train: loss diverged (lower the learning rate)");
      for (std::size_t l = 0; l < m.W.size(); ++l) {
        m.W[l] -= static_cast<Scalar>(lr) * g.dW[l];
        m.b[l] -= static_cast<Scalar>(lr) * g.db[l];
      }
      epochLoss += static_cast<double>(loss) * static_cast<double>(bs);
    }
    if (report) report->epoch_loss.push_back(epochLoss / static_cast<double>(n));
  }
  return m;
}

/// raw = forward(m, x) * (dictSize - 1), clamped to [0, dictSize - 1] and
/// rounded to the nearest integer; the returned label is raw / d. Monotone:
/// a larger d never yields a larger label.
template <typename Scalar>
std::uint32_t predict_label(const Mlp<Scalar>& m, const typename Mlp<Scalar>::Vector& x,
                            std::uint32_t d, std::uint32_t dictSize) {
  if (d == 0) throw std::invalid_argument("predict_label: d must be >= 1");
  if (dictSize < 1) throw std::invalid_argument("predict_label: empty dictionary");
  const double raw = static_cast<double>(forward(m, x)) *
                     static_cast<double>(dictSize - 1);
  const double clamped =
      std::clamp(raw, 0.0, static_cast<double>(dictSize - 1));
  const std::uint32_t rounded = static_cast<std::uint32_t>(std::llround(clamped));
  return rounded / d;
}

using MlpF = Mlp<float>;

}  // namespace magic

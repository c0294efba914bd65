#pragma once

// Feed-forward binary classifier: leaky-ReLU hidden layers, sigmoid output,
// inverted dropout on hidden activations, L2 on weight matrices, Adam,
// early stopping with best-weight restore, and plateau learning-rate decay.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cardio/error.hpp"
#include "cardio/logistic_regression.hpp"
#include "cardio/matrix.hpp"
#include "cardio/preprocess.hpp"
#include "cardio/rng.hpp"

namespace cardio {

inline constexpr double kLeakySlope = 0.01;
inline constexpr double kProbabilityClamp = 1e-12;

inline double leaky_relu(double z, double slope = kLeakySlope) { return z >= 0.0 ? z : slope * z; }

struct MlpHyperparams {
  std::vector<std::size_t> hidden{32, 16};
  double learning_rate = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 20;
  double dropout = 0.2;
  double l2 = 0.001;
  int max_epochs = 500;
  int patience = 20;
  bool plateau = true;
  double plateau_factor = 0.5;
  int plateau_patience = 5;
  double plateau_min_delta = 1e-4;
  double min_lr = 1e-6;
  double validation_fraction = 0.2;

  void validate() const {
    if (hidden.empty()) throw ConfigError("mlp: at least one hidden layer required");
    for (auto w : hidden) {
      if (w == 0) throw ConfigError("mlp: hidden widths must be >= 1");
    }
    if (!(learning_rate > 0.0)) throw ConfigError("mlp: learning_rate must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("mlp: betas in [0,1)");
    if (!(adam_eps > 0.0)) throw ConfigError("mlp: adam_eps must be > 0");
    if (batch_size < 1) throw ConfigError("mlp: batch_size must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("mlp: dropout must lie in [0,1)");
    if (!(l2 >= 0.0)) throw ConfigError("mlp: l2 must be >= 0");
    if (max_epochs < 1) throw ConfigError("mlp: max_epochs must be >= 1");
    if (patience < 1) throw ConfigError("mlp: patience must be >= 1");
    if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) throw ConfigError("mlp: plateau_factor must lie in (0,1)");
    if (plateau_patience < 1) throw ConfigError("mlp: plateau_patience must be >= 1");
    if (!(min_lr >= 0.0)) throw ConfigError("mlp: min_lr must be >= 0");
    if (learning_rate < min_lr) throw ConfigError("mlp: learning_rate must be >= min_lr");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
      throw ConfigError("mlp: validation_fraction must lie in (0,1)");
    }
  }
  friend bool operator==(const MlpHyperparams&, const MlpHyperparams&) = default;
};

/// The untuned reference network: heavier dropout, larger step, short patience,
/// no plateau schedule.
inline MlpHyperparams mlp_baseline_hyperparams() {
  MlpHyperparams hp;
  hp.dropout = 0.5;
  hp.learning_rate = 0.001;
  hp.plateau = false;
  hp.patience = 5;
  return hp;
}

/// Parameters live in one flat buffer: for each layer, W (out x in, row-major)
/// followed by b (out).
struct MlpNetwork {
  std::vector<std::size_t> widths;  // input, hidden..., 1
  std::vector<double> params;

  std::size_t layer_count() const { return widths.size() - 1; }

  std::size_t weight_offset(std::size_t l) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < l; ++k) off += widths[k + 1] * (widths[k] + 1);
    return off;
  }
  std::size_t bias_offset(std::size_t l) const { return weight_offset(l) + widths[l + 1] * widths[l]; }

  static std::size_t param_count(const std::vector<std::size_t>& widths) {
    std::size_t n = 0;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) n += widths[k + 1] * (widths[k] + 1);
    return n;
  }

  /// Glorot-uniform weights, zero biases.
  static MlpNetwork initialize(std::vector<std::size_t> widths, Rng& rng) {
    if (widths.size() < 3 || widths.back() != 1) throw ConfigError("mlp: widths must be [input, hidden..., 1]");
    MlpNetwork net{std::move(widths), {}};
    net.params.assign(param_count(net.widths), 0.0);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      const double r = std::sqrt(6.0 / static_cast<double>(net.widths[l] + net.widths[l + 1]));
      const auto w0 = net.weight_offset(l);
      for (std::size_t k = 0; k < net.widths[l + 1] * net.widths[l]; ++k) net.params[w0 + k] = rng.uniform(-r, r);
    }
    return net;
  }

  double weight_penalty() const {
    double s = 0.0;
    for (std::size_t l = 0; l < layer_count(); ++l) {
      const auto w0 = weight_offset(l);
      for (std::size_t k = 0; k < widths[l + 1] * widths[l]; ++k) s += params[w0 + k] * params[w0 + k];
    }
    return s;
  }

  double predict_proba(std::span<const double> x) const;

  friend bool operator==(const MlpNetwork&, const MlpNetwork&) = default;
};

struct ForwardTrace {
  std::vector<std::vector<double>> activations;  // [0] = input, then each hidden layer after dropout
  std::vector<std::vector<double>> pre;          // pre-activations of hidden layers
  std::vector<std::vector<double>> masks;        // dropout scale per hidden unit (1 when off)
  double logit = 0.0;
  double output = 0.0;
};

enum class ForwardMode { train, infer };

/// Train mode applies inverted dropout (keep with probability 1-rate, scale
/// kept units by 1/(1-rate)); infer mode applies neither.
inline ForwardTrace forward(const MlpNetwork& net, std::span<const double> x, ForwardMode mode, double dropout,
                            Rng* rng) {
  require_width(x.size(), net.widths.front(), "mlp forward");
  ForwardTrace t;
  t.activations.emplace_back(x.begin(), x.end());
  const bool drop = mode == ForwardMode::train && dropout > 0.0;
  if (drop && !rng) throw std::logic_error("mlp forward: train-mode dropout needs an rng");
  const double keep_scale = drop ? 1.0 / (1.0 - dropout) : 1.0;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto in = net.widths[l], out = net.widths[l + 1];
    const double* W = net.params.data() + net.weight_offset(l);
    const double* b = net.params.data() + net.bias_offset(l);
    const auto& a = t.activations.back();
    std::vector<double> z(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < in; ++i) s += W[o * in + i] * a[i];
      z[o] = s;
    }
    if (l + 1 == net.layer_count()) {
      t.logit = z[0];
      t.output = sigmoid(z[0]);
      break;
    }
    std::vector<double> h(out), mask(out, 1.0);
    for (std::size_t o = 0; o < out; ++o) {
      if (drop) mask[o] = rng->bernoulli(1.0 - dropout) ? keep_scale : 0.0;
      h[o] = leaky_relu(z[o]) * mask[o];
    }
    t.pre.push_back(std::move(z));
    t.masks.push_back(std::move(mask));
    t.activations.push_back(std::move(h));
  }
  return t;
}

inline double MlpNetwork::predict_proba(std::span<const double> x) const {
  return forward(*this, x, ForwardMode::infer, 0.0, nullptr).output;
}

/// Mean binary cross-entropy (probabilities clamped to [1e-12, 1-1e-12]) plus
/// (l2/2) * sum of squared weights; biases are not penalized.
inline double mlp_loss(std::span<const double> outputs, std::span<const int> labels, const MlpNetwork& net,
                       double l2) {
  if (outputs.size() != labels.size()) throw ShapeError("mlp loss: length mismatch");
  double bce = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const double p = std::clamp(outputs[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    bce -= labels[i] == 1 ? std::log(p) : std::log1p(-p);
  }
  if (!outputs.empty()) bce /= static_cast<double>(outputs.size());
  return bce + 0.5 * l2 * net.weight_penalty();
}

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Loss over the given rows and its exact gradient for the sampled dropout graph.
inline LossAndGradient mlp_loss_and_gradient(const MlpNetwork& net, const Matrix& X, std::span<const int> y,
                                             std::span<const std::size_t> rows, double l2, double dropout,
                                             Rng* rng) {
  LossAndGradient out;
  out.grad.assign(net.params.size(), 0.0);
  const auto B = static_cast<double>(rows.size());
  std::vector<double> outputs;
  std::vector<int> labels;
  outputs.reserve(rows.size());
  labels.reserve(rows.size());
  const auto mode = dropout > 0.0 ? ForwardMode::train : ForwardMode::infer;
  const auto L = net.layer_count();

  for (auto r : rows) {
    const auto t = forward(net, X.row(r), mode, dropout, rng);
    outputs.push_back(t.output);
    labels.push_back(y[r]);
    std::vector<double> delta{(t.output - y[r]) / B};  // dLoss/dlogit
    for (std::size_t l = L; l-- > 0;) {
      const auto in = net.widths[l], outw = net.widths[l + 1];
      const auto& a = t.activations[l];
      double* gW = out.grad.data() + net.weight_offset(l);
      double* gb = out.grad.data() + net.bias_offset(l);
      const double* W = net.params.data() + net.weight_offset(l);
      for (std::size_t o = 0; o < outw; ++o) {
        gb[o] += delta[o];
        for (std::size_t i = 0; i < in; ++i) gW[o * in + i] += delta[o] * a[i];
      }
      if (l == 0) break;
      std::vector<double> prev(in, 0.0);
      for (std::size_t o = 0; o < outw; ++o) {
        for (std::size_t i = 0; i < in; ++i) prev[i] += W[o * in + i] * delta[o];
      }
      const auto& z = t.pre[l - 1];
      const auto& mask = t.masks[l - 1];
      for (std::size_t i = 0; i < in; ++i) prev[i] *= mask[i] * (z[i] >= 0.0 ? 1.0 : kLeakySlope);
      delta = std::move(prev);
    }
  }
  for (std::size_t l = 0; l < L; ++l) {
    const auto w0 = net.weight_offset(l);
    for (std::size_t k = 0; k < net.widths[l + 1] * net.widths[l]; ++k) out.grad[w0 + k] += l2 * net.params[w0 + k];
  }
  out.loss = mlp_loss(outputs, labels, net, l2);
  return out;
}

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  long long step = 0;

  explicit AdamState(std::size_t n = 0) : first_moment(n, 0.0), second_moment(n, 0.0) {}
};

inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& st, double lr,
                      double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
  if (params.size() != grads.size() || params.size() != st.first_moment.size()) {
    throw ShapeError("adam_step: shape mismatch");
  }
  ++st.step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(st.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    st.first_moment[k] = beta1 * st.first_moment[k] + (1.0 - beta1) * grads[k];
    st.second_moment[k] = beta2 * st.second_moment[k] + (1.0 - beta2) * grads[k] * grads[k];
    const double mhat = st.first_moment[k] / c1;
    const double vhat = st.second_moment[k] / c2;
    params[k] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct MlpHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  bool stopped_early = false;
};

inline std::string history_csv(const MlpHistory& h) {
  std::string s = "epoch,train_loss,val_loss,lr\n";
  for (const auto& e : h.epochs) {
    s += std::to_string(e.epoch) + "," + format_double(e.train_loss) + "," + format_double(e.val_loss) + "," +
         format_double(e.lr) + "\n";
  }
  return s;
}

inline double mlp_dataset_loss(const MlpNetwork& net, const Matrix& X, std::span<const int> y,
                               std::span<const std::size_t> rows, double l2) {
  std::vector<double> outputs;
  std::vector<int> labels;
  for (auto r : rows) {
    outputs.push_back(net.predict_proba(X.row(r)));
    labels.push_back(y[r]);
  }
  return mlp_loss(outputs, labels, net, l2);
}

inline MlpNetwork train_mlp(const Matrix& X, std::span<const int> y, const MlpHyperparams& hp, std::uint64_t seed,
                            MlpHistory* history = nullptr) {
  hp.validate();
  if (X.rows() != y.size()) throw ShapeError("mlp train: rows != labels");
  Labels labels(y.begin(), y.end());
  bool has0 = false, has1 = false;
  for (int v : labels) (v == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw TrainingError("mlp train: both classes must be present");

  // Validation carve-out; the first part of the partition is used for fitting.
  const auto parts = partition_indices(labels, 1.0 - hp.validation_fraction, derive_seed(seed, {1}), true);
  const auto& fit_rows = parts.train;
  const auto& val_rows = parts.test;
  if (fit_rows.empty() || val_rows.empty()) throw TrainingError("mlp train: too few rows for a validation split");

  std::vector<std::size_t> widths{X.cols()};
  widths.insert(widths.end(), hp.hidden.begin(), hp.hidden.end());
  widths.push_back(1);
  Rng init_rng(derive_seed(seed, {2}));
  Rng order_rng(derive_seed(seed, {3}));
  Rng dropout_rng(derive_seed(seed, {4}));
  auto net = MlpNetwork::initialize(widths, init_rng);
  AdamState adam(net.params.size());

  MlpHistory local;
  auto& hist = history ? *history : local;
  hist = {};
  double lr = hp.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  double plateau_best = best;
  auto best_params = net.params;
  int since_best = 0, plateau_wait = 0;
  std::vector<std::size_t> order = fit_rows;

  for (int epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    order_rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(hp.batch_size)) {
      const auto stop = std::min(order.size(), start + static_cast<std::size_t>(hp.batch_size));
      const std::span<const std::size_t> batch(order.data() + start, stop - start);
      const auto lg = mlp_loss_and_gradient(net, X, labels, batch, hp.l2, hp.dropout, &dropout_rng);
      adam_step(net.params, lg.grad, adam, lr, hp.beta1, hp.beta2, hp.adam_eps);
    }
    const double train_loss = mlp_dataset_loss(net, X, labels, fit_rows, hp.l2);
    const double val_loss = mlp_dataset_loss(net, X, labels, val_rows, hp.l2);
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
      throw DivergenceError("mlp train: non-finite loss at epoch " + std::to_string(epoch));
    }
    hist.epochs.push_back({epoch, train_loss, val_loss, lr});

    if (val_loss < best) {
      best = val_loss;
      best_params = net.params;
      hist.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (hp.plateau) {
      if (val_loss < plateau_best - hp.plateau_min_delta) {
        plateau_best = val_loss;
        plateau_wait = 0;
      } else if (++plateau_wait >= hp.plateau_patience) {
        lr = std::max(lr * hp.plateau_factor, hp.min_lr);
        plateau_wait = 0;
      }
    }
    if (since_best >= hp.patience) {
      hist.stopped_early = true;
      break;
    }
  }
  net.params = std::move(best_params);
  hist.best_val_loss = best;
  return net;
}

}  // namespace cardio

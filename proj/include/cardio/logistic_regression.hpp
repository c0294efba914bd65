#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "cardio/error.hpp"
#include "cardio/matrix.hpp"

namespace cardio {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

struct LogRegHyperparams {
  double lambda = 0.01;
  double learning_rate = 0.1;
  int max_iters = 5000;
  double tol = 1e-6;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("logreg: lambda must be >= 0");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("logreg: learning_rate must be > 0");
    if (max_iters < 1) throw ConfigError("logreg: max_iters must be >= 1");
    if (!(tol >= 0.0)) throw ConfigError("logreg: tol must be >= 0");
  }
  friend bool operator==(const LogRegHyperparams&, const LogRegHyperparams&) = default;
};

struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;

  double predict_proba(std::span<const double> x) const {
    require_width(x.size(), weights.size(), "logreg predict");
    return sigmoid(dot(weights, x) + bias);
  }
  friend bool operator==(const LogRegModel&, const LogRegModel&) = default;
};

struct LogRegObjective {
  double loss = 0.0;
  std::vector<double> grad_w;
  double grad_b = 0.0;
};

/// Mean binary cross-entropy plus (lambda/2)|w|^2 and its gradient. The bias is
/// not penalized.
inline LogRegObjective logreg_objective(const Matrix& X, std::span<const int> y, std::span<const double> w, double b,
                                        double lambda) {
  const auto n = static_cast<double>(X.rows());
  LogRegObjective out;
  out.grad_w.assign(w.size(), 0.0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto x = X.row(i);
    const double z = dot(w, x) + b;
    out.loss += softplus(z) - y[i] * z;
    const double r = sigmoid(z) - y[i];
    for (std::size_t j = 0; j < w.size(); ++j) out.grad_w[j] += r * x[j];
    out.grad_b += r;
  }
  out.loss /= n;
  out.grad_b /= n;
  double norm2 = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    out.grad_w[j] = out.grad_w[j] / n + lambda * w[j];
    norm2 += w[j] * w[j];
  }
  out.loss += 0.5 * lambda * norm2;
  return out;
}

struct LogRegFitInfo {
  int iterations = 0;
  bool converged = false;
  std::vector<double> loss_history;  // accepted iterates, starting at the zero model
};

/// Full-batch gradient descent from zero. A step that increases the loss is
/// rejected and the step size halved; the reduced step size is kept.
inline LogRegModel fit_logreg(const Matrix& X, std::span<const int> y, const LogRegHyperparams& hp,
                              LogRegFitInfo* info = nullptr) {
  hp.validate();
  if (X.rows() != y.size()) throw ShapeError("logreg fit: rows != labels");
  bool has0 = false, has1 = false;
  for (int v : y) (v == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw TrainingError("logreg fit: both classes must be present");

  const auto d = X.cols();
  LogRegModel m{std::vector<double>(d, 0.0), 0.0};
  LogRegFitInfo local;
  auto& fi = info ? *info : local;
  fi = {};
  double step = hp.learning_rate;
  auto obj = logreg_objective(X, y, m.weights, m.bias, hp.lambda);
  fi.loss_history.push_back(obj.loss);

  std::vector<double> trial_w(d);
  for (int it = 1; it <= hp.max_iters; ++it) {
    double gmax = std::abs(obj.grad_b);
    for (double g : obj.grad_w) gmax = std::max(gmax, std::abs(g));
    if (gmax < hp.tol) {
      fi.converged = true;
      break;
    }
    while (true) {
      for (std::size_t j = 0; j < d; ++j) trial_w[j] = m.weights[j] - step * obj.grad_w[j];
      const double trial_b = m.bias - step * obj.grad_b;
      auto trial = logreg_objective(X, y, trial_w, trial_b, hp.lambda);
      if (!std::isfinite(trial.loss)) {
        throw DivergenceError("logreg fit: non-finite loss at iteration " + std::to_string(it));
      }
      if (trial.loss <= obj.loss) {
        m.weights = trial_w;
        m.bias = trial_b;
        obj = std::move(trial);
        break;
      }
      step *= 0.5;
      if (step < 1e-300) {
        // No representable descent step remains: the iterate is numerically stationary.
        fi.converged = true;
        fi.iterations = it;
        return m;
      }
    }
    fi.loss_history.push_back(obj.loss);
    fi.iterations = it;
  }
  return m;
}

}  // namespace cardio

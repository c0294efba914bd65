#pragma once

// Soft-margin SVM trained with simplified Sequential Minimal Optimization.
//
// Each sweep visits every example; a KKT violator i is paired with a partner j
// drawn from a seeded stream. When that partner yields no progress the other
// indices are tried in the same seeded order before moving on. Training stops
// once max_passes consecutive sweeps change nothing; the model is flagged as
// converged when a final check with freshly computed errors finds no violator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cardio/error.hpp"
#include "cardio/logistic_regression.hpp"
#include "cardio/matrix.hpp"
#include "cardio/rng.hpp"

namespace cardio {

enum class KernelKind { linear, rbf };

inline const char* to_string(KernelKind k) { return k == KernelKind::linear ? "linear" : "rbf"; }

struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double gamma = 1.0 / 19.0;

  void validate() const {
    if (kind == KernelKind::rbf && !(gamma > 0.0 && std::isfinite(gamma))) {
      throw ConfigError("svm: rbf gamma must be finite and > 0");
    }
  }
  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline double kernel_eval(const KernelSpec& k, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("kernel: width mismatch");
  if (k.kind == KernelKind::linear) return dot(a, b);
  return std::exp(-k.gamma * squared_distance(a, b));
}

struct SvmHyperparams {
  double C = 1.0;
  KernelSpec kernel{};
  double tol = 1e-3;
  int max_passes = 5;
  int max_sweeps = 2000;

  void validate() const {
    if (!(C > 0.0) || !std::isfinite(C)) throw ConfigError("svm: C must be > 0");
    kernel.validate();
    if (!(tol > 0.0)) throw ConfigError("svm: tol must be > 0");
    if (max_passes < 1) throw ConfigError("svm: max_passes must be >= 1");
    if (max_sweeps < 1) throw ConfigError("svm: max_sweeps must be >= 1");
  }
  friend bool operator==(const SvmHyperparams&, const SvmHyperparams&) = default;
};

struct SvmModel {
  Matrix support_vectors;
  std::vector<double> alphas;
  std::vector<int> signed_labels;  // +1 / -1
  double bias = 0.0;
  KernelSpec kernel;
  double C = 1.0;
  bool converged = true;

  double decision_function(std::span<const double> x) const {
    require_width(x.size(), support_vectors.cols(), "svm decision");
    double f = bias;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      f += alphas[i] * signed_labels[i] * kernel_eval(kernel, support_vectors.row(i), x);
    }
    return f;
  }

  /// Logistic squash of the decision value (monotone score, not calibrated).
  double score(std::span<const double> x) const { return sigmoid(decision_function(x)); }
};

struct SvmFitInfo {
  int sweeps = 0;
  long long updates = 0;
  bool converged = false;
  double dual_objective = 0.0;
  double min_dual_increment = 0.0;  // smallest objective change over accepted updates
  std::vector<double> alphas;       // full (unpruned) multipliers, training order
  double bias = 0.0;
};

/// W(a) = sum a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij
inline double svm_dual_objective(const Matrix& K, std::span<const int> y, std::span<const double> a) {
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    lin += a[i];
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < a.size(); ++j) quad += a[i] * a[j] * y[i] * y[j] * K(i, j);
  }
  return lin - 0.5 * quad;
}

inline Matrix gram_matrix(const KernelSpec& k, const Matrix& X) {
  Matrix K(X.rows(), X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t j = i; j < X.rows(); ++j) K(i, j) = K(j, i) = kernel_eval(k, X.row(i), X.row(j));
  }
  return K;
}

namespace detail {

class SmoSolver {
 public:
  SmoSolver(const Matrix& K, std::vector<int> y, const SvmHyperparams& hp)
      : K_(K), y_(std::move(y)), hp_(hp), alpha_(y_.size(), 0.0), err_(y_.size()) {
    for (std::size_t i = 0; i < y_.size(); ++i) err_[i] = -y_[i];  // f = 0 initially
  }

  bool violates(std::size_t i) const {
    const double r = y_[i] * err_[i];  // y f(x) - 1
    return (r < -hp_.tol && alpha_[i] < hp_.C) || (r > hp_.tol && alpha_[i] > 0.0);
  }

  bool take_step(std::size_t i, std::size_t j) {
    if (i == j) return false;
    const double C = hp_.C;
    const double ai = alpha_[i], aj = alpha_[j];
    double L, H;
    if (y_[i] != y_[j]) {
      L = std::max(0.0, aj - ai);
      H = std::min(C, C + aj - ai);
    } else {
      L = std::max(0.0, ai + aj - C);
      H = std::min(C, ai + aj);
    }
    if (!(L < H)) return false;
    const double eta = 2.0 * K_(i, j) - K_(i, i) - K_(j, j);
    if (!(eta < 0.0)) return false;
    double aj_new = aj - y_[j] * (err_[i] - err_[j]) / eta;
    aj_new = std::clamp(aj_new, L, H);
    if (std::abs(aj_new - aj) < 1e-12 * (aj_new + aj + 1e-12)) return false;
    double ai_new = ai + y_[i] * y_[j] * (aj - aj_new);
    // Snap round-off at the box edges so stored multipliers are exactly feasible
    // and a multiplier left at 1e-17 cannot stall the violator check.
    auto snap = [C](double a) {
      const double eps = 1e-12 * C;
      return a < eps ? 0.0 : (a > C - eps ? C : a);
    };
    ai_new = snap(ai_new);
    aj_new = snap(aj_new);

    const double dai = ai_new - ai, daj = aj_new - aj;
    const double b1 = bias_ - err_[i] - y_[i] * dai * K_(i, i) - y_[j] * daj * K_(i, j);
    const double b2 = bias_ - err_[j] - y_[i] * dai * K_(i, j) - y_[j] * daj * K_(j, j);
    double b_new;
    if (ai_new > 0.0 && ai_new < C) {
      b_new = b1;
    } else if (aj_new > 0.0 && aj_new < C) {
      b_new = b2;
    } else {
      b_new = 0.5 * (b1 + b2);
    }

    // Dual gradient g_k = y_k (b - E_k); exact change of W along (dai, daj).
    const double gi = y_[i] * (bias_ - err_[i]);
    const double gj = y_[j] * (bias_ - err_[j]);
    const double dW = gi * dai + gj * daj -
                      0.5 * (dai * dai * K_(i, i) + daj * daj * K_(j, j) + 2.0 * dai * daj * y_[i] * y_[j] * K_(i, j));
    min_increment_ = updates_ == 0 ? dW : std::min(min_increment_, dW);

    const double db = b_new - bias_;
    for (std::size_t k = 0; k < err_.size(); ++k) {
      err_[k] += y_[i] * dai * K_(i, k) + y_[j] * daj * K_(j, k) + db;
    }
    alpha_[i] = ai_new;
    alpha_[j] = aj_new;
    bias_ = b_new;
    ++updates_;
    return true;
  }

  void refresh_errors() {
    for (std::size_t k = 0; k < err_.size(); ++k) {
      double f = bias_;
      for (std::size_t l = 0; l < alpha_.size(); ++l) {
        if (alpha_[l] != 0.0) f += alpha_[l] * y_[l] * K_(l, k);
      }
      err_[k] = f - y_[k];
    }
  }

  SvmFitInfo run(std::uint64_t seed) {
    const auto n = y_.size();
    Rng rng(seed);
    std::vector<std::size_t> partners(n);
    std::iota(partners.begin(), partners.end(), std::size_t{0});
    SvmFitInfo info;
    int quiet = 0;
    while (info.sweeps < hp_.max_sweeps) {
      ++info.sweeps;
      long long changed = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!violates(i)) continue;
        auto j = static_cast<std::size_t>(rng.uniform_index(n - 1));
        if (j >= i) ++j;
        if (take_step(i, j)) {
          ++changed;
          continue;
        }
        // Fallback: scan remaining partners starting from a seeded offset.
        const auto offset = static_cast<std::size_t>(rng.uniform_index(n));
        for (std::size_t s = 0; s < n; ++s) {
          const auto jj = partners[(offset + s) % n];
          if (jj == i || jj == j) continue;
          if (take_step(i, jj)) {
            ++changed;
            break;
          }
        }
      }
      if (changed == 0) {
        refresh_errors();
        bool any = false;
        for (std::size_t i = 0; i < n && !any; ++i) any = violates(i);
        if (!any) {
          info.converged = true;
          break;
        }
        if (++quiet >= hp_.max_passes) break;
      } else {
        quiet = 0;
      }
    }
    refresh_errors();
    if (!info.converged) {
      info.converged = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (violates(i)) {
          info.converged = false;
          break;
        }
      }
    }
    info.updates = updates_;
    info.min_dual_increment = min_increment_;
    info.alphas = alpha_;
    info.bias = bias_;
    info.dual_objective = svm_dual_objective(K_, y_, alpha_);
    return info;
  }

 private:
  const Matrix& K_;
  std::vector<int> y_;
  SvmHyperparams hp_;
  std::vector<double> alpha_;
  std::vector<double> err_;  // E_k = f(x_k) - y_k
  double bias_ = 0.0;
  long long updates_ = 0;
  double min_increment_ = 0.0;
};

}  // namespace detail

inline SvmModel fit_smo(const Matrix& X, std::span<const int> y01, const SvmHyperparams& hp, std::uint64_t seed,
                        SvmFitInfo* info = nullptr) {
  hp.validate();
  if (X.rows() != y01.size()) throw ShapeError("svm fit: rows != labels");
  std::vector<int> y(y01.size());
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < y01.size(); ++i) {
    if (y01[i] != 0 && y01[i] != 1) throw DomainError("svm fit: non-binary label");
    y[i] = y01[i] == 1 ? 1 : -1;
    (y[i] == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw TrainingError("svm fit: both classes must be present");

  const auto K = gram_matrix(hp.kernel, X);
  detail::SmoSolver solver(K, y, hp);
  auto fi = solver.run(seed);

  SvmModel m;
  m.kernel = hp.kernel;
  m.C = hp.C;
  m.bias = fi.bias;
  m.converged = fi.converged;
  m.support_vectors = Matrix(0, X.cols());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (fi.alphas[i] > 0.0) {
      m.support_vectors.append_row(X.row(i));
      m.alphas.push_back(fi.alphas[i]);
      m.signed_labels.push_back(y[i]);
    }
  }
  if (info) *info = std::move(fi);
  return m;
}

}  // namespace cardio

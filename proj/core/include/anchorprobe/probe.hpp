#pragma once

#include <Eigen/Core>
#include <span>
#include <string_view>
#include <vector>

namespace anchorprobe {

/// Per-feature affine map fit on training rows: (x - mean) / scale, where
/// scale is the population SD (1 for constant features).
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

enum class ProbeKind { softmax, ridge };
std::string_view to_string(ProbeKind kind);

struct ProbeModel {
  ProbeKind kind = ProbeKind::softmax;
  Eigen::MatrixXd weights;  ///< D × C (softmax) or D × 1 (ridge), on standardized features
  Eigen::VectorXd bias;     ///< C or 1
  Standardizer standardizer;
  double l2 = 1.0;
  int classes = 0;

  // Optimizer diagnostics (softmax only).
  bool converged = true;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<double> loss_history;
};

/// Softmax cross-entropy summed over rows plus l2·‖W‖²/2 (bias unpenalised)
/// on already-standardized features. Parameters are packed as vec(W) (column
/// major, D × C) followed by b.
class SoftmaxObjective {
 public:
  SoftmaxObjective(const Eigen::MatrixXd& features, std::span<const int> labels, int classes,
                   double l2);

  Eigen::Index parameter_count() const { return (dim_ + 1) * classes_; }
  double value(const Eigen::VectorXd& theta) const;
  double value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& gradient) const;

 private:
  const Eigen::MatrixXd& x_;
  Eigen::MatrixXd onehot_;
  Eigen::Index dim_;
  Eigen::Index classes_;
  double l2_;
};

struct SoftmaxOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
  int history = 10;  ///< L-BFGS memory
  int classes = 0;   ///< 0 = max label + 1
};

/// Multinomial logistic probe. Features are standardized on `x`, then the
/// objective is minimised by full-batch L-BFGS with a backtracking Armijo
/// line search, so the loss never increases between iterations. Stops at
/// ‖∇‖₂ ≤ gradient_tolerance, at max_iterations, or when no step lowers the
/// gradient without raising the loss; the latter two leave converged = false.
/// Throws DomainError when fewer than two classes are present.
ProbeModel train_softmax_probe(const Eigen::MatrixXd& x, std::span<const int> labels, double l2,
                               const SoftmaxOptions& options = {});

Eigen::MatrixXd predict_proba(const ProbeModel& model, const Eigen::MatrixXd& x);
std::vector<int> predict_class(const ProbeModel& model, const Eigen::MatrixXd& x);

/// Closed-form ridge on standardized features with an unpenalised intercept
/// (the training mean of y). Solves the primal normal equations when D ≤ N
/// and the dual system otherwise, both by LDLᵀ. lambda = 0 uses a
/// rank-revealing complete orthogonal decomposition and throws IllConditioned
/// when the centered design has rank below min(N - 1, D).
ProbeModel train_ridge(const Eigen::MatrixXd& x, std::span<const double> y, double lambda);

Eigen::VectorXd predict(const ProbeModel& model, const Eigen::MatrixXd& x);

/// 1 - SSE/SST around the mean of `truth`. SST = 0 gives 0 if predictions are
/// exact, -inf otherwise.
double r_squared(std::span<const double> truth, const Eigen::VectorXd& predicted);

}  // namespace anchorprobe

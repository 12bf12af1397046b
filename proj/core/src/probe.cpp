#include "anchorprobe/probe.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include "anchorprobe/error.hpp"

namespace anchorprobe {

std::string_view to_string(ProbeKind kind) { return kind == ProbeKind::softmax ? "softmax_6class" : "ridge"; }

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) throw DomainError("cannot standardize an empty matrix");
  Standardizer s;
  s.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - s.mean;
  s.scale = (centered.colwise().squaredNorm() / static_cast<double>(x.rows())).cwiseSqrt();
  for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
    if (!(s.scale(j) > 1e-12)) s.scale(j) = 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) throw DomainError("feature count does not match the standardizer");
  return (x.rowwise() - mean).array().rowwise() / scale.array();
}

// ---------------------------------------------------------------- softmax

SoftmaxObjective::SoftmaxObjective(const Eigen::MatrixXd& features, std::span<const int> labels,
                                   int classes, double l2)
    : x_(features), dim_(features.cols()), classes_(classes), l2_(l2) {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
    throw DomainError("label count does not match row count");
  }
  onehot_ = Eigen::MatrixXd::Zero(features.rows(), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) throw DomainError("label out of range");
    onehot_(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
}

double SoftmaxObjective::value(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd unused(theta.size());
  return value_and_gradient(theta, unused);
}

double SoftmaxObjective::value_and_gradient(const Eigen::VectorXd& theta,
                                            Eigen::VectorXd& gradient) const {
  const Eigen::Map<const Eigen::MatrixXd> w(theta.data(), dim_, classes_);
  const Eigen::Map<const Eigen::VectorXd> b(theta.data() + dim_ * classes_, classes_);

  Eigen::MatrixXd logits = x_ * w;
  logits.rowwise() += b.transpose();
  const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  logits.colwise() -= row_max;
  Eigen::MatrixXd probs = logits.array().exp();
  const Eigen::VectorXd sums = probs.rowwise().sum();
  const Eigen::VectorXd log_sums = sums.array().log();

  // Σ_i logsumexp(z_i) - z_{i,y_i}, with the shift cancelling.
  const double data_loss = log_sums.sum() - (logits.array() * onehot_.array()).sum();
  const double loss = data_loss + 0.5 * l2_ * w.squaredNorm();

  probs.array().colwise() /= sums.array();
  const Eigen::MatrixXd residual = probs - onehot_;
  gradient.resize(theta.size());
  Eigen::Map<Eigen::MatrixXd> gw(gradient.data(), dim_, classes_);
  gw.noalias() = x_.transpose() * residual;
  gw += l2_ * w;
  gradient.tail(classes_) = residual.colwise().sum().transpose();
  return loss;
}

ProbeModel train_softmax_probe(const Eigen::MatrixXd& x, std::span<const int> labels, double l2,
                               const SoftmaxOptions& options) {
  if (x.rows() == 0) throw DomainError("softmax probe: no training rows");
  if (!x.allFinite()) throw DomainError("softmax probe: non-finite features");
  if (!(l2 >= 0)) throw DomainError("softmax probe: l2 must be non-negative");
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw DomainError("softmax probe needs at least two classes");
  const int classes = options.classes > 0 ? options.classes : *distinct.rbegin() + 1;

  ProbeModel model;
  model.kind = ProbeKind::softmax;
  model.l2 = l2;
  model.classes = classes;
  model.standardizer = Standardizer::fit(x);
  const Eigen::MatrixXd xs = model.standardizer.apply(x);
  const SoftmaxObjective objective(xs, labels, classes, l2);

  const Eigen::Index n_params = objective.parameter_count();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n_params);
  Eigen::VectorXd grad(n_params);
  double loss = objective.value_and_gradient(theta, grad);
  model.loss_history.push_back(loss);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd next_theta(n_params), next_grad(n_params);

  int iter = 0;
  double gnorm = grad.norm();
  while (gnorm > options.gradient_tolerance && iter < options.max_iterations) {
    // Two-loop recursion.
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    double gamma = 1.0 / std::max(gnorm, 1.0);
    if (!s_hist.empty()) gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    Eigen::VectorXd direction = gamma * q;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(direction);
      direction += s_hist[i] * (alpha[i] - beta);
    }
    direction = -direction;
    double slope = grad.dot(direction);
    if (!(slope < 0)) {
      // Not a descent direction: restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      direction = -grad / std::max(gnorm, 1.0);
      slope = grad.dot(direction);
    }

    double step = 1.0;
    double next_loss = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int trial = 0; trial < 60; ++trial) {
      next_theta = theta + step * direction;
      next_loss = objective.value_and_gradient(next_theta, next_grad);
      // Near the optimum, sum-of-losses differences fall below double
      // resolution; a step that does not raise the loss and shrinks the
      // gradient is then accepted as well.
      if (std::isfinite(next_loss) &&
          (next_loss <= loss + 1e-4 * step * slope || (next_loss <= loss && next_grad.norm() < gnorm))) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // line search exhausted; keep the best point so far

    Eigen::VectorXd s = next_theta - theta;
    Eigen::VectorXd y = next_grad - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * y.squaredNorm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    theta.swap(next_theta);
    grad.swap(next_grad);
    loss = next_loss;
    model.loss_history.push_back(loss);
    gnorm = grad.norm();
    ++iter;
  }

  model.iterations = iter;
  model.gradient_norm = gnorm;
  model.converged = gnorm <= options.gradient_tolerance;
  model.weights = Eigen::Map<const Eigen::MatrixXd>(theta.data(), x.cols(), classes);
  model.bias = theta.tail(classes);
  return model;
}

Eigen::MatrixXd predict_proba(const ProbeModel& model, const Eigen::MatrixXd& x) {
  if (model.kind != ProbeKind::softmax) throw DomainError("predict_proba needs a softmax probe");
  Eigen::MatrixXd logits = model.standardizer.apply(x) * model.weights;
  logits.rowwise() += model.bias.transpose();
  logits.colwise() -= logits.rowwise().maxCoeff();
  Eigen::MatrixXd p = logits.array().exp();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

std::vector<int> predict_class(const ProbeModel& model, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd p = predict_proba(model, x);
  std::vector<int> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index best = 0;
    p.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

// ---------------------------------------------------------------- ridge

ProbeModel train_ridge(const Eigen::MatrixXd& x, std::span<const double> y, double lambda) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (n < 2) throw DomainError("ridge needs at least two rows");
  if (static_cast<Eigen::Index>(y.size()) != n) throw DomainError("ridge: target length mismatch");
  if (!(lambda >= 0) || !std::isfinite(lambda)) throw DomainError("ridge: lambda must be finite and >= 0");
  if (!x.allFinite()) throw DomainError("ridge: non-finite features");

  ProbeModel model;
  model.kind = ProbeKind::ridge;
  model.l2 = lambda;
  model.classes = 1;
  model.standardizer = Standardizer::fit(x);
  const Eigen::MatrixXd xs = model.standardizer.apply(x);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const double y_mean = yv.mean();
  const Eigen::VectorXd yc = yv.array() - y_mean;

  Eigen::VectorXd w;
  if (lambda == 0.0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xs);
    cod.setThreshold(1e-10);
    if (cod.rank() < std::min(n - 1, d)) {
      throw IllConditioned("ridge with lambda = 0: design has rank " + std::to_string(cod.rank()) +
                           " < " + std::to_string(std::min(n - 1, d)) + "; use lambda > 0");
    }
    w = cod.solve(yc);
  } else if (d <= n) {
    Eigen::MatrixXd gram = xs.transpose() * xs;
    gram.diagonal().array() += lambda;
    w = gram.ldlt().solve(xs.transpose() * yc);
  } else {
    Eigen::MatrixXd gram = xs * xs.transpose();
    gram.diagonal().array() += lambda;
    w = xs.transpose() * gram.ldlt().solve(yc);
  }
  model.weights = w;
  model.bias = Eigen::VectorXd::Constant(1, y_mean);
  return model;
}

Eigen::VectorXd predict(const ProbeModel& model, const Eigen::MatrixXd& x) {
  if (model.kind != ProbeKind::ridge) throw DomainError("predict needs a ridge probe");
  return (model.standardizer.apply(x) * model.weights).col(0).array() + model.bias(0);
}

double r_squared(std::span<const double> truth, const Eigen::VectorXd& predicted) {
  if (truth.empty() || static_cast<Eigen::Index>(truth.size()) != predicted.size()) {
    throw DomainError("r_squared: length mismatch");
  }
  double m = 0.0;
  for (double t : truth) m += t;
  m /= static_cast<double>(truth.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = truth[i] - predicted(static_cast<Eigen::Index>(i));
    sse += e * e;
    sst += (truth[i] - m) * (truth[i] - m);
  }
  if (sst <= 0) return sse <= 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return 1.0 - sse / sst;
}

}  // namespace anchorprobe

#include "vexrec/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vexrec {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

double tanh_act(double x) { return std::tanh(x); }

double log_sigmoid(double x) {
  // log σ(x) = −log(1 + e^{−x}) = min(x, 0) − log1p(e^{−|x|})
  return std::min(x, 0.0) - std::log1p(std::exp(-std::abs(x)));
}

DenseVector softmax(const DenseVector& logits) {
  if (logits.empty()) throw ShapeError("softmax: empty vector");
  const double mx = *std::max_element(logits.begin(), logits.end());
  DenseVector out(logits.dim());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.dim(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

DenseVector log_softmax(const DenseVector& logits) {
  if (logits.empty()) throw ShapeError("log_softmax: empty vector");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double v : logits) total += std::exp(v - mx);
  const double log_z = mx + std::log(total);
  DenseVector out(logits.dim());
  for (std::size_t i = 0; i < logits.dim(); ++i) out[i] = logits[i] - log_z;
  return out;
}

DenseVector finite_diff_grad(const ScalarFunction& loss_fn, const DenseVector& params,
                             double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1e-3)) {
    throw std::invalid_argument("finite_diff_grad: epsilon must be in (0, 1e-3], got " +
                                std::to_string(epsilon));
  }
  DenseVector x = params;
  DenseVector grad(params.dim());
  for (std::size_t i = 0; i < params.dim(); ++i) {
    const double orig = x[i];
    x[i] = orig + epsilon;
    const double up = loss_fn(x);
    x[i] = orig - epsilon;
    const double down = loss_fn(x);
    x[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NonFiniteLoss(i, "finite_diff_grad: non-finite loss when perturbing coordinate " +
                                 std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * epsilon);
  }
  return grad;
}

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

}  // namespace vexrec

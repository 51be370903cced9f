#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>

#include "vexrec/linalg.hpp"

namespace vexrec {

double sigmoid(double x);
double relu(double x);
double tanh_act(double x);

// log σ(x), finite for every finite x.
double log_sigmoid(double x);

// Max-subtracted softmax. Throws ShapeError on an empty input.
DenseVector softmax(const DenseVector& logits);
DenseVector log_softmax(const DenseVector& logits);

class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(std::size_t coordinate, const std::string& what)
      : std::runtime_error(what), coordinate_(coordinate) {}
  std::size_t coordinate() const { return coordinate_; }

 private:
  std::size_t coordinate_;
};

using ScalarFunction = std::function<double(const DenseVector&)>;

// Central differences (f(x+ε) − f(x−ε)) / 2ε per coordinate.
// epsilon must lie in (0, 1e-3].
DenseVector finite_diff_grad(const ScalarFunction& loss_fn, const DenseVector& params,
                             double epsilon = 1e-5);

// |a − b| / max(|a|, |b|, floor). The floor turns the check into an absolute
// one for gradients that are essentially zero, where the central difference is
// dominated by roundoff.
double relative_error(double analytic, double numeric, double floor = 1e-4);

}  // namespace vexrec

#include "vexrec/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace vexrec {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace

void DenseVector::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  require(values_.size() == rows_ * cols_,
          "matrix payload of " + std::to_string(values_.size()) + " values does not fit " +
              std::to_string(rows_) + "x" + std::to_string(cols_));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void DenseMatrix::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

std::string shape_string(const DenseMatrix& m) {
  return "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "]";
}

std::string shape_string(const DenseVector& v) { return "[" + std::to_string(v.dim()) + "]"; }

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length " + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

DenseVector matvec(const DenseMatrix& m, const DenseVector& v) {
  require(m.cols() == v.dim(),
          "matvec: matrix " + shape_string(m) + " times vector " + shape_string(v));
  DenseVector out(m.rows());
  matvec_add(m, v.span(), out.span());
  return out;
}

DenseVector matvec_transposed(const DenseMatrix& m, const DenseVector& v) {
  require(m.rows() == v.dim(), "matvec_transposed: matrix " + shape_string(m) +
                                   " transposed times vector " + shape_string(v));
  DenseVector out(m.cols());
  matvec_transposed_add(m, v.span(), out.span());
  return out;
}

void matvec_add(const DenseMatrix& m, std::span<const double> v, std::span<double> out) {
  require(m.cols() == v.size() && m.rows() == out.size(),
          "matvec_add: matrix " + shape_string(m) + ", input " + std::to_string(v.size()) +
              ", output " + std::to_string(out.size()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double s = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * v[c];
    out[r] += s;
  }
}

void matvec_transposed_add(const DenseMatrix& m, std::span<const double> v,
                           std::span<double> out) {
  require(m.rows() == v.size() && m.cols() == out.size(),
          "matvec_transposed_add: matrix " + shape_string(m) + ", input " +
              std::to_string(v.size()) + ", output " + std::to_string(out.size()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    const double vr = v[r];
    if (vr == 0.0) continue;
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c] * vr;
  }
}

void outer_add(DenseMatrix& m, std::span<const double> a, std::span<const double> b,
               double scale) {
  require(m.rows() == a.size() && m.cols() == b.size(),
          "outer_add: matrix " + shape_string(m) + " vs outer " + std::to_string(a.size()) +
              "x" + std::to_string(b.size()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double ar = scale * a[r];
    if (ar == 0.0) continue;
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += ar * b[c];
  }
}

void axpy(double scale, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(),
          "axpy: length " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += scale * x[i];
}

DenseVector hadamard(const DenseVector& a, const DenseVector& b) {
  require(a.dim() == b.dim(),
          "hadamard: " + shape_string(a) + " vs " + shape_string(b));
  DenseVector out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] * b[i];
  return out;
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace vexrec

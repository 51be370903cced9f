#pragma once

// Dense row-major linear algebra used by every model component.
//
// Everything is 64-bit. Shapes are checked on every call and mismatches raise
// ShapeError naming both shapes.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vexrec {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  DenseVector(std::initializer_list<double> init) : values_(init) {}
  explicit DenseVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t dim() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  void fill(double v);

  bool operator==(const DenseVector&) const = default;

 private:
  std::vector<double> values_;
};

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }

  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  void fill(double v);

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

std::string shape_string(const DenseMatrix& m);
std::string shape_string(const DenseVector& v);

double dot(std::span<const double> a, std::span<const double> b);

// m · v
DenseVector matvec(const DenseMatrix& m, const DenseVector& v);
// mᵀ · v
DenseVector matvec_transposed(const DenseMatrix& m, const DenseVector& v);

// Accumulating kernels used by the backward passes.
// out += m · v
void matvec_add(const DenseMatrix& m, std::span<const double> v, std::span<double> out);
// out += mᵀ · v
void matvec_transposed_add(const DenseMatrix& m, std::span<const double> v,
                           std::span<double> out);
// m += scale · a ⊗ b  (a indexes rows, b indexes columns)
void outer_add(DenseMatrix& m, std::span<const double> a, std::span<const double> b,
               double scale = 1.0);
// y += scale · x
void axpy(double scale, std::span<const double> x, std::span<double> y);

DenseVector hadamard(const DenseVector& a, const DenseVector& b);

double squared_norm(std::span<const double> v);
bool all_finite(std::span<const double> v);

}  // namespace vexrec

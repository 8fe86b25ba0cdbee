#ifndef OSA_TENSOR_HPP
#define OSA_TENSOR_HPP

#include <Eigen/Dense>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "osa/errors.hpp"

namespace osa {

// Dense n-dimensional array, contiguous row-major storage. Heavy math goes
// through Eigen maps over the flat buffer.
template <typename Scalar>
struct Tensor {
  using MatrixRM = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  std::vector<long> shape;
  std::vector<Scalar> data;

  Tensor() = default;
  explicit Tensor(std::vector<long> s) : shape(std::move(s)), data(checked_numel(shape), Scalar(0)) {}
  Tensor(std::initializer_list<long> s) : Tensor(std::vector<long>(s)) {}

  static Tensor zeros(std::vector<long> s) { return Tensor(std::move(s)); }

  static Tensor from_values(std::vector<long> s, std::initializer_list<Scalar> values) {
    Tensor t(std::move(s));
    if (static_cast<std::size_t>(t.numel()) != values.size())
      raise(ErrorCode::ShapeMismatch, "value count does not match shape");
    std::copy(values.begin(), values.end(), t.data.begin());
    return t;
  }

  long numel() const { return static_cast<long>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  long dim(int i) const { return shape.at(static_cast<std::size_t>(i)); }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  void fill(Scalar v) { std::fill(data.begin(), data.end(), v); }
  void set_zero() { fill(Scalar(0)); }

  Scalar& operator()(long i, long j) { return data[static_cast<std::size_t>(i * shape[1] + j)]; }
  Scalar operator()(long i, long j) const { return data[static_cast<std::size_t>(i * shape[1] + j)]; }
  Scalar& operator()(long i, long j, long k) {
    return data[static_cast<std::size_t>((i * shape[1] + j) * shape[2] + k)];
  }
  Scalar operator()(long i, long j, long k) const {
    return data[static_cast<std::size_t>((i * shape[1] + j) * shape[2] + k)];
  }

  // Flat 2-D view; rows*cols must cover the buffer exactly.
  Eigen::Map<MatrixRM> mat(long rows, long cols) {
    check_view(rows, cols);
    return Eigen::Map<MatrixRM>(data.data(), rows, cols);
  }
  Eigen::Map<const MatrixRM> mat(long rows, long cols) const {
    check_view(rows, cols);
    return Eigen::Map<const MatrixRM>(data.data(), rows, cols);
  }

  Eigen::Map<ArrayX> array() { return Eigen::Map<ArrayX>(data.data(), numel()); }
  Eigen::Map<const ArrayX> array() const { return Eigen::Map<const ArrayX>(data.data(), numel()); }

  bool all_finite() const {
    for (Scalar v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  std::string shape_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
  }

 private:
  static long checked_numel(const std::vector<long>& s) {
    long n = 1;
    for (long d : s) {
      if (d < 0) raise(ErrorCode::ShapeMismatch, "negative extent");
      n *= d;
    }
    return n;
  }
  void check_view(long rows, long cols) const {
    if (rows * cols != numel())
      raise(ErrorCode::ShapeMismatch,
            "view " + std::to_string(rows) + "x" + std::to_string(cols) + " does not cover " +
                shape_string());
  }
};

// Output length of a valid-padding strided convolution.
inline long conv_output_length(long time, long kernel, long stride) {
  if (kernel < 1 || stride < 1) raise(ErrorCode::ShapeMismatch, "kernel and stride must be >= 1");
  if (time < kernel) raise(ErrorCode::ShapeMismatch, "input shorter than the kernel");
  return (time - kernel) / stride + 1;
}

// Non-overlapping max pooling, trailing remainder dropped.
inline long pooled_length(long time, long pool) {
  if (pool < 1) raise(ErrorCode::ShapeMismatch, "pool must be >= 1");
  if (time < pool) raise(ErrorCode::ShapeMismatch, "input shorter than the pool window");
  return time / pool;
}

}  // namespace osa

#endif  // OSA_TENSOR_HPP

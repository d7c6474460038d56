#ifndef OBA_TENSOR_HPP
#define OBA_TENSOR_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oba/error.hpp"

namespace oba {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowMatrixMap = Eigen::Map<RowMatrix<Scalar>>;

template <typename Scalar>
using ConstRowMatrixMap = Eigen::Map<const RowMatrix<Scalar>>;

inline Index shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<Index>());
}

inline std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "x" : "") << shape[i];
  out << ']';
  return out.str();
}

/**
 * Dense N-dimensional array stored row-major (last axis fastest) in an Eigen
 * column vector. The flat storage is exposed directly so that layers can use
 * Eigen expressions and matrix maps over contiguous slabs.
 */
template <typename Scalar>
class Tensor {
 public:
  using Scalar_t = Scalar;

  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(std::move(shape)) {
    check_dims();
    data_ = Vector<Scalar>::Zero(shape_size(shape_));
  }

  Tensor(std::initializer_list<Index> shape) : Tensor(Shape(shape)) {}

  Tensor(Shape shape, Vector<Scalar> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_dims();
    if (shape_size(shape_) != data_.size())
      throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " + shape_string(shape_));
  }

  static Tensor constant(Shape shape, Scalar value) {
    Tensor t(std::move(shape));
    t.data_.setConstant(value);
    return t;
  }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  Index size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  Vector<Scalar>& values() { return data_; }
  const Vector<Scalar>& values() const { return data_; }
  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Scalar& operator[](Index i) { return data_[i]; }
  Scalar operator[](Index i) const { return data_[i]; }

  template <typename... Idx>
  Scalar& operator()(Idx... idx) {
    return data_[offset({static_cast<Index>(idx)...})];
  }
  template <typename... Idx>
  Scalar operator()(Idx... idx) const {
    return data_[offset({static_cast<Index>(idx)...})];
  }

  /// Row-major matrix view of the whole buffer with the given row count.
  RowMatrixMap<Scalar> matrix(Index rows) {
    return RowMatrixMap<Scalar>(data_.data(), rows, rows ? size() / rows : 0);
  }
  ConstRowMatrixMap<Scalar> matrix(Index rows) const {
    return ConstRowMatrixMap<Scalar>(data_.data(), rows, rows ? size() / rows : 0);
  }

  Tensor reshaped(Shape shape) const& {
    Tensor out(std::move(shape), data_);
    return out;
  }
  Tensor reshaped(Shape shape) && {
    Tensor out(std::move(shape), std::move(data_));
    return out;
  }

  template <typename Other>
  Tensor<Other> cast() const {
    return Tensor<Other>(shape_, data_.template cast<Other>());
  }

  bool all_finite() const { return data_.allFinite(); }

  friend bool operator==(const Tensor& a, const Tensor& b) { return a.shape_ == b.shape_ && a.data_ == b.data_; }

 private:
  void check_dims() const {
    for (Index d : shape_)
      if (d < 0) throw ShapeError("negative dimension in shape " + shape_string(shape_));
  }

  Index offset(std::initializer_list<Index> idx) const {
    Index off = 0;
    std::size_t axis = 0;
    for (Index i : idx) off = off * shape_[axis++] + i;
    return off;
  }

  Shape shape_;
  Vector<Scalar> data_;
};

using Tensord = Tensor<double>;

inline void require_rank(const Shape& shape, Index rank, const char* what) {
  if (static_cast<Index>(shape.size()) != rank)
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got shape " + shape_string(shape));
}

}  // namespace oba

#endif  // OBA_TENSOR_HPP

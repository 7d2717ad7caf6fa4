#pragma once

#include <algorithm>
#include <cstdlib>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "plseada/core/error.hpp"
#include "plseada/core/shape.hpp"

namespace plseada::nets {

/// 64-byte aligned allocation. Vectorised reductions peel a data-dependent
/// prefix on unaligned buffers, so a fixed alignment keeps float results
/// independent of where the heap happened to place a buffer.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t kAlignment = 64;

  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    const std::size_t bytes = ((n * sizeof(T) + kAlignment - 1) / kAlignment) * kAlignment;
    if (void* p = std::aligned_alloc(kAlignment, bytes == 0 ? kAlignment : bytes)) return static_cast<T*>(p);
    throw std::bad_alloc();
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Dense row-major array with a runtime shape. Batches put the sample axis first.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(element_count(shape_), fill) {}
  Tensor(Shape shape, std::initializer_list<T> data) : Tensor(std::move(shape), AlignedVector<T>(data)) {}
  Tensor(Shape shape, const std::vector<T>& data) : Tensor(std::move(shape), AlignedVector<T>(data.begin(), data.end())) {}
  Tensor(Shape shape, AlignedVector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size()) {
      throw ContractError("tensor data size " + std::to_string(data_.size()) +
                          " does not match shape " + to_string(shape_));
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  AlignedVector<T>& storage() noexcept { return data_; }
  const AlignedVector<T>& storage() const noexcept { return data_; }
  std::vector<T> to_vector() const { return {data_.begin(), data_.end()}; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  Tensor reshaped(Shape shape) const& {
    Tensor out = *this;
    out.reshape(std::move(shape));
    return out;
  }
  Tensor reshaped(Shape shape) && {
    reshape(std::move(shape));
    return std::move(*this);
  }
  void reshape(Shape shape) {
    if (element_count(shape) != data_.size()) {
      throw ContractError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
    }
    shape_ = std::move(shape);
  }

  /// Number of elements per leading-axis item.
  std::size_t item_size() const { return shape_.empty() ? 0 : data_.size() / shape_[0]; }

  /// Rows [begin, end) along the leading axis.
  Tensor slice_rows(std::size_t begin, std::size_t end) const {
    Shape s = shape_;
    s[0] = end - begin;
    const auto stride = item_size();
    return Tensor(std::move(s), AlignedVector<T>(data_.begin() + static_cast<std::ptrdiff_t>(begin * stride),
                                               data_.begin() + static_cast<std::ptrdiff_t>(end * stride)));
  }

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  AlignedVector<T> data_;
};

/// Stacks two tensors along the leading axis; trailing shapes must agree.
template <typename T>
Tensor<T> concat_rows(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != b.rank() || !std::equal(a.shape().begin() + 1, a.shape().end(), b.shape().begin() + 1)) {
    throw ContractError("concat_rows: trailing shapes differ");
  }
  Shape s = a.shape();
  s[0] += b.dim(0);
  AlignedVector<T> data(a.storage());
  data.insert(data.end(), b.storage().begin(), b.storage().end());
  return Tensor<T>(std::move(s), std::move(data));
}

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& t) {
  AlignedVector<To> data(t.size());
  std::transform(t.storage().begin(), t.storage().end(), data.begin(),
                 [](From v) { return static_cast<To>(v); });
  return Tensor<To>(t.shape(), std::move(data));
}

}  // namespace plseada::nets

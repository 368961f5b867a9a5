#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace menurank::nn {

/// Dense row-major matrix of doubles. Every activation and parameter array
/// in the ranker is one of these; vectors are 1×n or n×1.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data);
  Tensor2(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void fill(double value);
  bool same_shape(const Tensor2& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_string() const;

  friend bool operator==(const Tensor2&, const Tensor2&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Tensor2 matmul(const Tensor2& a, const Tensor2& b);
// a · bᵀ without materializing the transpose.
Tensor2 matmul_transposed(const Tensor2& a, const Tensor2& b);
Tensor2 transpose(const Tensor2& a);

/// Row-wise softmax with max subtraction. Columns whose flag in
/// `column_mask` is false receive exactly zero weight; an empty mask keeps
/// every column. Throws ContractError if a mask disables every column.
Tensor2 softmax_rows(const Tensor2& a, const std::vector<bool>& column_mask = {});

// Throws DimensionError naming both shapes when they differ.
void require_same_shape(const Tensor2& a, const Tensor2& b, const char* what);

}  // namespace menurank::nn

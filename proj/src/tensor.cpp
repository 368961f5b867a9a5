#include "menurank/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "menurank/errors.hpp"

namespace menurank::nn {

Tensor2::Tensor2(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor2::Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
  }
}

Tensor2::Tensor2(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged tensor literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

void Tensor2::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

std::string Tensor2::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void require_same_shape(const Tensor2& a, const Tensor2& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " + a.shape_string() +
                         " vs " + b.shape_string());
  }
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + a.shape_string() + " by " +
                         b.shape_string());
  }
  Tensor2 out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Tensor2 matmul_transposed(const Tensor2& a, const Tensor2& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_transposed: cannot multiply " + a.shape_string() +
                         " by transpose of " + b.shape_string());
  }
  Tensor2 out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto a_row = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto b_row = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a_row[k] * b_row[k];
      out(i, j) = acc;
    }
  }
  return out;
}

Tensor2 transpose(const Tensor2& a) {
  Tensor2 out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Tensor2 softmax_rows(const Tensor2& a, const std::vector<bool>& column_mask) {
  const bool masked = !column_mask.empty();
  if (masked) {
    if (column_mask.size() != a.cols()) {
      throw DimensionError("softmax_rows: mask length " + std::to_string(column_mask.size()) +
                           " for " + a.shape_string() + " input");
    }
    if (std::none_of(column_mask.begin(), column_mask.end(), [](bool v) { return v; })) {
      throw ContractError("softmax_rows: every column is masked");
    }
  }
  Tensor2 out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto in = a.row(i);
    auto dst = out.row(i);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (!masked || column_mask[j]) peak = std::max(peak, in[j]);
    double total = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (masked && !column_mask[j]) continue;
      dst[j] = std::exp(in[j] - peak);
      total += dst[j];
    }
    for (std::size_t j = 0; j < a.cols(); ++j) dst[j] /= total;
  }
  return out;
}

}  // namespace menurank::nn

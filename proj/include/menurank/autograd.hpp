#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "menurank/tensor.hpp"

namespace menurank::nn {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// owning tape is alive.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;
};

/// Reverse-mode gradient tape. Operations append nodes in evaluation order;
/// backward() walks them in reverse and accumulates adjoints. A tape records
/// one forward computation and is discarded afterwards.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf owning a copy of `value`.
  Var constant(Tensor2 value);
  // Leaf aliasing caller-owned storage, which must outlive the tape.
  // Gradients are tracked for it.
  Var parameter(const Tensor2& value);

  const Tensor2& value(Var v) const;
  // Adjoint of `v` after backward(); all-zero if `v` does not influence the
  // loss or backward() has not run.
  Tensor2 grad(Var v) const;

  /// Accumulate d(loss)/d(node) for every recorded node. `loss` must be 1×1.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  // Used by op implementations.
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;
  Var record(Tensor2 value, std::vector<std::size_t> inputs, BackwardFn backward);
  Tensor2& grad_mut(std::size_t id);
  const Tensor2& value_at(std::size_t id) const;
  const Tensor2& grad_at(std::size_t id) const;

 private:
  struct Node {
    Tensor2 owned;
    const Tensor2* external = nullptr;
    Tensor2 grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Node& node(Var v);
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
};

// Differentiable operations. Every result is recorded on the tape owning the
// operands, which must all belong to the same tape.
Var matmul(Var a, Var b);
Var matmul_transposed(Var a, Var b);  // a · bᵀ
Var add(Var a, Var b);
// Adds the 1×n row `bias` to every row of the m×n `a`.
Var add_row(Var a, Var bias);
Var scale(Var a, double factor);
Var sum(Var a);
Var softmax_rows(Var a, const std::vector<bool>& column_mask = {});

/// For each bag, the mean of the listed rows of `table`; an empty bag yields
/// a zero row. Result is bags.size() × table.cols().
Var embedding_bag_mean(Var table, const std::vector<std::vector<std::size_t>>& bags);

/// Mean over `pairs` of −log σ(s[first] − s[second]) for an n×1 score column.
/// An empty pair list yields 0.
Var pairwise_logistic(Var scores, std::span<const std::pair<std::size_t, std::size_t>> pairs);

}  // namespace menurank::nn

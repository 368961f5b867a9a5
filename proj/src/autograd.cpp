#include "menurank/autograd.hpp"

#include <cmath>
#include <string>

#include "menurank/errors.hpp"

namespace menurank::nn {
namespace {

void check_same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) {
    throw ContractError("operands recorded on different tapes");
  }
}

void accumulate(Tensor2& dst, const Tensor2& src) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

// log(1 + e^x) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var Tape::constant(Tensor2 value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::parameter(const Tensor2& value) {
  Node n;
  n.external = &value;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::record(Tensor2 value, std::vector<std::size_t> inputs, BackwardFn backward) {
  Node n;
  n.owned = std::move(value);
  for (std::size_t in : inputs) n.requires_grad = n.requires_grad || nodes_.at(in).requires_grad;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Tape::Node& Tape::node(Var v) {
  if (v.tape != this || v.id >= nodes_.size()) throw ContractError("variable not on this tape");
  return nodes_[v.id];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape != this || v.id >= nodes_.size()) throw ContractError("variable not on this tape");
  return nodes_[v.id];
}

const Tensor2& Tape::value_at(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.external != nullptr ? *n.external : n.owned;
}

const Tensor2& Tape::value(Var v) const {
  node(v);
  return value_at(v.id);
}

Tensor2& Tape::grad_mut(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) {
    const Tensor2& val = value_at(id);
    n.grad = Tensor2(val.rows(), val.cols());
  }
  return n.grad;
}

const Tensor2& Tape::grad_at(std::size_t id) const { return nodes_[id].grad; }

Tensor2 Tape::grad(Var v) const {
  const Node& n = node(v);
  if (!n.grad.empty()) return n.grad;
  const Tensor2& val = value_at(v.id);
  return Tensor2(val.rows(), val.cols());
}

void Tape::backward(Var loss) {
  const Tensor2& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward requires a scalar loss, got " + lv.shape_string());
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].grad.empty()) nodes_[i].grad.fill(0.0);
  }
  grad_mut(loss.id)(0, 0) = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && !n.grad.empty()) n.backward(*this, i);
  }
}

Var matmul(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = *a.tape;
  return t.record(matmul(t.value(a), t.value(b)), {a.id, b.id},
                  [ia = a.id, ib = b.id](Tape& tp, std::size_t self) {
                    const Tensor2& g = tp.grad_at(self);
                    // dA = G·Bᵀ, dB = Aᵀ·G
                    accumulate(tp.grad_mut(ia), matmul_transposed(g, tp.value_at(ib)));
                    accumulate(tp.grad_mut(ib), matmul(transpose(tp.value_at(ia)), g));
                  });
}

Var matmul_transposed(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = *a.tape;
  return t.record(matmul_transposed(t.value(a), t.value(b)), {a.id, b.id},
                  [ia = a.id, ib = b.id](Tape& tp, std::size_t self) {
                    const Tensor2& g = tp.grad_at(self);
                    // C = A·Bᵀ: dA = G·B, dB = Gᵀ·A
                    accumulate(tp.grad_mut(ia), matmul(g, tp.value_at(ib)));
                    accumulate(tp.grad_mut(ib), matmul(transpose(g), tp.value_at(ia)));
                  });
}

Var add(Var a, Var b) {
  check_same_tape(a, b);
  Tape& t = *a.tape;
  const Tensor2& av = t.value(a);
  const Tensor2& bv = t.value(b);
  require_same_shape(av, bv, "add");
  Tensor2 out = av;
  accumulate(out, bv);
  return t.record(std::move(out), {a.id, b.id},
                  [ia = a.id, ib = b.id](Tape& tp, std::size_t self) {
                    accumulate(tp.grad_mut(ia), tp.grad_at(self));
                    accumulate(tp.grad_mut(ib), tp.grad_at(self));
                  });
}

Var add_row(Var a, Var bias) {
  check_same_tape(a, bias);
  Tape& t = *a.tape;
  const Tensor2& av = t.value(a);
  const Tensor2& bv = t.value(bias);
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw DimensionError("add_row: cannot broadcast " + bv.shape_string() + " over " +
                         av.shape_string());
  }
  Tensor2 out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bv(0, j);
  return t.record(std::move(out), {a.id, bias.id},
                  [ia = a.id, ib = bias.id](Tape& tp, std::size_t self) {
                    const Tensor2& g = tp.grad_at(self);
                    accumulate(tp.grad_mut(ia), g);
                    Tensor2& gb = tp.grad_mut(ib);
                    for (std::size_t i = 0; i < g.rows(); ++i)
                      for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
                  });
}

Var scale(Var a, double factor) {
  Tape& t = *a.tape;
  Tensor2 out = t.value(a);
  for (double& x : out.data()) x *= factor;
  return t.record(std::move(out), {a.id}, [ia = a.id, factor](Tape& tp, std::size_t self) {
    const auto g = tp.grad_at(self).data();
    auto ga = tp.grad_mut(ia).data();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
  });
}

Var sum(Var a) {
  Tape& t = *a.tape;
  double total = 0.0;
  for (double x : t.value(a).data()) total += x;
  return t.record(Tensor2(1, 1, total), {a.id}, [ia = a.id](Tape& tp, std::size_t self) {
    const double g = tp.grad_at(self)(0, 0);
    for (double& x : tp.grad_mut(ia).data()) x += g;
  });
}

Var softmax_rows(Var a, const std::vector<bool>& column_mask) {
  Tape& t = *a.tape;
  return t.record(softmax_rows(t.value(a), column_mask), {a.id},
                  [ia = a.id](Tape& tp, std::size_t self) {
                    // dX_ij = P_ij (G_ij − Σ_k G_ik P_ik); masked columns have P = 0.
                    const Tensor2& p = tp.value_at(self);
                    const Tensor2& g = tp.grad_at(self);
                    Tensor2& ga = tp.grad_mut(ia);
                    for (std::size_t i = 0; i < p.rows(); ++i) {
                      double dot = 0.0;
                      for (std::size_t j = 0; j < p.cols(); ++j) dot += g(i, j) * p(i, j);
                      for (std::size_t j = 0; j < p.cols(); ++j)
                        ga(i, j) += p(i, j) * (g(i, j) - dot);
                    }
                  });
}

Var embedding_bag_mean(Var table, const std::vector<std::vector<std::size_t>>& bags) {
  Tape& t = *table.tape;
  const Tensor2& tv = t.value(table);
  Tensor2 out(bags.size(), tv.cols());
  for (std::size_t b = 0; b < bags.size(); ++b) {
    if (bags[b].empty()) continue;
    const double w = 1.0 / static_cast<double>(bags[b].size());
    for (std::size_t idx : bags[b]) {
      if (idx >= tv.rows()) {
        throw DimensionError("embedding_bag_mean: index " + std::to_string(idx) +
                             " out of range for table " + tv.shape_string());
      }
      for (std::size_t j = 0; j < tv.cols(); ++j) out(b, j) += w * tv(idx, j);
    }
  }
  return t.record(std::move(out), {table.id},
                  [it = table.id, bags](Tape& tp, std::size_t self) {
                    const Tensor2& g = tp.grad_at(self);
                    Tensor2& gt = tp.grad_mut(it);
                    for (std::size_t b = 0; b < bags.size(); ++b) {
                      if (bags[b].empty()) continue;
                      const double w = 1.0 / static_cast<double>(bags[b].size());
                      for (std::size_t idx : bags[b])
                        for (std::size_t j = 0; j < g.cols(); ++j) gt(idx, j) += w * g(b, j);
                    }
                  });
}

Var pairwise_logistic(Var scores, std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  Tape& t = *scores.tape;
  const Tensor2& s = t.value(scores);
  if (s.cols() != 1) {
    throw DimensionError("pairwise_logistic: scores must be a column, got " + s.shape_string());
  }
  double total = 0.0;
  for (const auto& [hi, lo] : pairs) {
    if (hi >= s.rows() || lo >= s.rows()) throw DimensionError("pairwise_logistic: pair out of range");
    total += softplus(-(s(hi, 0) - s(lo, 0)));
  }
  const double n = static_cast<double>(pairs.size());
  const double loss = pairs.empty() ? 0.0 : total / n;
  std::vector<std::pair<std::size_t, std::size_t>> kept(pairs.begin(), pairs.end());
  return t.record(Tensor2(1, 1, loss), {scores.id},
                  [is = scores.id, kept = std::move(kept), n](Tape& tp, std::size_t self) {
                    if (kept.empty()) return;
                    const double g = tp.grad_at(self)(0, 0) / n;
                    const Tensor2& sv = tp.value_at(is);
                    Tensor2& gs = tp.grad_mut(is);
                    for (const auto& [hi, lo] : kept) {
                      // d/dm softplus(−m) = −σ(−m)
                      const double d = -sigmoid(-(sv(hi, 0) - sv(lo, 0))) * g;
                      gs(hi, 0) += d;
                      gs(lo, 0) -= d;
                    }
                  });
}

}  // namespace menurank::nn

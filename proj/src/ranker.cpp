#include "menurank/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "menurank/errors.hpp"

namespace menurank {

void RankerConfig::validate() const {
  if (embed_dim < 4) throw ContractError("ranker: embed_dim must be at least 4");
  if (num_keys < 1) throw ContractError("ranker: at least one search key is required");
  if (vocab_size < 2) throw ContractError("ranker: vocabulary must include PAD and UNK");
}

std::array<nn::Tensor2*, RankerParams::kArrayCount> RankerParams::arrays() {
  return {&word_embeddings, &key_embeddings, &query_weight, &query_bias, &key_weight,
          &key_bias,        &value_weight,   &value_bias,   &score_weight, &score_bias};
}

std::array<const nn::Tensor2*, RankerParams::kArrayCount> RankerParams::arrays() const {
  return {&word_embeddings, &key_embeddings, &query_weight, &query_bias, &key_weight,
          &key_bias,        &value_weight,   &value_bias,   &score_weight, &score_bias};
}

const std::array<std::string_view, RankerParams::kArrayCount>& RankerParams::array_names() {
  static const std::array<std::string_view, kArrayCount> names = {
      "word_embeddings", "key_embeddings", "query_weight", "query_bias", "key_weight",
      "key_bias",        "value_weight",   "value_bias",   "score_weight", "score_bias"};
  return names;
}

RankerConfig RankerParams::config() const {
  return {word_embeddings.cols(), key_embeddings.rows(), word_embeddings.rows()};
}

namespace {

std::array<std::pair<std::size_t, std::size_t>, RankerParams::kArrayCount> expected_shapes(
    const RankerConfig& c) {
  const std::size_t d = c.embed_dim;
  return {{{c.vocab_size, d}, {c.num_keys, d}, {d, d}, {1, d}, {d, d}, {1, d}, {d, d}, {1, d},
           {d, 1}, {1, 1}}};
}

}  // namespace

void RankerParams::check_shapes(const RankerConfig& config) const {
  const auto shapes = expected_shapes(config);
  const auto arrs = arrays();
  for (std::size_t i = 0; i < kArrayCount; ++i) {
    if (arrs[i]->rows() != shapes[i].first || arrs[i]->cols() != shapes[i].second) {
      throw DimensionError(std::string(array_names()[i]) + ": expected " +
                           std::to_string(shapes[i].first) + "x" +
                           std::to_string(shapes[i].second) + ", got " +
                           arrs[i]->shape_string());
    }
  }
}

Gradients zero_gradients(const RankerParams& params) {
  Gradients grads;
  for (const nn::Tensor2* a : params.arrays()) grads.emplace_back(a->rows(), a->cols());
  return grads;
}

RankerParams init_params(const RankerConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-0.1, 0.1);
  RankerParams params;
  const auto shapes = expected_shapes(config);
  auto arrs = params.arrays();
  for (std::size_t i = 0; i < RankerParams::kArrayCount; ++i) {
    *arrs[i] = nn::Tensor2(shapes[i].first, shapes[i].second);
    for (double& x : arrs[i]->data()) x = uniform(rng);
  }
  for (double& x : params.word_embeddings.row(kPadIndex)) x = 0.0;
  return params;
}

ParamVars ParamVars::record(nn::Tape& tape, const RankerParams& params) {
  ParamVars vars;
  const auto arrs = params.arrays();
  for (std::size_t i = 0; i < RankerParams::kArrayCount; ++i) vars.arrays[i] = tape.parameter(*arrs[i]);
  return vars;
}

nn::Var embed_menu(nn::Tape& tape, const ParamVars& p, const MenuTensor& menu, std::size_t key) {
  const std::size_t num_keys = tape.value(p.key_embeddings()).rows();
  if (key >= num_keys) {
    throw KeyError("search key id " + std::to_string(key) + " out of range; model has " +
                   std::to_string(num_keys) + " key(s)");
  }
  if (menu.mask.size() != menu.indices.size()) throw DimensionError("menu mask length mismatch");
  std::vector<std::vector<std::size_t>> bags(menu.dishes());
  for (std::size_t i = 0; i < menu.dishes(); ++i) {
    for (std::size_t w : menu.indices[i])
      if (w != kPadIndex) bags[i].push_back(w);
  }
  nn::Var words = nn::embedding_bag_mean(p.word_embeddings(), bags);
  nn::Var key_row = nn::embedding_bag_mean(p.key_embeddings(), {{key}});
  return nn::add_row(words, key_row);
}

AttentionResult self_attention(nn::Tape& tape, const ParamVars& p, nn::Var reps,
                               const std::vector<bool>& mask) {
  const std::size_t dim = tape.value(reps).cols();
  nn::Var q = nn::add_row(nn::matmul(reps, p.query_weight()), p.query_bias());
  nn::Var k = nn::add_row(nn::matmul(reps, p.key_weight()), p.key_bias());
  nn::Var v = nn::add_row(nn::matmul(reps, p.value_weight()), p.value_bias());
  nn::Var logits = nn::scale(nn::matmul_transposed(q, k), 1.0 / std::sqrt(static_cast<double>(dim)));
  nn::Var weights = nn::softmax_rows(logits, mask);
  return {nn::matmul(weights, v), weights};
}

nn::Var score_dishes(nn::Tape&, const ParamVars& p, nn::Var attended) {
  return nn::add_row(nn::matmul(attended, p.score_weight()), p.score_bias());
}

ForwardGraph record_forward(nn::Tape& tape, const RankerParams& params, const MenuTensor& menu,
                            std::size_t key) {
  ForwardGraph g;
  g.params = ParamVars::record(tape, params);
  nn::Var reps = embed_menu(tape, g.params, menu, key);
  g.attention = self_attention(tape, g.params, reps, menu.mask);
  g.scores = score_dishes(tape, g.params, g.attention.output);
  return g;
}

std::vector<std::size_t> rank(const std::vector<double>& scores, const std::vector<bool>& mask) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (mask.empty() || mask[i]) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

RankOutput forward(const MenuTensor& menu, std::size_t key, const RankerParams& params) {
  nn::Tape tape;
  const ForwardGraph g = record_forward(tape, params, menu, key);
  const nn::Tensor2& raw = tape.value(g.scores);
  RankOutput out;
  out.scores.resize(menu.dishes());
  for (std::size_t i = 0; i < menu.dishes(); ++i)
    out.scores[i] = menu.mask[i] ? raw(i, 0) : kMaskedScore;
  out.permutation = rank(out.scores, menu.mask);
  out.attention = tape.value(g.attention.weights);
  return out;
}

}  // namespace menurank

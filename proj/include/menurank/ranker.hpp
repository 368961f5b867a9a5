#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "menurank/autograd.hpp"
#include "menurank/encoding.hpp"
#include "menurank/tensor.hpp"

namespace menurank {

struct RankerConfig {
  std::size_t embed_dim = 32;
  std::size_t num_keys = 1;
  std::size_t vocab_size = 2;

  // Throws ContractError unless embed_dim >= 4, num_keys >= 1 and the
  // vocabulary holds at least the two reserved indices.
  void validate() const;
  friend bool operator==(const RankerConfig&, const RankerConfig&) = default;
};

/// Every learnable array of the ranker. Row 0 of word_embeddings belongs to
/// PAD and stays zero.
struct RankerParams {
  static constexpr std::size_t kArrayCount = 10;

  nn::Tensor2 word_embeddings;  // vocab_size × d
  nn::Tensor2 key_embeddings;   // num_keys × d
  nn::Tensor2 query_weight;     // d × d
  nn::Tensor2 query_bias;       // 1 × d
  nn::Tensor2 key_weight;
  nn::Tensor2 key_bias;
  nn::Tensor2 value_weight;
  nn::Tensor2 value_bias;
  nn::Tensor2 score_weight;     // d × 1
  nn::Tensor2 score_bias;       // 1 × 1

  // Fixed declaration order; persistence and gradients follow it.
  std::array<nn::Tensor2*, kArrayCount> arrays();
  std::array<const nn::Tensor2*, kArrayCount> arrays() const;
  static const std::array<std::string_view, kArrayCount>& array_names();

  RankerConfig config() const;
  // Throws DimensionError if any array disagrees with `config`.
  void check_shapes(const RankerConfig& config) const;

  friend bool operator==(const RankerParams&, const RankerParams&) = default;
};

// One gradient array per RankerParams array, same order and shapes.
using Gradients = std::vector<nn::Tensor2>;

Gradients zero_gradients(const RankerParams& params);

/// Uniform(−0.1, 0.1) initialization from `seed`, PAD row zeroed.
RankerParams init_params(const RankerConfig& config, std::uint64_t seed);

inline constexpr double kMaskedScore = -std::numeric_limits<double>::infinity();

struct RankOutput {
  // kMaskedScore at masked positions.
  std::vector<double> scores;
  // Valid dish indices, best first.
  std::vector<std::size_t> permutation;
  // Row i holds the weights dish i assigned to every dish.
  nn::Tensor2 attention;
};

// Parameter arrays registered on a tape.
struct ParamVars {
  std::array<nn::Var, RankerParams::kArrayCount> arrays;

  static ParamVars record(nn::Tape& tape, const RankerParams& params);
  nn::Var word_embeddings() const { return arrays[0]; }
  nn::Var key_embeddings() const { return arrays[1]; }
  nn::Var query_weight() const { return arrays[2]; }
  nn::Var query_bias() const { return arrays[3]; }
  nn::Var key_weight() const { return arrays[4]; }
  nn::Var key_bias() const { return arrays[5]; }
  nn::Var value_weight() const { return arrays[6]; }
  nn::Var value_bias() const { return arrays[7]; }
  nn::Var score_weight() const { return arrays[8]; }
  nn::Var score_bias() const { return arrays[9]; }
};

struct AttentionResult {
  nn::Var output;   // M × d
  nn::Var weights;  // M × M
};

/// Dish representation: mean of the dish's non-PAD word embeddings plus the
/// search-key embedding. Throws KeyError for an out-of-range key.
nn::Var embed_menu(nn::Tape& tape, const ParamVars& p, const MenuTensor& menu, std::size_t key);

/// Single-head scaled dot-product self-attention over dishes. Masked dishes
/// receive zero weight from every row. Throws ContractError if all dishes
/// are masked.
AttentionResult self_attention(nn::Tape& tape, const ParamVars& p, nn::Var reps,
                               const std::vector<bool>& mask);

// Raw M × 1 scores; masking to kMaskedScore happens in forward().
nn::Var score_dishes(nn::Tape& tape, const ParamVars& p, nn::Var attended);

struct ForwardGraph {
  ParamVars params;
  AttentionResult attention;
  nn::Var scores;
};

// Records the whole ranker on `tape` for training.
ForwardGraph record_forward(nn::Tape& tape, const RankerParams& params, const MenuTensor& menu,
                            std::size_t key);

/// Valid indices by descending score, ties by ascending index.
std::vector<std::size_t> rank(const std::vector<double>& scores, const std::vector<bool>& mask);

RankOutput forward(const MenuTensor& menu, std::size_t key, const RankerParams& params);

}  // namespace menurank

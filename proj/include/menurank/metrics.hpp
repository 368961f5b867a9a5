#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace menurank {

// (better, worse) index pairs implied by a ground-truth permutation.
std::vector<std::pair<std::size_t, std::size_t>> ordered_pairs(const std::vector<std::size_t>& truth);

/// Mean of −log σ(s_better − s_worse) over every ordered pair in `truth`.
/// `truth` lists valid dish indices only; fewer than two gives 0.
double pairwise_loss(const std::vector<double>& scores, const std::vector<std::size_t>& truth);

/// Exponential-gain NDCG. A dish at truth rank r (1-based) has relevance
/// M − r. Returns 1 for M = 1. Throws ContractError unless both arguments
/// are permutations of the same length.
double ndcg(const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& truth);

/// Fraction of unordered dish pairs ordered the same way by both
/// permutations; 1 for M = 1.
double pairwise_accuracy(const std::vector<std::size_t>& predicted,
                         const std::vector<std::size_t>& truth);

}  // namespace menurank

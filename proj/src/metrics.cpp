#include "menurank/metrics.hpp"

#include <cmath>
#include <string>

#include "menurank/errors.hpp"

namespace menurank {
namespace {

// positions[d] = 0-based position of dish d.
std::vector<std::size_t> positions_of(const std::vector<std::size_t>& perm, const char* what) {
  std::vector<std::size_t> pos(perm.size(), perm.size());
  for (std::size_t p = 0; p < perm.size(); ++p) {
    if (perm[p] >= perm.size() || pos[perm[p]] != perm.size()) {
      throw ContractError(std::string(what) + " is not a permutation");
    }
    pos[perm[p]] = p;
  }
  return pos;
}

void check_lengths(const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& truth) {
  if (predicted.size() != truth.size()) {
    throw ContractError("ranking length mismatch: predicted " + std::to_string(predicted.size()) +
                        " vs truth " + std::to_string(truth.size()));
  }
  if (truth.empty()) throw ContractError("empty ranking");
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> ordered_pairs(const std::vector<std::size_t>& truth) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < truth.size(); ++a)
    for (std::size_t b = a + 1; b < truth.size(); ++b) pairs.emplace_back(truth[a], truth[b]);
  return pairs;
}

double pairwise_loss(const std::vector<double>& scores, const std::vector<std::size_t>& truth) {
  const auto pairs = ordered_pairs(truth);
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [hi, lo] : pairs) {
    const double margin = scores.at(hi) - scores.at(lo);
    total += margin > 0.0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
  }
  return total / static_cast<double>(pairs.size());
}

double ndcg(const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& truth) {
  check_lengths(predicted, truth);
  positions_of(predicted, "predicted ranking");
  const auto truth_pos = positions_of(truth, "truth ranking");
  const std::size_t m = truth.size();
  if (m == 1) return 1.0;
  auto gain = [&](std::size_t dish) {
    const double relevance = static_cast<double>(m - 1 - truth_pos[dish]);
    return std::exp2(relevance) - 1.0;
  };
  double dcg = 0.0;
  double ideal = 0.0;
  for (std::size_t p = 0; p < m; ++p) {
    const double discount = std::log2(static_cast<double>(p) + 2.0);
    dcg += gain(predicted[p]) / discount;
    ideal += gain(truth[p]) / discount;
  }
  return dcg / ideal;
}

double pairwise_accuracy(const std::vector<std::size_t>& predicted,
                         const std::vector<std::size_t>& truth) {
  check_lengths(predicted, truth);
  const auto pred_pos = positions_of(predicted, "predicted ranking");
  const auto truth_pos = positions_of(truth, "truth ranking");
  const std::size_t m = truth.size();
  if (m == 1) return 1.0;
  std::size_t agree = 0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      if ((pred_pos[a] < pred_pos[b]) == (truth_pos[a] < truth_pos[b])) ++agree;
  return static_cast<double>(agree) / static_cast<double>(m * (m - 1) / 2);
}

}  // namespace menurank

#include "menurank/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <nlohmann/json.hpp>

#include "menurank/adam.hpp"
#include "menurank/errors.hpp"
#include "menurank/metrics.hpp"

namespace menurank {
namespace {

struct EncodedSample {
  MenuTensor menu;
  std::size_t key = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

EncodedSample encode_sample(const Model& model, const MenuSample& s) {
  if (s.truth.size() != s.dishes.size()) throw ContractError("sample truth length mismatch");
  return {pack_menu(s.dishes, model.vocab), model.key_id(s.key), ordered_pairs(s.truth)};
}

}  // namespace

nlohmann::json to_json(const MetricsReport& r) {
  return nlohmann::json{{"ndcg", r.ndcg}, {"cel", r.cel}, {"acc", r.acc},
                        {"split_name", r.split_name}, {"n_menus", r.n_menus}};
}

TrainResult train(const TrainConfig& config, Model model, const std::vector<MenuSample>& samples,
                  const std::vector<MenuSample>* validation, const EpochCallback& on_epoch) {
  if (samples.empty()) throw ContractError("training set is empty");
  if (config.batch_size == 0) throw ContractError("batch size must be positive");
  if (!(config.lr > 0.0)) throw ContractError("learning rate must be positive");

  std::vector<EncodedSample> encoded;
  encoded.reserve(samples.size());
  for (const auto& s : samples) encoded.push_back(encode_sample(model, s));

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), 0);

  nn::AdamState adam;
  const nn::AdamConfig adam_config{config.lr};
  auto param_arrays = model.params.arrays();

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0, batch = 0; start < order.size(); start += config.batch_size, ++batch) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double weight = 1.0 / static_cast<double>(end - start);
      Gradients grads = zero_gradients(model.params);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const EncodedSample& s = encoded[order[i]];
        nn::Tape tape;
        const ForwardGraph g = record_forward(tape, model.params, s.menu, s.key);
        nn::Var loss = nn::pairwise_logistic(g.scores, s.pairs);
        tape.backward(loss);
        batch_loss += tape.value(loss)(0, 0);
        for (std::size_t a = 0; a < RankerParams::kArrayCount; ++a) {
          const nn::Tensor2 ga = tape.grad(g.params.arrays[a]);
          auto dst = grads[a].data();
          auto src = ga.data();
          for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += weight * src[k];
        }
      }
      if (!std::isfinite(batch_loss)) {
        throw DivergenceError("training diverged: non-finite loss at epoch " +
                              std::to_string(epoch) + ", batch " + std::to_string(batch));
      }
      // PAD stays pinned at zero.
      for (double& x : grads[0].row(kPadIndex)) x = 0.0;
      nn::adam_step(param_arrays, grads, adam, adam_config);
      loss_sum += batch_loss;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(encoded.size());
    if (validation != nullptr && !validation->empty()) {
      record.validation = evaluate(model, *validation, "validation");
    }
    if (on_epoch) on_epoch(record);
    result.history.push_back(std::move(record));
  }
  result.model = std::move(model);
  return result;
}

MetricsReport evaluate(const Scorer& scorer, const std::vector<MenuSample>& samples,
                       const std::string& split_name) {
  if (samples.empty()) throw ContractError("evaluation set is empty");
  MetricsReport report;
  report.split_name = split_name;
  report.n_menus = samples.size();
  for (const auto& s : samples) {
    const std::vector<double> scores = scorer(s);
    if (scores.size() != s.dishes.size()) throw DimensionError("scorer returned wrong length");
    const auto predicted = rank(scores, {});
    report.ndcg += ndcg(predicted, s.truth);
    report.acc += pairwise_accuracy(predicted, s.truth);
    report.cel += pairwise_loss(scores, s.truth);
  }
  const double n = static_cast<double>(samples.size());
  report.ndcg /= n;
  report.acc /= n;
  report.cel /= n;
  return report;
}

MetricsReport evaluate(const Model& model, const std::vector<MenuSample>& samples,
                       const std::string& split_name) {
  return evaluate(
      [&model](const MenuSample& s) { return model.rank_dishes(s.dishes, s.key).scores; }, samples,
      split_name);
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
  out << "epoch,train_loss,val_ndcg,val_cel,val_acc\n";
  out.precision(17);
  for (const auto& r : history) {
    out << r.epoch << ',' << r.train_loss << ',';
    if (r.validation) {
      out << r.validation->ndcg << ',' << r.validation->cel << ',' << r.validation->acc;
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

}  // namespace menurank

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "menurank/datagen.hpp"
#include "menurank/model.hpp"

namespace menurank {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  std::uint64_t seed = 1;
};

struct MetricsReport {
  double ndcg = 0.0;
  double cel = 0.0;
  double acc = 0.0;
  std::string split_name;
  // Samples evaluated; one per (menu, key).
  std::size_t n_menus = 0;
};

nlohmann::json to_json(const MetricsReport& report);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<MetricsReport> validation;
};

struct TrainResult {
  Model model;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Minimizes the mean pairwise logistic loss with Adam, shuffling samples
/// each epoch. Deterministic for a given config, model and data. Throws
/// DivergenceError naming the epoch and batch if the loss stops being finite.
TrainResult train(const TrainConfig& config, Model model, const std::vector<MenuSample>& samples,
                  const std::vector<MenuSample>* validation = nullptr,
                  const EpochCallback& on_epoch = {});

// Produces one score per dish for a sample.
using Scorer = std::function<std::vector<double>(const MenuSample&)>;

MetricsReport evaluate(const Scorer& scorer, const std::vector<MenuSample>& samples,
                       const std::string& split_name = "test");
MetricsReport evaluate(const Model& model, const std::vector<MenuSample>& samples,
                       const std::string& split_name = "test");

// epoch,train_loss,val_ndcg,val_cel,val_acc
void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);

}  // namespace menurank

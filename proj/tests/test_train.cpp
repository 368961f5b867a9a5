#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "menurank/datagen.hpp"
#include "menurank/errors.hpp"
#include "menurank/model.hpp"
#include "menurank/train.hpp"

using namespace menurank;

namespace {

std::vector<MenuSample> small_dataset(std::size_t menus, std::uint64_t seed,
                                      std::vector<std::string> keys = {"calories"}) {
  DatasetSpec spec;
  spec.n_menus = menus;
  spec.train_fraction = 1.0;
  spec.seed = seed;
  spec.keys = std::move(keys);
  return generate_dataset(Lexicon::bundled(), spec).train;
}

Model fresh_model(std::uint64_t seed, std::vector<std::string> keys = {"calories"}) {
  return init_model(build_vocabulary(Lexicon::bundled()), std::move(keys), 16, seed);
}

}  // namespace

TEST(Train, ZeroEpochsReturnsInitialParams) {
  const Model m = fresh_model(3);
  const TrainResult r = train({.epochs = 0}, m, small_dataset(40, 1));
  EXPECT_EQ(r.model, m);
  EXPECT_TRUE(r.history.empty());
}

TEST(Train, SameSeedSameParameters) {
  const auto data = small_dataset(60, 2);
  const TrainConfig config{.epochs = 3, .batch_size = 8, .lr = 1e-2, .seed = 5};
  const TrainResult a = train(config, fresh_model(1), data);
  const TrainResult b = train(config, fresh_model(1), data);
  EXPECT_EQ(a.model, b.model);
  EXPECT_NE(a.model, fresh_model(1));
  ASSERT_EQ(a.history.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
}

TEST(Train, ShuffleSeedMatters) {
  const auto data = small_dataset(60, 2);
  const TrainResult a = train({.epochs = 2, .batch_size = 8, .lr = 1e-2, .seed = 5}, fresh_model(1), data);
  const TrainResult b = train({.epochs = 2, .batch_size = 8, .lr = 1e-2, .seed = 6}, fresh_model(1), data);
  EXPECT_NE(a.model, b.model);
}

TEST(Train, OverfitsTenMenus) {
  const auto data = small_dataset(10, 4);
  double best = 0.0;
  std::size_t reached = 0;
  const Model m = init_model(build_vocabulary(Lexicon::bundled()), {"calories"}, 32, 7);
  train({.epochs = 200, .batch_size = 1, .lr = 1e-3, .seed = 1}, m, data, &data,
        [&](const EpochRecord& r) {
          best = std::max(best, r.validation->acc);
          if (reached == 0 && r.validation->acc == 1.0) reached = r.epoch;
        });
  EXPECT_EQ(best, 1.0);
  EXPECT_GT(reached, 0u);
}

TEST(Train, FirstEpochReducesLoss) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto data = small_dataset(200, seed);
    const Model m = fresh_model(seed);
    const double before = evaluate(m, data).cel;
    const TrainResult r = train({.epochs = 1, .batch_size = 32, .lr = 1e-3, .seed = seed}, m, data);
    EXPECT_LT(evaluate(r.model, data).cel, before) << "seed " << seed;
  }
}

TEST(Train, NonFiniteLossIsDivergenceError) {
  Model m = fresh_model(2);
  m.params.score_weight(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    train({.epochs = 2}, m, small_dataset(20, 1));
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1, batch 0"), std::string::npos) << e.what();
  }
}

TEST(Train, RejectsEmptyAndUnknownKey) {
  EXPECT_THROW(train({}, fresh_model(1), {}), ContractError);
  EXPECT_THROW(train({}, fresh_model(1), small_dataset(20, 1, {"sugar"})), KeyError);
}

TEST(Train, HistoryCarriesValidation) {
  const auto data = small_dataset(30, 9);
  std::size_t calls = 0;
  const TrainResult r = train({.epochs = 2, .batch_size = 16}, fresh_model(1), data, &data,
                              [&](const EpochRecord&) { ++calls; });
  EXPECT_EQ(calls, 2u);
  ASSERT_TRUE(r.history[1].validation.has_value());
  EXPECT_EQ(r.history[1].validation->split_name, "validation");
  EXPECT_EQ(r.history[1].validation->n_menus, 30u);

  std::ostringstream csv;
  write_history_csv(csv, r.history);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "epoch,train_loss,val_ndcg,val_cel,val_acc");
  std::getline(lines, line);
  EXPECT_EQ(line.substr(0, 2), "1,");
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4);
}

TEST(Evaluate, PerfectScorer) {
  const auto data = small_dataset(50, 3);
  auto oracle = [](const MenuSample& s) {
    std::vector<double> scores(s.dishes.size());
    for (std::size_t r = 0; r < s.truth.size(); ++r) scores[s.truth[r]] = 10.0 * static_cast<double>(s.truth.size() - r);
    return scores;
  };
  const MetricsReport rep = evaluate(oracle, data, "seen");
  EXPECT_DOUBLE_EQ(rep.ndcg, 1.0);
  EXPECT_EQ(rep.acc, 1.0);
  EXPECT_LT(rep.cel, 1e-4);
  EXPECT_EQ(rep.split_name, "seen");
  EXPECT_EQ(rep.n_menus, 50u);
}

TEST(Evaluate, ConstantScorerGivesLn2) {
  const auto data = small_dataset(50, 3);
  const MetricsReport rep =
      evaluate([](const MenuSample& s) { return std::vector<double>(s.dishes.size(), 0.3); }, data);
  EXPECT_NEAR(rep.cel, std::log(2.0), 1e-12);
}

TEST(Evaluate, RandomInitNearChance) {
  const auto data = small_dataset(300, 11);
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double acc = evaluate(fresh_model(seed), data).acc;
    EXPECT_NEAR(acc, 0.5, 0.1) << "seed " << seed;
    total += acc;
  }
  EXPECT_NEAR(total / 5.0, 0.5, 0.1);
}

TEST(Evaluate, OrderInvariant) {
  auto data = small_dataset(40, 8);
  const Model m = fresh_model(4);
  const MetricsReport a = evaluate(m, data);
  std::reverse(data.begin(), data.end());
  const MetricsReport b = evaluate(m, data);
  EXPECT_NEAR(a.ndcg, b.ndcg, 1e-12);
  EXPECT_NEAR(a.acc, b.acc, 1e-12);
  EXPECT_NEAR(a.cel, b.cel, 1e-12);
}

TEST(Evaluate, EmptySetIsContractError) {
  EXPECT_THROW(evaluate(fresh_model(1), {}), ContractError);
}

TEST(MetricsReport, JsonFields) {
  const auto j = to_json(MetricsReport{0.9, 0.2, 0.8, "test", 12});
  EXPECT_EQ(j.size(), 5u);
  EXPECT_EQ(j["split_name"], "test");
  EXPECT_EQ(j["n_menus"], 12);
}

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "menurank/encoding.hpp"

namespace menurank {

enum class SortOrder { kAscending, kDescending };

inline constexpr std::string_view kNutrientKeys[] = {"calories", "protein", "sugar"};

struct NutritionRecord {
  std::string name;
  double calories = 0.0;  // kcal per serving
  double protein = 0.0;   // g
  double sugar = 0.0;     // g

  // Throws KeyError for a name outside kNutrientKeys.
  double value(std::string_view key) const;
};

/// Nutrition table plus the seen/unseen partition used for training and
/// generalization tests. Dishes are identified by their canonical
/// (standardized) name.
class Lexicon {
 public:
  Lexicon(std::vector<NutritionRecord> records, const std::vector<std::string>& seen_names,
          std::unordered_map<std::string, SortOrder> orders = {});

  // CSV with header `name,calories,protein,sugar` (any column order; a
  // header cell may carry `:asc` or `:desc`) and a seen list with one name
  // per line. Throws ParseError with a line number on malformed input.
  static Lexicon parse(std::string_view csv, std::string_view seen_list);
  static Lexicon load(const std::filesystem::path& csv_path,
                      const std::filesystem::path& seen_path);
  static Lexicon bundled();
  static std::string_view bundled_csv();
  static std::string_view bundled_seen_list();

  const std::vector<NutritionRecord>& records() const { return records_; }
  const std::vector<std::string>& seen() const { return seen_; }
  const std::vector<std::string>& unseen() const { return unseen_; }

  // Throws UnknownDishError when absent.
  const NutritionRecord& find(std::string_view dish_name) const;
  bool contains(std::string_view dish_name) const;
  SortOrder order(std::string_view key) const;

  std::vector<std::string> names() const;

 private:
  void validate() const;

  std::vector<NutritionRecord> records_;
  std::vector<std::string> seen_;
  std::vector<std::string> unseen_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::unordered_map<std::string, SortOrder> orders_;
};

// Every word of every lexicon dish, first-seen order.
Vocabulary build_vocabulary(const Lexicon& lexicon);

struct MenuSample {
  std::int64_t menu_id = 0;
  std::vector<std::string> dishes;
  std::string key;
  // Dish indices, rank 1 first.
  std::vector<std::size_t> truth;

  friend bool operator==(const MenuSample&, const MenuSample&) = default;
};

nlohmann::json to_json(const MenuSample& sample);
MenuSample sample_from_json(const nlohmann::json& j);

struct DatasetSpec {
  std::size_t n_menus = 5625;
  double train_fraction = 0.8;
  std::vector<std::string> keys = {"calories"};
  std::uint64_t seed = 2022;
  std::size_t min_dishes = 7;
  std::size_t max_dishes = 15;

  std::size_t train_menus() const;
  std::size_t test_menus() const { return n_menus - train_menus(); }
  // Throws ContractError on an unusable spec.
  void validate() const;
};

struct Dataset {
  std::vector<MenuSample> train;
  std::vector<MenuSample> test;
  // Seed actually used, after any coverage retries.
  std::uint64_t seed = 0;
};

/// Dish indices ordered by the key's nutrient in the lexicon's direction for
/// that key; ties by canonical name, then by position.
std::vector<std::size_t> ground_truth_rank(const std::vector<std::string>& dish_names,
                                           std::string_view key, const Lexicon& lexicon);

/// Random seen-dish menus, one sample per (menu, key), split by menu. If a
/// seen dish never appears in training the generation is repeated with the
/// next seed.
Dataset generate_dataset(const Lexicon& lexicon, const DatasetSpec& spec);

/// spec.test_menus() menus where ⌈fraction·M⌉ dishes are seen and the rest
/// unseen. Menus equal (as dish sets) to any in `avoid` are redrawn.
std::vector<MenuSample> make_unseen_test(const Lexicon& lexicon, const DatasetSpec& spec,
                                         double seen_fraction,
                                         std::span<const MenuSample> avoid = {});

void write_jsonl(const std::filesystem::path& path, const std::vector<MenuSample>& samples);
std::vector<MenuSample> read_jsonl(const std::filesystem::path& path);

}  // namespace menurank

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace menurank {

inline constexpr std::size_t kPadIndex = 0;
inline constexpr std::size_t kUnkIndex = 1;
inline constexpr std::size_t kWordsPerDish = 3;
inline constexpr std::size_t kMaxMenuDishes = 64;

/// Word → index dictionary. Index 0 is padding and index 1 stands for any
/// word not in the dictionary; real words are numbered densely from 2 in
/// the order they were first added.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Returns the index of `word`, adding it if new.
  std::size_t add(const std::string& word);
  // kUnkIndex for unknown words.
  std::size_t lookup(std::string_view word) const;
  bool contains(std::string_view word) const;

  // Total index count including the two reserved slots.
  std::size_t size() const { return words_.size() + 2; }
  // Real words in index order (index = position + 2).
  const std::vector<std::string>& words() const { return words_; }

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Word indices of one dish, trailing slots filled with kPadIndex.
using DishVector = std::array<std::size_t, kWordsPerDish>;

/// One menu as a dish × word index matrix. Rows whose mask flag is false
/// are padding added when menus of different lengths are batched.
struct MenuTensor {
  std::vector<DishVector> indices;
  std::vector<bool> mask;

  std::size_t dishes() const { return indices.size(); }
  std::size_t valid_count() const;
};

/// Lowercase, drop punctuation, split on whitespace and keep at most the
/// first three words. Throws InvalidDishError if nothing is left.
std::vector<std::string> standardize_dish(std::string_view raw_name);

// Standardized words joined by single spaces.
std::string canonical_dish_name(std::string_view raw_name);

Vocabulary build_vocabulary(const std::vector<std::string>& dish_names);

DishVector encode_dish(std::string_view raw_name, const Vocabulary& vocab);

/// Encodes 1..kMaxMenuDishes dishes in the given order with an all-true mask.
MenuTensor pack_menu(const std::vector<std::string>& dish_names, const Vocabulary& vocab);

// Pads every menu with masked all-PAD rows up to the longest menu.
std::vector<MenuTensor> pack_batch(std::vector<MenuTensor> menus);

/// Plain-text menu: one dish per line, '#' starts a comment line, blank lines
/// are skipped, CRLF and LF are equivalent. Throws EmptyMenuError when no
/// dish lines remain.
std::vector<std::string> parse_menu_text(std::string_view document);

}  // namespace menurank

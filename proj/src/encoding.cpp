#include "menurank/encoding.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "menurank/errors.hpp"

namespace menurank {

std::size_t Vocabulary::add(const std::string& word) {
  if (auto it = index_.find(word); it != index_.end()) return it->second;
  const std::size_t idx = words_.size() + 2;
  words_.push_back(word);
  index_.emplace(word, idx);
  return idx;
}

std::size_t Vocabulary::lookup(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnkIndex : it->second;
}

bool Vocabulary::contains(std::string_view word) const {
  return index_.find(std::string(word)) != index_.end();
}

nlohmann::json Vocabulary::to_json() const { return nlohmann::json{{"words", words_}}; }

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary vocab;
  for (const auto& w : j.at("words")) {
    const auto word = w.get<std::string>();
    if (word.empty() || vocab.contains(word)) {
      throw ParseError("vocabulary: empty or duplicate word '" + word + "'");
    }
    vocab.add(word);
  }
  return vocab;
}

std::size_t MenuTensor::valid_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

std::vector<std::string> standardize_dish(std::string_view raw_name) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && tokens.size() < kWordsPerDish) tokens.push_back(current);
    current.clear();
  };
  for (char ch : raw_name) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c)) {
      continue;
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  if (tokens.empty()) {
    throw InvalidDishError("invalid dish name '" + std::string(raw_name) + "': no words");
  }
  return tokens;
}

std::string canonical_dish_name(std::string_view raw_name) {
  std::string out;
  for (const auto& t : standardize_dish(raw_name)) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

Vocabulary build_vocabulary(const std::vector<std::string>& dish_names) {
  Vocabulary vocab;
  for (const auto& name : dish_names)
    for (const auto& token : standardize_dish(name)) vocab.add(token);
  return vocab;
}

DishVector encode_dish(std::string_view raw_name, const Vocabulary& vocab) {
  DishVector out{};
  out.fill(kPadIndex);
  const auto tokens = standardize_dish(raw_name);
  for (std::size_t i = 0; i < tokens.size(); ++i) out[i] = vocab.lookup(tokens[i]);
  return out;
}

MenuTensor pack_menu(const std::vector<std::string>& dish_names, const Vocabulary& vocab) {
  if (dish_names.empty()) throw EmptyMenuError("menu has no dishes");
  if (dish_names.size() > kMaxMenuDishes) {
    throw CapacityError("menu has " + std::to_string(dish_names.size()) +
                        " dishes; at most " + std::to_string(kMaxMenuDishes) + " are supported");
  }
  MenuTensor menu;
  menu.indices.reserve(dish_names.size());
  for (const auto& name : dish_names) menu.indices.push_back(encode_dish(name, vocab));
  menu.mask.assign(dish_names.size(), true);
  return menu;
}

std::vector<MenuTensor> pack_batch(std::vector<MenuTensor> menus) {
  std::size_t longest = 0;
  for (const auto& m : menus) longest = std::max(longest, m.dishes());
  for (auto& m : menus) {
    DishVector pad{};
    pad.fill(kPadIndex);
    m.indices.resize(longest, pad);
    m.mask.resize(longest, false);
  }
  return menus;
}

std::vector<std::string> parse_menu_text(std::string_view document) {
  std::vector<std::string> dishes;
  std::size_t start = 0;
  while (start <= document.size()) {
    std::size_t end = document.find('\n', start);
    if (end == std::string_view::npos) end = document.size();
    std::string_view line = document.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front())))
      line.remove_prefix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
      line.remove_suffix(1);
    if (!line.empty() && line.front() != '#') dishes.emplace_back(line);
    start = end + 1;
  }
  if (dishes.empty()) throw EmptyMenuError("menu text contains no dishes");
  return dishes;
}

}  // namespace menurank

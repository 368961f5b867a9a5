#include "menurank/datagen.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "menurank/errors.hpp"

namespace menurank {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

double parse_nutrient(std::string_view field, std::string_view column, std::size_t line_no) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value) || value < 0.0) {
    throw ParseError("lexicon line " + std::to_string(line_no) + ": invalid " +
                     std::string(column) + " value '" + std::string(field) + "'");
  }
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string menu_signature(const std::vector<std::string>& dishes) {
  std::vector<std::string> names;
  names.reserve(dishes.size());
  for (const auto& d : dishes) names.push_back(canonical_dish_name(d));
  std::sort(names.begin(), names.end());
  std::string sig;
  for (const auto& n : names) sig += n + '|';
  return sig;
}

std::vector<std::string> draw(std::mt19937_64& rng, const std::vector<std::string>& pool,
                              std::size_t count) {
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(pool[idx[i]]);
  return out;
}

std::size_t seen_count(double fraction, std::size_t menu_size) {
  // Guard against products like 0.1 * 30 landing a hair above an integer.
  const double raw = fraction * static_cast<double>(menu_size);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

// Draws `count` distinct menus; `taken` collects signatures across calls.
std::vector<std::vector<std::string>> draw_menus(std::mt19937_64& rng, const Lexicon& lexicon,
                                                 const DatasetSpec& spec, double fraction,
                                                 std::size_t count,
                                                 std::unordered_set<std::string>& taken) {
  std::uniform_int_distribution<std::size_t> size_dist(spec.min_dishes, spec.max_dishes);
  std::vector<std::vector<std::string>> menus;
  menus.reserve(count);
  while (menus.size() < count) {
    const std::size_t m = size_dist(rng);
    const std::size_t n_seen = seen_count(fraction, m);
    std::vector<std::string> dishes = draw(rng, lexicon.seen(), n_seen);
    if (n_seen < m) {
      auto extra = draw(rng, lexicon.unseen(), m - n_seen);
      dishes.insert(dishes.end(), extra.begin(), extra.end());
      std::shuffle(dishes.begin(), dishes.end(), rng);
    }
    if (!taken.insert(menu_signature(dishes)).second) continue;
    menus.push_back(std::move(dishes));
  }
  return menus;
}

void append_samples(std::vector<MenuSample>& out, const std::vector<std::string>& dishes,
                    std::int64_t menu_id, const DatasetSpec& spec, const Lexicon& lexicon) {
  for (const auto& key : spec.keys) {
    MenuSample s;
    s.menu_id = menu_id;
    s.dishes = dishes;
    s.key = key;
    s.truth = ground_truth_rank(dishes, key, lexicon);
    out.push_back(std::move(s));
  }
}

std::uint64_t variant_seed(std::uint64_t seed, double fraction) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(std::bit_cast<std::uint64_t>(fraction)),
                    static_cast<std::uint32_t>(std::bit_cast<std::uint64_t>(fraction) >> 32),
                    0x756e7365u};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace

double NutritionRecord::value(std::string_view key) const {
  if (key == "calories") return calories;
  if (key == "protein") return protein;
  if (key == "sugar") return sugar;
  throw KeyError("unknown nutrient key '" + std::string(key) +
                 "'; available: calories, protein, sugar");
}

Lexicon::Lexicon(std::vector<NutritionRecord> records, const std::vector<std::string>& seen_names,
                 std::unordered_map<std::string, SortOrder> orders)
    : records_(std::move(records)), orders_(std::move(orders)) {
  if (records_.empty()) throw ContractError("lexicon is empty");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    records_[i].name = canonical_dish_name(records_[i].name);
    if (!by_name_.emplace(records_[i].name, i).second) {
      throw ContractError("lexicon: duplicate dish '" + records_[i].name + "'");
    }
  }
  std::unordered_set<std::string> seen_set;
  for (const auto& raw : seen_names) {
    const std::string name = canonical_dish_name(raw);
    if (!by_name_.contains(name)) throw UnknownDishError("seen list names unknown dish '" + name + "'");
    if (seen_set.insert(name).second) seen_.push_back(name);
  }
  for (const auto& r : records_)
    if (!seen_set.contains(r.name)) unseen_.push_back(r.name);
  validate();
}

void Lexicon::validate() const {
  if (seen_.empty()) throw ContractError("lexicon: seen list is empty");
  for (const auto& r : records_) {
    for (std::string_view key : kNutrientKeys) {
      const double v = r.value(key);
      if (!std::isfinite(v) || v < 0.0) {
        throw ContractError("lexicon: '" + r.name + "' has invalid " + std::string(key));
      }
    }
  }
  std::unordered_set<std::string> seen_words;
  for (const auto& name : seen_)
    for (auto& w : standardize_dish(name)) seen_words.insert(w);
  for (const auto& name : unseen_) {
    const auto words = standardize_dish(name);
    if (std::none_of(words.begin(), words.end(),
                     [&](const std::string& w) { return seen_words.contains(w); })) {
      throw ContractError("lexicon: unseen dish '" + name + "' shares no word with seen dishes");
    }
  }
}

Lexicon Lexicon::parse(std::string_view csv, std::string_view seen_list) {
  const auto lines = split_lines(csv);
  std::size_t header_line = 0;
  while (header_line < lines.size() && trim(lines[header_line]).empty()) ++header_line;
  if (header_line == lines.size()) throw ParseError("lexicon line 1: missing header");

  std::unordered_map<std::string, std::size_t> column;
  std::unordered_map<std::string, SortOrder> orders;
  const auto header = split_fields(lines[header_line]);
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string_view cell = header[i];
    SortOrder order = SortOrder::kAscending;
    if (auto colon = cell.find(':'); colon != std::string_view::npos) {
      const auto dir = cell.substr(colon + 1);
      if (dir == "desc") {
        order = SortOrder::kDescending;
      } else if (dir != "asc") {
        throw ParseError("lexicon line " + std::to_string(header_line + 1) +
                         ": unknown sort direction '" + std::string(dir) + "'");
      }
      cell = cell.substr(0, colon);
    }
    column[std::string(cell)] = i;
    orders[std::string(cell)] = order;
  }
  for (std::string_view required : {"name", "calories", "protein", "sugar"}) {
    if (!column.contains(std::string(required))) {
      throw ParseError("lexicon line " + std::to_string(header_line + 1) +
                       ": missing column '" + std::string(required) + "'");
    }
  }

  std::vector<NutritionRecord> records;
  for (std::size_t ln = header_line + 1; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const auto fields = split_fields(lines[ln]);
    const std::size_t line_no = ln + 1;
    if (fields.size() != header.size()) {
      throw ParseError("lexicon line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    NutritionRecord r;
    r.name = std::string(fields[column["name"]]);
    try {
      canonical_dish_name(r.name);
    } catch (const InvalidDishError& e) {
      throw ParseError("lexicon line " + std::to_string(line_no) + ": " + e.what());
    }
    r.calories = parse_nutrient(fields[column["calories"]], "calories", line_no);
    r.protein = parse_nutrient(fields[column["protein"]], "protein", line_no);
    r.sugar = parse_nutrient(fields[column["sugar"]], "sugar", line_no);
    records.push_back(std::move(r));
  }
  if (records.empty()) throw ParseError("lexicon has no dish rows");

  std::vector<std::string> seen;
  for (auto line : split_lines(seen_list)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    seen.emplace_back(line);
  }
  orders.erase("name");
  return Lexicon(std::move(records), seen, std::move(orders));
}

Lexicon Lexicon::load(const std::filesystem::path& csv_path, const std::filesystem::path& seen_path) {
  return parse(read_file(csv_path), read_file(seen_path));
}

Lexicon Lexicon::bundled() { return parse(bundled_csv(), bundled_seen_list()); }

const NutritionRecord& Lexicon::find(std::string_view dish_name) const {
  auto it = by_name_.find(canonical_dish_name(dish_name));
  if (it == by_name_.end()) {
    throw UnknownDishError("dish '" + std::string(dish_name) + "' is not in the lexicon");
  }
  return records_[it->second];
}

bool Lexicon::contains(std::string_view dish_name) const {
  try {
    return by_name_.contains(canonical_dish_name(dish_name));
  } catch (const InvalidDishError&) {
    return false;
  }
}

SortOrder Lexicon::order(std::string_view key) const {
  auto it = orders_.find(std::string(key));
  return it == orders_.end() ? SortOrder::kAscending : it->second;
}

std::vector<std::string> Lexicon::names() const {
  std::vector<std::string> out;
  for (const auto& r : records_) out.push_back(r.name);
  return out;
}

Vocabulary build_vocabulary(const Lexicon& lexicon) { return build_vocabulary(lexicon.names()); }

nlohmann::json to_json(const MenuSample& s) {
  return nlohmann::json{{"dishes", s.dishes}, {"key", s.key}, {"truth", s.truth},
                        {"menu_id", s.menu_id}};
}

MenuSample sample_from_json(const nlohmann::json& j) {
  MenuSample s;
  s.dishes = j.at("dishes").get<std::vector<std::string>>();
  s.key = j.at("key").get<std::string>();
  s.truth = j.at("truth").get<std::vector<std::size_t>>();
  s.menu_id = j.at("menu_id").get<std::int64_t>();
  std::vector<bool> hit(s.dishes.size(), false);
  if (s.truth.size() != s.dishes.size()) throw ParseError("sample truth length differs from dishes");
  for (std::size_t t : s.truth) {
    if (t >= hit.size() || hit[t]) throw ParseError("sample truth is not a permutation");
    hit[t] = true;
  }
  return s;
}

std::size_t DatasetSpec::train_menus() const {
  return static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n_menus)));
}

void DatasetSpec::validate() const {
  if (n_menus < 1) throw ContractError("dataset: n_menus must be positive");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw ContractError("dataset: train fraction must lie in (0, 1]");
  }
  if (keys.empty()) throw ContractError("dataset: at least one key is required");
  for (const auto& k : keys) NutritionRecord{}.value(k);
  if (min_dishes < 1 || min_dishes > max_dishes || max_dishes > kMaxMenuDishes) {
    throw ContractError("dataset: invalid menu size range");
  }
}

std::vector<std::size_t> ground_truth_rank(const std::vector<std::string>& dish_names,
                                           std::string_view key, const Lexicon& lexicon) {
  struct Entry {
    double value;
    std::string name;
    std::size_t index;
  };
  const bool descending = lexicon.order(key) == SortOrder::kDescending;
  std::vector<Entry> entries;
  entries.reserve(dish_names.size());
  for (std::size_t i = 0; i < dish_names.size(); ++i) {
    const auto& rec = lexicon.find(dish_names[i]);
    entries.push_back({rec.value(key), rec.name, i});
  }
  std::sort(entries.begin(), entries.end(), [descending](const Entry& a, const Entry& b) {
    if (a.value != b.value) return descending ? a.value > b.value : a.value < b.value;
    if (a.name != b.name) return a.name < b.name;
    return a.index < b.index;
  });
  std::vector<std::size_t> perm;
  perm.reserve(entries.size());
  for (const auto& e : entries) perm.push_back(e.index);
  return perm;
}

Dataset generate_dataset(const Lexicon& lexicon, const DatasetSpec& spec) {
  spec.validate();
  if (lexicon.seen().size() < spec.max_dishes) {
    throw InsufficientLexiconError("dataset needs at least " + std::to_string(spec.max_dishes) +
                                   " seen dishes, lexicon has " +
                                   std::to_string(lexicon.seen().size()));
  }
  const std::size_t n_train = spec.train_menus();
  for (std::uint64_t seed = spec.seed;; ++seed) {
    std::mt19937_64 rng(seed);
    std::unordered_set<std::string> taken;
    const auto menus = draw_menus(rng, lexicon, spec, 1.0, spec.n_menus, taken);

    std::unordered_set<std::string> covered;
    for (std::size_t i = 0; i < n_train; ++i)
      for (const auto& d : menus[i]) covered.insert(d);
    if (covered.size() < lexicon.seen().size() && n_train * spec.min_dishes >= lexicon.seen().size()) {
      continue;
    }

    Dataset ds;
    ds.seed = seed;
    for (std::size_t i = 0; i < menus.size(); ++i) {
      auto& split = i < n_train ? ds.train : ds.test;
      append_samples(split, menus[i], static_cast<std::int64_t>(i), spec, lexicon);
    }
    return ds;
  }
}

std::vector<MenuSample> make_unseen_test(const Lexicon& lexicon, const DatasetSpec& spec,
                                         double seen_fraction, std::span<const MenuSample> avoid) {
  spec.validate();
  if (!(seen_fraction > 0.0 && seen_fraction <= 1.0)) {
    throw ContractError("seen fraction must lie in (0, 1]");
  }
  for (std::size_t m = spec.min_dishes; m <= spec.max_dishes; ++m) {
    const std::size_t n_seen = seen_count(seen_fraction, m);
    if (n_seen > lexicon.seen().size() || m - n_seen > lexicon.unseen().size()) {
      throw InsufficientLexiconError(
          "a " + std::to_string(m) + "-dish menu at seen fraction " +
          std::to_string(seen_fraction) + " needs " + std::to_string(n_seen) + " seen and " +
          std::to_string(m - n_seen) + " unseen dishes; lexicon has " +
          std::to_string(lexicon.seen().size()) + " and " +
          std::to_string(lexicon.unseen().size()));
    }
  }
  std::unordered_set<std::string> taken;
  for (const auto& s : avoid) taken.insert(menu_signature(s.dishes));
  std::mt19937_64 rng(variant_seed(spec.seed, seen_fraction));
  const auto menus = draw_menus(rng, lexicon, spec, seen_fraction, spec.test_menus(), taken);
  std::vector<MenuSample> out;
  for (std::size_t i = 0; i < menus.size(); ++i)
    append_samples(out, menus[i], static_cast<std::int64_t>(i), spec, lexicon);
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<MenuSample>& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& s : samples) out << to_json(s).dump() << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<MenuSample> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<MenuSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      samples.push_back(sample_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return samples;
}

}  // namespace menurank

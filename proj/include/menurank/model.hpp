#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "menurank/encoding.hpp"
#include "menurank/ranker.hpp"

namespace menurank {

/// A ranker together with everything needed to apply it to raw dish names.
struct Model {
  Vocabulary vocab;
  // Search-key names; position is the key id.
  std::vector<std::string> keys;
  RankerParams params;

  RankerConfig config() const { return params.config(); }
  // Throws KeyError listing the available keys.
  std::size_t key_id(std::string_view name) const;
  std::string key_list() const;

  RankOutput rank_dishes(const std::vector<std::string>& dish_names, std::string_view key) const;

  friend bool operator==(const Model&, const Model&) = default;
};

Model init_model(Vocabulary vocab, std::vector<std::string> keys, std::size_t embed_dim,
                 std::uint64_t seed);

// Binary container layout:
//   "MNRK" | u32 version | u64 header length | JSON header | f64 blocks
// Integers and doubles are little-endian; blocks follow RankerParams order.
inline constexpr char kModelMagic[4] = {'M', 'N', 'R', 'K'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string serialize_model(const Model& model);
// Throws CompatibilityError on wrong magic or version, ParseError on a
// truncated or inconsistent container.
Model deserialize_model(std::string_view bytes);

// Writes to a sibling temporary file and renames it into place.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace menurank

#include "menurank/model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "menurank/errors.hpp"

namespace menurank {
namespace {

template <typename T>
void put_le(std::string& out, T value) {
  auto bits = std::bit_cast<std::array<char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  out.append(bits.data(), bits.size());
}

template <typename T>
T get_le(std::string_view bytes, std::size_t& offset) {
  if (offset > bytes.size() || bytes.size() - offset < sizeof(T)) {
    throw ParseError("model file truncated at byte " + std::to_string(offset));
  }
  std::array<char, sizeof(T)> bits{};
  std::memcpy(bits.data(), bytes.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  offset += sizeof(T);
  return std::bit_cast<T>(bits);
}

}  // namespace

std::size_t Model::key_id(std::string_view name) const {
  for (std::size_t i = 0; i < keys.size(); ++i)
    if (keys[i] == name) return i;
  throw KeyError("unknown search key '" + std::string(name) + "'; available: " + key_list());
}

std::string Model::key_list() const {
  std::string out;
  for (const auto& k : keys) out += (out.empty() ? "" : ", ") + k;
  return out;
}

RankOutput Model::rank_dishes(const std::vector<std::string>& dish_names,
                              std::string_view key) const {
  return forward(pack_menu(dish_names, vocab), key_id(key), params);
}

Model init_model(Vocabulary vocab, std::vector<std::string> keys, std::size_t embed_dim,
                 std::uint64_t seed) {
  RankerConfig config{embed_dim, keys.size(), vocab.size()};
  Model m{std::move(vocab), std::move(keys), {}};
  m.params = init_params(config, seed);
  return m;
}

std::string serialize_model(const Model& model) {
  const RankerConfig config = model.config();
  nlohmann::json header = {
      {"ranker_config",
       {{"embed_dim", config.embed_dim}, {"num_keys", config.num_keys},
        {"vocab_size", config.vocab_size}}},
      {"vocabulary", model.vocab.to_json()},
      {"keys", model.keys},
  };
  nlohmann::json arrays = nlohmann::json::array();
  for (std::size_t i = 0; i < RankerParams::kArrayCount; ++i) {
    const auto* a = model.params.arrays()[i];
    arrays.push_back({{"name", RankerParams::array_names()[i]}, {"rows", a->rows()},
                      {"cols", a->cols()}});
  }
  header["arrays"] = std::move(arrays);
  const std::string header_text = header.dump();

  std::string out(kModelMagic, sizeof(kModelMagic));
  put_le<std::uint32_t>(out, kModelFormatVersion);
  put_le<std::uint64_t>(out, header_text.size());
  out += header_text;
  for (const auto* a : model.params.arrays())
    for (double x : a->data()) put_le<double>(out, x);
  return out;
}

Model deserialize_model(std::string_view bytes) {
  if (bytes.size() < sizeof(kModelMagic) ||
      std::memcmp(bytes.data(), kModelMagic, sizeof(kModelMagic)) != 0) {
    throw CompatibilityError("not a menurank model file (bad magic)");
  }
  std::size_t offset = sizeof(kModelMagic);
  const auto version = get_le<std::uint32_t>(bytes, offset);
  if (version != kModelFormatVersion) {
    throw CompatibilityError("model format version " + std::to_string(version) +
                             " is not supported (expected " +
                             std::to_string(kModelFormatVersion) + ")");
  }
  const auto header_len = get_le<std::uint64_t>(bytes, offset);
  if (header_len > bytes.size() - offset) throw ParseError("model header truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(offset, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model header is not valid JSON: ") + e.what());
  }
  offset += header_len;

  Model model;
  RankerConfig config;
  try {
    const auto& rc = header.at("ranker_config");
    config = {rc.at("embed_dim").get<std::size_t>(), rc.at("num_keys").get<std::size_t>(),
              rc.at("vocab_size").get<std::size_t>()};
    model.vocab = Vocabulary::from_json(header.at("vocabulary"));
    model.keys = header.at("keys").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model header is incomplete: ") + e.what());
  }
  config.validate();
  if (config.vocab_size != model.vocab.size()) {
    throw CompatibilityError("model vocabulary has " + std::to_string(model.vocab.size()) +
                             " entries but config declares " + std::to_string(config.vocab_size));
  }
  if (config.num_keys != model.keys.size()) {
    throw CompatibilityError("model key map does not match its key count");
  }

  model.params = init_params(config, 0);
  const auto names = RankerParams::array_names();
  const auto arrays = model.params.arrays();
  try {
    const auto& declared = header.at("arrays");
    if (declared.size() != arrays.size()) throw CompatibilityError("model declares wrong array count");
    for (std::size_t i = 0; i < arrays.size(); ++i) {
      const auto& d = declared.at(i);
      if (d.at("name").get<std::string>() != names[i] || d.at("rows").get<std::size_t>() != arrays[i]->rows() ||
          d.at("cols").get<std::size_t>() != arrays[i]->cols()) {
        throw CompatibilityError("model array " + std::to_string(i) + " does not match " +
                                 std::string(names[i]) + " " + arrays[i]->shape_string());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model array table is malformed: ") + e.what());
  }
  for (auto* a : arrays)
    for (double& x : a->data()) x = get_le<double>(bytes, offset);
  if (offset != bytes.size()) throw ParseError("model file has trailing bytes");
  return model;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_model(model);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("failed writing " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace menurank

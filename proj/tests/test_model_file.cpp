#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "menurank/datagen.hpp"
#include "menurank/errors.hpp"
#include "menurank/model.hpp"

using namespace menurank;
namespace fs = std::filesystem;

namespace {

Model sample_model() {
  return init_model(build_vocabulary(Lexicon::bundled()), {"calories", "protein", "sugar"}, 8, 12);
}

bool bit_identical(const Model& a, const Model& b) {
  const auto xs = a.params.arrays();
  const auto ys = b.params.arrays();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!xs[i]->same_shape(*ys[i])) return false;
    if (std::memcmp(xs[i]->data().data(), ys[i]->data().data(), xs[i]->size() * sizeof(double)) != 0)
      return false;
  }
  return a.vocab == b.vocab && a.keys == b.keys;
}

}  // namespace

TEST(ModelFile, RoundTripIsBitExact) {
  Model m = sample_model();
  m.params.score_bias(0, 0) = 0.1 + 0.2;  // not representable in decimal shortest form
  m.params.query_weight(1, 2) = -0.0;
  m.params.key_weight(0, 0) = 5e-324;
  const Model back = deserialize_model(serialize_model(m));
  EXPECT_TRUE(bit_identical(back, m));
  EXPECT_TRUE(std::signbit(back.params.query_weight(1, 2)));
}

TEST(ModelFile, StartsWithMagicAndVersion) {
  const std::string bytes = serialize_model(sample_model());
  ASSERT_GE(bytes.size(), 16u);
  EXPECT_EQ(bytes.substr(0, 4), "MNRK");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), kModelFormatVersion);
  EXPECT_EQ(bytes[5], 0);
}

TEST(ModelFile, WrongMagicIsCompatibilityError) {
  std::string bytes = serialize_model(sample_model());
  bytes[0] = 'X';
  EXPECT_THROW(deserialize_model(bytes), CompatibilityError);
}

TEST(ModelFile, WrongVersionIsCompatibilityError) {
  std::string bytes = serialize_model(sample_model());
  bytes[4] = static_cast<char>(kModelFormatVersion + 1);
  EXPECT_THROW(deserialize_model(bytes), CompatibilityError);
}

TEST(ModelFile, TruncationIsParseError) {
  const std::string bytes = serialize_model(sample_model());
  for (std::size_t cut : {std::size_t{10}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_THROW(deserialize_model(std::string_view(bytes).substr(0, cut)), ParseError) << cut;
  }
  EXPECT_THROW(deserialize_model(bytes + "x"), ParseError);
}

TEST(ModelFile, DeclaredShapeMismatchIsCompatibilityError) {
  const std::string bytes = serialize_model(sample_model());
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + 8, sizeof len);
  auto header = nlohmann::json::parse(bytes.substr(16, len));
  header["arrays"][2]["cols"] = 9;
  const std::string text = header.dump();
  std::string tampered = bytes.substr(0, 8);
  const std::uint64_t new_len = text.size();
  tampered.append(reinterpret_cast<const char*>(&new_len), sizeof new_len);
  tampered += text + bytes.substr(16 + len);
  EXPECT_THROW(deserialize_model(tampered), CompatibilityError);
}

TEST(ModelFile, SaveLoadLeavesNoTemporary) {
  const fs::path dir = fs::temp_directory_path() / "menurank_model_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const Model m = sample_model();
  save_model(m, dir / "m.model");
  save_model(m, dir / "m.model");
  EXPECT_TRUE(bit_identical(load_model(dir / "m.model"), m));
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1u);
  EXPECT_THROW(load_model(dir / "missing.model"), Error);
  fs::remove_all(dir);
}

TEST(ModelFile, RankingSurvivesRoundTrip) {
  const Model m = sample_model();
  const Model back = deserialize_model(serialize_model(m));
  const std::vector<std::string> menu = {"latte", "beef steak", "green tea", "apple pie", "mystery stew"};
  const auto a = m.rank_dishes(menu, "protein");
  const auto b = back.rank_dishes(menu, "protein");
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(a.permutation, b.permutation);
}

TEST(Model, KeyErrorListsKeys) {
  try {
    sample_model().key_id("fat");
    FAIL();
  } catch (const KeyError& e) {
    const std::string msg = e.what();
    for (const char* k : {"calories", "protein", "sugar"}) EXPECT_NE(msg.find(k), std::string::npos);
  }
}

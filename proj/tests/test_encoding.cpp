#include <gtest/gtest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "menurank/datagen.hpp"
#include "menurank/encoding.hpp"
#include "menurank/errors.hpp"

using namespace menurank;
using Words = std::vector<std::string>;

TEST(Standardize, LowercasesAndSplits) {
  EXPECT_EQ(standardize_dish("Grilled Chicken Salad"), (Words{"grilled", "chicken", "salad"}));
  EXPECT_EQ(standardize_dish("Tea"), (Words{"tea"}));
}

TEST(Standardize, KeepsFirstThreeWords) {
  EXPECT_EQ(standardize_dish("Extra Spicy Beef Noodle Soup"), (Words{"extra", "spicy", "beef"}));
}

TEST(Standardize, StripsPunctuationAndExtraWhitespace) {
  EXPECT_EQ(standardize_dish("  Fish & Chips!\t"), (Words{"fish", "chips"}));
  EXPECT_EQ(standardize_dish("Caesar's salad"), (Words{"caesars", "salad"}));
}

TEST(Standardize, RejectsEmptyAndPunctuationOnly) {
  EXPECT_THROW(standardize_dish(""), InvalidDishError);
  EXPECT_THROW(standardize_dish(" ... !! "), InvalidDishError);
}

TEST(Standardize, IdempotentUnderRestandardization) {
  for (const char* raw : {"Extra Spicy Beef Noodle Soup", "Fish & Chips", "TEA", "a  b   c d"}) {
    const std::string once = canonical_dish_name(raw);
    EXPECT_EQ(canonical_dish_name(once), once);
  }
}

TEST(Vocabulary, FirstSeenOrderFromTwo) {
  const Vocabulary v = build_vocabulary(Words{"tea", "green tea"});
  EXPECT_EQ(v.lookup("tea"), 2u);
  EXPECT_EQ(v.lookup("green"), 3u);
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v.lookup("coffee"), kUnkIndex);
}

TEST(Vocabulary, BundledLexiconSize) {
  // 61 distinct words in data/lexicon.csv plus PAD and UNK.
  EXPECT_EQ(build_vocabulary(Lexicon::bundled()).size(), 63u);
}

TEST(Vocabulary, JsonRoundTrip) {
  const Vocabulary v = build_vocabulary(Lexicon::bundled());
  const Vocabulary back = Vocabulary::from_json(nlohmann::json::parse(v.to_json().dump()));
  EXPECT_EQ(back, v);
  for (const auto& w : v.words()) EXPECT_EQ(back.lookup(w), v.lookup(w));
}

TEST(Vocabulary, RejectsDuplicateWords) {
  EXPECT_THROW(Vocabulary::from_json(nlohmann::json::parse(R"({"words":["a","a"]})")), ParseError);
}

TEST(EncodeDish, PadsWithZeros) {
  Vocabulary v;
  for (const char* w : {"a", "b", "c"}) v.add(w);
  v.add("tea");  // index 5
  EXPECT_EQ(encode_dish("tea", v), (DishVector{5, 0, 0}));
}

TEST(EncodeDish, UnknownWordsMapToUnk) {
  const Vocabulary v = build_vocabulary(Words{"tea"});
  EXPECT_EQ(encode_dish("dragon fruit smoothie", v), (DishVector{1, 1, 1}));
}

TEST(EncodeDish, MultiWord) {
  const Vocabulary v = build_vocabulary(Words{"tea", "green tea"});
  EXPECT_EQ(encode_dish("green tea", v), (DishVector{3, 2, 0}));
  EXPECT_THROW(encode_dish("!!", v), InvalidDishError);
}

TEST(PackMenu, ShapesAndMask) {
  const Lexicon lex = Lexicon::bundled();
  const Vocabulary v = build_vocabulary(lex);
  Words names(lex.seen().begin(), lex.seen().begin() + 7);
  const MenuTensor m = pack_menu(names, v);
  EXPECT_EQ(m.dishes(), 7u);
  EXPECT_EQ(m.mask, std::vector<bool>(7, true));
  const MenuTensor one = pack_menu(Words{"latte"}, v);
  EXPECT_EQ(one.dishes(), 1u);
}

TEST(PackMenu, RowsMatchEncodeDishAndPadsTrail) {
  const Lexicon lex = Lexicon::bundled();
  const Vocabulary v = build_vocabulary(lex);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto names = lex.names();
    names.push_back("mystery stew");
    std::shuffle(names.begin(), names.end(), rng);
    names.resize(1 + trial % 20);
    const MenuTensor m = pack_menu(names, v);
    for (std::size_t i = 0; i < names.size(); ++i) {
      EXPECT_EQ(m.indices[i], encode_dish(names[i], v));
      bool seen_pad = false;
      for (std::size_t w : m.indices[i]) {
        if (w == kPadIndex) seen_pad = true;
        else EXPECT_FALSE(seen_pad) << "PAD before a word";
      }
      EXPECT_NE(m.indices[i][0], kPadIndex);
    }
  }
}

TEST(PackMenu, CapacityAndEmpty) {
  const Vocabulary v = build_vocabulary(Words{"tea"});
  EXPECT_THROW(pack_menu({}, v), EmptyMenuError);
  EXPECT_NO_THROW(pack_menu(Words(64, "tea"), v));
  EXPECT_THROW(pack_menu(Words(65, "tea"), v), CapacityError);
}

TEST(PackBatch, PadsToLongestWithMaskedRows) {
  const Vocabulary v = build_vocabulary(Words{"tea"});
  auto batch = pack_batch({pack_menu(Words(7, "tea"), v), pack_menu(Words(15, "tea"), v)});
  ASSERT_EQ(batch.size(), 2u);
  EXPECT_EQ(batch[0].dishes(), 15u);
  EXPECT_EQ(batch[1].dishes(), 15u);
  EXPECT_EQ(batch[0].valid_count(), 7u);
  EXPECT_EQ(std::count(batch[0].mask.begin(), batch[0].mask.end(), false), 8);
  EXPECT_EQ(batch[0].indices[10], (DishVector{0, 0, 0}));
  EXPECT_EQ(batch[1].valid_count(), 15u);
}

TEST(ParseMenuText, OneDishPerLine) {
  EXPECT_EQ(parse_menu_text("tea\nfried rice\n"), (Words{"tea", "fried rice"}));
}

TEST(ParseMenuText, SkipsCommentsAndBlanks) {
  EXPECT_EQ(parse_menu_text("# drinks\ntea\n\n"), (Words{"tea"}));
}

TEST(ParseMenuText, CrlfSameAsLf) {
  EXPECT_EQ(parse_menu_text("tea\r\nfried rice\r\n"), parse_menu_text("tea\nfried rice\n"));
}

TEST(ParseMenuText, NoDishesIsError) {
  EXPECT_THROW(parse_menu_text("# nothing\n\n  \n"), EmptyMenuError);
  EXPECT_THROW(parse_menu_text(""), EmptyMenuError);
}

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "menurank/datagen.hpp"
#include "menurank/model.hpp"
#include "menurank/train.hpp"

using namespace menurank;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int status = -1;
  std::string output;
};

RunResult run_cli(const std::string& args, bool merge_stderr = false) {
  const std::string cmd = std::string(MENURANK_CLI) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("menurank_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Small dataset plus a briefly trained model.
  void make_dataset_and_model(const std::string& keys = "calories") {
    ASSERT_EQ(run_cli("datagen --seed 3 --menus 150 --keys " + keys + " --out " + path("data")).status, 0);
    ASSERT_EQ(run_cli("train --data " + path("data") + " --model " + path("m.model") +
                      " --epochs 2 --embed-dim 8 --seed 1")
                  .status,
              0);
  }

  fs::path dir_;
};

// Single-word dishes with distinct calories, so a model can encode the truth exactly.
constexpr std::size_t kStubDishes = 20;

Lexicon stub_lexicon() {
  std::string csv = "name,calories,protein,sugar\n";
  std::string seen;
  for (std::size_t i = 0; i < kStubDishes; ++i) {
    const std::string name = "dish" + std::string(1, static_cast<char>('a' + i));
    csv += name + "," + std::to_string(37 * ((i * 7) % kStubDishes) + 10) + ",1,1\n";
    seen += name + "\n";
  }
  return Lexicon::parse(csv, seen);
}

// One-hot word embeddings; Wq = Wk = cI so each dish attends to itself;
// Wv = I; the head reads −calories off the one-hot value.
Model perfect_calorie_model(const Lexicon& lexicon) {
  const Vocabulary vocab = build_vocabulary(lexicon);
  const std::size_t d = vocab.size() + 2;
  Model m = init_model(vocab, {"calories"}, d, 1);
  for (auto* a : m.params.arrays()) a->fill(0.0);
  for (std::size_t w = 0; w < vocab.size(); ++w) m.params.word_embeddings(w, w) = 1.0;
  for (std::size_t j = 0; j < d; ++j) {
    m.params.query_weight(j, j) = 30.0;
    m.params.key_weight(j, j) = 30.0;
    m.params.value_weight(j, j) = 1.0;
  }
  for (const auto& rec : lexicon.records()) {
    m.params.score_weight(vocab.lookup(rec.name), 0) = -rec.calories / 100.0;
  }
  return m;
}

}  // namespace

TEST_F(Cli, DatagenIsReproducible) {
  ASSERT_EQ(run_cli("datagen --seed 7 --menus 120 --out " + path("a")).status, 0);
  ASSERT_EQ(run_cli("datagen --seed 7 --menus 120 --out " + path("b")).status, 0);
  for (const char* f : {"train.jsonl", "test.jsonl", "test_seen50.jsonl", "test_seen10.jsonl",
                        "vocabulary.json", "manifest.json"}) {
    const std::string a = slurp(dir_ / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(dir_ / "b" / f)) << f;
  }
  const json manifest = json::parse(slurp(dir_ / "a" / "manifest.json"));
  EXPECT_EQ(manifest["files"]["train.jsonl"]["menus"], 96);
  EXPECT_EQ(manifest["files"]["test.jsonl"]["menus"], 24);
  EXPECT_EQ(manifest["files"]["test_seen10.jsonl"]["menus"], 24);
}

TEST_F(Cli, DatagenReportsMissingColumn) {
  write_file(dir_ / "lex.csv", "name,calories,sugar\ntea,2,0\n");
  write_file(dir_ / "seen.txt", "tea\n");
  const RunResult r =
      run_cli("datagen --lexicon " + path("lex.csv") + " --seen " + path("seen.txt") + " --out " + path("o"), true);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("protein"), std::string::npos) << r.output;
}

TEST_F(Cli, TrainWritesModelAndHistory) {
  make_dataset_and_model();
  const Model m = load_model(path("m.model"));
  EXPECT_EQ(m.keys, (std::vector<std::string>{"calories"}));
  EXPECT_EQ(m.config().embed_dim, 8u);
  std::istringstream history(slurp(path("m.model.history.csv")));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(history, line)) ++lines;
  EXPECT_EQ(lines, 3u);
}

TEST_F(Cli, TrainMultiKey) {
  make_dataset_and_model("calories,protein,sugar");
  EXPECT_EQ(load_model(path("m.model")).keys, (std::vector<std::string>{"calories", "protein", "sugar"}));
  const RunResult r = run_cli("eval --model " + path("m.model") + " --data " + path("data/test.jsonl"));
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(json::parse(r.output)["n_menus"], 90);
}

TEST_F(Cli, EvalPrintsMetricsReport) {
  make_dataset_and_model();
  const RunResult r = run_cli("eval --model " + path("m.model") + " --data " + path("data/test_seen50.jsonl"));
  ASSERT_EQ(r.status, 0);
  const json j = json::parse(r.output);
  std::vector<std::string> fields;
  for (const auto& [k, v] : j.items()) fields.push_back(k);
  std::sort(fields.begin(), fields.end());
  EXPECT_EQ(fields, (std::vector<std::string>{"acc", "cel", "n_menus", "ndcg", "split_name"}));
  EXPECT_EQ(j["split_name"], "test_seen50");
  EXPECT_EQ(j["n_menus"], 30);
}

TEST_F(Cli, EvalOfPerfectStubModelIsOne) {
  const Lexicon lex = stub_lexicon();
  DatasetSpec spec;
  spec.n_menus = 60;
  spec.train_fraction = 0.5;
  const Dataset ds = generate_dataset(lex, spec);
  fs::create_directories(dir_ / "stub");
  write_jsonl(dir_ / "stub" / "test.jsonl", ds.test);
  write_file(dir_ / "stub" / "vocabulary.json", build_vocabulary(lex).to_json().dump());
  save_model(perfect_calorie_model(lex), dir_ / "stub.model");

  const RunResult r = run_cli("eval --model " + path("stub.model") + " --data " + path("stub/test.jsonl"));
  ASSERT_EQ(r.status, 0) << r.output;
  const json j = json::parse(r.output);
  EXPECT_DOUBLE_EQ(j["ndcg"].get<double>(), 1.0);
  EXPECT_EQ(j["acc"].get<double>(), 1.0);
}

TEST_F(Cli, EvalRejectsForeignVocabulary) {
  make_dataset_and_model();
  const Lexicon lex = stub_lexicon();
  save_model(perfect_calorie_model(lex), dir_ / "stub.model");
  const RunResult r = run_cli("eval --model " + path("stub.model") + " --data " + path("data/test.jsonl"), true);
  EXPECT_EQ(r.status, 1);
}

TEST_F(Cli, RankTableJsonAndErrors) {
  make_dataset_and_model();
  write_file(dir_ / "menu.txt", "# dinner\nLatte\nBeef Steak\r\nGreen Tea\n\nApple Pie\n");
  const RunResult a = run_cli("rank --model " + path("m.model") + " --menu " + path("menu.txt"));
  const RunResult b = run_cli("rank --model " + path("m.model") + " --menu " + path("menu.txt"));
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.output, b.output);
  EXPECT_EQ(a.output.substr(0, 4), "rank");
  EXPECT_EQ(std::count(a.output.begin(), a.output.end(), '\n'), 5);

  const RunResult j = run_cli("rank --json --key calories --model " + path("m.model") + " --menu " + path("menu.txt"));
  ASSERT_EQ(j.status, 0);
  const json body = json::parse(j.output);
  EXPECT_EQ(body["results"].size(), 4u);
  EXPECT_EQ(body["key"], "calories");

  write_file(dir_ / "one.txt", "Latte\n");
  const RunResult one = run_cli("rank --json --model " + path("m.model") + " --menu " + path("one.txt"));
  ASSERT_EQ(one.status, 0);
  EXPECT_EQ(json::parse(one.output)["results"][0]["rank"], 1);

  const RunResult bad = run_cli("rank --key fat --model " + path("m.model") + " --menu " + path("menu.txt"), true);
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.output.find("calories"), std::string::npos) << bad.output;

  write_file(dir_ / "empty.txt", "# nothing here\n");
  EXPECT_EQ(run_cli("rank --model " + path("m.model") + " --menu " + path("empty.txt")).status, 1);
}

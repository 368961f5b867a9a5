// menurank: dataset generation, training, evaluation, ranking and serving.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "menurank/datagen.hpp"
#include "menurank/errors.hpp"
#include "menurank/model.hpp"
#include "menurank/service.hpp"
#include "menurank/train.hpp"

namespace fs = std::filesystem;
using namespace menurank;

namespace {

constexpr const char* kTrainFile = "train.jsonl";
constexpr const char* kTestFile = "test.jsonl";
constexpr const char* kSeen50File = "test_seen50.jsonl";
constexpr const char* kSeen10File = "test_seen10.jsonl";
constexpr const char* kVocabFile = "vocabulary.json";
constexpr const char* kManifestFile = "manifest.json";

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

struct DatagenOptions {
  std::string lexicon_csv;
  std::string seen_list;
  std::string out_dir = "data/menurank";
  std::uint64_t seed = DatasetSpec{}.seed;
  std::size_t menus = DatasetSpec{}.n_menus;
  std::string keys = "calories";
};

int run_datagen(const DatagenOptions& opt) {
  if (opt.lexicon_csv.empty() != opt.seen_list.empty()) {
    throw Error("--lexicon and --seen must be given together");
  }
  const Lexicon lexicon = opt.lexicon_csv.empty() ? Lexicon::bundled()
                                                  : Lexicon::load(opt.lexicon_csv, opt.seen_list);
  DatasetSpec spec;
  spec.seed = opt.seed;
  spec.n_menus = opt.menus;
  spec.keys = split_csv(opt.keys);

  const Dataset ds = generate_dataset(lexicon, spec);
  DatasetSpec used = spec;
  used.seed = ds.seed;
  const auto seen50 = make_unseen_test(lexicon, used, 0.5);
  const auto seen10 = make_unseen_test(lexicon, used, 0.1);

  const fs::path out(opt.out_dir);
  fs::create_directories(out);
  write_jsonl(out / kTrainFile, ds.train);
  write_jsonl(out / kTestFile, ds.test);
  write_jsonl(out / kSeen50File, seen50);
  write_jsonl(out / kSeen10File, seen10);
  write_text(out / kVocabFile, build_vocabulary(lexicon).to_json().dump(2) + "\n");

  const std::size_t per_menu = spec.keys.size();
  nlohmann::json manifest = {
      {"requested_seed", spec.seed},
      {"seed", ds.seed},
      {"n_menus", spec.n_menus},
      {"keys", spec.keys},
      {"lexicon", opt.lexicon_csv.empty() ? "bundled" : opt.lexicon_csv},
      {"files",
       {{kTrainFile, {{"menus", ds.train.size() / per_menu}, {"samples", ds.train.size()}}},
        {kTestFile, {{"menus", ds.test.size() / per_menu}, {"samples", ds.test.size()}}},
        {kSeen50File,
         {{"menus", seen50.size() / per_menu}, {"samples", seen50.size()}, {"seen_fraction", 0.5}}},
        {kSeen10File,
         {{"menus", seen10.size() / per_menu}, {"samples", seen10.size()}, {"seen_fraction", 0.1}}}}},
  };
  write_text(out / kManifestFile, manifest.dump(2) + "\n");
  std::cerr << "wrote dataset to " << out.string() << " (seed " << ds.seed << ")\n";
  return 0;
}

struct TrainOptions {
  std::string data_dir = "data/menurank";
  std::string model_out = "menurank.model";
  std::string history_out;
  std::string keys;
  std::size_t epochs = TrainConfig{}.epochs;
  std::size_t batch_size = TrainConfig{}.batch_size;
  std::size_t embed_dim = RankerConfig{}.embed_dim;
  double lr = TrainConfig{}.lr;
  std::uint64_t seed = TrainConfig{}.seed;
};

std::vector<MenuSample> filter_keys(const std::vector<MenuSample>& samples,
                                    const std::vector<std::string>& keys) {
  std::vector<MenuSample> out;
  for (const auto& s : samples)
    if (std::find(keys.begin(), keys.end(), s.key) != keys.end()) out.push_back(s);
  return out;
}

int run_train(const TrainOptions& opt) {
  const fs::path dir(opt.data_dir);
  const auto all_train = read_jsonl(dir / kTrainFile);
  std::vector<MenuSample> all_test;
  if (fs::exists(dir / kTestFile)) all_test = read_jsonl(dir / kTestFile);

  std::vector<std::string> present;
  for (const auto& s : all_train)
    if (std::find(present.begin(), present.end(), s.key) == present.end()) present.push_back(s.key);
  std::vector<std::string> keys = opt.keys.empty() ? present : split_csv(opt.keys);
  for (const auto& k : keys) {
    if (std::find(present.begin(), present.end(), k) == present.end()) {
      throw Error("key '" + k + "' has no samples in " + (dir / kTrainFile).string());
    }
  }
  const auto train_set = filter_keys(all_train, keys);
  const auto val_set = filter_keys(all_test, keys);

  const Vocabulary vocab = Vocabulary::from_json(nlohmann::json::parse(read_text(dir / kVocabFile)));
  Model model = init_model(vocab, keys, opt.embed_dim, opt.seed);
  TrainConfig config;
  config.epochs = opt.epochs;
  config.batch_size = opt.batch_size;
  config.lr = opt.lr;
  config.seed = opt.seed;

  auto log_epoch = [](const EpochRecord& r) {
    std::cerr << "epoch " << r.epoch << " train_loss " << r.train_loss;
    if (r.validation) {
      std::cerr << " val_ndcg " << r.validation->ndcg << " val_cel " << r.validation->cel
                << " val_acc " << r.validation->acc;
    }
    std::cerr << '\n';
  };
  const TrainResult result =
      train(config, std::move(model), train_set, val_set.empty() ? nullptr : &val_set, log_epoch);

  const fs::path model_path(opt.model_out);
  fs::path history_path(opt.history_out);
  if (history_path.empty()) {
    history_path = model_path;
    history_path += ".history.csv";
  }
  std::ostringstream history;
  write_history_csv(history, result.history);
  write_text(history_path, history.str());
  save_model(result.model, model_path);
  std::cerr << "saved model to " << model_path.string() << '\n';
  return 0;
}

int run_eval(const std::string& model_path, const std::string& data_path, std::string split) {
  const Model model = load_model(model_path);
  const fs::path data(data_path);
  const fs::path vocab_path = data.parent_path() / kVocabFile;
  if (fs::exists(vocab_path)) {
    const auto vocab = Vocabulary::from_json(nlohmann::json::parse(read_text(vocab_path)));
    if (!(vocab == model.vocab)) {
      throw CompatibilityError("model vocabulary differs from " + vocab_path.string());
    }
  }
  const auto samples = read_jsonl(data);
  for (const auto& s : samples) {
    try {
      model.key_id(s.key);
    } catch (const KeyError& e) {
      throw CompatibilityError(std::string("dataset uses a key the model lacks: ") + e.what());
    }
  }
  if (split.empty()) split = data.stem().string();
  std::cout << to_json(evaluate(model, samples, split)).dump(2) << '\n';
  return 0;
}

int run_rank(const std::string& model_path, const std::string& menu_path, std::string key,
             bool as_json) {
  const Model model = load_model(model_path);
  if (key.empty()) key = model.keys.front();
  model.key_id(key);
  const auto dishes = parse_menu_text(read_text(menu_path));
  const RankOutput out = model.rank_dishes(dishes, key);
  if (as_json) {
    std::cout << rank_response(model, dishes, key, out).dump(2) << '\n';
    return 0;
  }
  std::size_t width = 4;
  for (const auto& d : dishes) width = std::max(width, d.size());
  std::cout << "rank  " << std::left << std::setw(static_cast<int>(width)) << "dish"
            << "  score\n";
  std::size_t position = 1;
  for (std::size_t idx : out.permutation) {
    std::cout << std::right << std::setw(4) << position++ << "  " << std::left
              << std::setw(static_cast<int>(width)) << dishes[idx] << "  " << std::fixed
              << std::setprecision(6) << out.scores[idx] << '\n';
  }
  return 0;
}

int run_serve(const std::string& model_path, const std::string& bind_addr,
              const std::string& cors_origin) {
  const auto colon = bind_addr.rfind(':');
  if (colon == std::string::npos) throw Error("--bind expects host:port, got '" + bind_addr + "'");
  const std::string host = bind_addr.substr(0, colon);
  const int port = std::stoi(bind_addr.substr(colon + 1));
  RankService service(load_model(model_path), cors_origin);
  const int bound = service.bind(host, port);
  if (bound < 0) throw Error("cannot bind " + bind_addr);
  std::cerr << "serving on " << host << ':' << bound << '\n';
  return service.listen_after_bind() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nutrition-aware menu ranking with a self-attention learning-to-rank model"};
  app.require_subcommand(1);

  DatagenOptions dg;
  auto* datagen = app.add_subcommand("datagen", "Generate a synthetic ranked-menu dataset");
  datagen->add_option("--lexicon", dg.lexicon_csv, "Nutrition CSV (default: bundled)");
  datagen->add_option("--seen", dg.seen_list, "Seen-dish list, one name per line");
  datagen->add_option("--out", dg.out_dir, "Output directory")->capture_default_str();
  datagen->add_option("--seed", dg.seed, "Generator seed")->capture_default_str();
  datagen->add_option("--menus", dg.menus, "Total menus before the train/test split")
      ->capture_default_str();
  datagen->add_option("--keys", dg.keys, "Comma-separated search keys")->capture_default_str();

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train a ranker on a generated dataset");
  train_cmd->add_option("--data", tr.data_dir, "Dataset directory")->capture_default_str();
  train_cmd->add_option("--model", tr.model_out, "Model output path")->capture_default_str();
  train_cmd->add_option("--history", tr.history_out, "History CSV (default: <model>.history.csv)");
  train_cmd->add_option("--keys", tr.keys, "Comma-separated keys to train on (default: all)");
  train_cmd->add_option("--epochs", tr.epochs)->capture_default_str();
  train_cmd->add_option("--batch-size", tr.batch_size)->capture_default_str();
  train_cmd->add_option("--embed-dim", tr.embed_dim)->capture_default_str();
  train_cmd->add_option("--lr", tr.lr)->capture_default_str();
  train_cmd->add_option("--seed", tr.seed)->capture_default_str();

  std::string model_path = "menurank.model";
  std::string eval_data;
  std::string split;
  auto* eval = app.add_subcommand("eval", "Print NDCG/CEL/ACC for a test file as JSON");
  eval->add_option("--model", model_path)->capture_default_str();
  eval->add_option("--data", eval_data, "JSONL test file")->required();
  eval->add_option("--split", split, "Split name in the report (default: file stem)");

  std::string menu_path;
  std::string key;
  bool as_json = false;
  auto* rank_cmd = app.add_subcommand("rank", "Rank the dishes of a plain-text menu");
  rank_cmd->add_option("--model", model_path)->capture_default_str();
  rank_cmd->add_option("--menu", menu_path, "Menu text file, one dish per line")->required();
  rank_cmd->add_option("--key", key, "Search key (default: the model's first key)");
  rank_cmd->add_flag("--json", as_json, "Emit the HTTP API response body instead of a table");

  std::string bind_addr = "127.0.0.1:8080";
  std::string cors_origin = "*";
  auto* serve = app.add_subcommand("serve", "Serve the ranking HTTP API");
  serve->add_option("--model", model_path)->capture_default_str();
  serve->add_option("--bind", bind_addr, "host:port")->capture_default_str();
  serve->add_option("--cors-origin", cors_origin, "Allowed CORS origin")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*datagen) return run_datagen(dg);
    if (*train_cmd) return run_train(tr);
    if (*eval) return run_eval(model_path, eval_data, split);
    if (*rank_cmd) return run_rank(model_path, menu_path, key, as_json);
    if (*serve) return run_serve(model_path, bind_addr, cors_origin);
  } catch (const std::exception& e) {
    std::cerr << "menurank: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

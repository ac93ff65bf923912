#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "febaa/febaa.h"

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    std::random_device rd;
    dir = fs::temp_directory_path() / ("febaa-capi-" + std::to_string(rd()));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Two 15-node rings; column 0 carries the class, the rest is noise.
void write_dataset(const Scratch& s) {
  std::string edges, features, labels;
  std::mt19937 gen(1);
  for (int i = 0; i < 30; ++i) {
    const int block = i / 15;
    const int next = block * 15 + (i % 15 + 1) % 15;
    edges += std::to_string(i) + " " + std::to_string(next) + "\n";
    features += std::to_string(block);
    for (int j = 0; j < 3; ++j) features += "," + std::to_string(gen() % 100 / 100.0);
    features += "\n";
    labels += std::to_string(block) + "\n";
  }
  write(s / "edges.txt", edges);
  write(s / "features.csv", features);
  write(s / "labels.csv", labels);
}

const char* kConfig = R"({
  "dataset": {"name": "rings", "edges": "edges.txt", "features": "features.csv",
              "labels": "labels.csv"},
  "seed": 4,
  "views": {
    "view1": {"mode": "all_features", "feature_drop": 0.2, "edge_drop": 0.2},
    "view2": {"mode": "influential", "ratio": 0.5, "probability": 0.5, "pos": "L",
              "edge_drop": 0.2}
  },
  "train": {"epochs": 5, "hidden_size": 8, "output_size": 4},
  "ranking": {"compute": true, "epochs": 2, "rounds": 1},
  "eval": {"splits": 3, "train_fraction": 0.5, "iterations": 50},
  "sweep": {"ratios": [0.5], "probabilities": [0.5], "runs_per_cell": 1},
  "ablation": {"runs": 1}
})";

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(febaa_version()) == "0.1.0");
  CHECK(std::string(febaa_status_name(FEBAA_OK)) == "ok");
  CHECK(std::string(febaa_status_name(FEBAA_ERR_PARSE)) == "parse");
  CHECK(std::string(febaa_status_name(FEBAA_ERR_INTERNAL)) == "internal");
}

TEST_CASE("null arguments are reported, not crashed on") {
  febaa_config* cfg = nullptr;
  CHECK(febaa_config_parse(nullptr, nullptr, &cfg) == FEBAA_ERR_INVALID_ARGUMENT);
  CHECK(std::string(febaa_last_error()).find("null argument") != std::string::npos);
  CHECK(febaa_pretraining_budget(1, 1, 1, nullptr) == FEBAA_ERR_INVALID_ARGUMENT);
  febaa_config_free(nullptr);
  febaa_graph_free(nullptr);
  febaa_ranking_free(nullptr);
  CHECK(febaa_ranking_size(nullptr) == 0);
}

TEST_CASE("error codes follow the failing layer") {
  Scratch s;
  febaa_graph* g = nullptr;
  CHECK(febaa_graph_load((s / "missing.txt").c_str(), (s / "x.csv").c_str(), nullptr, &g) ==
        FEBAA_ERR_IO);
  write(s / "bad.txt", "0 x\n");
  write(s / "x.csv", "1\n2\n");
  CHECK(febaa_graph_load((s / "bad.txt").c_str(), (s / "x.csv").c_str(), nullptr, &g) ==
        FEBAA_ERR_PARSE);
  CHECK(g == nullptr);
  uint64_t budget = 0;
  CHECK(febaa_pretraining_budget(0, 1, 1, &budget) == FEBAA_ERR_INVALID_ARGUMENT);
  febaa_config* cfg = nullptr;
  CHECK(febaa_config_parse("{}", nullptr, &cfg) == FEBAA_ERR_CONFIG);
}

TEST_CASE("full pipeline through the C interface") {
  Scratch s;
  write_dataset(s);
  febaa_config* cfg = nullptr;
  REQUIRE(febaa_config_parse(kConfig, s.dir.c_str(), &cfg) == FEBAA_OK);
  CHECK(febaa_config_seed(cfg) == 4);
  CHECK(std::string(febaa_config_dataset_name(cfg)) == "rings");

  febaa_graph* g = nullptr;
  REQUIRE(febaa_graph_load_config(cfg, &g) == FEBAA_OK);
  febaa_graph_stats st{};
  REQUIRE(febaa_graph_stats_get(g, &st) == FEBAA_OK);
  CHECK(st.num_nodes == 30);
  CHECK(st.num_features == 4);
  CHECK(st.num_edges == 30);
  CHECK(st.num_classes == 2);

  febaa_ranking* rk = nullptr;
  uint64_t calls = 0;
  REQUIRE(febaa_rank(g, cfg, &rk, &calls) == FEBAA_OK);
  CHECK(calls == 4);
  CHECK(febaa_ranking_size(rk) == 4);
  uint32_t feature = 99;
  CHECK(febaa_ranking_entry(rk, 0, &feature, nullptr) == FEBAA_OK);
  CHECK(feature < 4);
  CHECK(febaa_ranking_entry(rk, 4, &feature, nullptr) == FEBAA_ERR_INVALID_ARGUMENT);
  REQUIRE(febaa_ranking_save(rk, (s / "rank.csv").c_str()) == FEBAA_OK);
  febaa_ranking* loaded = nullptr;
  REQUIRE(febaa_ranking_load((s / "rank.csv").c_str(), &loaded) == FEBAA_OK);
  CHECK(febaa_ranking_size(loaded) == 4);
  febaa_ranking_free(loaded);

  char* summary = nullptr;
  REQUIRE(febaa_augment(g, rk, cfg, 2, 0, (s / "vx.csv").c_str(), (s / "ve.txt").c_str(),
                        &summary) == FEBAA_OK);
  CHECK(std::string(summary).find("\"candidate_features\"") != std::string::npos);
  febaa_string_free(summary);
  CHECK(febaa_augment(g, nullptr, cfg, 2, 0, (s / "vx.csv").c_str(), (s / "ve.txt").c_str(),
                      nullptr) != FEBAA_OK);

  febaa_model* m = nullptr;
  REQUIRE(febaa_train(g, rk, cfg, &m) == FEBAA_OK);
  CHECK(febaa_model_epochs(m) == 5);
  REQUIRE(febaa_model_write_embedding(m, (s / "h.csv").c_str()) == FEBAA_OK);
  REQUIRE(febaa_model_write_loss_trace(m, (s / "loss.csv").c_str()) == FEBAA_OK);
  CHECK(slurp(s / "loss.csv").rfind("epoch,loss\n0,", 0) == 0);

  febaa_eval* ev = nullptr;
  REQUIRE(febaa_evaluate_files((s / "h.csv").c_str(), (s / "labels.csv").c_str(), cfg, 1, &ev) ==
          FEBAA_OK);
  char* line = nullptr;
  REQUIRE(febaa_eval_summary(ev, &line) == FEBAA_OK);
  CHECK(std::string(line).find("±") != std::string::npos);
  febaa_string_free(line);
  CHECK(febaa_eval_mean(ev) >= 0.0);
  CHECK(febaa_eval_mean(ev) <= 100.0);
  febaa_eval_free(ev);

  write(s / "short.csv", "0\n1\n");
  CHECK(febaa_evaluate_files((s / "h.csv").c_str(), (s / "short.csv").c_str(), cfg, 1, &ev) ==
        FEBAA_ERR_EVALUATION);

  REQUIRE(febaa_sweep(g, rk, cfg, s.dir.c_str()) == FEBAA_OK);
  CHECK(slurp(s / "sweep_table.csv").rfind("ratio,probability,pos,mean_f1,std_f1,runs\n", 0) == 0);
  CHECK(slurp(s / "pos_wins.csv").find("Total,") != std::string::npos);
  CHECK(febaa_sweep(g, nullptr, cfg, s.dir.c_str()) == FEBAA_ERR_CONFIG);
  REQUIRE(febaa_ablate(g, rk, cfg, s.dir.c_str()) == FEBAA_OK);
  CHECK(slurp(s / "ablation.csv").rfind("dataset,FebAA,FebAA(OFD)\nrings,", 0) == 0);

  char* json = nullptr;
  REQUIRE(febaa_config_to_json(cfg, 0, &json) == FEBAA_OK);
  CHECK(std::string(json).find("\"seed\": 4") == std::string::npos);
  febaa_string_free(json);

  febaa_model_free(m);
  febaa_ranking_free(rk);
  febaa_graph_free(g);
  febaa_config_free(cfg);
}

TEST_CASE("ranking_for_config follows the config's ranking source") {
  Scratch s;
  write_dataset(s);
  std::string text = kConfig;
  text.replace(text.find("\"compute\": true"), 15, "\"compute\": false, \"path\": \"r.csv\"");
  write(s / "r.csv", "rank,feature_index,mean_score\n0,3,0.1\n1,2,0.2\n2,1,0.3\n3,0,0.4\n");
  febaa_config* cfg = nullptr;
  REQUIRE(febaa_config_parse(text.c_str(), s.dir.c_str(), &cfg) == FEBAA_OK);
  febaa_graph* g = nullptr;
  REQUIRE(febaa_graph_load_config(cfg, &g) == FEBAA_OK);
  febaa_ranking* rk = nullptr;
  REQUIRE(febaa_ranking_for_config(g, cfg, &rk) == FEBAA_OK);
  uint32_t first = 0;
  febaa_ranking_entry(rk, 0, &first, nullptr);
  CHECK(first == 3);
  febaa_ranking_free(rk);
  febaa_graph_free(g);
  febaa_config_free(cfg);
}

// febaa - command-line front end over the C API.

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "febaa/febaa.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Failure {
  febaa_status status;
  std::string message;
};

void check(febaa_status status) {
  if (status != FEBAA_OK) throw Failure{status, febaa_last_error()};
}

[[noreturn]] void fail(febaa_status status, std::string message) {
  throw Failure{status, std::move(message)};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ConfigPtr = std::unique_ptr<febaa_config, Deleter<febaa_config, febaa_config_free>>;
using GraphPtr = std::unique_ptr<febaa_graph, Deleter<febaa_graph, febaa_graph_free>>;
using RankingPtr = std::unique_ptr<febaa_ranking, Deleter<febaa_ranking, febaa_ranking_free>>;
using ModelPtr = std::unique_ptr<febaa_model, Deleter<febaa_model, febaa_model_free>>;
using EvalPtr = std::unique_ptr<febaa_eval, Deleter<febaa_eval, febaa_eval_free>>;

std::string take(char* s) {
  std::string out(s ? s : "");
  febaa_string_free(s);
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    fail(FEBAA_ERR_INTERNAL, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(FEBAA_ERR_IO, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) fail(FEBAA_ERR_IO, "cannot write " + path.string());
}

std::uint64_t parse_seed(const std::string& text, const char* source) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty())
    fail(FEBAA_ERR_CONFIG, std::string(source) + " is not an unsigned integer: '" + text + "'");
  return v;
}

// Seed precedence: --seed, then FEBAA_SEED, then the config file.
std::optional<std::uint64_t> seed_override(const std::optional<std::uint64_t>& flag) {
  if (flag) return flag;
  if (const char* env = std::getenv("FEBAA_SEED"); env && *env)
    return parse_seed(env, "FEBAA_SEED");
  return std::nullopt;
}

/// One invocation's output directory plus the artifacts it has produced.
class Run {
 public:
  Run(std::string command, fs::path dir, json config, std::uint64_t seed)
      : command_(std::move(command)), dir_(std::move(dir)), config_(std::move(config)),
        seed_(seed) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) fail(FEBAA_ERR_IO, "cannot create " + dir_.string() + ": " + ec.message());
  }

  const fs::path& dir() const { return dir_; }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void add(const std::string& name) { artifacts_.push_back(name); }
  void add_external(const fs::path& p) { external_.push_back(fs::absolute(p)); }

  void write_manifest() const {
    json m;
    m["febaa_manifest"] = 1;
    m["command"] = command_;
    m["seed"] = seed_;
    m["config"] = config_;
    json art = json::object();
    for (const auto& name : artifacts_) art[name] = sha256_hex(read_file(dir_ / name));
    for (const auto& p : external_) art[p.string()] = sha256_hex(read_file(p));
    m["artifacts"] = std::move(art);
    write_file(dir_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  std::string command_;
  fs::path dir_;
  json config_;
  std::uint64_t seed_;
  std::vector<std::string> artifacts_;
  std::vector<fs::path> external_;
};

struct Loaded {
  ConfigPtr cfg;
  std::uint64_t seed = 0;
};

Loaded load_config(const std::string& path, const std::optional<std::uint64_t>& seed_flag) {
  febaa_config* raw = nullptr;
  check(febaa_config_load(path.c_str(), &raw));
  Loaded out{ConfigPtr(raw), 0};
  if (auto seed = seed_override(seed_flag)) check(febaa_config_set_seed(raw, *seed));
  out.seed = febaa_config_seed(raw);
  return out;
}

Run open_run(const std::string& command, const febaa_config* cfg) {
  char* hashed = nullptr;
  check(febaa_config_to_json(cfg, 0, &hashed));
  const std::string tag = sha256_hex(take(hashed)).substr(0, 16);
  char* full = nullptr;
  check(febaa_config_to_json(cfg, 1, &full));
  const std::uint64_t seed = febaa_config_seed(cfg);
  const fs::path dir = fs::path(febaa_config_output_dir(cfg)) / (tag + "-" + std::to_string(seed));
  return Run(command, dir, json::parse(take(full)), seed);
}

GraphPtr load_graph(const febaa_config* cfg) {
  febaa_graph* g = nullptr;
  check(febaa_graph_load_config(cfg, &g));
  return GraphPtr(g);
}

RankingPtr ranking_for(const febaa_graph* g, const febaa_config* cfg) {
  febaa_ranking* r = nullptr;
  check(febaa_ranking_for_config(g, cfg, &r));
  return RankingPtr(r);
}

void apply_ranking_flag(febaa_config* cfg, const std::string& ranking) {
  if (!ranking.empty()) check(febaa_config_set_ranking_path(cfg, ranking.c_str()));
}

// ---- subcommands ----

struct CommonOpts {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string ranking;
};

int cmd_ingest(const CommonOpts& o) {
  Loaded l = load_config(o.config, o.seed);
  GraphPtr g = load_graph(l.cfg.get());
  Run run = open_run("ingest", l.cfg.get());
  char* report = nullptr;
  check(febaa_graph_report(g.get(), &report));
  const std::string text = take(report);
  write_file(run.path("ingest_report.json"), text);
  run.add("ingest_report.json");
  run.write_manifest();
  std::cout << text;
  return 0;
}

struct RankOpts {
  std::size_t epochs = 0;
  std::size_t rounds = 0;
  std::string scorer;
  std::string out;
};

int cmd_rank(const CommonOpts& o, const RankOpts& r) {
  Loaded l = load_config(o.config, o.seed);
  check(febaa_config_set_ranking(l.cfg.get(), r.epochs, r.rounds,
                                 r.scorer.empty() ? nullptr : r.scorer.c_str()));
  GraphPtr g = load_graph(l.cfg.get());
  Run run = open_run("rank", l.cfg.get());
  febaa_ranking* raw = nullptr;
  std::uint64_t calls = 0;
  check(febaa_rank(g.get(), l.cfg.get(), &raw, &calls));
  RankingPtr ranking(raw);
  check(febaa_ranking_save(ranking.get(), run.path("ranking.csv").c_str()));
  run.add("ranking.csv");
  if (!r.out.empty()) {
    check(febaa_ranking_save(ranking.get(), r.out.c_str()));
    run.add_external(r.out);
  }
  run.write_manifest();
  std::cout << "scorer_calls=" << calls << "\n";
  std::cout << "ranking=" << run.path("ranking.csv") << "\n";
  return 0;
}

struct AugmentOpts {
  int view = 1;
  std::uint64_t epoch = 0;
};

int cmd_augment(const CommonOpts& o, const AugmentOpts& a) {
  Loaded l = load_config(o.config, o.seed);
  apply_ranking_flag(l.cfg.get(), o.ranking);
  GraphPtr g = load_graph(l.cfg.get());
  RankingPtr ranking = ranking_for(g.get(), l.cfg.get());
  Run run = open_run("augment", l.cfg.get());
  const std::string stem = "view" + std::to_string(a.view) + "_epoch" + std::to_string(a.epoch);
  char* summary = nullptr;
  check(febaa_augment(g.get(), ranking.get(), l.cfg.get(), a.view, a.epoch,
                      run.path(stem + "_features.csv").c_str(),
                      run.path(stem + "_edges.txt").c_str(), &summary));
  const std::string text = take(summary);
  write_file(run.path(stem + "_summary.json"), text);
  for (const char* suffix : {"_features.csv", "_edges.txt", "_summary.json"})
    run.add(stem + suffix);
  run.write_manifest();
  std::cout << text;
  return 0;
}

int cmd_train(const CommonOpts& o) {
  Loaded l = load_config(o.config, o.seed);
  apply_ranking_flag(l.cfg.get(), o.ranking);
  GraphPtr g = load_graph(l.cfg.get());
  RankingPtr ranking = ranking_for(g.get(), l.cfg.get());
  Run run = open_run("train", l.cfg.get());
  febaa_model* raw = nullptr;
  check(febaa_train(g.get(), ranking.get(), l.cfg.get(), &raw));
  ModelPtr model(raw);
  check(febaa_model_write_loss_trace(model.get(), run.path("loss_trace.csv").c_str()));
  check(febaa_model_write_embedding(model.get(), run.path("embedding.csv").c_str()));
  run.add("loss_trace.csv");
  run.add("embedding.csv");
  run.write_manifest();
  std::printf("epochs=%zu final_loss=%.6f\n", febaa_model_epochs(model.get()),
              febaa_model_final_loss(model.get()));
  std::cout << "embedding=" << run.path("embedding.csv") << "\n";
  return 0;
}

struct EvalOpts {
  std::string embedding;
  std::string labels;
};

int cmd_eval(const CommonOpts& o, const EvalOpts& e) {
  ConfigPtr cfg;
  std::uint64_t seed = 0;
  std::optional<Run> run;
  if (!o.config.empty()) {
    Loaded l = load_config(o.config, o.seed);
    cfg = std::move(l.cfg);
    seed = l.seed;
    run.emplace(open_run("eval", cfg.get()));
  } else {
    seed = seed_override(o.seed).value_or(0);
    const std::string tag =
        sha256_hex(read_file(e.embedding) + '\0' + read_file(e.labels)).substr(0, 16);
    json inputs;
    inputs["embedding"] = fs::absolute(e.embedding).string();
    inputs["labels"] = fs::absolute(e.labels).string();
    run.emplace("eval", fs::path("runs") / ("eval-" + tag + "-" + std::to_string(seed)),
                std::move(inputs), seed);
  }
  febaa_eval* raw = nullptr;
  check(febaa_evaluate_files(e.embedding.c_str(), e.labels.c_str(), cfg.get(), seed, &raw));
  EvalPtr eval(raw);
  check(febaa_eval_write_scores(eval.get(), run->path("scores.csv").c_str()));
  run->add("scores.csv");
  char* summary = nullptr;
  check(febaa_eval_summary(eval.get(), &summary));
  const std::string line = take(summary);
  write_file(run->path("summary.txt"), line + "\n");
  run->add("summary.txt");
  run->write_manifest();
  std::cout << line << "\n";
  return 0;
}

int cmd_sweep(const CommonOpts& o) {
  Loaded l = load_config(o.config, o.seed);
  apply_ranking_flag(l.cfg.get(), o.ranking);
  GraphPtr g = load_graph(l.cfg.get());
  RankingPtr ranking = ranking_for(g.get(), l.cfg.get());
  Run run = open_run("sweep", l.cfg.get());
  check(febaa_sweep(g.get(), ranking.get(), l.cfg.get(), run.dir().c_str()));
  for (const auto& entry : fs::directory_iterator(run.dir())) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("sweep_", 0) == 0 || name == "pos_wins.csv") run.add(name);
  }
  run.write_manifest();
  std::cout << read_file(run.path("sweep_table.csv"));
  return 0;
}

int cmd_ablate(const CommonOpts& o) {
  Loaded l = load_config(o.config, o.seed);
  apply_ranking_flag(l.cfg.get(), o.ranking);
  GraphPtr g = load_graph(l.cfg.get());
  RankingPtr ranking = ranking_for(g.get(), l.cfg.get());
  Run run = open_run("ablate", l.cfg.get());
  check(febaa_ablate(g.get(), ranking.get(), l.cfg.get(), run.dir().c_str()));
  run.add("ablation.csv");
  run.add("ablation_runs.csv");
  run.write_manifest();
  std::cout << read_file(run.path("ablation.csv"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-based adaptive augmentation for graph contrastive learning", "febaa"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(febaa_version()));

  CommonOpts common;
  RankOpts rank_opts;
  AugmentOpts augment_opts;
  EvalOpts eval_opts;

  auto add_config = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("-c,--config", common.config, "run config (JSON) or manifest");
    if (required) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "override the config seed (beats FEBAA_SEED)");
  };
  auto add_ranking = [&](CLI::App* sub) {
    sub->add_option("--ranking", common.ranking, "ranking CSV (overrides ranking.path)")
        ->check(CLI::ExistingFile);
  };

  auto* ingest = app.add_subcommand("ingest", "load a dataset and print a validation report");
  add_config(ingest, true);

  auto* rank = app.add_subcommand("rank", "rank features by single-feature masking");
  add_config(rank, true);
  rank->add_option("--epochs", rank_opts.epochs, "pre-training epochs per scorer call")
      ->check(CLI::PositiveNumber);
  rank->add_option("--rounds", rank_opts.rounds, "ranking rounds")->check(CLI::PositiveNumber);
  rank->add_option("--scorer", rank_opts.scorer, "scorer")
      ->check(CLI::IsMember({"gcl", "variance-stub"}));
  rank->add_option("--out", rank_opts.out, "extra copy of the ranking CSV");

  auto* augment = app.add_subcommand("augment", "dump one generated view");
  add_config(augment, true);
  add_ranking(augment);
  augment->add_option("--view", augment_opts.view, "view 1 or 2")->check(CLI::Range(1, 2));
  augment->add_option("--epoch", augment_opts.epoch, "epoch whose masks to reproduce");

  auto* train = app.add_subcommand("train", "train the encoder and write the embedding");
  add_config(train, true);
  add_ranking(train);

  auto* eval = app.add_subcommand("eval", "linear evaluation of an embedding");
  add_config(eval, false);
  eval->add_option("--embedding", eval_opts.embedding, "embedding CSV")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--labels", eval_opts.labels, "labels CSV")
      ->required()
      ->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "ratio x probability x pos grid");
  add_config(sweep, true);
  add_ranking(sweep);

  auto* ablate = app.add_subcommand("ablate", "edge-drop ablation (FebAA vs only-feature)");
  add_config(ablate, true);
  add_ranking(ablate);

  if (argc < 2) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "febaa: usage error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(common);
    if (*rank) return cmd_rank(common, rank_opts);
    if (*augment) return cmd_augment(common, augment_opts);
    if (*train) return cmd_train(common);
    if (*eval) return cmd_eval(common, eval_opts);
    if (*sweep) return cmd_sweep(common);
    if (*ablate) return cmd_ablate(common);
  } catch (const Failure& f) {
    std::cerr << "febaa: error: " << febaa_status_name(f.status) << ": " << f.message << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "febaa: error: internal: " << e.what() << "\n";
    return 1;
  }
  std::cerr << app.help();
  return 2;
}

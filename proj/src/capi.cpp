#include "febaa/febaa.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <optional>
#include <string>

#include <json.hpp>

#include "febaa/augmentation.hpp"
#include "febaa/config.hpp"
#include "febaa/error.hpp"
#include "febaa/evaluation.hpp"
#include "febaa/gcl.hpp"
#include "febaa/graph.hpp"
#include "febaa/ranking.hpp"
#include "febaa/sweep.hpp"

struct febaa_config {
  febaa::RunConfig cfg;
};

struct febaa_graph {
  febaa::AttributedGraph graph;
};

struct febaa_ranking {
  febaa::FeatureRanking ranking;
};

struct febaa_model {
  febaa::TrainResult result;
};

struct febaa_eval {
  febaa::EvalResult result;
};

namespace {

thread_local std::string g_last_error;

febaa_status to_status(febaa::ErrorCode code) {
  switch (code) {
    case febaa::ErrorCode::kInvalidArgument: return FEBAA_ERR_INVALID_ARGUMENT;
    case febaa::ErrorCode::kIo: return FEBAA_ERR_IO;
    case febaa::ErrorCode::kParse: return FEBAA_ERR_PARSE;
    case febaa::ErrorCode::kConfig: return FEBAA_ERR_CONFIG;
    case febaa::ErrorCode::kRanking: return FEBAA_ERR_RANKING;
    case febaa::ErrorCode::kTraining: return FEBAA_ERR_TRAINING;
    case febaa::ErrorCode::kEvaluation: return FEBAA_ERR_EVALUATION;
  }
  return FEBAA_ERR_INTERNAL;
}

febaa_status fail(febaa_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename Fn>
febaa_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return FEBAA_OK;
  } catch (const febaa::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(FEBAA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FEBAA_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(FEBAA_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw febaa::Error(febaa::ErrorCode::kInvalidArgument, what);
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw febaa::Error(febaa::ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw febaa::Error(febaa::ErrorCode::kIo, "write failed: " + path.string());
}

febaa::PipelineSettings pipeline_settings(const febaa::RunConfig& cfg) {
  return febaa::PipelineSettings{cfg.train, cfg.eval};
}

febaa::RankingRun run_ranking(const febaa::AttributedGraph& graph, const febaa::RunConfig& cfg) {
  const febaa::Scorer scorer = febaa::make_scorer(cfg.ranking.scorer, cfg.train, cfg.eval);
  febaa::RankOptions options;
  options.epochs = cfg.ranking.epochs;
  options.rounds = cfg.ranking.rounds;
  options.seed = cfg.seed;
  options.threads = cfg.threads;
  return febaa::rank_features(graph, scorer, options);
}

const febaa::FeatureRanking* unwrap(const febaa_ranking* r) {
  return r ? &r->ranking : nullptr;
}

}  // namespace

extern "C" {

const char* febaa_version(void) { return "0.1.0"; }

const char* febaa_status_name(febaa_status status) {
  switch (status) {
    case FEBAA_OK: return "ok";
    case FEBAA_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case FEBAA_ERR_IO: return "io";
    case FEBAA_ERR_PARSE: return "parse";
    case FEBAA_ERR_CONFIG: return "config";
    case FEBAA_ERR_RANKING: return "ranking";
    case FEBAA_ERR_TRAINING: return "training";
    case FEBAA_ERR_EVALUATION: return "evaluation";
    case FEBAA_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* febaa_last_error(void) { return g_last_error.c_str(); }

void febaa_string_free(char* str) { std::free(str); }

febaa_status febaa_config_load(const char* path, febaa_config** out) {
  return guarded([&] {
    require(path && out, "febaa_config_load: null argument");
    *out = new febaa_config{febaa::parse_config(path)};
  });
}

febaa_status febaa_config_parse(const char* text, const char* base_dir, febaa_config** out) {
  return guarded([&] {
    require(text && out, "febaa_config_parse: null argument");
    *out = new febaa_config{febaa::parse_config_text(
        text, base_dir ? std::filesystem::path(base_dir) : std::filesystem::path())};
  });
}

void febaa_config_free(febaa_config* cfg) { delete cfg; }

uint64_t febaa_config_seed(const febaa_config* cfg) { return cfg ? cfg->cfg.seed : 0; }

febaa_status febaa_config_set_seed(febaa_config* cfg, uint64_t seed) {
  return guarded([&] {
    require(cfg, "febaa_config_set_seed: null config");
    cfg->cfg.set_seed(seed);
  });
}

febaa_status febaa_config_set_ranking(febaa_config* cfg, size_t epochs, size_t rounds,
                                      const char* scorer) {
  return guarded([&] {
    require(cfg, "febaa_config_set_ranking: null config");
    if (scorer) {
      const std::string name(scorer);
      require(name == "gcl" || name == "variance-stub", "scorer must be gcl or variance-stub");
      cfg->cfg.ranking.scorer = name;
    }
    if (epochs) cfg->cfg.ranking.epochs = epochs;
    if (rounds) cfg->cfg.ranking.rounds = rounds;
  });
}

febaa_status febaa_config_set_ranking_path(febaa_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg && path, "febaa_config_set_ranking_path: null argument");
    cfg->cfg.ranking.path = std::filesystem::absolute(path).lexically_normal().string();
  });
}

febaa_status febaa_config_to_json(const febaa_config* cfg, int with_seed, char** out) {
  return guarded([&] {
    require(cfg && out, "febaa_config_to_json: null argument");
    *out = duplicate(febaa::serialize_config(cfg->cfg, with_seed != 0));
  });
}

const char* febaa_config_output_dir(const febaa_config* cfg) {
  return cfg ? cfg->cfg.output_dir.c_str() : "";
}

const char* febaa_config_dataset_name(const febaa_config* cfg) {
  return cfg ? cfg->cfg.dataset.name.c_str() : "";
}

febaa_status febaa_graph_load(const char* edges_path, const char* features_path,
                              const char* labels_path, febaa_graph** out) {
  return guarded([&] {
    require(edges_path && features_path && out, "febaa_graph_load: null argument");
    std::optional<std::filesystem::path> labels;
    if (labels_path) labels = labels_path;
    *out = new febaa_graph{febaa::load_graph(edges_path, features_path, labels)};
  });
}

febaa_status febaa_graph_load_config(const febaa_config* cfg, febaa_graph** out) {
  return guarded([&] {
    require(cfg && out, "febaa_graph_load_config: null argument");
    const auto& ds = cfg->cfg.dataset;
    std::optional<std::filesystem::path> labels;
    if (ds.labels) labels = *ds.labels;
    *out = new febaa_graph{febaa::load_graph(ds.edges, ds.features, labels)};
  });
}

void febaa_graph_free(febaa_graph* graph) { delete graph; }

febaa_status febaa_graph_stats_get(const febaa_graph* graph, febaa_graph_stats* out) {
  return guarded([&] {
    require(graph && out, "febaa_graph_stats_get: null argument");
    const febaa::GraphStats s = febaa::stats(graph->graph);
    out->num_nodes = s.num_nodes;
    out->num_features = s.num_features;
    out->num_edges = s.num_edges;
    out->num_self_loops = s.num_self_loops;
    out->num_classes = s.num_classes ? static_cast<int64_t>(*s.num_classes) : -1;
  });
}

febaa_status febaa_graph_report(const febaa_graph* graph, char** out) {
  return guarded([&] {
    require(graph && out, "febaa_graph_report: null argument");
    *out = duplicate(febaa::ingest_report_json(graph->graph));
  });
}

febaa_status febaa_pretraining_budget(uint64_t num_features, uint64_t epochs, uint64_t rounds,
                                      uint64_t* out) {
  return guarded([&] {
    require(out, "febaa_pretraining_budget: null argument");
    *out = febaa::pretraining_budget(num_features, epochs, rounds).total_iterations;
  });
}

febaa_status febaa_rank(const febaa_graph* graph, const febaa_config* cfg, febaa_ranking** out,
                        uint64_t* scorer_calls) {
  return guarded([&] {
    require(graph && cfg && out, "febaa_rank: null argument");
    febaa::RankingRun run = run_ranking(graph->graph, cfg->cfg);
    if (scorer_calls) *scorer_calls = run.scorer_calls;
    *out = new febaa_ranking{std::move(run.ranking)};
  });
}

febaa_status febaa_ranking_for_config(const febaa_graph* graph, const febaa_config* cfg,
                                      febaa_ranking** out) {
  return guarded([&] {
    require(graph && cfg && out, "febaa_ranking_for_config: null argument");
    *out = nullptr;
    const auto& settings = cfg->cfg.ranking;
    if (settings.path) {
      *out = new febaa_ranking{febaa::load_ranking(*settings.path)};
    } else if (settings.compute) {
      *out = new febaa_ranking{run_ranking(graph->graph, cfg->cfg).ranking};
    } else if (cfg->cfg.needs_ranking()) {
      throw febaa::Error(febaa::ErrorCode::kConfig, "ranking required");
    }
  });
}

febaa_status febaa_ranking_load(const char* path, febaa_ranking** out) {
  return guarded([&] {
    require(path && out, "febaa_ranking_load: null argument");
    *out = new febaa_ranking{febaa::load_ranking(path)};
  });
}

febaa_status febaa_ranking_save(const febaa_ranking* ranking, const char* path) {
  return guarded([&] {
    require(ranking && path, "febaa_ranking_save: null argument");
    febaa::save_ranking(ranking->ranking, path);
  });
}

void febaa_ranking_free(febaa_ranking* ranking) { delete ranking; }

size_t febaa_ranking_size(const febaa_ranking* ranking) {
  return ranking ? ranking->ranking.size() : 0;
}

febaa_status febaa_ranking_entry(const febaa_ranking* ranking, size_t rank, uint32_t* feature,
                                 double* mean_score) {
  return guarded([&] {
    require(ranking, "febaa_ranking_entry: null ranking");
    require(rank < ranking->ranking.size(), "febaa_ranking_entry: rank out of range");
    const auto& e = ranking->ranking.entries()[rank];
    if (feature) *feature = e.feature;
    if (mean_score) *mean_score = e.mean_score;
  });
}

febaa_status febaa_augment(const febaa_graph* graph, const febaa_ranking* ranking,
                           const febaa_config* cfg, int view, uint64_t epoch,
                           const char* features_path, const char* edges_path,
                           char** summary_json) {
  return guarded([&] {
    require(graph && cfg && features_path && edges_path, "febaa_augment: null argument");
    require(view == 1 || view == 2, "febaa_augment: view must be 1 or 2");
    const febaa::TrainConfig& train = cfg->cfg.train;
    const febaa::ViewConfig& vc = view == 1 ? train.view1 : train.view2;
    const auto cf = febaa::candidate_features(graph->graph, vc, unwrap(ranking));
    febaa::Rng rng = febaa::view_rng(train.seed, view, epoch);
    const febaa::GraphView gv = febaa::apply_view(graph->graph, cf, vc, rng);
    febaa::write_features_csv(gv.features, features_path);
    febaa::write_edges(gv.edges, edges_path);
    if (summary_json) {
      nlohmann::ordered_json s;
      s["view"] = view;
      s["epoch"] = epoch;
      s["mode"] = std::string(febaa::to_string(vc.mode));
      s["candidate_features"] = cf.indices;
      s["masked_columns"] = gv.masked_columns;
      s["num_edges_in"] = graph->graph.edges().size();
      s["num_edges_out"] = gv.edges.size();
      s["dropped_edges"] = gv.dropped_edges;
      *summary_json = duplicate(s.dump(2) + "\n");
    }
  });
}

febaa_status febaa_train(const febaa_graph* graph, const febaa_ranking* ranking,
                         const febaa_config* cfg, febaa_model** out) {
  return guarded([&] {
    require(graph && cfg && out, "febaa_train: null argument");
    *out = new febaa_model{febaa::train(graph->graph, unwrap(ranking), cfg->cfg.train)};
  });
}

void febaa_model_free(febaa_model* model) { delete model; }

size_t febaa_model_epochs(const febaa_model* model) {
  return model ? model->result.loss_trace.size() : 0;
}

double febaa_model_final_loss(const febaa_model* model) {
  if (!model || model->result.loss_trace.empty()) return 0.0;
  return model->result.loss_trace.back();
}

febaa_status febaa_model_write_loss_trace(const febaa_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "febaa_model_write_loss_trace: null argument");
    std::string text = "epoch,loss\n";
    const auto& trace = model->result.loss_trace;
    for (std::size_t e = 0; e < trace.size(); ++e)
      text += std::to_string(e) + ',' + febaa::format_double(trace[e]) + '\n';
    write_text(path, text);
  });
}

febaa_status febaa_model_write_embedding(const febaa_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "febaa_model_write_embedding: null argument");
    febaa::write_features_csv(model->result.embedding, path);
  });
}

febaa_status febaa_evaluate_files(const char* embedding_path, const char* labels_path,
                                  const febaa_config* cfg, uint64_t seed, febaa_eval** out) {
  return guarded([&] {
    require(embedding_path && labels_path && out, "febaa_evaluate_files: null argument");
    const febaa::Matrix embedding = febaa::read_matrix_csv(embedding_path);
    const auto labels = febaa::read_labels(labels_path);
    if (labels.size() != embedding.rows())
      throw febaa::Error(febaa::ErrorCode::kEvaluation,
                         "embedding has " + std::to_string(embedding.rows()) + " rows but " +
                             std::to_string(labels.size()) + " labels were read");
    const febaa::EvalSettings settings = cfg ? cfg->cfg.eval : febaa::EvalSettings{};
    settings.validate();
    const auto splits = febaa::generate_splits(labels.size(), settings.train_fraction,
                                               settings.splits, seed);
    *out = new febaa_eval{
        febaa::linear_evaluate(embedding, labels, splits, settings.l2, settings.iterations)};
  });
}

void febaa_eval_free(febaa_eval* eval) { delete eval; }

double febaa_eval_mean(const febaa_eval* eval) { return eval ? eval->result.mean_f1 : 0.0; }

double febaa_eval_std(const febaa_eval* eval) { return eval ? eval->result.std_f1 : 0.0; }

febaa_status febaa_eval_summary(const febaa_eval* eval, char** out) {
  return guarded([&] {
    require(eval && out, "febaa_eval_summary: null argument");
    *out = duplicate(eval->result.summary());
  });
}

febaa_status febaa_eval_write_scores(const febaa_eval* eval, const char* path) {
  return guarded([&] {
    require(eval && path, "febaa_eval_write_scores: null argument");
    std::string text = "split,score\n";
    const auto& scores = eval->result.per_split_scores;
    for (std::size_t s = 0; s < scores.size(); ++s)
      text += std::to_string(s) + ',' + febaa::format_double(scores[s]) + '\n';
    write_text(path, text);
  });
}

febaa_status febaa_sweep(const febaa_graph* graph, const febaa_ranking* ranking,
                         const febaa_config* cfg, const char* out_dir) {
  return guarded([&] {
    require(graph && cfg && out_dir, "febaa_sweep: null argument");
    if (!ranking)
      throw febaa::Error(febaa::ErrorCode::kConfig, "sweep requires a feature ranking");
    const auto& rc = cfg->cfg;
    const febaa::SweepTable table =
        febaa::run_sweep(graph->graph, ranking->ranking, pipeline_settings(rc), rc.sweep,
                         rc.seed, rc.dataset.name, rc.threads);
    const std::filesystem::path dir(out_dir);
    write_text(dir / "sweep_table.csv", febaa::format_sweep_csv(table));
    std::string runs = "ratio,probability,pos,run,score\n";
    for (const auto& row : table.rows)
      for (std::size_t r = 0; r < row.run_scores.size(); ++r)
        runs += febaa::format_double(row.cell.ratio) + ',' +
                febaa::format_double(row.cell.probability) + ',' +
                std::string(febaa::to_string(row.cell.pos)) + ',' + std::to_string(r) + ',' +
                febaa::format_double(row.run_scores[r]) + '\n';
    write_text(dir / "sweep_runs.csv", runs);
    for (febaa::StartPosition pos : rc.sweep.positions) {
      write_text(dir / ("sweep_plot_" + std::string(febaa::to_string(pos)) + ".csv"),
                 febaa::format_plot_csv(table, pos));
    }
    const febaa::SweepTable tables[] = {table};
    write_text(dir / "pos_wins.csv", febaa::format_win_table(febaa::pos_win_analysis(tables)));
  });
}

febaa_status febaa_ablate(const febaa_graph* graph, const febaa_ranking* ranking,
                          const febaa_config* cfg, const char* out_dir) {
  return guarded([&] {
    require(graph && cfg && out_dir, "febaa_ablate: null argument");
    const auto& rc = cfg->cfg;
    const febaa::AblationResult result =
        febaa::ablation_ofd(graph->graph, unwrap(ranking), pipeline_settings(rc),
                            rc.ablation_runs, rc.seed, rc.threads);
    const std::filesystem::path dir(out_dir);
    write_text(dir / "ablation.csv", febaa::format_ablation_table(rc.dataset.name, result));
    std::string runs = "arm,run,score\n";
    auto append = [&runs](const char* arm, const febaa::EvalResult& r) {
      for (std::size_t i = 0; i < r.per_split_scores.size(); ++i)
        runs += std::string(arm) + ',' + std::to_string(i) + ',' +
                febaa::format_double(r.per_split_scores[i]) + '\n';
    };
    append("FebAA", result.with_edges);
    append("FebAA(OFD)", result.only_features);
    write_text(dir / "ablation_runs.csv", runs);
  });
}

}  // extern "C"

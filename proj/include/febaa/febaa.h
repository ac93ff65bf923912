/*
 * febaa.h - C interface to the feature-based adaptive augmentation toolkit.
 *
 * Objects are opaque handles created by a *_load / *_parse / *_run call and
 * released with the matching *_free. Every fallible call returns a
 * febaa_status; on failure febaa_last_error() holds a one-line description
 * for the calling thread until its next failing call. Strings returned
 * through `char **` out-parameters are heap-allocated and must be released
 * with febaa_string_free().
 */
#ifndef FEBAA_H
#define FEBAA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FEBAA_BUILDING_LIBRARY)
#    define FEBAA_API __declspec(dllexport)
#  else
#    define FEBAA_API __declspec(dllimport)
#  endif
#else
#  define FEBAA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum febaa_status {
  FEBAA_OK = 0,
  FEBAA_ERR_INVALID_ARGUMENT = 1,
  FEBAA_ERR_IO = 2,
  FEBAA_ERR_PARSE = 3,
  FEBAA_ERR_CONFIG = 4,
  FEBAA_ERR_RANKING = 5,
  FEBAA_ERR_TRAINING = 6,
  FEBAA_ERR_EVALUATION = 7,
  FEBAA_ERR_INTERNAL = 99
} febaa_status;

typedef struct febaa_config febaa_config;
typedef struct febaa_graph febaa_graph;
typedef struct febaa_ranking febaa_ranking;
typedef struct febaa_model febaa_model;
typedef struct febaa_eval febaa_eval;

FEBAA_API const char *febaa_version(void);
/* Stable lower-case identifier, e.g. "config" for FEBAA_ERR_CONFIG. */
FEBAA_API const char *febaa_status_name(febaa_status status);
FEBAA_API const char *febaa_last_error(void);
FEBAA_API void febaa_string_free(char *str);

/* ---- run configuration ------------------------------------------------ */

/* Reads a JSON run config (or a run manifest) from disk. */
FEBAA_API febaa_status febaa_config_load(const char *path, febaa_config **out);
/* Parses JSON text; relative paths resolve against base_dir (may be NULL). */
FEBAA_API febaa_status febaa_config_parse(const char *text, const char *base_dir,
                                          febaa_config **out);
FEBAA_API void febaa_config_free(febaa_config *cfg);
FEBAA_API uint64_t febaa_config_seed(const febaa_config *cfg);
FEBAA_API febaa_status febaa_config_set_seed(febaa_config *cfg, uint64_t seed);
/* Overrides ranking settings; pass 0 / NULL to keep the current value. */
FEBAA_API febaa_status febaa_config_set_ranking(febaa_config *cfg, size_t epochs,
                                                size_t rounds, const char *scorer);
FEBAA_API febaa_status febaa_config_set_ranking_path(febaa_config *cfg, const char *path);
/* Canonical JSON; with_seed = 0 leaves out the global seed. */
FEBAA_API febaa_status febaa_config_to_json(const febaa_config *cfg, int with_seed,
                                            char **out);
FEBAA_API const char *febaa_config_output_dir(const febaa_config *cfg);
FEBAA_API const char *febaa_config_dataset_name(const febaa_config *cfg);

/* ---- graphs ----------------------------------------------------------- */

typedef struct febaa_graph_stats {
  uint64_t num_nodes;
  uint64_t num_features;
  uint64_t num_edges;      /* unordered pairs */
  uint64_t num_self_loops;
  int64_t num_classes;     /* -1 when the graph carries no labels */
} febaa_graph_stats;

/* labels_path may be NULL. */
FEBAA_API febaa_status febaa_graph_load(const char *edges_path, const char *features_path,
                                        const char *labels_path, febaa_graph **out);
FEBAA_API febaa_status febaa_graph_load_config(const febaa_config *cfg, febaa_graph **out);
FEBAA_API void febaa_graph_free(febaa_graph *graph);
FEBAA_API febaa_status febaa_graph_stats_get(const febaa_graph *graph,
                                             febaa_graph_stats *out);
/* JSON validation report: counts and class histogram. */
FEBAA_API febaa_status febaa_graph_report(const febaa_graph *graph, char **out);

/* ---- feature ranking -------------------------------------------------- */

FEBAA_API febaa_status febaa_pretraining_budget(uint64_t num_features, uint64_t epochs,
                                                uint64_t rounds, uint64_t *out);
/* Ranks every feature by masked-column score using the config's ranking
 * settings. scorer_calls (may be NULL) receives the number of scorer
 * invocations. */
FEBAA_API febaa_status febaa_rank(const febaa_graph *graph, const febaa_config *cfg,
                                  febaa_ranking **out, uint64_t *scorer_calls);
/* The ranking a config calls for: loaded from ranking.path, computed when
 * ranking.compute is set, or NULL when no view needs one. */
FEBAA_API febaa_status febaa_ranking_for_config(const febaa_graph *graph,
                                                const febaa_config *cfg,
                                                febaa_ranking **out);
FEBAA_API febaa_status febaa_ranking_load(const char *path, febaa_ranking **out);
FEBAA_API febaa_status febaa_ranking_save(const febaa_ranking *ranking, const char *path);
FEBAA_API void febaa_ranking_free(febaa_ranking *ranking);
FEBAA_API size_t febaa_ranking_size(const febaa_ranking *ranking);
FEBAA_API febaa_status febaa_ranking_entry(const febaa_ranking *ranking, size_t rank,
                                           uint32_t *feature, double *mean_score);

/* ---- augmentation ----------------------------------------------------- */

/* Generates view `view` (1 or 2) exactly as training would at `epoch` and
 * writes its feature CSV and edge list. summary_json (may be NULL)
 * receives the masked columns, candidate set and edge counts. ranking may
 * be NULL unless the view is influential. */
FEBAA_API febaa_status febaa_augment(const febaa_graph *graph, const febaa_ranking *ranking,
                                     const febaa_config *cfg, int view, uint64_t epoch,
                                     const char *features_path, const char *edges_path,
                                     char **summary_json);

/* ---- training --------------------------------------------------------- */

FEBAA_API febaa_status febaa_train(const febaa_graph *graph, const febaa_ranking *ranking,
                                   const febaa_config *cfg, febaa_model **out);
FEBAA_API void febaa_model_free(febaa_model *model);
FEBAA_API size_t febaa_model_epochs(const febaa_model *model);
FEBAA_API double febaa_model_final_loss(const febaa_model *model);
/* `epoch,loss` CSV */
FEBAA_API febaa_status febaa_model_write_loss_trace(const febaa_model *model, const char *path);
/* N x F' embedding CSV */
FEBAA_API febaa_status febaa_model_write_embedding(const febaa_model *model, const char *path);

/* ---- linear evaluation ------------------------------------------------ */

/* cfg may be NULL for default evaluation settings; seed drives the splits. */
FEBAA_API febaa_status febaa_evaluate_files(const char *embedding_path, const char *labels_path,
                                            const febaa_config *cfg, uint64_t seed,
                                            febaa_eval **out);
FEBAA_API void febaa_eval_free(febaa_eval *eval);
FEBAA_API double febaa_eval_mean(const febaa_eval *eval);
FEBAA_API double febaa_eval_std(const febaa_eval *eval);
/* "mean±std" */
FEBAA_API febaa_status febaa_eval_summary(const febaa_eval *eval, char **out);
/* `split,score` CSV */
FEBAA_API febaa_status febaa_eval_write_scores(const febaa_eval *eval, const char *path);

/* ---- analysis harness ------------------------------------------------- */

/* Runs the config's sweep grid and writes sweep_table.csv, sweep_plot_L.csv,
 * sweep_plot_M.csv and pos_wins.csv into out_dir. */
FEBAA_API febaa_status febaa_sweep(const febaa_graph *graph, const febaa_ranking *ranking,
                                   const febaa_config *cfg, const char *out_dir);
/* Runs the edge-drop ablation and writes ablation.csv into out_dir. */
FEBAA_API febaa_status febaa_ablate(const febaa_graph *graph, const febaa_ranking *ranking,
                                    const febaa_config *cfg, const char *out_dir);

#ifdef __cplusplus
}
#endif

#endif /* FEBAA_H */

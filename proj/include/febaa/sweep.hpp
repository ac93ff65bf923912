#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "febaa/augmentation.hpp"
#include "febaa/evaluation.hpp"
#include "febaa/gcl.hpp"
#include "febaa/graph.hpp"

namespace febaa {

class FeatureRanking;

/// Train + linear evaluation, the unit every sweep cell and ablation arm runs.
struct PipelineSettings {
  TrainConfig train;
  EvalSettings eval;
};

/// Trains with `seed` and returns the mean micro-F1 (percent) over the
/// configured evaluation splits, which are drawn from the same seed.
double run_pipeline(const AttributedGraph& graph, const FeatureRanking* ranking,
                    const PipelineSettings& settings, std::uint64_t seed);

struct SweepGrid {
  std::vector<double> ratios{0.2, 0.5};
  std::vector<double> probabilities{0.5, 1.0};
  std::vector<StartPosition> positions{StartPosition::kLeast, StartPosition::kMost};
  std::size_t runs_per_cell = 3;
  int view = 2;  // which view receives the cell's influential settings

  void validate() const;
  bool operator==(const SweepGrid&) const = default;
};

struct SweepCell {
  double ratio = 0.0;
  double probability = 0.0;
  StartPosition pos = StartPosition::kLeast;
};

struct SweepRow {
  SweepCell cell;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
  std::vector<double> run_scores;
  std::optional<std::string> error;
};

struct SweepTable {
  std::string dataset;
  std::vector<SweepRow> rows;
};

/// Cells in grid order: ratio outermost, then probability, then pos.
std::vector<SweepCell> sweep_cells(const SweepGrid& grid);

/// Base settings with the target view switched to influential selection at
/// the cell's ratio, probability and starting position.
PipelineSettings apply_cell(const PipelineSettings& base, const SweepCell& cell, int view);

std::uint64_t cell_run_seed(std::uint64_t sweep_seed, std::size_t cell_index,
                            std::size_t run_index);

SweepTable run_sweep(const AttributedGraph& graph, const FeatureRanking& ranking,
                     const PipelineSettings& base, const SweepGrid& grid,
                     std::uint64_t seed, std::string dataset, std::size_t threads = 0);

struct PosWins {
  std::string dataset;
  std::size_t least = 0;
  std::size_t most = 0;

  bool operator==(const PosWins&) const = default;
};

struct WinSummary {
  std::vector<PosWins> per_dataset;
  PosWins total{"Total", 0, 0};
  std::vector<std::string> warnings;
};

/// Compares L and M rows sharing (ratio, probability); the higher mean wins
/// and an exact tie goes to L. Unmatched or failed cells are skipped with a
/// warning.
WinSummary pos_win_analysis(std::span<const SweepTable> tables);

/// `ratio,probability,pos,mean_f1,std_f1,runs`
std::string format_sweep_csv(const SweepTable& table);
/// One bar group per (probability, ratio) for a single pos, labelled like
/// "100x20" (probability percent x ratio percent).
std::string format_plot_csv(const SweepTable& table, StartPosition pos);
/// Per-dataset and total L/M win counts with percentages.
std::string format_win_table(const WinSummary& summary);

struct AblationResult {
  EvalResult with_edges;      // configured edge drop
  EvalResult only_features;   // edge drop forced to 0 on both views
};

/// Runs the same pipeline with identical seeds twice; the second arm drops
/// no edges.
AblationResult ablation_ofd(const AttributedGraph& graph, const FeatureRanking* ranking,
                            const PipelineSettings& settings, std::size_t runs,
                            std::uint64_t seed, std::size_t threads = 0);

/// `dataset,FebAA,FebAA(OFD)` with mean±std cells.
std::string format_ablation_table(const std::string& dataset, const AblationResult& result);

}  // namespace febaa

#include "febaa/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "febaa/error.hpp"
#include "febaa/parallel.hpp"
#include "febaa/ranking.hpp"
#include "febaa/rng.hpp"

namespace febaa {

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string percent_label(double fraction) {
  return std::to_string(static_cast<long>(std::lround(fraction * 100.0)));
}

std::string win_cell(std::size_t wins, std::size_t pairs) {
  const double pct = pairs ? 100.0 * static_cast<double>(wins) / static_cast<double>(pairs) : 0.0;
  return std::to_string(wins) + " (" + fixed2(pct) + "%)";
}

ViewConfig& target_view(TrainConfig& cfg, int view) {
  if (view == 1) return cfg.view1;
  if (view == 2) return cfg.view2;
  throw Error(ErrorCode::kInvalidArgument, "sweep view must be 1 or 2");
}

}  // namespace

double run_pipeline(const AttributedGraph& graph, const FeatureRanking* ranking,
                    const PipelineSettings& settings, std::uint64_t seed) {
  const auto& labels = graph.labels();
  if (!labels) throw Error(ErrorCode::kEvaluation, "pipeline requires node labels");
  TrainConfig cfg = settings.train;
  cfg.seed = seed;
  const TrainResult trained = train(graph, ranking, cfg);
  const SplitSet splits = generate_splits(graph.num_nodes(), settings.eval.train_fraction,
                                          settings.eval.splits, derive_seed(seed, 0x73706c));
  return linear_evaluate(trained.embedding, *labels, splits, settings.eval.l2,
                         settings.eval.iterations)
      .mean_f1;
}

void SweepGrid::validate() const {
  if (ratios.empty() || probabilities.empty() || positions.empty())
    throw Error(ErrorCode::kInvalidArgument, "sweep grid must be non-empty");
  for (double r : ratios)
    if (!(r >= 0.0 && r <= 1.0))
      throw Error(ErrorCode::kInvalidArgument, "sweep ratio outside [0, 1]");
  for (double p : probabilities)
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(ErrorCode::kInvalidArgument, "sweep probability outside [0, 1]");
  if (runs_per_cell < 1) throw Error(ErrorCode::kInvalidArgument, "runs_per_cell must be >= 1");
  if (view != 1 && view != 2) throw Error(ErrorCode::kInvalidArgument, "sweep view must be 1 or 2");
}

std::vector<SweepCell> sweep_cells(const SweepGrid& grid) {
  std::vector<SweepCell> cells;
  for (double r : grid.ratios)
    for (double p : grid.probabilities)
      for (StartPosition pos : grid.positions) cells.push_back(SweepCell{r, p, pos});
  return cells;
}

PipelineSettings apply_cell(const PipelineSettings& base, const SweepCell& cell, int view) {
  PipelineSettings s = base;
  ViewConfig& v = target_view(s.train, view);
  v.mode = SelectionMode::kInfluential;
  v.masking_ratio = cell.ratio;
  v.masking_probability = cell.probability;
  v.pos = cell.pos;
  return s;
}

std::uint64_t cell_run_seed(std::uint64_t sweep_seed, std::size_t cell_index,
                            std::size_t run_index) {
  return derive_seed(sweep_seed, cell_index, run_index);
}

SweepTable run_sweep(const AttributedGraph& graph, const FeatureRanking& ranking,
                     const PipelineSettings& base, const SweepGrid& grid,
                     std::uint64_t seed, std::string dataset, std::size_t threads) {
  grid.validate();
  const auto cells = sweep_cells(grid);
  const std::size_t runs = grid.runs_per_cell;
  std::vector<double> scores(cells.size() * runs, 0.0);
  std::vector<std::optional<std::string>> failures(cells.size() * runs);

  parallel_for(scores.size(), threads, [&](std::size_t t) {
    const std::size_t c = t / runs;
    const std::size_t r = t % runs;
    try {
      scores[t] = run_pipeline(graph, &ranking, apply_cell(base, cells[c], grid.view),
                               cell_run_seed(seed, c, r));
    } catch (const std::exception& e) {
      failures[t] = e.what();
    }
  });

  SweepTable table{std::move(dataset), {}};
  for (std::size_t c = 0; c < cells.size(); ++c) {
    SweepRow row;
    row.cell = cells[c];
    for (std::size_t r = 0; r < runs; ++r) {
      const std::size_t t = c * runs + r;
      if (failures[t] && !row.error) row.error = "run " + std::to_string(r) + ": " + *failures[t];
      if (!failures[t]) row.run_scores.push_back(scores[t]);
    }
    if (!row.error) {
      const EvalResult stats = summarize_scores(row.run_scores);
      row.mean_f1 = stats.mean_f1;
      row.std_f1 = stats.std_f1;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

WinSummary pos_win_analysis(std::span<const SweepTable> tables) {
  WinSummary summary;
  for (const SweepTable& table : tables) {
    std::map<std::pair<double, double>, std::pair<const SweepRow*, const SweepRow*>> pairs;
    for (const SweepRow& row : table.rows) {
      auto& slot = pairs[{row.cell.ratio, row.cell.probability}];
      (row.cell.pos == StartPosition::kLeast ? slot.first : slot.second) = &row;
    }
    PosWins wins{table.dataset, 0, 0};
    for (const auto& [key, slot] : pairs) {
      const auto [least, most] = slot;
      const std::string where = table.dataset + " ratio=" + format_double(key.first) +
                                " probability=" + format_double(key.second);
      if (!least || !most) {
        summary.warnings.push_back("unmatched cell skipped: " + where);
        continue;
      }
      if (least->error || most->error) {
        summary.warnings.push_back("failed cell skipped: " + where);
        continue;
      }
      if (most->mean_f1 > least->mean_f1)
        ++wins.most;
      else
        ++wins.least;
    }
    summary.total.least += wins.least;
    summary.total.most += wins.most;
    summary.per_dataset.push_back(std::move(wins));
  }
  return summary;
}

std::string format_sweep_csv(const SweepTable& table) {
  std::string out = "ratio,probability,pos,mean_f1,std_f1,runs\n";
  for (const SweepRow& row : table.rows) {
    out += format_double(row.cell.ratio) + ',' + format_double(row.cell.probability) + ',' +
           std::string(to_string(row.cell.pos)) + ',';
    if (row.error)
      out += "nan,nan,";
    else
      out += fixed2(row.mean_f1) + ',' + fixed2(row.std_f1) + ',';
    out += std::to_string(row.run_scores.size()) + '\n';
  }
  return out;
}

std::string format_plot_csv(const SweepTable& table, StartPosition pos) {
  std::string out = "pattern,probability,ratio,mean_f1,std_f1\n";
  for (const SweepRow& row : table.rows) {
    if (row.cell.pos != pos || row.error) continue;
    out += percent_label(row.cell.probability) + 'x' + percent_label(row.cell.ratio) + ',' +
           format_double(row.cell.probability) + ',' + format_double(row.cell.ratio) + ',' +
           fixed2(row.mean_f1) + ',' + fixed2(row.std_f1) + '\n';
  }
  return out;
}

std::string format_win_table(const WinSummary& summary) {
  std::string out = "dataset,pos=L,pos=M\n";
  auto line = [&out](const PosWins& w) {
    const std::size_t pairs = w.least + w.most;
    out += w.dataset + ',' + win_cell(w.least, pairs) + ',' + win_cell(w.most, pairs) + '\n';
  };
  for (const PosWins& w : summary.per_dataset) line(w);
  line(summary.total);
  return out;
}

AblationResult ablation_ofd(const AttributedGraph& graph, const FeatureRanking* ranking,
                            const PipelineSettings& settings, std::size_t runs,
                            std::uint64_t seed, std::size_t threads) {
  if (runs < 1) throw Error(ErrorCode::kInvalidArgument, "ablation runs must be >= 1");
  PipelineSettings ofd = settings;
  ofd.train.view1.edge_drop_probability = 0.0;
  ofd.train.view2.edge_drop_probability = 0.0;

  std::vector<double> scores(2 * runs, 0.0);
  std::vector<std::optional<std::string>> failures(2 * runs);
  parallel_for(scores.size(), threads, [&](std::size_t t) {
    const std::size_t run = t % runs;
    const PipelineSettings& arm = t < runs ? settings : ofd;
    try {
      scores[t] = run_pipeline(graph, ranking, arm, derive_seed(seed, run));
    } catch (const std::exception& e) {
      failures[t] = e.what();
    }
  });
  for (std::size_t t = 0; t < failures.size(); ++t)
    if (failures[t])
      throw Error(ErrorCode::kTraining, std::string(t < runs ? "FebAA" : "OFD") + " arm, run " +
                                            std::to_string(t % runs) + ": " + *failures[t]);

  AblationResult result;
  result.with_edges = summarize_scores({scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(runs)});
  result.only_features = summarize_scores({scores.begin() + static_cast<std::ptrdiff_t>(runs), scores.end()});
  return result;
}

std::string format_ablation_table(const std::string& dataset, const AblationResult& result) {
  return "dataset,FebAA,FebAA(OFD)\n" + dataset + ',' + result.with_edges.summary() + ',' +
         result.only_features.summary() + '\n';
}

}  // namespace febaa

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "febaa/augmentation.hpp"
#include "febaa/error.hpp"
#include "febaa/evaluation.hpp"
#include "febaa/gcl.hpp"
#include "febaa/sweep.hpp"

namespace febaa {

/// Raised by parse_config with every violated constraint, one per entry.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct DatasetPaths {
  std::string name = "dataset";
  std::string edges;
  std::string features;
  std::optional<std::string> labels;

  bool operator==(const DatasetPaths&) const = default;
};

/// Per-view settings as written in the file. `feature_drop` is the per-view
/// "feature drop" column of the published hyper-parameter tables; for
/// all_features views it is the masking probability.
struct ViewSettings {
  ViewConfig view;
  std::optional<double> feature_drop;
  std::optional<std::uint64_t> seed;  // explicit selection seed, else derived

  bool operator==(const ViewSettings&) const = default;
};

struct RankingSettings {
  std::optional<std::string> path;
  bool compute = false;
  std::size_t epochs = 150;
  std::size_t rounds = 3;
  std::string scorer = "gcl";

  bool operator==(const RankingSettings&) const = default;
};

struct RunConfig {
  DatasetPaths dataset;
  std::uint64_t seed = 0;
  std::string output_dir = "runs";
  ViewSettings view1;
  ViewSettings view2;
  TrainConfig train;  // views and seed mirror the fields above after resolve()
  RankingSettings ranking;
  EvalSettings eval;
  SweepGrid sweep;
  std::size_t ablation_runs = 5;
  std::size_t threads = 0;

  /// Re-derives the seeded fields (train seed, implicit view seeds).
  void resolve();
  void set_seed(std::uint64_t seed);
  bool needs_ranking() const;

  bool operator==(const RunConfig&) const = default;
};

/// Parses JSON text. Relative paths are resolved against `base_dir`.
/// A run manifest is accepted too; its embedded config is used.
RunConfig parse_config_text(std::string_view text,
                            const std::filesystem::path& base_dir = {});
RunConfig parse_config(const std::filesystem::path& path);

/// Canonical JSON (sorted keys). `with_seed = false` omits the global seed,
/// which is what the run-directory hash is computed over.
std::string serialize_config(const RunConfig& cfg, bool with_seed = true);

}  // namespace febaa

#include "febaa/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "febaa/rng.hpp"

namespace febaa {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += "; ";
    out += parts[i];
  }
  return out;
}

// Typed, path-aware access to one JSON object. Every key read is recorded so
// finish() can reject the rest as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path, std::vector<std::string>& errors)
      : node_(node), path_(std::move(path)), errors_(errors) {
    if (!node_.is_object()) {
      errors_.push_back(label() + " must be an object");
      valid_ = false;
    }
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* get(std::string_view key) {
    if (!valid_) return nullptr;
    used_.emplace(key);
    const auto it = node_.find(std::string(key));
    return it == node_.end() ? nullptr : &*it;
  }

  std::optional<double> number(std::string_view key) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      errors_.push_back(field(key) + " must be a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<std::uint64_t> count(std::string_view key) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
      errors_.push_back(field(key) + " must be a non-negative integer");
      return std::nullopt;
    }
    return v->get<std::uint64_t>();
  }

  std::optional<std::string> text(std::string_view key) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      errors_.push_back(field(key) + " must be a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<bool> flag(std::string_view key) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      errors_.push_back(field(key) + " must be true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  void finish() {
    if (!valid_) return;
    for (const auto& [key, value] : node_.items())
      if (!used_.count(key)) errors_.push_back("unknown key '" + field(key) + "'");
  }

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }

  const json& node_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string, std::less<>> used_;
  bool valid_ = true;
};

void check_fraction(double v, const std::string& field, std::vector<std::string>& errors) {
  if (!(v >= 0.0 && v <= 1.0))
    errors.push_back(field + " must be in [0, 1] (got " + format_double(v) + ")");
}

std::string resolve_path(const std::string& raw, const std::filesystem::path& base) {
  std::filesystem::path p(raw);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal().string();
}

ViewSettings read_view(const json* node, const std::string& path,
                       std::vector<std::string>& errors) {
  ViewSettings s;
  if (!node) {
    errors.push_back(path + " is required");
    return s;
  }
  ObjectReader r(*node, path, errors);
  if (auto mode = r.text("mode")) {
    if (auto parsed = parse_selection_mode(*mode))
      s.view.mode = *parsed;
    else
      errors.push_back(r.field("mode") + " must be random, influential or all_features (got '" +
                       *mode + "')");
  }
  const bool candidate_mode = s.view.mode != SelectionMode::kAllFeatures;

  const auto ratio = r.number("ratio");
  if (ratio) {
    check_fraction(*ratio, r.field("ratio"), errors);
    s.view.masking_ratio = *ratio;
  } else if (candidate_mode) {
    errors.push_back(r.field("ratio") + " is required when mode is " +
                     std::string(to_string(s.view.mode)));
  }
  if (!candidate_mode) s.view.masking_ratio = 1.0;

  s.feature_drop = r.number("feature_drop");
  if (s.feature_drop) check_fraction(*s.feature_drop, r.field("feature_drop"), errors);
  const auto probability = r.number("probability");
  if (probability) {
    check_fraction(*probability, r.field("probability"), errors);
    s.view.masking_probability = *probability;
    if (!candidate_mode && s.feature_drop && *s.feature_drop != *probability)
      errors.push_back(r.field("feature_drop") + " conflicts with " + r.field("probability") +
                       " for an all_features view");
  } else if (!candidate_mode && s.feature_drop) {
    s.view.masking_probability = *s.feature_drop;
  } else if (candidate_mode) {
    errors.push_back(r.field("probability") + " is required when mode is " +
                     std::string(to_string(s.view.mode)));
  }

  if (auto pos = r.text("pos")) {
    if (auto parsed = parse_start_position(*pos))
      s.view.pos = *parsed;
    else
      errors.push_back(r.field("pos") + " must be L or M (got '" + *pos + "')");
  } else if (s.view.mode == SelectionMode::kInfluential) {
    errors.push_back(r.field("pos") + " is required when mode is influential");
  }

  if (auto edge = r.number("edge_drop")) {
    check_fraction(*edge, r.field("edge_drop"), errors);
    s.view.edge_drop_probability = *edge;
  }
  s.seed = r.count("seed");
  r.finish();
  return s;
}

json write_view(const ViewSettings& s) {
  json v;
  v["mode"] = std::string(to_string(s.view.mode));
  v["ratio"] = s.view.masking_ratio;
  v["probability"] = s.view.masking_probability;
  if (s.view.pos) v["pos"] = std::string(to_string(*s.view.pos));
  v["edge_drop"] = s.view.edge_drop_probability;
  if (s.feature_drop) v["feature_drop"] = *s.feature_drop;
  if (s.seed) v["seed"] = *s.seed;
  return v;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error(ErrorCode::kConfig, "invalid config: " + join(problems)),
      problems_(std::move(problems)) {}

void RunConfig::resolve() {
  view1.view.rng_seed = view1.seed ? *view1.seed : derive_seed(seed, 0x7631);
  view2.view.rng_seed = view2.seed ? *view2.seed : derive_seed(seed, 0x7632);
  train.view1 = view1.view;
  train.view2 = view2.view;
  train.seed = seed;
}

void RunConfig::set_seed(std::uint64_t value) {
  seed = value;
  resolve();
}

bool RunConfig::needs_ranking() const {
  return view1.view.mode == SelectionMode::kInfluential ||
         view2.view.mode == SelectionMode::kInfluential;
}

RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("malformed JSON: ") + e.what()});
  }
  if (root.is_object() && root.contains("febaa_manifest")) {
    if (!root.contains("config"))
      throw ConfigError({"manifest has no embedded config"});
    json inner = root["config"];
    root = std::move(inner);
  }

  std::vector<std::string> errors;
  RunConfig cfg;
  ObjectReader top(root, "", errors);

  if (const json* ds = top.get("dataset")) {
    ObjectReader r(*ds, "dataset", errors);
    if (auto v = r.text("name")) cfg.dataset.name = *v;
    if (auto v = r.text("edges")) cfg.dataset.edges = resolve_path(*v, base_dir);
    if (auto v = r.text("features")) cfg.dataset.features = resolve_path(*v, base_dir);
    if (auto v = r.text("labels")) cfg.dataset.labels = resolve_path(*v, base_dir);
    r.finish();
  }
  if (cfg.dataset.edges.empty()) errors.push_back("dataset.edges is required");
  if (cfg.dataset.features.empty()) errors.push_back("dataset.features is required");

  if (auto v = top.count("seed")) cfg.seed = *v;
  if (auto v = top.text("output_dir")) cfg.output_dir = resolve_path(*v, base_dir);
  if (auto v = top.count("threads")) cfg.threads = *v;

  if (const json* views = top.get("views")) {
    ObjectReader r(*views, "views", errors);
    cfg.view1 = read_view(r.get("view1"), "views.view1", errors);
    cfg.view2 = read_view(r.get("view2"), "views.view2", errors);
    r.finish();
  } else {
    errors.push_back("views is required");
  }

  if (const json* t = top.get("train")) {
    ObjectReader r(*t, "train", errors);
    if (auto v = r.count("epochs")) cfg.train.epochs = *v;
    if (auto v = r.number("learning_rate")) cfg.train.learning_rate = *v;
    if (auto v = r.number("weight_decay")) cfg.train.weight_decay = *v;
    if (auto v = r.count("hidden_size")) cfg.train.hidden_size = *v;
    if (auto v = r.count("output_size")) cfg.train.output_size = *v;
    if (auto v = r.number("temperature")) cfg.train.temperature = *v;
    r.finish();
  }
  if (cfg.train.epochs < 1) errors.push_back("train.epochs must be >= 1");
  if (!(cfg.train.learning_rate > 0.0)) errors.push_back("train.learning_rate must be > 0");
  if (!(cfg.train.weight_decay >= 0.0)) errors.push_back("train.weight_decay must be >= 0");
  if (cfg.train.hidden_size < 1) errors.push_back("train.hidden_size must be >= 1");
  if (cfg.train.output_size < 1) errors.push_back("train.output_size must be >= 1");
  if (!(cfg.train.temperature > 0.0)) errors.push_back("train.temperature must be > 0");

  if (const json* rk = top.get("ranking")) {
    ObjectReader r(*rk, "ranking", errors);
    if (auto v = r.text("path")) cfg.ranking.path = resolve_path(*v, base_dir);
    if (auto v = r.flag("compute")) cfg.ranking.compute = *v;
    if (auto v = r.count("epochs")) cfg.ranking.epochs = *v;
    if (auto v = r.count("rounds")) cfg.ranking.rounds = *v;
    if (auto v = r.text("scorer")) cfg.ranking.scorer = *v;
    r.finish();
  }
  if (cfg.ranking.epochs < 1) errors.push_back("ranking.epochs must be >= 1");
  if (cfg.ranking.rounds < 1) errors.push_back("ranking.rounds must be >= 1");
  if (cfg.ranking.scorer != "gcl" && cfg.ranking.scorer != "variance-stub")
    errors.push_back("ranking.scorer must be gcl or variance-stub (got '" + cfg.ranking.scorer +
                     "')");

  if (const json* ev = top.get("eval")) {
    ObjectReader r(*ev, "eval", errors);
    if (auto v = r.count("splits")) cfg.eval.splits = *v;
    if (auto v = r.number("train_fraction")) cfg.eval.train_fraction = *v;
    if (auto v = r.number("l2")) cfg.eval.l2 = *v;
    if (auto v = r.count("iterations")) cfg.eval.iterations = *v;
    r.finish();
  }
  if (cfg.eval.splits < 1) errors.push_back("eval.splits must be >= 1");
  if (!(cfg.eval.train_fraction > 0.0 && cfg.eval.train_fraction < 1.0))
    errors.push_back("eval.train_fraction must be in (0, 1)");
  if (!(cfg.eval.l2 >= 0.0)) errors.push_back("eval.l2 must be >= 0");
  if (cfg.eval.iterations < 1) errors.push_back("eval.iterations must be >= 1");

  if (const json* sw = top.get("sweep")) {
    ObjectReader r(*sw, "sweep", errors);
    auto read_fractions = [&](std::string_view key, std::vector<double>& out) {
      const json* arr = r.get(key);
      if (!arr) return;
      if (!arr->is_array() || arr->empty()) {
        errors.push_back(r.field(key) + " must be a non-empty array");
        return;
      }
      out.clear();
      for (const json& v : *arr) {
        if (!v.is_number()) {
          errors.push_back(r.field(key) + " entries must be numbers");
          continue;
        }
        check_fraction(v.get<double>(), r.field(key) + "[]", errors);
        out.push_back(v.get<double>());
      }
    };
    read_fractions("ratios", cfg.sweep.ratios);
    read_fractions("probabilities", cfg.sweep.probabilities);
    if (const json* arr = r.get("positions")) {
      if (!arr->is_array() || arr->empty()) {
        errors.push_back("sweep.positions must be a non-empty array");
      } else {
        cfg.sweep.positions.clear();
        for (const json& v : *arr) {
          const auto pos = v.is_string() ? parse_start_position(v.get<std::string>())
                                         : std::nullopt;
          if (pos)
            cfg.sweep.positions.push_back(*pos);
          else
            errors.push_back("sweep.positions entries must be L or M");
        }
      }
    }
    if (auto v = r.count("runs_per_cell")) cfg.sweep.runs_per_cell = *v;
    if (auto v = r.count("view")) cfg.sweep.view = static_cast<int>(*v);
    r.finish();
  }
  if (cfg.sweep.runs_per_cell < 1) errors.push_back("sweep.runs_per_cell must be >= 1");
  if (cfg.sweep.view != 1 && cfg.sweep.view != 2) errors.push_back("sweep.view must be 1 or 2");

  if (const json* ab = top.get("ablation")) {
    ObjectReader r(*ab, "ablation", errors);
    if (auto v = r.count("runs")) cfg.ablation_runs = *v;
    r.finish();
  }
  if (cfg.ablation_runs < 1) errors.push_back("ablation.runs must be >= 1");

  top.finish();

  if (cfg.needs_ranking() && !cfg.ranking.path && !cfg.ranking.compute)
    errors.push_back(
        "ranking required: an influential view needs ranking.path or ranking.compute = true");

  if (!errors.empty()) throw ConfigError(std::move(errors));
  cfg.resolve();
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path.parent_path());
}

std::string serialize_config(const RunConfig& cfg, bool with_seed) {
  json root;
  root["dataset"]["name"] = cfg.dataset.name;
  root["dataset"]["edges"] = cfg.dataset.edges;
  root["dataset"]["features"] = cfg.dataset.features;
  if (cfg.dataset.labels) root["dataset"]["labels"] = *cfg.dataset.labels;
  if (with_seed) root["seed"] = cfg.seed;
  root["output_dir"] = cfg.output_dir;
  root["threads"] = cfg.threads;
  root["views"]["view1"] = write_view(cfg.view1);
  root["views"]["view2"] = write_view(cfg.view2);
  root["train"] = {{"epochs", cfg.train.epochs},
                   {"learning_rate", cfg.train.learning_rate},
                   {"weight_decay", cfg.train.weight_decay},
                   {"hidden_size", cfg.train.hidden_size},
                   {"output_size", cfg.train.output_size},
                   {"temperature", cfg.train.temperature}};
  json ranking = {{"compute", cfg.ranking.compute},
                  {"epochs", cfg.ranking.epochs},
                  {"rounds", cfg.ranking.rounds},
                  {"scorer", cfg.ranking.scorer}};
  if (cfg.ranking.path) ranking["path"] = *cfg.ranking.path;
  root["ranking"] = ranking;
  root["eval"] = {{"splits", cfg.eval.splits},
                  {"train_fraction", cfg.eval.train_fraction},
                  {"l2", cfg.eval.l2},
                  {"iterations", cfg.eval.iterations}};
  json positions = json::array();
  for (StartPosition p : cfg.sweep.positions) positions.push_back(std::string(to_string(p)));
  root["sweep"] = {{"ratios", cfg.sweep.ratios},
                   {"probabilities", cfg.sweep.probabilities},
                   {"positions", positions},
                   {"runs_per_cell", cfg.sweep.runs_per_cell},
                   {"view", cfg.sweep.view}};
  root["ablation"] = {{"runs", cfg.ablation_runs}};
  return root.dump(2) + "\n";
}

}  // namespace febaa

#include "bayestree/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "bayestree/csv.hpp"
#include "bayestree/rng.hpp"

namespace bayestree {

using nlohmann::json;

const char* method_name(Method m) {
  switch (m) {
    case Method::Mcmc: return "mcmc";
    case Method::Sumd: return "sumd";
    case Method::Dp: return "dp";
  }
  return "unknown";
}

std::optional<Method> parse_method(const std::string& name) {
  std::string low;
  for (char c : name) {
    low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (low == "mcmc") return Method::Mcmc;
  if (low == "sumd") return Method::Sumd;
  if (low == "dp") return Method::Dp;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  hp.validate();
  if (data_path.has_value() == synthetic.has_value()) {
    throw std::invalid_argument(
        "config: exactly one of data path and synthetic spec is required");
  }
  if (folds == 0) throw std::invalid_argument("config: folds must be positive");
  for (unsigned w : worker_sweep) {
    if (w == 0) {
      throw std::invalid_argument("config: sweep worker counts must be positive");
    }
  }
}

bool operator==(const FoldResult& a, const FoldResult& b) {
  return a.fold == b.fold && a.accuracy_percent == b.accuracy_percent;
}

std::vector<double> predict(const PosteriorSample& sample,
                            std::span<const double> x) {
  if (sample.trees.empty()) {
    throw std::invalid_argument("predict: no retained trees");
  }
  const Tree& first = sample.trees.front().tree;
  const std::size_t k = first.node(first.descend(x)).probs.size();

  std::vector<double> acc(k, 0.0);
  for (const RetainedTree& rt : sample.trees) {
    const auto& probs = rt.tree.node(rt.tree.descend(x)).probs;
    for (std::size_t j = 0; j < k; ++j) acc[j] += probs[j];
  }
  const double inv = 1.0 / static_cast<double>(sample.trees.size());
  for (double& v : acc) v *= inv;
  return acc;
}

PosteriorSample run_method(Method method, const Dataset& data,
                           const Hyperparams& hp) {
  switch (method) {
    case Method::Mcmc: return run_mcmc(data, hp, LikelihoodMode::Sequential);
    case Method::Dp: return run_mcmc(data, hp, LikelihoodMode::Partitioned);
    case Method::Sumd: return run_sumd(data, hp);
  }
  throw std::logic_error("run_method: unreachable");
}

ResolvedData resolve_dataset(const ExperimentConfig& config) {
  if (config.data_path) {
    CsvLoadResult loaded =
        load_csv(*config.data_path, config.label_column, config.csv_header);
    return {std::move(loaded.data), std::move(loaded.label_names),
            std::move(loaded.rejected_lines)};
  }
  Dataset data = generate_synthetic(*config.synthetic);
  std::vector<std::string> names;
  names.reserve(data.class_count());
  for (int k = 0; k < data.class_count(); ++k) {
    names.push_back("class_" + std::to_string(k));
  }
  return {std::move(data), std::move(names), {}};
}

namespace {

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

struct PosteriorStats {
  double depth_sum = 0.0;
  double leaf_sum = 0.0;
  std::size_t count = 0;

  void absorb(const PosteriorSample& sample) {
    for (const RetainedTree& rt : sample.trees) {
      const TreeStats st = rt.tree.stats();
      depth_sum += static_cast<double>(st.depth);
      leaf_sum += static_cast<double>(st.leaf_count);
      count += 1;
    }
  }
};

}  // namespace

RunReport cross_validate(const ExperimentConfig& config) {
  ResolvedData resolved = resolve_dataset(config);
  return cross_validate(config, resolved.data, std::move(resolved.label_names));
}

std::vector<std::vector<std::size_t>> fold_assignment(std::size_t rows,
                                                      unsigned folds,
                                                      std::uint64_t seed) {
  if (folds == 0) throw std::invalid_argument("fold_assignment: zero folds");
  if (rows < folds) {
    throw std::invalid_argument("fold_assignment: fewer rows than folds");
  }
  std::vector<std::size_t> perm(rows);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  RngStream rng(seed, StreamPurpose::Folds, 0, 0);
  for (std::size_t i = rows; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.next_index(i)]);
  }

  std::vector<std::vector<std::size_t>> out(folds);
  const std::size_t base = rows / folds;
  const std::size_t extra = rows % folds;
  std::size_t start = 0;
  for (unsigned f = 0; f < folds; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    out[f].assign(perm.begin() + start, perm.begin() + start + len);
    // row order inside a split is irrelevant to the math; sorting keeps the
    // subset layout independent of the shuffle
    std::sort(out[f].begin(), out[f].end());
    start += len;
  }
  return out;
}

RunReport cross_validate(const ExperimentConfig& config, const Dataset& data,
                         std::vector<std::string> label_names) {
  config.hp.validate();
  if (config.folds < 2) {
    throw std::invalid_argument("cross_validate: need at least 2 folds");
  }
  if (data.rows() < config.folds) {
    throw std::invalid_argument("cross_validate: dataset smaller than fold count");
  }

  const std::size_t n = data.rows();
  const auto folds = fold_assignment(n, config.folds, config.hp.seed);

  RunReport report;
  report.config_echo = config_to_json(config);
  report.label_mapping = std::move(label_names);

  PosteriorStats stats;
  for (unsigned f = 0; f < config.folds; ++f) {
    const std::vector<std::size_t>& test = folds[f];
    std::vector<std::size_t> train;
    train.reserve(n - test.size());
    for (unsigned g = 0; g < config.folds; ++g) {
      if (g == f) continue;
      train.insert(train.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train.begin(), train.end());

    const Dataset train_data = data.subset(train);
    const PosteriorSample sample = run_method(config.method, train_data, config.hp);
    report.retained_per_run = sample.trees.size();
    stats.absorb(sample);

    std::size_t correct = 0;
    for (std::size_t i : test) {
      if (argmax(predict(sample, data.row(i))) == data.label(i)) correct += 1;
    }
    report.folds.push_back(
        {f, 100.0 * static_cast<double>(correct) / static_cast<double>(test.size())});
  }

  double mean = 0.0;
  for (const FoldResult& fr : report.folds) mean += fr.accuracy_percent;
  mean /= static_cast<double>(report.folds.size());
  double var = 0.0;
  for (const FoldResult& fr : report.folds) {
    const double d = fr.accuracy_percent - mean;
    var += d * d;
  }
  var /= static_cast<double>(report.folds.size() - 1);
  report.accuracy_mean = mean;
  report.accuracy_std = std::sqrt(var);
  if (stats.count > 0) {
    report.posterior_mean_depth = stats.depth_sum / static_cast<double>(stats.count);
    report.posterior_mean_leaf_count = stats.leaf_sum / static_cast<double>(stats.count);
  }
  return report;
}

RunReport scaling_sweep(const ExperimentConfig& config) {
  ResolvedData resolved = resolve_dataset(config);
  return scaling_sweep(config, resolved.data, std::move(resolved.label_names));
}

RunReport scaling_sweep(const ExperimentConfig& config, const Dataset& data,
                        std::vector<std::string> label_names) {
  config.hp.validate();
  for (unsigned w : config.worker_sweep) {
    if (w == 0) {
      throw std::invalid_argument("config: sweep worker counts must be positive");
    }
  }
  if (config.worker_sweep.empty()) {
    throw std::invalid_argument("scaling_sweep: empty worker list");
  }

  RunReport report;
  report.config_echo = config_to_json(config);
  report.label_mapping = std::move(label_names);

  for (unsigned requested : config.worker_sweep) {
    unsigned effective = requested;
    if (config.method == Method::Sumd &&
        static_cast<std::uint64_t>(effective) > config.hp.iterations) {
      effective = static_cast<unsigned>(config.hp.iterations);
      report.warnings.push_back(
          "sumd: clamped " + std::to_string(requested) + " workers to " +
          std::to_string(effective) + " (more particles than iterations)");
    }
    if (config.method == Method::Dp &&
        static_cast<std::size_t>(effective) > data.rows()) {
      effective = static_cast<unsigned>(data.rows());
      report.warnings.push_back(
          "dp: clamped " + std::to_string(requested) + " workers to " +
          std::to_string(effective) + " (more shards than rows)");
    }

    Hyperparams hp = config.hp;
    hp.workers = effective;
    const auto run = [&] {
      const PosteriorSample sample = run_method(config.method, data, hp);
      report.retained_per_run = sample.trees.size();
    };

    std::vector<double> seconds{time_once(run)};
    if (seconds.front() < 60.0) {
      seconds.push_back(time_once(run));
      seconds.push_back(time_once(run));
    }
    report.timings.push_back(
        {method_name(config.method), effective,
         summarize_timings(method_name(config.method), effective, seconds)});
  }
  return report;
}

json config_to_json(const ExperimentConfig& config) {
  json j;
  j["method"] = method_name(config.method);
  if (config.data_path) j["data_path"] = *config.data_path;
  if (config.synthetic) {
    j["synthetic"] = {{"rows", config.synthetic->rows},
                      {"features", config.synthetic->features},
                      {"classes", config.synthetic->classes},
                      {"seed", config.synthetic->seed}};
  }
  j["label_column"] = config.label_column;
  j["csv_header"] = config.csv_header;
  j["hyperparams"] = {{"a", config.hp.a},
                      {"beta", config.hp.beta},
                      {"iterations", config.hp.iterations},
                      {"burn_in", config.hp.burn_in},
                      {"workers", config.hp.workers},
                      {"seed", config.hp.seed},
                      {"leaf_smoothing", config.hp.leaf_smoothing},
                      {"random_init", config.hp.random_init}};
  j["folds"] = config.folds;
  j["worker_sweep"] = config.worker_sweep;
  j["out_dir"] = config.out_dir;
  return j;
}

json metrics_to_json(const RunReport& report) {
  json folds = json::array();
  for (const FoldResult& fr : report.folds) {
    folds.push_back({{"fold", fr.fold}, {"accuracy_percent", fr.accuracy_percent}});
  }
  return {{"label_mapping", report.label_mapping},
          {"folds", std::move(folds)},
          {"accuracy_mean", report.accuracy_mean},
          {"accuracy_std", report.accuracy_std},
          {"retained_per_run", report.retained_per_run},
          {"posterior_mean_depth", report.posterior_mean_depth},
          {"posterior_mean_leaf_count", report.posterior_mean_leaf_count},
          {"warnings", report.warnings}};
}

json report_to_json(const RunReport& report) {
  json timings = json::array();
  for (const TimingRow& row : report.timings) {
    timings.push_back({{"method", row.method},
                       {"workers", row.workers},
                       {"repetitions", row.timing.repetitions},
                       {"min_seconds", row.timing.min_seconds},
                       {"median_seconds", row.timing.median_seconds},
                       {"mean_seconds", row.timing.mean_seconds}});
  }
  return {{"format_version", 1},
          {"config", report.config_echo},
          {"metrics", metrics_to_json(report)},
          {"timings", std::move(timings)}};
}

RunReport report_from_json(const json& j) {
  RunReport report;
  report.config_echo = j.value("config", json::object());
  const json& m = j.at("metrics");
  report.label_mapping = m.at("label_mapping").get<std::vector<std::string>>();
  for (const auto& jf : m.at("folds")) {
    report.folds.push_back({jf.at("fold").get<unsigned>(),
                            jf.at("accuracy_percent").get<double>()});
  }
  report.accuracy_mean = m.at("accuracy_mean").get<double>();
  report.accuracy_std = m.at("accuracy_std").get<double>();
  report.retained_per_run = m.at("retained_per_run").get<std::size_t>();
  report.posterior_mean_depth = m.at("posterior_mean_depth").get<double>();
  report.posterior_mean_leaf_count = m.at("posterior_mean_leaf_count").get<double>();
  report.warnings = m.at("warnings").get<std::vector<std::string>>();
  for (const auto& jt : j.at("timings")) {
    TimingRow row;
    row.method = jt.at("method").get<std::string>();
    row.workers = jt.at("workers").get<unsigned>();
    row.timing.phase = row.method;
    row.timing.workers = row.workers;
    row.timing.repetitions = jt.at("repetitions").get<int>();
    row.timing.min_seconds = jt.at("min_seconds").get<double>();
    row.timing.median_seconds = jt.at("median_seconds").get<double>();
    row.timing.mean_seconds = jt.at("mean_seconds").get<double>();
    report.timings.push_back(std::move(row));
  }
  return report;
}

bool reports_equal(const RunReport& a, const RunReport& b) {
  return report_to_json(a) == report_to_json(b);
}

void emit_report(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);

  {
    std::ofstream out(dir / "report.json");
    if (!out) {
      throw std::runtime_error("cannot write " + (dir / "report.json").string());
    }
    out << report_to_json(report).dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "timings.csv");
    if (!out) {
      throw std::runtime_error("cannot write " + (dir / "timings.csv").string());
    }
    out << "method,workers,run_seconds\n";
    char buf[64];
    for (const TimingRow& row : report.timings) {
      std::snprintf(buf, sizeof(buf), "%.9f", row.timing.median_seconds);
      out << row.method << ',' << row.workers << ',' << buf << '\n';
    }
  }
  {
    std::ofstream out(dir / "summary.txt");
    if (!out) {
      throw std::runtime_error("cannot write " + (dir / "summary.txt").string());
    }
    out << "method: "
        << report.config_echo.value("method", std::string("unknown")) << '\n';
    if (!report.folds.empty()) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "accuracy: %.2f%% +- %.2f (%zu folds)",
                    report.accuracy_mean, report.accuracy_std,
                    report.folds.size());
      out << buf << '\n';
      std::snprintf(buf, sizeof(buf),
                    "posterior: mean depth %.2f, mean leaves %.2f",
                    report.posterior_mean_depth, report.posterior_mean_leaf_count);
      out << buf << '\n';
    }
    out << "retained per run: " << report.retained_per_run << '\n';
    for (const TimingRow& row : report.timings) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%s workers=%u median=%.3fs reps=%d",
                    row.method.c_str(), row.workers,
                    row.timing.median_seconds, row.timing.repetitions);
      out << buf << '\n';
    }
    for (const std::string& w : report.warnings) out << "warning: " << w << '\n';
  }
}

}  // namespace bayestree

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bayestree/dataset.hpp"
#include "bayestree/hyperparams.hpp"
#include "bayestree/samplers.hpp"
#include "bayestree/synthetic.hpp"
#include "bayestree/timing.hpp"

namespace bayestree {

enum class Method { Mcmc, Sumd, Dp };

const char* method_name(Method m);
std::optional<Method> parse_method(const std::string& name);

// One experiment: a data source (CSV path or synthetic spec, mutually
// exclusive), a method, sampler settings, and the harness knobs.
struct ExperimentConfig {
  Method method = Method::Mcmc;
  std::optional<std::string> data_path;
  std::optional<SyntheticSpec> synthetic;
  int label_column = -1;  // -1 selects the last column
  bool csv_header = false;
  Hyperparams hp;
  unsigned folds = 10;
  std::vector<unsigned> worker_sweep;
  std::string out_dir;

  void validate() const;  // throws std::invalid_argument
};

struct FoldResult {
  unsigned fold = 0;
  double accuracy_percent = 0.0;
};

struct TimingRow {
  std::string method;
  unsigned workers = 0;
  TimingSummary timing;
};

// Everything emit_report writes: CV metrics, sweep timings, posterior
// summary, config echo. Timings never participate in determinism checks.
struct RunReport {
  nlohmann::json config_echo;
  std::vector<std::string> label_mapping;
  std::vector<FoldResult> folds;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  std::size_t retained_per_run = 0;
  double posterior_mean_depth = 0.0;
  double posterior_mean_leaf_count = 0.0;
  std::vector<std::string> warnings;
  std::vector<TimingRow> timings;
};

bool operator==(const FoldResult& a, const FoldResult& b);

// Posterior-mean class probabilities: the leaf distributions reached by x,
// averaged uniformly over the retained trees.
std::vector<double> predict(const PosteriorSample& sample,
                            std::span<const double> x);

PosteriorSample run_method(Method method, const Dataset& data,
                           const Hyperparams& hp);

// Loads the configured data source. Synthetic sources get generated label
// names "class_0".."class_{K-1}".
struct ResolvedData {
  Dataset data;
  std::vector<std::string> label_names;
  std::vector<std::size_t> rejected_lines;
};
ResolvedData resolve_dataset(const ExperimentConfig& config);

// Seeded disjoint row split: every row lands in exactly one fold and sizes
// differ by at most one. Shared by cross_validate so the partition can be
// checked directly.
std::vector<std::vector<std::size_t>> fold_assignment(std::size_t rows,
                                                      unsigned folds,
                                                      std::uint64_t seed);

// Seeded k-fold CV: shuffled row partition, per fold fit on the train split
// with the configured method and score argmax-of-predict accuracy on the
// held-out rows. Reports mean +- sample std across folds, in percent.
RunReport cross_validate(const ExperimentConfig& config);
RunReport cross_validate(const ExperimentConfig& config, const Dataset& data,
                         std::vector<std::string> label_names);

// Times one full run of the configured method per worker count in
// config.worker_sweep (3 repetitions when the first run stays under 60s,
// 1 otherwise). Worker counts that exceed what the method can use are
// clamped with a recorded warning.
RunReport scaling_sweep(const ExperimentConfig& config);
RunReport scaling_sweep(const ExperimentConfig& config, const Dataset& data,
                        std::vector<std::string> label_names);

// json round trip for RunReport; metrics_to_json covers everything except
// timings (the determinism-checked block).
nlohmann::json report_to_json(const RunReport& report);
nlohmann::json metrics_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);
bool reports_equal(const RunReport& a, const RunReport& b);

// Writes report.json, timings.csv (method,workers,run_seconds) and
// summary.txt under dir, creating it if needed.
void emit_report(const RunReport& report, const std::filesystem::path& dir);

nlohmann::json config_to_json(const ExperimentConfig& config);

}  // namespace bayestree

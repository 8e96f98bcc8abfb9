#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bayestree/csv.hpp"
#include "bayestree/harness.hpp"
#include "bayestree/serialize.hpp"
#include "bayestree/synthetic.hpp"
#include "bayestree/timing.hpp"

namespace {

using namespace bayestree;

struct CommonOpts {
  std::string method = "mcmc";
  std::string data_path;
  std::string synthetic;
  std::uint64_t iterations = 8000;
  std::uint64_t burn_in = 4000;
  unsigned workers = 1;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> data_seed;
  double alpha = 0.0;
  double beta = 0.0;
  double smoothing = 1.0;
  bool random_init = false;
  int label_column = -1;
  bool header = false;
  std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--method", o.method, "Inference method: mcmc, sumd or dp")
      ->check(CLI::IsMember({"mcmc", "sumd", "dp"}));
  cmd->add_option("--data", o.data_path, "CSV dataset path");
  cmd->add_option("--synthetic", o.synthetic,
                  "Synthetic preset (e.g. SD/SF) or rows,features,classes");
  cmd->add_option("--iterations", o.iterations, "Total sampler iterations")
      ->capture_default_str();
  cmd->add_option("--burn-in", o.burn_in, "Iterations discarded before retention")
      ->capture_default_str();
  cmd->add_option("--workers", o.workers,
                  "Particles (sumd), shards (dp) or thread budget")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Root RNG seed")->capture_default_str();
  cmd->add_option("--data-seed", o.data_seed,
                  "Synthetic data seed (defaults to --seed)");
  cmd->add_option("--alpha", o.alpha, "Tree prior scale a")->required();
  cmd->add_option("--beta", o.beta, "Tree prior depth penalty")->required();
  cmd->add_option("--smoothing", o.smoothing, "Leaf pseudocount")
      ->capture_default_str();
  cmd->add_flag("--random-init", o.random_init,
                "Start chains from a shallow random tree");
  cmd->add_option("--label-col", o.label_column,
                  "0-based label column, -1 for last")
      ->capture_default_str();
  cmd->add_flag("--header", o.header, "Skip the first CSV line");
  cmd->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
}

ExperimentConfig build_config(const CommonOpts& o) {
  ExperimentConfig config;
  const auto method = parse_method(o.method);
  if (!method) throw std::runtime_error("unknown method: " + o.method);
  config.method = *method;

  if (!o.data_path.empty()) config.data_path = o.data_path;
  if (!o.synthetic.empty()) {
    const std::uint64_t data_seed = o.data_seed.value_or(o.seed);
    if (auto preset = preset_synthetic(o.synthetic, data_seed)) {
      config.synthetic = *preset;
    } else {
      SyntheticSpec spec;
      unsigned long long rows = 0, features = 0;
      int classes = 0;
      if (std::sscanf(o.synthetic.c_str(), "%llu,%llu,%d", &rows, &features,
                      &classes) != 3) {
        throw std::runtime_error(
            "bad synthetic spec (want a preset like SD/SF or rows,features,classes): " +
            o.synthetic);
      }
      spec.rows = rows;
      spec.features = features;
      spec.classes = classes;
      spec.seed = data_seed;
      config.synthetic = spec;
    }
  }

  config.label_column = o.label_column;
  config.csv_header = o.header;
  config.hp.a = o.alpha;
  config.hp.beta = o.beta;
  config.hp.iterations = o.iterations;
  config.hp.burn_in = o.burn_in;
  config.hp.workers = o.workers;
  config.hp.seed = o.seed;
  config.hp.leaf_smoothing = o.smoothing;
  config.hp.random_init = o.random_init;
  config.out_dir = o.out_dir;
  return config;
}

int run_fit(const CommonOpts& opts) {
  ExperimentConfig config = build_config(opts);
  config.validate();
  ResolvedData resolved = resolve_dataset(config);

  RunReport report;
  nlohmann::json echo = config_to_json(config);
  echo["label_mapping"] = resolved.label_names;
  report.config_echo = echo;
  report.label_mapping = resolved.label_names;
  for (std::size_t line : resolved.rejected_lines) {
    report.warnings.push_back("rejected csv line " + std::to_string(line));
  }

  PosteriorSample sample;
  const double seconds = time_once([&] {
    sample = run_method(config.method, resolved.data, config.hp);
  });
  report.retained_per_run = sample.trees.size();

  double depth_sum = 0.0, leaf_sum = 0.0;
  for (const RetainedTree& rt : sample.trees) {
    const TreeStats st = rt.tree.stats();
    depth_sum += static_cast<double>(st.depth);
    leaf_sum += static_cast<double>(st.leaf_count);
  }
  report.posterior_mean_depth = depth_sum / static_cast<double>(sample.trees.size());
  report.posterior_mean_leaf_count = leaf_sum / static_cast<double>(sample.trees.size());
  report.timings.push_back(
      {method_name(config.method), config.hp.workers,
       summarize_timings(method_name(config.method), config.hp.workers,
                         {seconds})});

  const std::filesystem::path out_dir = config.out_dir;
  std::filesystem::create_directories(out_dir);
  write_sample_file(out_dir / "model.json", sample, echo);
  emit_report(report, out_dir);

  std::cout << "retained " << sample.trees.size() << " trees in " << seconds
            << "s; wrote " << (out_dir / "model.json").string() << '\n';
  return 0;
}

int run_cv(const CommonOpts& opts, unsigned folds) {
  ExperimentConfig config = build_config(opts);
  config.folds = folds;
  config.validate();

  const RunReport report = cross_validate(config);
  emit_report(report, config.out_dir);

  std::printf("%s accuracy: %.2f%% +- %.2f over %u folds\n",
              method_name(config.method), report.accuracy_mean,
              report.accuracy_std, config.folds);
  std::cout << "wrote " << (std::filesystem::path(config.out_dir) / "report.json").string()
            << '\n';
  return 0;
}

int run_sweep(const CommonOpts& opts, const std::string& workers_list) {
  ExperimentConfig config = build_config(opts);

  std::vector<unsigned> sweep;
  std::string token;
  for (char ch : workers_list + ",") {
    if (ch == ',') {
      if (!token.empty()) {
        sweep.push_back(static_cast<unsigned>(std::stoul(token)));
        token.clear();
      }
    } else {
      token.push_back(ch);
    }
  }
  config.worker_sweep = sweep;
  config.validate();

  const RunReport report = scaling_sweep(config);
  emit_report(report, config.out_dir);

  for (const TimingRow& row : report.timings) {
    std::printf("%s workers=%u median=%.3fs\n", row.method.c_str(), row.workers,
                row.timing.median_seconds);
  }
  for (const std::string& w : report.warnings) {
    std::cout << "warning: " << w << '\n';
  }
  return 0;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path, int label_column, bool header) {
  const LoadedSample loaded = read_sample_file(model_path);
  if (loaded.sample.trees.empty()) {
    throw std::runtime_error("model file holds no trees");
  }

  std::vector<std::string> label_names;
  if (loaded.config.contains("label_mapping")) {
    label_names = loaded.config["label_mapping"].get<std::vector<std::string>>();
  }

  // feature count from the first tree's probe: any leaf works, so probe with
  // the widest split index seen in the model
  int max_feature = -1;
  for (const RetainedTree& rt : loaded.sample.trees) {
    for (std::size_t id = 0; id < rt.tree.size(); ++id) {
      const Node& n = rt.tree.node(static_cast<int>(id));
      if (!n.is_leaf()) max_feature = std::max(max_feature, n.feature);
    }
  }
  std::size_t feature_count = static_cast<std::size_t>(max_feature + 1);
  if (loaded.config.contains("synthetic")) {
    feature_count = std::max<std::size_t>(
        feature_count, loaded.config["synthetic"]["features"].get<std::size_t>());
  }
  if (feature_count == 0) {
    throw std::runtime_error("model trees never split; cannot infer feature count");
  }

  const auto rows = load_feature_csv(data_path, feature_count, label_column, header);

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);

  const std::size_t k =
      predict(loaded.sample, std::span<const double>(rows.front())).size();
  out << "row,predicted_class";
  if (!label_names.empty()) out << ",predicted_label";
  for (std::size_t j = 0; j < k; ++j) out << ",p_" << j;
  out << '\n';

  char buf[32];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto probs = predict(loaded.sample, std::span<const double>(rows[i]));
    std::size_t best = 0;
    for (std::size_t j = 1; j < probs.size(); ++j) {
      if (probs[j] > probs[best]) best = j;
    }
    out << i << ',' << best;
    if (!label_names.empty()) {
      out << ',' << (best < label_names.size() ? label_names[best] : "?");
    }
    for (double p : probs) {
      std::snprintf(buf, sizeof(buf), "%.9f", p);
      out << ',' << buf;
    }
    out << '\n';
  }
  std::cout << "wrote " << rows.size() << " predictions to " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian classification-tree sampling toolkit"};
  app.require_subcommand(1);

  CommonOpts fit_opts, cv_opts, sweep_opts;
  unsigned folds = 10;
  std::string workers_list;
  std::string model_path, predict_data, predict_out;
  int predict_label_col = -1;
  bool predict_header = false;

  CLI::App* fit = app.add_subcommand("fit", "Run one sampler and store the retained trees");
  add_common(fit, fit_opts);

  CLI::App* cv = app.add_subcommand("cv", "K-fold cross-validated accuracy");
  add_common(cv, cv_opts);
  cv->add_option("--folds", folds, "Cross-validation folds")->capture_default_str();

  CLI::App* sweep = app.add_subcommand("sweep", "Time the method across worker counts");
  add_common(sweep, sweep_opts);
  sweep->add_option("--workers-list", workers_list, "Comma-separated worker counts")
      ->required();

  CLI::App* predict_cmd = app.add_subcommand("predict", "Score a CSV with a stored model");
  predict_cmd->add_option("--model", model_path, "Retained-sample JSON file")->required();
  predict_cmd->add_option("--data", predict_data, "CSV of feature rows")->required();
  predict_cmd->add_option("--out", predict_out, "Output CSV path")->required();
  predict_cmd->add_option("--label-col", predict_label_col,
                          "Label column to ignore if present, -1 for last");
  predict_cmd->add_flag("--header", predict_header, "Skip the first CSV line");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return run_fit(fit_opts);
    if (cv->parsed()) return run_cv(cv_opts, folds);
    if (sweep->parsed()) return run_sweep(sweep_opts, workers_list);
    if (predict_cmd->parsed()) {
      return run_predict(model_path, predict_data, predict_out,
                         predict_label_col, predict_header);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "binreg/branch_bound.hpp"
#include "binreg/dataset.hpp"
#include "binreg/encoder.hpp"
#include "binreg/evaluator.hpp"

namespace binreg {

enum class EncoderMode { kMip, kPbo };

struct RunConfig {
  std::string name;  // dataset label for bench rows; defaults to the file stem
  std::filesystem::path images;
  std::filesystem::path labels;
  std::filesystem::path csv;
  Rational threshold{255, 2};
  size_t train_count = 0;
  Rational alpha{1};
  std::optional<Rational> beta;  // 2 * alpha when unset
  Rational corrupt{0};
  uint64_t seed = 0;
  double time_limit_secs = 3600.0;
  EncoderMode mode = EncoderMode::kMip;
  std::filesystem::path out;

  Hyperparams hyperparams() const;
  std::string dataset_name() const;
};

// Data side of the pipeline: load, binarize, split, corrupt.
struct PreparedData {
  BinaryDataset train;
  BinaryDataset test;
  size_t corrupted = 0;
};
PreparedData prepare_data(const RunConfig& cfg);
Encoding encode(const RunConfig& cfg, const BinaryDataset& train);

struct TrainOutcome {
  MipResult result;
  std::optional<TrainedModel> model;
  std::optional<EvalReport> train_report;
  std::optional<EvalReport> test_report;  // empty when every row was used for training
};

// Runs the whole pipeline. Writes artifacts when cfg.out is non-empty:
// model.json, result.json, train_report.json, test_report.json, train.csv.
TrainOutcome train(const RunConfig& cfg);

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNoIncumbent = 3;

int cmd_train(const RunConfig& cfg);
int cmd_eval(const std::filesystem::path& model_path, const RunConfig& data);
int cmd_export(const RunConfig& cfg, const std::string& format, bool portable_names = false);
int cmd_render(const std::filesystem::path& model_path, size_t width, size_t height,
               const std::filesystem::path& out_dir);
// Runs each config in order and writes one CSV row per config.
int cmd_bench(const std::vector<RunConfig>& configs, const std::filesystem::path& out_csv);

// Bench configs: a JSON array of objects whose keys mirror the train flags
// (csv, images, labels, threshold, k, alpha, beta, corrupt, seed,
// time_limit, mode, name).
std::vector<RunConfig> load_bench_configs(const std::filesystem::path& path);

inline constexpr const char* kBenchHeader =
    "model,dataset,instances,gap,time_secs,reduction_pct,train_accuracy,test_accuracy,objective,"
    "status";

// argv entry point used by the binreg executable.
int run_cli(int argc, char** argv);

}  // namespace binreg

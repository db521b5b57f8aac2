#include "binreg/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <spdlog/fmt/fmt.h>

#include "CLI11.hpp"
#include "binreg/emitters.hpp"
#include "binreg/error.hpp"
#include "binreg/logging.hpp"
#include "json.hpp"

namespace binreg {
namespace {

// Corruption draws from its own stream so that changing the fraction never
// changes the split.
constexpr uint64_t kCorruptionStream = 0x9e3779b97f4a7c15ULL;

BinaryDataset load_dataset(const RunConfig& cfg) {
  if (!cfg.csv.empty()) return load_csv(cfg.csv);
  if (cfg.images.empty() || cfg.labels.empty()) {
    throw Error("no dataset: give --csv or both --images and --labels");
  }
  return binarize(load_idx(cfg.images, cfg.labels), cfg.threshold);
}

const char* mode_name(EncoderMode mode) { return mode == EncoderMode::kMip ? "MIP" : "PBO"; }

EncoderMode parse_mode(const std::string& text) {
  if (text == "mip") return EncoderMode::kMip;
  if (text == "pbo") return EncoderMode::kPbo;
  throw Error("unknown mode '" + text + "' (expected mip or pbo)");
}

void write_outputs(const RunConfig& cfg, const PreparedData& data, const TrainOutcome& outcome) {
  std::filesystem::create_directories(cfg.out);
  write_text(cfg.out / "result.json", result_to_json(outcome.result));
  write_csv(data.train, cfg.out / "train.csv");
  if (!outcome.model) return;
  save_model(*outcome.model, cfg.out / "model.json");
  write_text(cfg.out / "train_report.json", report_to_json(*outcome.train_report));
  if (outcome.test_report) write_text(cfg.out / "test_report.json", report_to_json(*outcome.test_report));
}

}  // namespace

Hyperparams RunConfig::hyperparams() const {
  Hyperparams hp = beta ? Hyperparams{alpha, *beta} : Hyperparams::with_default_beta(alpha);
  hp.validate();
  return hp;
}

std::string RunConfig::dataset_name() const {
  if (!name.empty()) return name;
  if (!csv.empty()) return csv.stem().string();
  return images.stem().string();
}

PreparedData prepare_data(const RunConfig& cfg) {
  const BinaryDataset all = load_dataset(cfg);
  if (cfg.train_count == 0) throw Error("--k must be positive");
  auto [train, test] = split(all, {cfg.train_count, cfg.seed});
  PreparedData data{std::move(train), std::move(test), 0};
  if (cfg.corrupt.num != 0) {
    data.corrupted = corruption_count(cfg.corrupt, data.train.size());
    data.train = corrupt_labels(data.train, {cfg.corrupt, cfg.seed ^ kCorruptionStream});
  }
  return data;
}

Encoding encode(const RunConfig& cfg, const BinaryDataset& train) {
  const Hyperparams hp = cfg.hyperparams();
  if (cfg.mode == EncoderMode::kPbo) return build_pbo(train, hp, default_bounds(train));
  return build_mip(train, hp);
}

TrainOutcome train(const RunConfig& cfg) {
  const PreparedData data = prepare_data(cfg);
  const Encoding enc = encode(cfg, data.train);
  log().info("{} model: {} variables, {} constraints, {} training rows", mode_name(cfg.mode),
             enc.model.num_variables(), enc.model.constraints().size(), data.train.size());

  SolveConfig solve;
  solve.time_limit_secs = cfg.time_limit_secs;
  solve.seed = cfg.seed;
  solve.heuristic = make_rounding_heuristic(enc);

  TrainOutcome outcome;
  outcome.result = solve_mip(enc.model, solve);
  if (outcome.result.incumbent) {
    outcome.model = decode_solution(enc.model, enc.layout, *outcome.result.incumbent);
    outcome.train_report = accuracy(*outcome.model, data.train);
    if (!data.test.empty()) outcome.test_report = accuracy(*outcome.model, data.test);
  }
  if (!cfg.out.empty()) write_outputs(cfg, data, outcome);
  return outcome;
}

int cmd_train(const RunConfig& cfg) {
  const TrainOutcome outcome = train(cfg);
  const MipResult& r = outcome.result;
  if (!outcome.model) {
    log().error("no feasible model found ({})", to_string(r.status));
    return kExitNoIncumbent;
  }
  log().info("status={} objective={} gap={} time={:.2f}s train_acc={:.4f}{}", to_string(r.status),
             *r.objective, r.gap, r.runtime_secs, outcome.train_report->accuracy,
             outcome.test_report ? fmt::format(" test_acc={:.4f}", outcome.test_report->accuracy)
                                 : std::string());
  return kExitOk;
}

int cmd_eval(const std::filesystem::path& model_path, const RunConfig& data) {
  const TrainedModel model = load_model(model_path);
  const BinaryDataset ds = load_dataset(data);
  std::cout << report_to_json(accuracy(model, ds)) << '\n';
  return kExitOk;
}

int cmd_export(const RunConfig& cfg, const std::string& format, bool portable_names) {
  const PreparedData data = prepare_data(cfg);
  const Encoding enc = encode(cfg, data.train);
  if (cfg.out.empty()) throw Error("--out is required");
  if (format == "lp") {
    write_lp(enc.model, cfg.out, {portable_names});
  } else if (format == "mps") {
    write_mps(enc.model, cfg.out);
  } else if (format == "opb") {
    write_opb(enc.model, cfg.out);
  } else {
    throw Error("unknown format '" + format + "'");
  }
  return kExitOk;
}

int cmd_render(const std::filesystem::path& model_path, size_t width, size_t height,
               const std::filesystem::path& out_dir) {
  const TrainedModel model = load_model(model_path);
  std::filesystem::create_directories(out_dir);
  for (size_t c = 0; c < model.class_count; ++c) {
    render_weights_pgm(model, c, width, height, out_dir / fmt::format("class_{}.pgm", c));
  }
  return kExitOk;
}

int cmd_bench(const std::vector<RunConfig>& configs, const std::filesystem::path& out_csv) {
  std::ofstream file;
  if (!out_csv.empty()) {
    file.open(out_csv);
    if (!file) throw Error("cannot open " + out_csv.string());
  }
  std::ostream& out = out_csv.empty() ? std::cout : file;
  out << kBenchHeader << '\n';
  int code = kExitOk;
  for (const RunConfig& cfg : configs) {
    const TrainOutcome o = train(cfg);
    const MipResult& r = o.result;
    auto num = [](std::optional<double> v, const char* spec) {
      return v ? fmt::format(fmt::runtime(spec), *v) : std::string();
    };
    out << fmt::format("{},{},{},{},{:.2f},{},{},{},{},{}\n", mode_name(cfg.mode), cfg.dataset_name(),
                       cfg.train_count, num(o.model ? std::optional(r.gap) : std::nullopt, "{:.4f}"),
                       r.runtime_secs,
                       num(o.model ? std::optional(o.train_report->reduction_pct) : std::nullopt, "{:.2f}"),
                       num(o.train_report ? std::optional(o.train_report->accuracy) : std::nullopt, "{:.4f}"),
                       num(o.test_report ? std::optional(o.test_report->accuracy) : std::nullopt, "{:.4f}"),
                       r.objective ? std::to_string(*r.objective) : std::string(), to_string(r.status));
    out.flush();
    if (!o.model) code = kExitNoIncumbent;
  }
  return code;
}

std::vector<RunConfig> load_bench_configs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed bench config: " + std::string(e.what()));
  }
  if (!j.is_array()) throw Error("bench config must be a JSON array");
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
  };
  auto rational = [](const nlohmann::json& v) {
    return v.is_string() ? Rational::parse(v.get<std::string>()) : Rational::parse(v.dump());
  };
  std::vector<RunConfig> configs;
  for (const auto& item : j) {
    RunConfig cfg;
    for (const auto& [key, v] : item.items()) {
      if (key == "csv") cfg.csv = resolve(v.get<std::string>());
      else if (key == "images") cfg.images = resolve(v.get<std::string>());
      else if (key == "labels") cfg.labels = resolve(v.get<std::string>());
      else if (key == "name") cfg.name = v.get<std::string>();
      else if (key == "threshold") cfg.threshold = rational(v);
      else if (key == "k") cfg.train_count = v.get<size_t>();
      else if (key == "alpha") cfg.alpha = rational(v);
      else if (key == "beta") cfg.beta = rational(v);
      else if (key == "corrupt") cfg.corrupt = rational(v);
      else if (key == "seed") cfg.seed = v.get<uint64_t>();
      else if (key == "time_limit") cfg.time_limit_secs = v.get<double>();
      else if (key == "mode") cfg.mode = parse_mode(v.get<std::string>());
      else throw Error("bench config: unknown key '" + key + "'");
    }
    configs.push_back(std::move(cfg));
  }
  return configs;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Train binarized linear classifiers by integer programming"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string alpha = "1", beta, corrupt = "0", threshold = "255/2", mode = "mip", format = "lp";
  std::filesystem::path model_path, config_path;
  size_t width = 0, height = 0;
  bool portable_names = false;

  auto data_flags = [&](CLI::App* sub) {
    sub->add_option("--images", cfg.images, "IDX image file (optionally gzipped)");
    sub->add_option("--labels", cfg.labels, "IDX label file (optionally gzipped)");
    sub->add_option("--csv", cfg.csv, "CSV of 0/1 features followed by the label");
    sub->add_option("--threshold", threshold, "pixel binarization threshold (bit = value > t)");
  };
  auto model_flags = [&](CLI::App* sub) {
    data_flags(sub);
    sub->add_option("--k", cfg.train_count, "training instances")->required();
    sub->add_option("--alpha", alpha, "reward on positive margins (rational)");
    sub->add_option("--beta", beta, "penalty on negative margins (default 2*alpha)");
    sub->add_option("--corrupt", corrupt, "fraction of training labels to corrupt");
    sub->add_option("--seed", cfg.seed, "seed for the split and the corruption");
    sub->add_option("--mode", mode, "encoding: mip or pbo")->check(CLI::IsMember({"mip", "pbo"}));
  };

  auto* train_cmd = app.add_subcommand("train", "solve the training problem and write artifacts");
  model_flags(train_cmd);
  train_cmd->add_option("--time-limit", cfg.time_limit_secs, "seconds");
  train_cmd->add_option("--out", cfg.out, "output directory")->required();

  auto* eval_cmd = app.add_subcommand("eval", "print the EvalReport of a model on a dataset");
  data_flags(eval_cmd);
  eval_cmd->add_option("--model", model_path, "model JSON")->required();

  auto* export_cmd = app.add_subcommand("export", "write the training problem as LP, MPS or OPB");
  model_flags(export_cmd);
  export_cmd->add_option("--format", format)->check(CLI::IsMember({"lp", "mps", "opb"}));
  export_cmd->add_option("--out", cfg.out, "output file")->required();
  export_cmd->add_flag("--portable-names", portable_names,
                       "LP only: rewrite '+'/'-' in names for CPLEX-LP readers");

  auto* render_cmd = app.add_subcommand("render", "write one PGM weight map per class");
  render_cmd->add_option("--model", model_path, "model JSON")->required();
  render_cmd->add_option("--width", width)->required();
  render_cmd->add_option("--height", height)->required();
  render_cmd->add_option("--out", cfg.out, "output directory")->required();

  auto* bench_cmd = app.add_subcommand("bench", "run a list of configs and write a CSV summary");
  bench_cmd->add_option("--config", config_path, "JSON array of run configs")->required();
  bench_cmd->add_option("--out", cfg.out, "CSV path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    cfg.alpha = Rational::parse(alpha);
    if (!beta.empty()) cfg.beta = Rational::parse(beta);
    cfg.corrupt = Rational::parse(corrupt);
    cfg.threshold = Rational::parse(threshold);
    cfg.mode = parse_mode(mode);
  } catch (const Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  const bool needs_data = train_cmd->parsed() || eval_cmd->parsed() || export_cmd->parsed();
  if (needs_data && cfg.csv.empty() && (cfg.images.empty() || cfg.labels.empty())) {
    std::cerr << "usage error: give --csv or both --images and --labels\n";
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(cfg);
    if (eval_cmd->parsed()) return cmd_eval(model_path, cfg);
    if (export_cmd->parsed()) return cmd_export(cfg, format, portable_names);
    if (render_cmd->parsed()) return cmd_render(model_path, width, height, cfg.out);
    return cmd_bench(load_bench_configs(config_path), cfg.out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace binreg

// Acceptance gate: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <functional>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>

#include <spdlog/fmt/fmt.h>

#include "binreg/branch_bound.hpp"
#include "binreg/cli.hpp"
#include "binreg/emitters.hpp"
#include "binreg/evaluator.hpp"
#include "binreg/logging.hpp"
#include "json.hpp"
#include "support.hpp"

namespace binreg {
namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (failures.size() < 5) failures.push_back(what);
    }
  }
};

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

SolveConfig solver_config(const Encoding& enc, double time_limit = 600) {
  SolveConfig cfg;
  cfg.time_limit_secs = time_limit;
  cfg.log_interval_secs = 0;
  cfg.heuristic = make_rounding_heuristic(enc);
  return cfg;
}

bool trace_monotone(const MipResult& r) {
  for (size_t k = 1; k < r.trace.size(); ++k) {
    if (r.trace[k].bound < r.trace[k - 1].bound) return false;
    if (r.trace[k - 1].incumbent &&
        (!r.trace[k].incumbent || *r.trace[k].incumbent > *r.trace[k - 1].incumbent)) {
      return false;
    }
  }
  return true;
}

// Solved tiny instance shared by criteria 1-3.
struct TinyRun {
  testing::TinyCase tc;
  Encoding mip;
  Encoding pbo;
  MipResult mip_result;
  MipResult pbo_result;
  std::optional<OracleResult> oracle;
  int64_t direct = 0;
};

const std::vector<TinyRun>& tiny_runs() {
  static const std::vector<TinyRun> runs = [] {
    std::vector<TinyRun> out;
    for (const auto& tc : testing::tiny_suite(24)) {
      TinyRun r{tc, build_mip(tc.train, tc.hp), build_pbo(tc.train, tc.hp, default_bounds(tc.train)), {}, {}, {}, 0};
      out.push_back(std::move(r));
    }
    for (TinyRun& r : out) {
      r.mip_result = solve_mip(r.mip.model, solver_config(r.mip));
      r.pbo_result = solve_mip(r.pbo.model, solver_config(r.pbo));
      r.oracle = brute_force_oracle(r.mip.model, enumerable_variables(r.mip), completion_from_weights(r.mip));
      r.direct = testing::direct_optimum(r.tc.train, r.tc.hp).objective;
    }
    return out;
  }();
  return runs;
}

Verdict oracle_equivalence() {
  Verdict v;
  const auto start = Clock::now();
  const auto& runs = tiny_runs();
  size_t match = 0;
  for (size_t n = 0; n < runs.size(); ++n) {
    const TinyRun& r = runs[n];
    const bool ok = r.oracle && r.mip_result.status == MipStatus::kOptimal &&
                    r.mip_result.objective == r.oracle->objective && r.oracle->objective == r.direct;
    match += ok;
    v.check(ok, fmt::format("instance {}: solver {} oracle {} direct {}", n,
                            r.mip_result.objective.value_or(0), r.oracle ? r.oracle->objective : 0, r.direct));
  }
  const double secs = since(start);
  v.check(runs.size() >= 20, "fewer than 20 instances");
  v.check(secs < 60, fmt::format("took {:.1f} s", secs));
  v.detail = fmt::format("{}/{} tiny instances: solver objective == exhaustive oracle == direct enumeration ({:.2f} s)",
                         match, runs.size(), secs);
  return v;
}

Verdict mip_pbo_agreement() {
  Verdict v;
  size_t match = 0;
  const auto& runs = tiny_runs();
  for (size_t n = 0; n < runs.size(); ++n) {
    const TinyRun& r = runs[n];
    const bool ok = r.pbo.model.all_binary() && r.pbo_result.status == MipStatus::kOptimal &&
                    r.pbo_result.objective == r.mip_result.objective;
    match += ok;
    v.check(ok, fmt::format("instance {}: PBO {} MIP {}", n, r.pbo_result.objective.value_or(0),
                            r.mip_result.objective.value_or(0)));
  }
  v.detail = fmt::format("{}/{} tiny instances: PBO optimum == MIP optimum", match, runs.size());
  return v;
}

// e+ = max(0, m) and e- = max(0, -m) for every instance of an assignment.
bool complementary(const Encoding& enc, const BinaryDataset& ds, const Assignment& x) {
  const TrainedModel model = decode_solution(enc.model, enc.layout, x);
  for (size_t i = 0; i < ds.size(); ++i) {
    const int64_t m = margin(model, ds.instances[i].x, ds.instances[i].label);
    const std::span<const int64_t> point(x);
    if (enc.layout.margin_plus[i].value(point) != std::max<int64_t>(0, m)) return false;
    if (enc.layout.margin_minus[i].value(point) != std::max<int64_t>(0, -m)) return false;
  }
  return true;
}

Verdict complementarity() {
  Verdict v;
  size_t checked = 0;
  const auto& runs = tiny_runs();
  for (size_t n = 0; n < runs.size(); ++n) {
    const TinyRun& r = runs[n];
    if (!r.oracle) {
      v.check(false, fmt::format("instance {} has no oracle solution", n));
      continue;
    }
    v.check(complementary(r.mip, r.tc.train, r.oracle->assignment), fmt::format("oracle assignment {}", n));
    v.check(complementary(r.mip, r.tc.train, *r.mip_result.incumbent), fmt::format("MIP incumbent {}", n));
    v.check(complementary(r.pbo, r.tc.train, *r.pbo_result.incumbent), fmt::format("PBO incumbent {}", n));
    checked += 3;
  }
  v.detail = fmt::format("{} optimal assignments (oracle, MIP, PBO) on {} instances satisfy e+ = max(0,m), e- = max(0,-m)",
                         checked, runs.size());
  return v;
}

Verdict desk_scale() {
  Verdict v;
  std::vector<std::string> parts;
  for (const char* name : {"flags_like", "ubuntu48_like", "ubuntu93_like", "ubuntu153_like"}) {
    RunConfig cfg;
    cfg.csv = testing::source_dir() / "data/synthetic" / (std::string(name) + ".csv");
    cfg.train_count = 10;
    cfg.alpha = Rational(2);
    cfg.beta = Rational(5);
    cfg.time_limit_secs = 600;
    const TrainOutcome o = train(cfg);
    const bool ok = o.model && o.result.status == MipStatus::kOptimal && o.result.gap == 0.0 &&
                    o.train_report->reduction_pct >= 0 && o.train_report->reduction_pct <= 100;
    v.check(ok, fmt::format("{}: status {} gap {}", name, to_string(o.result.status), o.result.gap));
    parts.push_back(fmt::format("{} gap={} t={:.2f}s reduction={:.2f}%", name, o.result.gap, o.result.runtime_secs,
                                o.model ? o.train_report->reduction_pct : -1.0));
  }
  v.detail = fmt::format("k=10, alpha=2, beta=5: {}", fmt::join(parts, "; "));
  return v;
}

Verdict mnist() {
  Verdict v;
  RunConfig cfg;
  const auto dir = testing::source_dir() / "data/mnist5k";
  cfg.images = dir / "images-idx3-ubyte.gz";
  cfg.labels = dir / "labels-idx1-ubyte.gz";
  cfg.threshold = Rational(255, 2);
  cfg.train_count = 20;
  cfg.alpha = Rational(5);
  cfg.beta = Rational(10);
  cfg.time_limit_secs = 3600;
  const TrainOutcome o = train(cfg);
  if (!o.model) {
    v.check(false, "no incumbent");
    v.detail = fmt::format("status {}", to_string(o.result.status));
    return v;
  }
  const bool solved = o.result.gap == 0.0;
  const bool anytime = trace_monotone(o.result);
  v.check(solved || anytime, "neither gap 0 nor a monotone bound trace");
  v.check(anytime, "bound trace is not monotone");
  const double acc = o.test_report->accuracy;
  v.check(acc >= 0.30, fmt::format("test accuracy {:.4f} < 0.30", acc));
  v.detail = fmt::format("k=20: status={} objective={} gap={} t={:.1f}s nodes={} test_acc={:.4f} on {} rows reduction={:.2f}%",
                         to_string(o.result.status), *o.result.objective, o.result.gap, o.result.runtime_secs,
                         o.result.nodes, acc, o.test_report->total, o.train_report->reduction_pct);
  return v;
}

Verdict corruption() {
  Verdict v;
  auto cases = testing::tiny_suite(24);
  // Tiny rows round 0.1*k to 0; these sizes make the count non-zero.
  Rng rng(4242);
  for (size_t k : {5u, 10u, 15u, 20u, 10u, 20u}) {
    cases.push_back({testing::random_dataset(rng, 1 + rng.below(3), 2 + static_cast<int>(rng.below(2)), k),
                     testing::suite_hyperparams()[k % 3]});
  }
  size_t optimal = 0, corrupted_total = 0;
  double degradation = 0.0;
  for (size_t n = 0; n < cases.size(); ++n) {
    const auto& tc = cases[n];
    const size_t k = tc.train.size();
    const BinaryDataset noisy = corrupt_labels(tc.train, {Rational(1, 10), 1000 + n});
    size_t changed = 0;
    for (size_t i = 0; i < k; ++i) changed += noisy.instances[i].label != tc.train.instances[i].label;
    const size_t expected = (k + 5) / 10;  // round(0.1 k), halves up
    v.check(changed == expected, fmt::format("case {}: {} labels changed, expected {}", n, changed, expected));
    corrupted_total += changed;

    const Encoding clean_enc = build_mip(tc.train, tc.hp);
    const Encoding noisy_enc = build_mip(noisy, tc.hp);
    const MipResult clean = solve_mip(clean_enc.model, solver_config(clean_enc));
    const MipResult dirty = solve_mip(noisy_enc.model, solver_config(noisy_enc));
    const bool ok = dirty.status == MipStatus::kOptimal && clean.status == MipStatus::kOptimal &&
                    dirty.objective == testing::direct_optimum(noisy, tc.hp).objective;
    v.check(ok, fmt::format("case {}: corrupted run status {}", n, to_string(dirty.status)));
    optimal += ok;
    if (ok) {
      // Accuracy against the true labels.
      const double a = accuracy(decode_solution(clean_enc.model, clean_enc.layout, *clean.incumbent), tc.train).accuracy;
      const double b = accuracy(decode_solution(noisy_enc.model, noisy_enc.layout, *dirty.incumbent), tc.train).accuracy;
      degradation += a - b;
    }
  }
  v.detail = fmt::format("{}/{} corrupted instances solved to optimality, {} labels flipped in total, "
                         "mean accuracy drop on true labels {:.4f}",
                         optimal, cases.size(), corrupted_total, degradation / static_cast<double>(cases.size()));
  return v;
}

Verdict formats() {
  Verdict v;
  RunConfig cfg;
  cfg.csv = testing::source_dir() / "data/synthetic/flags_like.csv";
  cfg.train_count = 10;
  cfg.alpha = Rational(2);
  cfg.beta = Rational(5);
  const Encoding flags = encode(cfg, prepare_data(cfg).train);
  const auto toy = testing::toy_2x2x3();
  const Encoding toy_pbo = build_pbo(toy, Hyperparams{1, 2}, default_bounds(toy));

  size_t compared = 0;
  for (const Encoding* enc : {&flags, &toy_pbo}) {
    std::ostringstream lp_out, mps_out;
    write_lp(enc->model, lp_out);
    write_mps(enc->model, mps_out);
    std::istringstream lp_in(lp_out.str()), mps_in(mps_out.str());
    const ModelIR from_lp = parse_lp(lp_in);
    const ModelIR from_mps = parse_mps(mps_in);
    Rng rng(7);
    for (int k = 0; k < 100; ++k) {
      Assignment x;
      for (const Variable& var : enc->model.variables()) {
        x.push_back(var.lower + static_cast<int64_t>(rng.below(static_cast<uint64_t>(var.upper - var.lower + 1))));
      }
      if (k % 4 == 0) {  // a quarter of the points are feasible completions
        TrainedModel p = TrainedModel::zeros(enc->layout.feature_count, enc->layout.class_count);
        for (auto& w : p.weights) w = static_cast<int8_t>(static_cast<int>(rng.below(3)) - 1);
        x = complete_assignment(*enc, p);
      }
      const Evaluation e = evaluate(enc->model, x);
      for (const ModelIR* parsed : {&from_lp, &from_mps}) {
        const Evaluation p = evaluate(*parsed, x);
        v.check(p.objective == e.objective && p.feasible == e.feasible && p.violated == e.violated,
                fmt::format("point {} evaluates differently after round-trip", k));
        ++compared;
      }
    }
  }

  std::ostringstream opb;
  write_opb(toy_pbo.model, opb);
  const std::string golden = testing::slurp(testing::source_dir() / "tests/golden/toy_pbo.opb");
  v.check(opb.str() == golden, "OPB output differs from tests/golden/toy_pbo.opb");

  // PB competition grammar for our subset: comments, one objective, >= rows.
  const std::regex comment(R"(\*.*)");
  const std::regex objective(R"(min:( [+-][0-9]+ x[1-9][0-9]*)+ ;)");
  const std::regex row(R"(([+-][0-9]+ x[1-9][0-9]* )+>= -?[0-9]+ ;)");
  const std::regex header(R"(\* #variable= ([0-9]+) #constraint= ([0-9]+))");
  std::istringstream lines(golden);
  std::string line, first;
  std::getline(lines, first);
  std::smatch hm;
  v.check(std::regex_match(first, hm, header), "OPB header line malformed");
  size_t rows = 0, objectives = 0;
  while (std::getline(lines, line)) {
    if (std::regex_match(line, row)) {
      ++rows;
    } else if (std::regex_match(line, objective)) {
      ++objectives;
      v.check(rows == 0, "objective after constraints");
    } else {
      v.check(std::regex_match(line, comment), "OPB line does not parse: " + line.substr(0, 60));
    }
  }
  if (hm.size() == 3) {
    v.check(std::stoul(hm[1]) == toy_pbo.model.num_variables(), "#variable count wrong");
    v.check(std::stoul(hm[2]) == rows, "#constraint count wrong");
  }
  v.check(objectives == 1, "expected exactly one objective line");
  v.detail = fmt::format("{} LP/MPS round-trip evaluations identical (100 points x 2 models x 2 formats); "
                         "toy OPB matches golden file, {} rows valid", compared, rows);
  return v;
}

int run_cli_args(std::vector<std::string> args) {
  args.insert(args.begin(), "binreg");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string without_runtime(const std::string& result_json) {
  auto j = nlohmann::json::parse(result_json);
  j.erase("runtime_secs");
  for (auto& s : j["trace"]) s.erase("time_secs");
  return j.dump();
}

Verdict determinism() {
  Verdict v;
  std::vector<std::string> compared;
  for (const char* data : {"flags_like", "ubuntu153_like"}) {
    std::vector<std::filesystem::path> dirs;
    for (int run = 0; run < 2; ++run) {
      dirs.push_back(testing::fresh_dir(fmt::format("accept_det_{}_{}", data, run)));
      const int code = run_cli_args({"train", "--csv",
                                     (testing::source_dir() / "data/synthetic" / (std::string(data) + ".csv")).string(),
                                     "--k", "20", "--alpha", "2", "--beta", "5", "--corrupt", "0.1", "--seed", "7",
                                     "--out", dirs.back().string()});
      v.check(code == kExitOk, fmt::format("{} run {} exit code {}", data, run, code));
    }
    for (const char* f : {"model.json", "train_report.json", "test_report.json", "train.csv"}) {
      const std::string a = testing::slurp(dirs[0] / f);
      v.check(!a.empty() && a == testing::slurp(dirs[1] / f), fmt::format("{}/{} differs", data, f));
    }
    v.check(without_runtime(testing::slurp(dirs[0] / "result.json")) ==
                without_runtime(testing::slurp(dirs[1] / "result.json")),
            fmt::format("{}/result.json differs outside runtime fields", data));
    compared.push_back(data);
  }
  v.detail = fmt::format("two cmd_train runs (k=20, corrupt 0.1, seed 7) on {} gave byte-identical model, reports, "
                         "training CSV, and results up to runtime fields", fmt::join(compared, ", "));
  return v;
}

Verdict rendering() {
  Verdict v;
  const auto dir = testing::fresh_dir("accept_render");
  Rng rng(9);
  TrainedModel m = TrainedModel::zeros(784, 10);
  for (auto& w : m.weights) w = static_cast<int8_t>(static_cast<int>(rng.below(3)) - 1);
  save_model(m, dir / "random.json");
  v.check(run_cli_args({"render", "--model", (dir / "random.json").string(), "--width", "28", "--height", "28",
                        "--out", (dir / "random").string()}) == kExitOk,
          "render failed");
  const std::string header = "P5\n28 28\n255\n";
  size_t files = 0;
  std::set<unsigned char> seen;
  for (int c = 0; c < 10; ++c) {
    const std::string img = testing::slurp(dir / "random" / fmt::format("class_{}.pgm", c));
    if (img.size() != header.size() + 784 || img.compare(0, header.size(), header) != 0) {
      v.check(false, fmt::format("class_{}.pgm has a bad header or size", c));
      continue;
    }
    ++files;
    for (size_t f = 0; f < 784; ++f) {
      const auto byte = static_cast<unsigned char>(img[header.size() + f]);
      seen.insert(byte);
      const int w = m.weight(f, c);
      v.check(byte == (w > 0 ? 0 : w < 0 ? 255 : 128), fmt::format("class {} pixel {} wrong", c, f));
    }
  }
  v.check(seen == std::set<unsigned char>{0, 128, 255}, "pixel values outside {0,128,255}");

  // One +1 weight at row 3, column 17 of class 6.
  TrainedModel single = TrainedModel::zeros(784, 10);
  single.set_weight(3 * 28 + 17, 6, 1);
  save_model(single, dir / "single.json");
  v.check(run_cli_args({"render", "--model", (dir / "single.json").string(), "--width", "28", "--height", "28",
                        "--out", (dir / "single").string()}) == kExitOk,
          "render failed");
  for (int c = 0; c < 10; ++c) {
    const std::string img = testing::slurp(dir / "single" / fmt::format("class_{}.pgm", c));
    for (size_t f = 0; f < 784; ++f) {
      const auto byte = static_cast<unsigned char>(img.at(header.size() + f));
      const bool black = c == 6 && f / 28 == 3 && f % 28 == 17;
      v.check(byte == (black ? 0 : 128), fmt::format("single-weight map class {} pixel {}", c, f));
    }
  }
  v.detail = fmt::format("{} 28x28 P5 maps with values {{0,128,255}}; single +1 weight lands at row 3, column 17", files);
  return v;
}

}  // namespace
}  // namespace binreg

int main(int argc, char** argv) {
  using namespace binreg;
  if (std::getenv("BINREG_LOG") == nullptr) binreg::log().set_level(spdlog::level::warn);
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"MIP-PBO agreement", mip_pbo_agreement},
      {"complementarity", complementarity},
      {"desk-scale gap (Flags/Ubuntu k=10)", desk_scale},
      {"MNIST k=20", mnist},
      {"label corruption", corruption},
      {"format round-trips", formats},
      {"determinism", determinism},
      {"weight rendering", rendering},
  };
  std::set<int> selected;
  for (int a = 1; a < argc; ++a) selected.insert(std::atoi(argv[a]));

  int failed = 0;
  for (size_t n = 0; n < criteria.size(); ++n) {
    const int id = static_cast<int>(n) + 1;
    if (!selected.empty() && !selected.contains(id)) continue;
    Verdict v;
    try {
      v = criteria[n].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[n].first << ": " << v.detail << '\n';
    for (const auto& f : v.failures) std::cout << "       " << f << '\n';
    std::cout.flush();
  }
  return failed == 0 ? 0 : 1;
}

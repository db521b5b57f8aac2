#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "binreg/branch_bound.hpp"
#include "binreg/encoder.hpp"
#include "binreg/evaluator.hpp"
#include "binreg/model_ir.hpp"

namespace binreg {

// CPLEX LP text. Coefficients are exact integers; a +1 coefficient prints as
// the bare name and negatives as "- <abs> <name>". Every variable is listed
// under Bounds in index order, which is the order parse_lp restores.
//
// Names are written verbatim by default, so w+_0_0 stays w+_0_0 and the file
// reads back into the same model. CPLEX-LP readers reject '+' and '-' in
// names; portable_names rewrites them ('+' -> 'p', '-' -> 'm', any other
// illegal character -> '_') and throws if two names collide.
struct LpWriteOptions {
  bool portable_names = false;
};
void write_lp(const ModelIR& model, std::ostream& out, LpWriteOptions options = {});
void write_lp(const ModelIR& model, const std::filesystem::path& path, LpWriteOptions options = {});
ModelIR parse_lp(std::istream& in);
ModelIR parse_lp(const std::filesystem::path& path);

// MPS with the classic column layout. Names longer than the fixed fields
// widen the line instead of being cut, so parse_mps splits on whitespace.
// All columns sit in one INTORG/INTEND block and get explicit LO/UP bounds.
void write_mps(const ModelIR& model, std::ostream& out);
void write_mps(const ModelIR& model, const std::filesystem::path& path);
ModelIR parse_mps(std::istream& in);
ModelIR parse_mps(const std::filesystem::path& path);

// OPB for pseudo-Boolean solvers: variables are renamed x1..xn in index
// order, every row becomes ">=" ("<=" rows are negated, "=" rows split in
// two). Throws if a variable is not binary. The path overload also writes
// "<path>.map" with one "xK name" line per variable.
void write_opb(const ModelIR& model, std::ostream& out);
void write_opb(const ModelIR& model, const std::filesystem::path& path);

struct SolutionFile {
  std::map<std::string, int64_t> assignments;  // every model variable
  std::optional<double> objective;
};

// Reads "<name> <value>" lines or OPB "v x1 -x2 ..." lines (xK is the K-th
// model variable). "o <value>" and "objective <value>" set the objective;
// lines starting with c, s, # or * are skipped. Missing variables default
// to their lower bound with a warning.
SolutionFile parse_solution(std::istream& in, const ModelIR& model);
SolutionFile parse_solution(const std::filesystem::path& path, const ModelIR& model);
Assignment to_assignment(const SolutionFile& solution, const ModelIR& model);

// Binary PGM of one class column: 0 for +1, 255 for -1, 128 for 0, pixel
// (row, col) is feature row * width + col.
void render_weights_pgm(const TrainedModel& model, size_t c, size_t width, size_t height,
                        std::ostream& out);
void render_weights_pgm(const TrainedModel& model, size_t c, size_t width, size_t height,
                        const std::filesystem::path& path);

// {"F_size": F, "C_size": C, "W": [[...C entries] x F], "b": [...]}.
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

std::string report_to_json(const EvalReport& report);
// Runtime-dependent fields are grouped so they can be dropped for diffs.
std::string result_to_json(const MipResult& result, bool include_trace = true);

// Writes `text` plus a trailing newline.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace binreg

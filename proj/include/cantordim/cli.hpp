#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cantordim/moebius.hpp"
#include "cantordim/neumann.hpp"
#include "cantordim/result.hpp"
#include "json.hpp"

namespace cantordim {

/// A problem definition: {"b": int, "d1": [ints], "d2": [ints],
/// "measure": "lebesgue" | [reals], "phi": optional [A,B,C,D]}.
struct Problem {
  DigitPair pair;
  ProductMeasure measure;
  std::optional<MoebiusMap> phi;
};

Problem parse_problem(const nlohmann::json& doc);
Problem load_problem(const std::string& path);

struct DimOptions {
  double eps = 1e-6;
  std::optional<Method> method;  // forced branch when set
  std::uint64_t seed = 0;
  long long mc_steps = 1'000'000;
  int mc_trials = 20;
  int search_budget = 20000;
};

/// Method-selection pipeline: degenerate if some mu-valid matrix is
/// rank-one, else the affine co-invariant recurrence if a common fixed
/// point exists, else Neumann with the supplied or a searched phi, else
/// Monte Carlo with a warning.
LyapunovResult run_dim(const Problem& problem, const DimOptions& opts,
                       std::vector<std::string>* warnings = nullptr);

/// JSON text with all reals printed to 17 significant digits; keys are
/// emitted in nlohmann's (sorted) order, so identical inputs give
/// bit-identical output.
std::string dump_json17(const nlohmann::json& j, int indent = 2);

nlohmann::json result_to_json(const LyapunovResult& res, int b);
nlohmann::json nac_to_json(const NacReport& rep);

/// Entry point shared by the binary and the tests; writes JSON to `out`,
/// diagnostics to `err`, and returns the process exit code (0 ok, 2 parse,
/// 3 method-inapplicable, 4 numerical guard).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cantordim

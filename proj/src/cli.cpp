#include "cantordim/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "cantordim/degenerate.hpp"
#include "cantordim/errors.hpp"
#include "cantordim/oracle.hpp"
#include "cantordim/phisearch.hpp"
#include "cantordim/recurring.hpp"

namespace cantordim {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void dump_rec(const json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + json(it.key()).dump() + ": ";
        dump_rec(it.value(), out, indent, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        dump_rec(v, out, indent, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float:
      out += fmt_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

MoebiusMap phi_from_json(const json& arr) {
  if (!arr.is_array() || arr.size() != 4)
    throw CantorError(ErrorKind::ParseError, "phi must be an array [A, B, C, D]");
  for (const auto& v : arr)
    if (!v.is_number()) throw CantorError(ErrorKind::ParseError, "phi entries must be numbers");
  return MoebiusMap{arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>(),
                    arr[3].get<double>()};
}

}  // namespace

std::string dump_json17(const json& j, int indent) {
  std::string out;
  dump_rec(j, out, indent, 0);
  return out;
}

Problem parse_problem(const json& doc) {
  try {
    if (!doc.is_object()) throw CantorError(ErrorKind::ParseError, "problem must be a JSON object");
    Problem p;
    if (!doc.contains("b") || !doc["b"].is_number_integer())
      throw CantorError(ErrorKind::ParseError, "field 'b' must be an integer");
    p.pair.b = doc["b"].get<int>();
    for (const char* key : {"d1", "d2"}) {
      if (!doc.contains(key) || !doc[key].is_array())
        throw CantorError(ErrorKind::ParseError, std::string("field '") + key + "' must be an array");
      auto& dst = (key[1] == '1') ? p.pair.d1 : p.pair.d2;
      for (const auto& v : doc[key]) {
        if (!v.is_number_integer())
          throw CantorError(ErrorKind::ParseError, std::string(key) + " entries must be integers");
        dst.push_back(v.get<int>());
      }
    }
    if (!doc.contains("measure")) {
      p.measure = lebesgue(p.pair.b);
    } else if (doc["measure"].is_string()) {
      if (doc["measure"].get<std::string>() != "lebesgue")
        throw CantorError(ErrorKind::ParseError, "measure string must be \"lebesgue\"");
      p.measure = lebesgue(p.pair.b);
    } else if (doc["measure"].is_array()) {
      for (const auto& v : doc["measure"]) {
        if (!v.is_number())
          throw CantorError(ErrorKind::ParseError, "measure entries must be numbers");
        p.measure.p.push_back(v.get<double>());
      }
    } else {
      throw CantorError(ErrorKind::ParseError, "measure must be \"lebesgue\" or a list of reals");
    }
    if (doc.contains("phi")) p.phi = phi_from_json(doc["phi"]);

    p.pair.validate();
    p.measure.validate();
    if (p.measure.size() != p.pair.b)
      throw CantorError(ErrorKind::ParseError, "measure must have exactly b weights");
    return p;
  } catch (const CantorError&) {
    throw;
  } catch (const std::exception& e) {
    throw CantorError(ErrorKind::ParseError, e.what());
  }
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CantorError(ErrorKind::ParseError, "cannot open problem file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw CantorError(ErrorKind::ParseError, e.what());
  }
  return parse_problem(doc);
}

namespace {

LyapunovResult run_monte_carlo(const IfsSystem& sys, const DimOptions& opts,
                               std::vector<std::string>* warnings) {
  if (warnings && !uniqueness_conditions_hold(sys.mats, sys.measure))
    warnings->push_back(
        "no mu-valid matrix is rank-one or primitive: the stationary measure may be "
        "non-unique and the sampled estimate may converge slowly");
  McEstimate est = mc_lyapunov(sys.mats, sys.measure, opts.mc_steps, opts.mc_trials, opts.seed);
  LyapunovResult res;
  res.lambda = est.estimate;
  res.dimension = dim_from_lambda(est.estimate, sys.b);
  res.method = Method::MonteCarlo;
  res.error_bound = 3.0 * est.standard_error;
  res.metadata = {
      {"steps", opts.mc_steps},
      {"trials", opts.mc_trials},
      {"seed", opts.seed},
      {"standard_error", est.standard_error},
  };
  return res;
}

LyapunovResult run_neumann_branch(const IfsSystem& sys, const Problem& problem,
                                  const DimOptions& opts, std::vector<std::string>* warnings,
                                  bool forced) {
  if (problem.phi) {
    NacReport rep = nac_report(sys, *problem.phi);
    if (rep.passed) return lyapunov_neumann(sys, *problem.phi, opts.eps);
    if (warnings)
      warnings->push_back("supplied phi fails the admissibility condition (" + rep.reason +
                          "); searching for another");
  }
  if (auto found = search_phi(sys, opts.search_budget, opts.seed)) {
    LyapunovResult res = lyapunov_neumann(sys, found->first, opts.eps);
    res.metadata["phi_searched"] = true;
    return res;
  }
  if (forced)
    throw CantorError(ErrorKind::MethodInapplicable, "no admissible phi supplied or found");
  throw CantorError(ErrorKind::MethodInapplicable, "neumann branch not applicable");
}

}  // namespace

LyapunovResult run_dim(const Problem& problem, const DimOptions& opts,
                       std::vector<std::string>* warnings) {
  IfsSystem sys = make_system(problem.pair, problem.measure);

  if (opts.method) {
    switch (*opts.method) {
      case Method::Degenerate: {
        auto j = is_degenerate(sys.mats, sys.measure);
        if (!j)
          throw CantorError(ErrorKind::MethodInapplicable, "no mu-valid rank-one matrix");
        return lyapunov_degenerate(sys, *j, opts.eps);
      }
      case Method::Recurring: {
        auto data = find_affine_conjugator(sys);
        if (!data)
          throw CantorError(ErrorKind::MethodInapplicable,
                            "no affine co-invariant phi (no common fixed point outside [-1,1])");
        return lyapunov_recurring(sys, *data, opts.eps);
      }
      case Method::Neumann:
        return run_neumann_branch(sys, problem, opts, warnings, /*forced=*/true);
      case Method::MonteCarlo:
        return run_monte_carlo(sys, opts, warnings);
    }
  }

  if (auto j = is_degenerate(sys.mats, sys.measure)) return lyapunov_degenerate(sys, *j, opts.eps);
  if (auto data = find_affine_conjugator(sys)) return lyapunov_recurring(sys, *data, opts.eps);
  try {
    return run_neumann_branch(sys, problem, opts, warnings, /*forced=*/false);
  } catch (const CantorError& e) {
    if (e.kind() != ErrorKind::MethodInapplicable) throw;
  }
  if (warnings)
    warnings->push_back(
        "no exact method applies; falling back to Monte Carlo (statistical error only)");
  return run_monte_carlo(sys, opts, warnings);
}

json result_to_json(const LyapunovResult& res, int b) {
  return json{
      {"lambda", res.lambda},
      {"dimension", res.dimension},
      {"method", method_name(res.method)},
      {"error_bound", res.error_bound},
      {"b", b},
      {"metadata", res.metadata},
  };
}

json nac_to_json(const NacReport& rep) {
  json per = json::array();
  for (const auto& pi : rep.per)
    per.push_back({
        {"i", pi.i},
        {"u1", pi.u1},
        {"u2", pi.u2},
        {"u3", pi.u3},
        {"m", pi.m},
        {"ratio_map", pi.ratio_map},
    });
  return json{
      {"passed", rep.passed},
      {"inconclusive", rep.inconclusive},
      {"reason", rep.reason},
      {"rho1", rep.rho1},
      {"rho2", rep.rho2},
      {"rho3", rep.rho3},
      {"rho4", rep.rho4},
      {"ratio_phi", rep.ratio_phi},
      {"max_ratio_map", rep.max_ratio_map},
      {"r", rep.r},
      {"E", rep.E},
      {"norm_bound", rep.norm_bound},
      {"margin", rep.margin},
      {"per_index", per},
  };
}

namespace {

std::optional<Method> parse_method(const std::string& name) {
  if (name.empty() || name == "auto") return std::nullopt;
  if (name == "degenerate") return Method::Degenerate;
  if (name == "recurring") return Method::Recurring;
  if (name == "neumann") return Method::Neumann;
  if (name == "monte-carlo" || name == "monte_carlo") return Method::MonteCarlo;
  throw CantorError(ErrorKind::ParseError, "unknown method: " + name);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lyapunov exponents and Hausdorff dimensions of intersected "
               "digit-restricted Cantor sets"};
  app.name("cantordim");
  app.require_subcommand(1);
  bool json_flag = false;  // output is always JSON; accepted for compatibility
  app.add_flag("--json", json_flag, "emit JSON (the default and only format)");

  std::string file, method_name_arg = "auto";
  double eps = 1e-6;
  std::uint64_t seed = 0;
  long long steps = 1'000'000;
  int trials = 20;
  int budget = 20000;

  CLI::App* dim = app.add_subcommand("dim", "compute lambda and the dimension");
  dim->add_option("--eps", eps, "target error bound");
  dim->add_option("--method", method_name_arg, "auto|degenerate|recurring|neumann|monte-carlo");
  dim->add_option("--seed", seed, "seed for search and Monte Carlo");
  dim->add_option("--steps", steps, "Monte Carlo steps per trial");
  dim->add_option("--trials", trials, "Monte Carlo trials");
  dim->add_option("--budget", budget, "phi search evaluation budget");
  dim->add_option("file", file, "problem JSON file")->required();

  int cls_b = 0, cls_tau = -1, cls_u = -1;
  bool sweep = false;
  CLI::App* classify = app.add_subcommand("classify", "classify a single-missing-digit pair");
  classify->add_option("b", cls_b, "base")->required();
  classify->add_option("tau", cls_tau, "digit missing from D1");
  classify->add_option("u", cls_u, "digit missing from D2");
  classify->add_flag("--sweep", sweep, "classify the whole (tau, u) grid");

  CLI::App* checknac = app.add_subcommand("check-nac", "evaluate the admissibility condition");
  checknac->add_option("file", file, "problem JSON file (must supply phi)")->required();

  CLI::App* searchphi = app.add_subcommand("search-phi", "search for an admissible phi");
  searchphi->add_option("--seed", seed, "search seed");
  searchphi->add_option("--budget", budget, "evaluation budget");
  searchphi->add_option("file", file, "problem JSON file")->required();

  CLI::App* oracle = app.add_subcommand("oracle", "Monte Carlo cross-check");
  oracle->add_option("--steps", steps, "steps per trial");
  oracle->add_option("--trials", trials, "independent trials");
  oracle->add_option("--seed", seed, "seed");
  oracle->add_option("file", file, "problem JSON file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (dim->parsed()) {
      Problem problem = load_problem(file);
      DimOptions opts;
      opts.eps = eps;
      opts.method = parse_method(method_name_arg);
      opts.seed = seed;
      opts.mc_steps = steps;
      opts.mc_trials = trials;
      opts.search_budget = budget;
      std::vector<std::string> warnings;
      LyapunovResult res = run_dim(problem, opts, &warnings);
      json doc = result_to_json(res, problem.pair.b);
      if (!warnings.empty()) doc["warnings"] = warnings;
      out << dump_json17(doc) << "\n";
      return 0;
    }
    if (classify->parsed()) {
      if (sweep) {
        json grid = json::array();
        for (int tau = 0; tau < cls_b; ++tau) {
          json row = json::array();
          for (int u = 0; u < cls_b; ++u)
            row.push_back(classify_missing_one(cls_b, tau, u) == MissingOneClass::KernelExpandable
                              ? "kernel_expandable"
                              : "degenerate");
          grid.push_back(row);
        }
        out << dump_json17(json{{"b", cls_b}, {"grid", grid}}) << "\n";
        return 0;
      }
      if (cls_tau < 0 || cls_u < 0)
        throw CantorError(ErrorKind::ParseError, "classify needs tau and u (or --sweep)");
      const char* cls =
          classify_missing_one(cls_b, cls_tau, cls_u) == MissingOneClass::KernelExpandable
              ? "kernel_expandable"
              : "degenerate";
      out << dump_json17(json{{"b", cls_b}, {"tau", cls_tau}, {"u", cls_u}, {"class", cls}})
          << "\n";
      return 0;
    }
    if (checknac->parsed()) {
      Problem problem = load_problem(file);
      if (!problem.phi)
        throw CantorError(ErrorKind::ParseError, "check-nac needs a phi field in the problem file");
      IfsSystem sys = make_system(problem.pair, problem.measure);
      out << dump_json17(nac_to_json(nac_report(sys, *problem.phi))) << "\n";
      return 0;
    }
    if (searchphi->parsed()) {
      Problem problem = load_problem(file);
      IfsSystem sys = make_system(problem.pair, problem.measure);
      auto found = search_phi(sys, budget, seed);
      json doc{{"found", found.has_value()}};
      if (found) {
        doc["phi"] = {found->first.a, found->first.b, found->first.c, found->first.d};
        doc["report"] = nac_to_json(found->second);
      }
      out << dump_json17(doc) << "\n";
      return 0;
    }
    if (oracle->parsed()) {
      Problem problem = load_problem(file);
      TransferMatrices tm = build_matrices(problem.pair);
      if (!uniqueness_conditions_hold(tm, problem.measure))
        err << "warning: no mu-valid matrix is rank-one or primitive; the stationary "
               "measure may be non-unique and the estimate may converge slowly\n";
      McEstimate est = mc_lyapunov(tm, problem.measure, steps, trials, seed);
      json doc{
          {"estimate", est.estimate},
          {"standard_error", est.standard_error},
          {"dimension", dim_from_lambda(est.estimate, problem.pair.b)},
          {"b", problem.pair.b},
          {"steps", steps},
          {"trials", trials},
          {"seed", seed},
      };
      out << dump_json17(doc) << "\n";
      return 0;
    }
  } catch (const CantorError& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "error: no subcommand\n";
  return 2;
}

}  // namespace cantordim

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "cantordim/cli.hpp"
#include "cantordim/degenerate.hpp"
#include "cantordim/errors.hpp"
#include "cantordim/neumann.hpp"
#include "cantordim/oracle.hpp"
#include "cantordim/phisearch.hpp"
#include "cantordim/recurring.hpp"

namespace py = pybind11;
using namespace cantordim;

namespace {

ProductMeasure measure_from(const py::object& measure, int b) {
  if (measure.is_none()) return lebesgue(b);
  if (py::isinstance<py::str>(measure)) {
    if (measure.cast<std::string>() != "lebesgue")
      throw py::value_error("measure must be 'lebesgue' or a list of weights");
    return lebesgue(b);
  }
  ProductMeasure m{measure.cast<std::vector<double>>()};
  m.validate();
  return m;
}

DigitPair pair_from(int b, const std::vector<int>& d1, const std::vector<int>& d2) {
  DigitPair p{b, d1, d2};
  p.validate();
  return p;
}

MoebiusMap phi_from(const std::vector<double>& coeffs) {
  if (coeffs.size() != 4) throw py::value_error("phi must be [A, B, C, D]");
  return MoebiusMap{coeffs[0], coeffs[1], coeffs[2], coeffs[3]};
}

py::list mats_to_py(const TransferMatrices& tm) {
  py::list out;
  for (const Mat2& m : tm.mats) {
    py::list rows;
    for (int i = 0; i < 2; ++i) {
      py::list row;
      row.append(m(i, 0));
      row.append(m(i, 1));
      rows.append(row);
    }
    out.append(rows);
  }
  return out;
}

py::object json_to_py(const nlohmann::json& j) {
  using json = nlohmann::json;
  switch (j.type()) {
    case json::value_t::object: {
      py::dict d;
      for (auto it = j.begin(); it != j.end(); ++it) d[py::str(it.key())] = json_to_py(it.value());
      return d;
    }
    case json::value_t::array: {
      py::list l;
      for (const auto& v : j) l.append(json_to_py(v));
      return l;
    }
    case json::value_t::string:
      return py::str(j.get<std::string>());
    case json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case json::value_t::number_integer:
      return py::int_(j.get<long long>());
    case json::value_t::number_unsigned:
      return py::int_(j.get<unsigned long long>());
    case json::value_t::number_float:
      return py::float_(j.get<double>());
    default:
      return py::none();
  }
}

py::dict nac_to_py(const NacReport& rep) { return json_to_py(nac_to_json(rep)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lyapunov exponents of random nonnegative 2x2 matrix products and "
            "Hausdorff dimensions of intersected digit-restricted Cantor sets";
  m.attr("__version__") = "0.1.0";

  py::register_exception<CantorError>(m, "CantorError");

  m.def(
      "build_matrices",
      [](int b, const std::vector<int>& d1, const std::vector<int>& d2) {
        return mats_to_py(build_matrices(pair_from(b, d1, d2)));
      },
      py::arg("b"), py::arg("d1"), py::arg("d2"),
      "Transfer matrices A_0..A_{b-1}; entry (i,j) of A_u counts (D1+i+u) & (D2+j*b).");

  m.def(
      "toothless_matrices",
      [](int b, int tau) { return mats_to_py(toothless_matrices(b, tau)); },
      py::arg("b"), py::arg("tau"),
      "Closed-form matrices for D1 = full\\{tau}, D2 = full\\{b-1-tau}.");

  m.def(
      "classify_missing_one",
      [](int b, int tau, int u) {
        return classify_missing_one(b, tau, u) == MissingOneClass::KernelExpandable
                   ? "kernel_expandable"
                   : "degenerate";
      },
      py::arg("b"), py::arg("tau"), py::arg("u"));

  m.def(
      "is_degenerate",
      [](int b, const std::vector<int>& d1, const std::vector<int>& d2,
         const py::object& measure) -> std::optional<int> {
        TransferMatrices tm = build_matrices(pair_from(b, d1, d2));
        return is_degenerate(tm, measure_from(measure, b));
      },
      py::arg("b"), py::arg("d1"), py::arg("d2"), py::arg("measure") = py::none(),
      "Smallest mu-valid index whose matrix has rank one, or None.");

  m.def(
      "induced_map_coefficients",
      [](const std::vector<std::vector<long long>>& mat) {
        if (mat.size() != 2 || mat[0].size() != 2 || mat[1].size() != 2)
          throw py::value_error("matrix must be 2x2");
        Mat2 a;
        a(0, 0) = mat[0][0];
        a(0, 1) = mat[0][1];
        a(1, 0) = mat[1][0];
        a(1, 1) = mat[1][1];
        InducedMap f = induced_map(a);
        py::dict out;
        out["constant"] = f.constant();
        if (f.constant()) out["value"] = f.value;
        out["coefficients"] = py::make_tuple(f.alpha, f.beta, f.gamma, f.delta);
        return out;
      },
      py::arg("matrix"),
      "Moebius coefficients (alpha, beta, gamma, delta) of the induced map on [-1,1].");

  m.def(
      "compute_dimension",
      [](int b, const std::vector<int>& d1, const std::vector<int>& d2,
         const py::object& measure, const py::object& phi, double eps,
         const py::object& method, std::uint64_t seed, long long steps, int trials, int budget) {
        Problem problem;
        problem.pair = pair_from(b, d1, d2);
        problem.measure = measure_from(measure, b);
        if (!phi.is_none()) problem.phi = phi_from(phi.cast<std::vector<double>>());
        DimOptions opts;
        opts.eps = eps;
        opts.seed = seed;
        opts.mc_steps = steps;
        opts.mc_trials = trials;
        opts.search_budget = budget;
        if (!method.is_none()) {
          const std::string name = method.cast<std::string>();
          if (name == "degenerate") opts.method = Method::Degenerate;
          else if (name == "recurring") opts.method = Method::Recurring;
          else if (name == "neumann") opts.method = Method::Neumann;
          else if (name == "monte_carlo" || name == "monte-carlo") opts.method = Method::MonteCarlo;
          else throw py::value_error("unknown method: " + name);
        }
        std::vector<std::string> warnings;
        LyapunovResult res = run_dim(problem, opts, &warnings);
        py::dict out = json_to_py(result_to_json(res, b));
        out["warnings"] = warnings;
        return out;
      },
      py::arg("b"), py::arg("d1"), py::arg("d2"), py::arg("measure") = py::none(),
      py::arg("phi") = py::none(), py::arg("eps") = 1e-6, py::arg("method") = py::none(),
      py::arg("seed") = 0, py::arg("steps") = 1000000, py::arg("trials") = 20,
      py::arg("budget") = 20000,
      "Full pipeline: lambda, dimension lambda/log b, method, error bound.");

  m.def(
      "check_nac",
      [](int b, const std::vector<int>& d1, const std::vector<int>& d2,
         const std::vector<double>& phi, const py::object& measure) {
        IfsSystem sys = make_system(pair_from(b, d1, d2), measure_from(measure, b));
        return nac_to_py(nac_report(sys, phi_from(phi)));
      },
      py::arg("b"), py::arg("d1"), py::arg("d2"), py::arg("phi"),
      py::arg("measure") = py::none());

  m.def(
      "truncation_plan",
      [](int b, const std::vector<int>& d1, const std::vector<int>& d2,
         const std::vector<double>& phi, double eps, const py::object& measure) {
        IfsSystem sys = make_system(pair_from(b, d1, d2), measure_from(measure, b));
        TruncationPlan plan = truncation_plan(nac_report(sys, phi_from(phi)), eps);
        py::dict out;
        out["M"] = plan.M;
        out["N"] = plan.N;
        out["r"] = plan.r;
        out["E"] = plan.E;
        out["R_N"] = plan.R_N;
        out["norm_bound"] = plan.norm_bound;
        return out;
      },
      py::arg("b"), py::arg("d1"), py::arg("d2"), py::arg("phi"), py::arg("eps"),
      py::arg("measure") = py::none());

  m.def(
      "search_phi",
      [](int b, const std::vector<int>& d1, const std::vector<int>& d2,
         const py::object& measure, int budget, std::uint64_t seed) -> py::object {
        IfsSystem sys = make_system(pair_from(b, d1, d2), measure_from(measure, b));
        auto found = search_phi(sys, budget, seed);
        if (!found) return py::none();
        py::dict out;
        out["phi"] = py::make_tuple(found->first.a, found->first.b, found->first.c, found->first.d);
        out["report"] = nac_to_py(found->second);
        return out;
      },
      py::arg("b"), py::arg("d1"), py::arg("d2"), py::arg("measure") = py::none(),
      py::arg("budget") = 20000, py::arg("seed") = 0);

  m.def(
      "mc_lyapunov",
      [](int b, const std::vector<int>& d1, const std::vector<int>& d2, long long steps,
         int trials, std::uint64_t seed, const py::object& measure) {
        TransferMatrices tm = build_matrices(pair_from(b, d1, d2));
        McEstimate est = mc_lyapunov(tm, measure_from(measure, b), steps, trials, seed);
        return py::make_tuple(est.estimate, est.standard_error);
      },
      py::arg("b"), py::arg("d1"), py::arg("d2"), py::arg("steps") = 1000000,
      py::arg("trials") = 20, py::arg("seed") = 0, py::arg("measure") = py::none());

  m.def(
      "grid_stationary_integral",
      [](int b, const std::vector<int>& d1, const std::vector<int>& d2,
         const py::object& measure, int cells, int iters, const std::vector<double>& phi) {
        IfsSystem sys = make_system(pair_from(b, d1, d2), measure_from(measure, b));
        GridMeasure nu = grid_stationary(sys, cells, iters);
        MoebiusMap f = phi_from(phi);
        return nu.integrate([&](double x) { return f(x); });
      },
      py::arg("b"), py::arg("d1"), py::arg("d2"), py::arg("measure") = py::none(),
      py::arg("cells") = 10000, py::arg("iters") = 200,
      py::arg("phi") = std::vector<double>{1, 0, 0, 1},
      "Integral of the Moebius map phi against the grid-approximated stationary measure.");

  m.def("dim_from_lambda", &dim_from_lambda, py::arg("lam"), py::arg("b"));
}

#pragma once

#include <string>

#include "json.hpp"

namespace cantordim {

enum class Method { Degenerate, Recurring, Neumann, MonteCarlo };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Degenerate: return "degenerate";
    case Method::Recurring: return "recurring";
    case Method::Neumann: return "neumann";
    case Method::MonteCarlo: return "monte_carlo";
  }
  return "unknown";
}

/// Top Lyapunov exponent and the dimension lambda/log b, with the method
/// used and an error bound (rigorous for the series methods, statistical
/// 3-sigma for Monte Carlo).
struct LyapunovResult {
  double lambda = 0.0;
  double dimension = 0.0;
  Method method = Method::Neumann;
  double error_bound = 0.0;
  nlohmann::json metadata = nlohmann::json::object();
};

}  // namespace cantordim

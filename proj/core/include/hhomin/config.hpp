#pragma once

#include "hhomin/benchmarks.hpp"

#include <map>
#include <string>

namespace hhomin {

/// Flat key = value configuration file ('#' starts a comment line).
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Applies recognized keys (problem is resolved by the caller): k, theta,
/// max_ndof, poincare, grad_tol, step_tol, energy_tol, max_iterations.
/// Unknown keys raise std::invalid_argument.
void apply_config(BenchmarkConfig& config, const std::map<std::string, std::string>& entries);

} // namespace hhomin

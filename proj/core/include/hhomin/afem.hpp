#pragma once

#include "hhomin/benchmarks.hpp"
#include "hhomin/estimate.hpp"
#include "hhomin/solver.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hhomin {

/// One row of the convergence history. The CSV schema (exact column order) is
///   level,ndof,Eh,Estar,LEB,RHS,gap,osc,err_stress,err_grad,err_l2,eta_sum,iters,seconds
/// with unavailable diagnostics written as empty fields.
struct ConvergenceRecord {
    int level = 0;
    long ndof = 0;
    double Eh = 0;
    double Estar = 0;
    double LEB = 0;
    double RHS = 0;
    double gap = 0;
    double osc = 0;
    double err_stress = std::numeric_limits<double>::quiet_NaN();
    double err_grad = std::numeric_limits<double>::quiet_NaN();
    double err_l2 = std::numeric_limits<double>::quiet_NaN();
    double eta_sum = 0;
    int iters = 0;
    double seconds = 0;
    bool solver_converged = true;
};

/// Doerfler marking: minimal-cardinality set M with
/// theta * sum eta <= sum_{K in M} eta(K); descending sort, ties by index.
MarkSet dorfler_mark(const Eigen::VectorXd& eta, double theta);

struct AitkenResult {
    double value = 0;
    bool degenerate = false;
};

/// Delta^2 Aitken extrapolation of the last three values (exact on geometric
/// sequences); flags a vanishing denominator and falls back to the last value.
AitkenResult aitken_extrapolate(const std::vector<double>& values);

/// Least-squares slope of y against x in log-log coordinates.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Full state of one adaptive level, for callbacks and tests.
struct AfemLevel {
    std::shared_ptr<HHOSpace> space;
    const HHOFunction* u = nullptr;
    const GradientField* ru = nullptr;
    const StressField* sigma = nullptr;
    const BoundReport* report = nullptr;
};
using LevelCallback = std::function<void(const AfemLevel&, const ConvergenceRecord&)>;

/// The adaptive loop SOLVE -> ESTIMATE -> MARK -> REFINE (uniform refinement
/// when theta = 1), warm-started by prolongation, until the next mesh would
/// exceed max_ndof. A solver failure flags the record and stops the loop.
std::vector<ConvergenceRecord> run_afem(const BenchmarkConfig& config,
                                        const LevelCallback& callback = {});

std::string csv_header();
void write_csv(const std::string& path, const std::vector<ConvergenceRecord>& records);
std::vector<ConvergenceRecord> read_csv(const std::string& path);

} // namespace hhomin

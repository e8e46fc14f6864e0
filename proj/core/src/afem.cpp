#include "hhomin/afem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hhomin {

MarkSet dorfler_mark(const Eigen::VectorXd& eta, double theta) {
    if (!(theta > 0.0) || theta > 1.0)
        throw std::invalid_argument("dorfler_mark: theta must be in (0, 1]");
    const int n = static_cast<int>(eta.size());
    for (int i = 0; i < n; ++i)
        if (eta[i] < 0) throw std::invalid_argument("dorfler_mark: negative indicator");
    const double total = eta.sum();
    MarkSet marked;
    if (total <= 0) return marked;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (eta[a] != eta[b]) return eta[a] > eta[b];
        return a < b;
    });
    double acc = 0;
    for (int idx : order) {
        if (acc >= theta * total) break;
        if (eta[idx] <= 0) break; // remaining indicators vanish
        marked.push_back(idx);
        acc += eta[idx];
    }
    std::sort(marked.begin(), marked.end());
    return marked;
}

AitkenResult aitken_extrapolate(const std::vector<double>& values) {
    if (values.size() < 3)
        throw std::invalid_argument("aitken_extrapolate: need at least 3 values");
    const double x0 = values[values.size() - 3];
    const double x1 = values[values.size() - 2];
    const double x2 = values[values.size() - 1];
    const double denom = x2 - 2.0 * x1 + x0;
    const double scale = std::max({std::abs(x0), std::abs(x1), std::abs(x2), 1e-300});
    AitkenResult res;
    if (std::abs(denom) <= 1e-14 * scale) {
        res.value = x2;
        res.degenerate = true;
        return res;
    }
    const double d = x2 - x1;
    res.value = x2 - d * d / denom;
    return res;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need two or more matching samples");
    const int n = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<ConvergenceRecord> run_afem(const BenchmarkConfig& config,
                                        const LevelCallback& callback) {
    std::vector<ConvergenceRecord> records;
    auto mesh = std::make_shared<Mesh>(config.initial_mesh);
    auto space = std::make_shared<HHOSpace>(mesh, config.k, config.quad_degree());
    if (space->ndof() > config.max_ndof) return records;

    Problem problem{config.density, config.load, config.quad_weight, config.quad_target};
    EstimateOptions opt;
    opt.poincare = config.poincare;
    opt.rhs_osc_exponent = config.rhs_osc_uses_k ? static_cast<double>(config.k) : 1.0;
    if (config.dirichlet) opt.dirichlet = config.dirichlet;

    HHOFunction u = initial_guess(*space);
    if (config.dirichlet) attach_dirichlet(*space, config.dirichlet, u);

    for (int level = 0;; ++level) {
        const auto t0 = std::chrono::steady_clock::now();
        auto [sol, report] = minimize(*space, problem, u, config.solver);
        u = std::move(sol);

        const GradientField ru = reconstruct_gradient(*space, u);
        const StressField sigma = discrete_stress(*space, *config.density, ru);
        const BoundReport est = estimate_level(*space, problem, opt, u, ru, sigma);
        const auto t1 = std::chrono::steady_clock::now();

        ConvergenceRecord rec;
        rec.level = level;
        rec.ndof = space->ndof();
        rec.Eh = est.energy_h;
        rec.Estar = est.dual;
        rec.LEB = est.leb;
        rec.RHS = est.rhs;
        rec.gap = est.gap;
        rec.osc = est.osc;
        rec.eta_sum = est.eta.sum();
        rec.iters = report.iterations;
        rec.seconds = std::chrono::duration<double>(t1 - t0).count();
        rec.solver_converged = report.converged;
        const double p = config.density->params().p;
        const double pc = config.density->params().p_conj;
        if (config.exact_stress)
            rec.err_stress = rt_field_error_lq(*space, sigma, config.exact_stress, pc);
        if (config.exact_grad) rec.err_grad = rt_field_error_lq(*space, ru, config.exact_grad, p);
        if (config.exact_u) rec.err_l2 = l2_error_cells(*space, u, config.exact_u);
        records.push_back(rec);

        if (callback) {
            AfemLevel state{space, &u, &ru, &sigma, &est};
            callback(state, rec);
        }
        if (!report.converged) break; // abort cleanly with the partial history

        RefinedMesh refined = config.theta >= 1.0
                                  ? uniform_refine(*mesh)
                                  : refine_nvb(*mesh, dorfler_mark(est.eta, config.theta));
        auto fine_mesh = std::make_shared<Mesh>(std::move(refined.mesh));
        auto fine_space = std::make_shared<HHOSpace>(fine_mesh, config.k, config.quad_degree());
        if (fine_space->ndof() > config.max_ndof) break;

        HHOFunction fine_u = prolongate(*space, u, *fine_space, refined.parent);
        if (config.dirichlet) attach_dirichlet(*fine_space, config.dirichlet, fine_u);
        mesh = std::move(fine_mesh);
        space = std::move(fine_space);
        u = std::move(fine_u);
    }
    return records;
}

std::string csv_header() {
    return "level,ndof,Eh,Estar,LEB,RHS,gap,osc,err_stress,err_grad,err_l2,eta_sum,iters,seconds";
}

namespace {

void put_field(std::ostream& out, double v, bool comma = true) {
    if (std::isfinite(v)) out << v;
    if (comma) out << ",";
}

} // namespace

void write_csv(const std::string& path, const std::vector<ConvergenceRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    out.precision(16);
    out << csv_header() << "\n";
    for (const auto& r : records) {
        out << r.level << "," << r.ndof << ",";
        put_field(out, r.Eh);
        put_field(out, r.Estar);
        put_field(out, r.LEB);
        put_field(out, r.RHS);
        put_field(out, r.gap);
        put_field(out, r.osc);
        put_field(out, r.err_stress);
        put_field(out, r.err_grad);
        put_field(out, r.err_l2);
        put_field(out, r.eta_sum);
        out << r.iters << "," << r.seconds << "\n";
    }
}

std::vector<ConvergenceRecord> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != csv_header())
        throw std::runtime_error("read_csv: unexpected header in " + path);
    std::vector<ConvergenceRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) fields.push_back(item);
        while (fields.size() < 14) fields.emplace_back();
        auto num = [&](int i) {
            return fields[i].empty() ? std::numeric_limits<double>::quiet_NaN()
                                     : std::stod(fields[i]);
        };
        ConvergenceRecord r;
        r.level = std::stoi(fields[0]);
        r.ndof = std::stol(fields[1]);
        r.Eh = num(2);
        r.Estar = num(3);
        r.LEB = num(4);
        r.RHS = num(5);
        r.gap = num(6);
        r.osc = num(7);
        r.err_stress = num(8);
        r.err_grad = num(9);
        r.err_l2 = num(10);
        r.eta_sum = num(11);
        r.iters = fields[12].empty() ? 0 : std::stoi(fields[12]);
        r.seconds = num(13);
        records.push_back(r);
    }
    return records;
}

} // namespace hhomin

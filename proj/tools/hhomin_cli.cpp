// Command-line driver: `run` executes one benchmark and writes the
// convergence history as CSV, `table` recomputes rate slopes from a CSV, and
// `verify` runs the fast property suites.

#include "hhomin/afem.hpp"
#include "hhomin/config.hpp"
#include "hhomin/estimate.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>

namespace {

using namespace hhomin;

int cmd_run(const std::string& problem, int k, double theta, long max_ndof,
            std::string out_path, const std::string& config_path, double grad_tol) {
    std::map<std::string, std::string> entries;
    if (!config_path.empty()) entries = read_config_file(config_path);

    std::string id = problem;
    if (id.empty()) {
        auto it = entries.find("problem");
        if (it == entries.end()) {
            std::cerr << "run: no problem selected (use --problem or a config file)\n";
            return 2;
        }
        id = it->second;
    }
    BenchmarkConfig cfg = make_benchmark(id);
    apply_config(cfg, entries);
    // command-line flags override the config file
    if (k >= 0) cfg.k = k;
    if (theta > 0) cfg.theta = theta;
    if (max_ndof > 0) cfg.max_ndof = max_ndof;
    if (grad_tol > 0) cfg.solver.grad_tol = grad_tol;

    if (out_path.empty()) out_path = id + "-k" + std::to_string(cfg.k) + ".csv";

    const auto records = run_afem(cfg);
    write_csv(out_path, records);
    std::printf("%s  k=%d theta=%g  levels=%zu  -> %s\n", id.c_str(), cfg.k, cfg.theta,
                records.size(), out_path.c_str());
    for (const auto& r : records)
        std::printf("  level %2d  ndof %7ld  Eh % .9e  LEB % .9e  gap %.3e  iters %d%s\n", r.level,
                    r.ndof, r.Eh, r.LEB, r.gap, r.iters, r.solver_converged ? "" : "  [not converged]");
    const bool clean =
        std::all_of(records.begin(), records.end(), [](const auto& r) { return r.solver_converged; });
    return records.empty() || !clean ? 1 : 0;
}

int cmd_table(const std::string& csv_path, int last, double ref) {
    const auto records = read_csv(csv_path);
    if (static_cast<int>(records.size()) < last) {
        std::cerr << "table: csv has fewer than " << last << " rows\n";
        return 2;
    }
    std::vector<double> ndof, stress2, grad2, gap, rhs, leb_dist, eh;
    for (std::size_t i = records.size() - last; i < records.size(); ++i) {
        const auto& r = records[i];
        ndof.push_back(static_cast<double>(r.ndof));
        if (std::isfinite(r.err_stress)) stress2.push_back(r.err_stress * r.err_stress);
        if (std::isfinite(r.err_grad)) grad2.push_back(r.err_grad * r.err_grad);
        if (r.gap > 0) gap.push_back(r.gap);
        if (r.RHS > 0) rhs.push_back(r.RHS);
        if (std::isfinite(ref) && ref - r.LEB > 0) leb_dist.push_back(ref - r.LEB);
    }
    for (const auto& r : records) eh.push_back(r.Eh);

    std::printf("rates over the last %d levels (log-log least squares vs ndof):\n", last);
    auto report = [&](const char* name, const std::vector<double>& y) {
        if (static_cast<int>(y.size()) == last)
            std::printf("  %-14s %+.3f\n", name, loglog_slope(ndof, y));
        else
            std::printf("  %-14s n/a\n", name);
    };
    report("err_stress^2", stress2);
    report("err_grad^2", grad2);
    report("gap", gap);
    report("RHS", rhs);
    if (std::isfinite(ref)) report("ref-LEB", leb_dist);
    if (eh.size() >= 3) {
        const AitkenResult a = aitken_extrapolate(eh);
        std::printf("aitken(Eh) = %.9e%s\n", a.value, a.degenerate ? "  [degenerate]" : "");
    }
    return 0;
}

bool check(const char* name, bool ok) {
    std::printf("  [%s] %s\n", ok ? "ok" : "FAIL", name);
    return ok;
}

int cmd_verify() {
    bool all = true;
    std::mt19937 rng(7);

    { // quadrature exactness
        bool ok = true;
        for (int d = 0; d <= 20 && ok; ++d) {
            const auto& rule = triangle_quadrature(d);
            for (int a = 0; a + 0 <= d && ok; ++a)
                for (int b = 0; a + b <= d && ok; ++b) {
                    double s = 0;
                    for (std::size_t q = 0; q < rule.size(); ++q)
                        s += rule.weights[q] * std::pow(rule.barycentric[q][1], a) *
                             std::pow(rule.barycentric[q][2], b);
                    ok = std::abs(0.5 * s - reference_monomial_integral(a, b)) < 1e-14;
                }
        }
        all &= check("triangle quadrature exactness, degrees 0..20", ok);
    }

    { // mesh refinement invariants
        Mesh mesh = l_shape_mesh();
        const double area = mesh.total_area();
        bool ok = true;
        for (int i = 0; i < 3; ++i) {
            MarkSet marks;
            for (int t = 0; t < mesh.n_triangles(); t += 3) marks.push_back(t);
            RefinedMesh r = refine_nvb(mesh, marks);
            validate_mesh(r.mesh);
            ok = ok && std::abs(r.mesh.total_area() - area) < 1e-12 * area;
            mesh = std::move(r.mesh);
        }
        all &= check("newest-vertex bisection conformity and area conservation", ok);
    }

    { // density contracts (reduced sample)
        bool ok = true;
        std::uniform_real_distribution<double> dist(-5.0, 5.0);
        const std::vector<DensityPtr> densities = {
            plaplace(4.0), optimal_design(1.0, 2.0, 0.1, 0.2),
            two_well(Vec2(-0.83205, -0.5547), Vec2(0.83205, 0.5547))};
        for (const auto& dp : densities) {
            const auto& par = dp->params();
            for (int i = 0; i < 2000 && ok; ++i) {
                const Vec2 a(dist(rng), dist(rng)), b(dist(rng), dist(rng));
                const double wa = dp->w(a), wb = dp->w(b);
                ok = ok && wa >= par.c1 * std::pow(a.norm(), par.p) - par.c4 - 1e-9 &&
                     wa <= par.c2 * std::pow(a.norm(), par.p) + par.c5 + 1e-9;
                const double bregman = wb - wa - dp->dw(a).dot(b - a);
                ok = ok && bregman >= -1e-9;
                const double lhs = std::pow((dp->dw(a) - dp->dw(b)).norm(), par.r);
                const double rhs = par.c3 *
                                   (1.0 + std::pow(a.norm(), par.s) + std::pow(b.norm(), par.s)) *
                                   bregman;
                ok = ok && lhs <= rhs + 1e-8 * (1.0 + std::abs(rhs));
            }
        }
        all &= check("density growth and convexity control (2000 samples each)", ok);
    }

    { // commutativity R(I v) = Pi_Sigma grad v
        auto mesh = std::make_shared<Mesh>(criss_cross_square());
        HHOSpace space(mesh, 1, 8);
        auto v = [](const Vec2& x) { return x.x() * x.x() * x.y() + 2.0 * x.y(); };
        auto dv = [](const Vec2& x) { return Vec2(2.0 * x.x() * x.y(), x.x() * x.x() + 2.0); };
        const HHOFunction iv = interpolate(space, v, 12);
        const GradientField r = reconstruct_gradient(space, iv);
        const RTField pi = project_rt_field(space, dv, 12);
        const double err = (r.coeffs - pi.coeffs).cwiseAbs().maxCoeff();
        all &= check("commutativity of reconstruction and interpolation", err < 1e-12);
    }

    { // Doerfler against brute force
        bool ok = true;
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        for (int rep = 0; rep < 50 && ok; ++rep) {
            const int n = 1 + rep % 10;
            Eigen::VectorXd eta(n);
            for (int i = 0; i < n; ++i) eta[i] = dist(rng);
            const double theta = 0.1 + 0.8 * dist(rng);
            const MarkSet m = dorfler_mark(eta, theta);
            double best = n + 1;
            for (int mask = 0; mask < (1 << n); ++mask) {
                double s = 0;
                int c = 0;
                for (int i = 0; i < n; ++i)
                    if (mask & (1 << i)) {
                        s += eta[i];
                        ++c;
                    }
                if (s >= theta * eta.sum() - 1e-12) best = std::min(best, double(c));
            }
            double sum = 0;
            for (int i : m) sum += eta[i];
            ok = sum >= theta * eta.sum() - 1e-12 && double(m.size()) == best;
        }
        all &= check("Doerfler marking minimal cardinality (50 random cases)", ok);
    }

    std::printf("verify: %s\n", all ? "all checks passed" : "FAILURES");
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D adaptive HHO toolkit for degenerate convex minimization"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run one benchmark and write the CSV history");
    std::string problem, out_path, config_path;
    int k = -1;
    double theta = -1;
    long max_ndof = -1;
    double grad_tol = -1;
    run->add_option("--problem", problem, "one of: plaplace-square, plaplace-lshape, odp-square, odp-lshape, twowell");
    run->add_option("--k", k, "polynomial degree (0..4)");
    run->add_option("--theta", theta, "bulk parameter in (0,1]; 1 = uniform");
    run->add_option("--max-ndof", max_ndof, "stop before exceeding this many unknowns");
    run->add_option("--out", out_path, "output CSV path");
    run->add_option("--config", config_path, "key = value configuration file");
    run->add_option("--grad-tol", grad_tol, "solver gradient tolerance");

    auto* table = app.add_subcommand("table", "recompute rate slopes from a CSV history");
    std::string csv_path;
    int last = 3;
    double ref = std::numeric_limits<double>::quiet_NaN();
    table->add_option("--csv", csv_path, "CSV file written by run")->required();
    table->add_option("--last", last, "number of trailing levels for the fit");
    table->add_option("--ref", ref, "reference energy for the ref-LEB rate");

    auto* verify = app.add_subcommand("verify", "run the fast property suites");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(problem, k, theta, max_ndof, out_path, config_path, grad_tol);
        if (table->parsed()) return cmd_table(csv_path, last, ref);
        if (verify->parsed()) return cmd_verify();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

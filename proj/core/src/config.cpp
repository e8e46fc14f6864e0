#include "hhomin/config.hpp"

#include <fstream>
#include <stdexcept>

namespace hhomin {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_config_file: cannot open " + path);
    std::map<std::string, std::string> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: expected 'key = value' at " + path + ":" +
                                     std::to_string(lineno));
        entries[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return entries;
}

void apply_config(BenchmarkConfig& config, const std::map<std::string, std::string>& entries) {
    for (const auto& [key, value] : entries) {
        if (key == "problem") continue; // resolved by the caller before applying
        if (key == "k")
            config.k = std::stoi(value);
        else if (key == "theta")
            config.theta = std::stod(value);
        else if (key == "max_ndof")
            config.max_ndof = std::stol(value);
        else if (key == "poincare")
            config.poincare = std::stod(value);
        else if (key == "grad_tol")
            config.solver.grad_tol = std::stod(value);
        else if (key == "step_tol")
            config.solver.step_tol = std::stod(value);
        else if (key == "energy_tol")
            config.solver.energy_tol = std::stod(value);
        else if (key == "max_iterations")
            config.solver.max_iterations = std::stoi(value);
        else
            throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

} // namespace hhomin

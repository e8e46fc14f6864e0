#include "hhomin/mesh.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hhomin {

namespace {

std::string next_content_line(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
        const auto pos = line.find_first_not_of(" \t\r\n");
        if (pos == std::string::npos) continue;
        if (line[pos] == '#') continue;
        return line;
    }
    return {};
}

} // namespace

Mesh read_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_mesh: cannot open " + path);

    auto expect_block = [&](const char* name) {
        std::string line = next_content_line(in);
        std::istringstream ss(line);
        std::string key;
        long count = -1;
        ss >> key >> count;
        if (key != name || count < 0)
            throw std::runtime_error("read_mesh: expected '" + std::string(name) +
                                     " <count>' in " + path);
        return count;
    };

    const long nv = expect_block("nodes");
    std::vector<Vec2> vertices(nv);
    for (long i = 0; i < nv; ++i) {
        std::istringstream ss(next_content_line(in));
        long idx;
        double x, y;
        if (!(ss >> idx >> x >> y) || idx != i + 1)
            throw std::runtime_error("read_mesh: malformed node line " + std::to_string(i + 1));
        vertices[i] = {x, y};
    }

    const long nt = expect_block("elements");
    std::vector<std::array<int, 3>> tris(nt);
    for (long i = 0; i < nt; ++i) {
        std::istringstream ss(next_content_line(in));
        long idx, a, b, c;
        if (!(ss >> idx >> a >> b >> c) || idx != i + 1)
            throw std::runtime_error("read_mesh: malformed element line " + std::to_string(i + 1));
        tris[i] = {static_cast<int>(a - 1), static_cast<int>(b - 1), static_cast<int>(c - 1)};
    }

    const long nb = expect_block("boundary");
    std::set<std::array<int, 2>> listed;
    for (long i = 0; i < nb; ++i) {
        std::istringstream ss(next_content_line(in));
        long idx, a, b;
        if (!(ss >> idx >> a >> b) || idx != i + 1)
            throw std::runtime_error("read_mesh: malformed boundary line " + std::to_string(i + 1));
        listed.insert({static_cast<int>(std::min(a, b) - 1), static_cast<int>(std::max(a, b) - 1)});
    }

    Mesh mesh = build_mesh(vertices, tris);

    if (nb > 0) {
        std::set<std::array<int, 2>> derived;
        for (const Side& s : mesh.sides())
            if (s.is_boundary()) derived.insert(s.vertices);
        if (derived != listed)
            throw std::runtime_error("read_mesh: boundary block does not match the mesh boundary");
    }
    return mesh;
}

void write_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_mesh: cannot open " + path);
    out.precision(17);
    out << "nodes " << mesh.n_vertices() << "\n";
    for (int i = 0; i < mesh.n_vertices(); ++i)
        out << i + 1 << " " << mesh.vertices()[i].x() << " " << mesh.vertices()[i].y() << "\n";
    out << "elements " << mesh.n_triangles() << "\n";
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& v = mesh.triangles()[t].v;
        out << t + 1 << " " << v[0] + 1 << " " << v[1] + 1 << " " << v[2] + 1 << "\n";
    }
    int nb = 0;
    for (const Side& s : mesh.sides())
        if (s.is_boundary()) ++nb;
    out << "boundary " << nb << "\n";
    int row = 0;
    for (const Side& s : mesh.sides())
        if (s.is_boundary())
            out << ++row << " " << s.vertices[0] + 1 << " " << s.vertices[1] + 1 << "\n";
}

} // namespace hhomin

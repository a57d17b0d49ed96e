#include "cds/graph_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "cds/error.hpp"

namespace cds {

namespace {

bool next_content_line(std::istream& in, std::string& line, int& line_no) {
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        return true;
    }
    return false;
}

[[noreturn]] void fail(int line_no, const std::string& what) {
    throw ParseError("graph file line " + std::to_string(line_no) + ": " + what);
}

} // namespace

AffinityMatrix read_graph(std::istream& in) {
    std::string line;
    int line_no = 0;
    if (!next_content_line(in, line, line_no)) throw ParseError("graph file is empty");
    long long n = -1;
    long long m = -1;
    {
        std::istringstream hs(line);
        std::string extra;
        if (!(hs >> n >> m) || (hs >> extra) || n < 0 || m < 0) fail(line_no, "expected header 'n m'");
    }
    if (n > 100000) fail(line_no, "vertex count too large");

    AffinityMatrix a(static_cast<int>(n));
    std::map<std::pair<long long, long long>, double> seen;
    long long edges = 0;
    while (next_content_line(in, line, line_no)) {
        std::istringstream ls(line);
        long long i = 0;
        long long j = 0;
        double w = 0.0;
        std::string extra;
        if (!(ls >> i >> j >> w) || (ls >> extra)) fail(line_no, "expected edge 'i j w'");
        if (i < 0 || j < 0 || i >= n || j >= n) fail(line_no, "endpoint out of range");
        if (i == j) fail(line_no, "self-loop on vertex " + std::to_string(i));
        if (!(w >= 0.0) || w == std::numeric_limits<double>::infinity()) fail(line_no, "weight must be finite and >= 0");
        const auto key = std::minmax(i, j);
        if (auto it = seen.find(key); it != seen.end()) {
            if (it->second != w) fail(line_no, "pair listed twice with different weights");
        } else {
            seen.emplace(key, w);
            a.set_edge(static_cast<Vertex>(i), static_cast<Vertex>(j), w);
        }
        ++edges;
    }
    if (edges != m) {
        throw ParseError("graph header announces " + std::to_string(m) + " edges, found " + std::to_string(edges));
    }
    return a;
}

AffinityMatrix load_graph_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open graph file " + path.string());
    return read_graph(in);
}

void write_graph(std::ostream& out, const AffinityMatrix& a) {
    out << a.size() << ' ' << a.edge_count() << '\n';
    out << std::setprecision(17);
    for (int i = 0; i < a.size(); ++i)
        for (int j = i + 1; j < a.size(); ++j)
            if (a(i, j) > 0.0) out << i << ' ' << j << ' ' << a(i, j) << '\n';
}

} // namespace cds

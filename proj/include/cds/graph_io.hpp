#pragma once

// Plain-text graph files: a header line "n m" followed by m lines "i j w"
// (0-based endpoints, decimal weight). Blank lines and lines starting with '#'
// are ignored.

#include <filesystem>
#include <iosfwd>

#include "cds/graph.hpp"

namespace cds {

/// Throws ParseError on malformed input, self-loops, out-of-range endpoints,
/// negative weights, an edge count that disagrees with the header, or a pair
/// listed twice with different weights.
AffinityMatrix read_graph(std::istream& in);
AffinityMatrix load_graph_file(const std::filesystem::path& path);

void write_graph(std::ostream& out, const AffinityMatrix& a);

} // namespace cds

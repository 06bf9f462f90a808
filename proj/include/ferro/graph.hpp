#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ferro/errors.hpp"
#include "ferro/rng.hpp"

namespace ferro {

struct Edge {
    int i = 0;
    int j = 0;
    double coupling = 0.0;
};

inline bool operator==(const Edge& a, const Edge& b) {
    return a.i == b.i && a.j == b.j && a.coupling == b.coupling;
}

// Interaction graph: N vertices and undirected edges carrying strictly
// positive couplings. Instances are validated on construction (vertex
// range, positivity, no self-loops or duplicates, connectedness) and are
// immutable afterwards, so they can be shared freely across workers.
//
// Edges are stored canonically with i < j, sorted lexicographically.
class CouplingGraph {
public:
    CouplingGraph(int vertex_count, std::vector<Edge> edges)
        : n_(vertex_count), edges_(std::move(edges)) {
        canonicalize();
        validate();
        build_adjacency();
    }

    // Skips the connectivity and positivity checks. Exists so tests can
    // construct deliberately invalid instances (e.g. a disconnected
    // ferromagnet) and observe what breaks downstream.
    static CouplingGraph unchecked(int vertex_count, std::vector<Edge> edges) {
        CouplingGraph g;
        g.n_ = vertex_count;
        g.edges_ = std::move(edges);
        g.canonicalize();
        g.build_adjacency();
        return g;
    }

    int vertex_count() const { return n_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<std::vector<int>>& adjacency() const { return adj_; }

    double coupling_sum() const {
        double s = 0.0;
        for (const Edge& e : edges_) s += e.coupling;
        return s;
    }

    double min_coupling() const {
        double m = std::numeric_limits<double>::infinity();
        for (const Edge& e : edges_) m = std::min(m, e.coupling);
        return m;
    }

    double max_coupling() const {
        double m = -std::numeric_limits<double>::infinity();
        for (const Edge& e : edges_) m = std::max(m, e.coupling);
        return m;
    }

private:
    CouplingGraph() = default;

    void canonicalize() {
        for (Edge& e : edges_) {
            if (e.i > e.j) std::swap(e.i, e.j);
        }
        std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
            return std::pair(a.i, a.j) < std::pair(b.i, b.j);
        });
    }

    void validate() const {
        if (n_ < 2) {
            throw TooFewVertices("graph needs at least 2 vertices, got " +
                                 std::to_string(n_));
        }
        if (edges_.empty()) {
            throw DisconnectedGraph("graph has no edges");
        }
        for (const Edge& e : edges_) {
            if (e.i == e.j) {
                throw SelfLoop("self-loop at vertex " + std::to_string(e.i));
            }
            if (e.i < 0 || e.j >= n_) {
                throw IndexOutOfRange("edge (" + std::to_string(e.i) + "," +
                                      std::to_string(e.j) + ") out of range for " +
                                      std::to_string(n_) + " vertices");
            }
            if (!(e.coupling > 0.0)) {
                std::ostringstream msg;
                msg << "coupling " << e.coupling << " on edge (" << e.i << ","
                    << e.j << ") must be strictly positive";
                throw NonPositiveCoupling(msg.str());
            }
        }
        for (std::size_t p = 1; p < edges_.size(); ++p) {
            if (edges_[p - 1].i == edges_[p].i && edges_[p - 1].j == edges_[p].j) {
                throw DuplicateEdge("duplicate edge (" + std::to_string(edges_[p].i) +
                                    "," + std::to_string(edges_[p].j) + ")");
            }
        }
        if (!connected()) {
            throw DisconnectedGraph("graph is not connected");
        }
    }

    bool connected() const {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_));
        for (const Edge& e : edges_) {
            adj[static_cast<std::size_t>(e.i)].push_back(e.j);
            adj[static_cast<std::size_t>(e.j)].push_back(e.i);
        }
        std::vector<char> seen(static_cast<std::size_t>(n_), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int count = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w : adj[static_cast<std::size_t>(v)]) {
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    ++count;
                    stack.push_back(w);
                }
            }
        }
        return count == n_;
    }

    void build_adjacency() {
        adj_.assign(static_cast<std::size_t>(std::max(n_, 0)), {});
        for (const Edge& e : edges_) {
            adj_[static_cast<std::size_t>(e.i)].push_back(e.j);
            adj_[static_cast<std::size_t>(e.j)].push_back(e.i);
        }
    }

    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adj_;
};

// Two distinct vertices, each of whose removal keeps the graph connected.
struct RemovablePair {
    int first = -1;
    int second = -1;
};

// True iff the graph stays connected after deleting vertex v together with
// its incident edges. Breadth-first search over the remaining vertices.
inline bool is_connected_without(const CouplingGraph& g, int v) {
    const int n = g.vertex_count();
    if (v < 0 || v >= n) {
        throw IndexOutOfRange("vertex " + std::to_string(v) + " out of range");
    }
    if (n == 2) return true;  // a single remaining vertex is connected
    const int start = (v == 0) ? 1 : 0;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> queue{start};
    seen[static_cast<std::size_t>(start)] = 1;
    int count = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int u = queue[head];
        for (int w : g.adjacency()[static_cast<std::size_t>(u)]) {
            if (w == v || seen[static_cast<std::size_t>(w)]) continue;
            seen[static_cast<std::size_t>(w)] = 1;
            ++count;
            queue.push_back(w);
        }
    }
    return count == n - 1;
}

// Returns two distinct non-cut vertices of a connected graph. Strategy: any
// leaf (tree-degree-1 vertex) of a spanning tree is never a cut vertex of
// the original graph, because the tree minus that leaf still spans the
// remaining vertices. A depth-first spanning tree rooted at 0 is computed
// and its two smallest-index leaves are returned; every tree on N >= 2
// vertices has at least two. The result is re-validated before returning.
inline RemovablePair find_removable_pair(const CouplingGraph& g) {
    const int n = g.vertex_count();
    RemovablePair pair;
    if (n == 2) {
        pair = {0, 1};
    } else {
        std::vector<int> tree_degree(static_cast<std::size_t>(n), 0);
        std::vector<char> visited(static_cast<std::size_t>(n), 0);
        std::vector<int> stack{0};
        visited[0] = 1;
        std::vector<int> parent(static_cast<std::size_t>(n), -1);
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w : g.adjacency()[static_cast<std::size_t>(v)]) {
                if (visited[static_cast<std::size_t>(w)]) continue;
                visited[static_cast<std::size_t>(w)] = 1;
                parent[static_cast<std::size_t>(w)] = v;
                ++tree_degree[static_cast<std::size_t>(v)];
                ++tree_degree[static_cast<std::size_t>(w)];
                stack.push_back(w);
            }
        }
        std::vector<int> leaves;
        for (int v = 0; v < n; ++v) {
            if (tree_degree[static_cast<std::size_t>(v)] == 1) leaves.push_back(v);
        }
        if (leaves.size() < 2) {
            throw InternalInvariantViolation(
                "spanning tree produced fewer than two leaves");
        }
        pair = {leaves[0], leaves[1]};
    }
    if (!is_connected_without(g, pair.first) ||
        !is_connected_without(g, pair.second)) {
        throw InternalInvariantViolation(
            "removable-pair candidate failed connectivity re-validation");
    }
    return pair;
}

// ---- generators -----------------------------------------------------------

struct GeneratorSpec {
    enum class Kind { chain, ring, grid, complete, random_connected };
    Kind kind = Kind::chain;
    int n = 0;          // vertex count (chain, ring, complete, random)
    int rows = 0;       // grid only
    int cols = 0;       // grid only
    double edge_prob = 0.0;      // random only
    std::uint64_t seed = 0;      // random only
};

struct CouplingRule {
    enum class Kind { uniform, random_uniform };
    Kind kind = Kind::uniform;
    double value = 1.0;          // uniform J
    double lo = 0.0;             // random: J drawn from (lo, hi]
    double hi = 1.0;
    std::uint64_t seed = 0;

    static CouplingRule uniform(double j) {
        CouplingRule r;
        r.kind = Kind::uniform;
        r.value = j;
        return r;
    }
    static CouplingRule random_in(double lo, double hi, std::uint64_t seed) {
        CouplingRule r;
        r.kind = Kind::random_uniform;
        r.lo = lo;
        r.hi = hi;
        r.seed = seed;
        return r;
    }
};

namespace detail {

inline std::vector<std::pair<int, int>> generate_topology(const GeneratorSpec& spec,
                                                          int& vertex_count) {
    using Kind = GeneratorSpec::Kind;
    std::vector<std::pair<int, int>> pairs;
    switch (spec.kind) {
        case Kind::chain: {
            if (spec.n < 2) throw InvalidParameter("chain needs n >= 2");
            vertex_count = spec.n;
            for (int v = 0; v + 1 < spec.n; ++v) pairs.emplace_back(v, v + 1);
            break;
        }
        case Kind::ring: {
            if (spec.n < 3) throw InvalidParameter("ring needs n >= 3");
            vertex_count = spec.n;
            for (int v = 0; v + 1 < spec.n; ++v) pairs.emplace_back(v, v + 1);
            pairs.emplace_back(0, spec.n - 1);
            break;
        }
        case Kind::grid: {
            if (spec.rows < 1 || spec.cols < 1 || spec.rows * spec.cols < 2) {
                throw InvalidParameter("grid needs rows, cols >= 1 and at least 2 sites");
            }
            vertex_count = spec.rows * spec.cols;
            auto at = [&](int r, int c) { return r * spec.cols + c; };
            for (int r = 0; r < spec.rows; ++r) {
                for (int c = 0; c < spec.cols; ++c) {
                    if (c + 1 < spec.cols) pairs.emplace_back(at(r, c), at(r, c + 1));
                    if (r + 1 < spec.rows) pairs.emplace_back(at(r, c), at(r + 1, c));
                }
            }
            break;
        }
        case Kind::complete: {
            if (spec.n < 2) throw InvalidParameter("complete graph needs n >= 2");
            vertex_count = spec.n;
            for (int i = 0; i < spec.n; ++i)
                for (int j = i + 1; j < spec.n; ++j) pairs.emplace_back(i, j);
            break;
        }
        case Kind::random_connected: {
            if (spec.n < 2) throw InvalidParameter("random graph needs n >= 2");
            if (spec.edge_prob < 0.0 || spec.edge_prob > 1.0) {
                throw InvalidParameter("edge probability must lie in [0, 1]");
            }
            vertex_count = spec.n;
            Rng rng(spec.seed);
            // Random spanning tree first (connectivity without rejection),
            // then each remaining pair independently with edge_prob.
            std::vector<std::vector<char>> present(
                static_cast<std::size_t>(spec.n),
                std::vector<char>(static_cast<std::size_t>(spec.n), 0));
            for (int v = 1; v < spec.n; ++v) {
                const int u = static_cast<int>(
                    rng.uniform_below(static_cast<std::uint64_t>(v)));
                present[static_cast<std::size_t>(std::min(u, v))]
                       [static_cast<std::size_t>(std::max(u, v))] = 1;
            }
            for (int i = 0; i < spec.n; ++i) {
                for (int j = i + 1; j < spec.n; ++j) {
                    if (present[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
                        continue;
                    if (rng.uniform() < spec.edge_prob) {
                        present[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
                    }
                }
            }
            for (int i = 0; i < spec.n; ++i)
                for (int j = i + 1; j < spec.n; ++j)
                    if (present[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
                        pairs.emplace_back(i, j);
            break;
        }
    }
    return pairs;
}

inline std::vector<Edge> assign_couplings(std::vector<std::pair<int, int>> pairs,
                                          const CouplingRule& rule) {
    // Couplings are drawn in canonical edge order so the result depends
    // only on the topology and the rule seed.
    std::sort(pairs.begin(), pairs.end());
    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    if (rule.kind == CouplingRule::Kind::uniform) {
        if (!(rule.value > 0.0)) {
            throw NonPositiveCoupling("uniform coupling must be positive");
        }
        for (auto [i, j] : pairs) edges.push_back({i, j, rule.value});
    } else {
        if (!(rule.lo >= 0.0) || !(rule.hi > rule.lo)) {
            throw InvalidParameter("random coupling range needs 0 <= lo < hi");
        }
        Rng rng(rule.seed);
        for (auto [i, j] : pairs) {
            // hi - u*(hi-lo) with u in [0,1) lands in (lo, hi], so J > 0.
            const double j_val = rule.hi - rng.uniform() * (rule.hi - rule.lo);
            edges.push_back({i, j, j_val});
        }
    }
    return edges;
}

} // namespace detail

// Deterministic for fixed spec and rule seeds.
inline CouplingGraph generate(const GeneratorSpec& spec,
                              const CouplingRule& rule = CouplingRule::uniform(1.0)) {
    int vertex_count = 0;
    auto pairs = detail::generate_topology(spec, vertex_count);
    return CouplingGraph(vertex_count, detail::assign_couplings(std::move(pairs), rule));
}

inline CouplingGraph make_chain(int n, double coupling = 1.0) {
    GeneratorSpec s;
    s.kind = GeneratorSpec::Kind::chain;
    s.n = n;
    return generate(s, CouplingRule::uniform(coupling));
}

inline CouplingGraph make_ring(int n, double coupling = 1.0) {
    GeneratorSpec s;
    s.kind = GeneratorSpec::Kind::ring;
    s.n = n;
    return generate(s, CouplingRule::uniform(coupling));
}

inline CouplingGraph make_grid(int rows, int cols, double coupling = 1.0) {
    GeneratorSpec s;
    s.kind = GeneratorSpec::Kind::grid;
    s.rows = rows;
    s.cols = cols;
    return generate(s, CouplingRule::uniform(coupling));
}

inline CouplingGraph make_complete(int n, double coupling = 1.0) {
    GeneratorSpec s;
    s.kind = GeneratorSpec::Kind::complete;
    s.n = n;
    return generate(s, CouplingRule::uniform(coupling));
}

inline CouplingGraph make_random_connected(int n, double edge_prob, std::uint64_t seed,
                                           const CouplingRule& rule = CouplingRule::uniform(1.0)) {
    GeneratorSpec s;
    s.kind = GeneratorSpec::Kind::random_connected;
    s.n = n;
    s.edge_prob = edge_prob;
    s.seed = seed;
    return generate(s, rule);
}

// ---- edge-list text format --------------------------------------------
//
// UTF-8, line oriented. '#' starts a comment line. The first significant
// line is "N <vertex_count>"; every following significant line is
// "E <i> <j> <J>" with 0-based vertex indices and a decimal coupling.

inline CouplingGraph parse_edge_list(std::istream& in) {
    std::string line;
    int line_no = 0;
    bool have_n = false;
    int n = 0;
    std::vector<Edge> edges;
    auto fail = [&](const std::string& what) {
        throw ParseError("line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv(line);
        while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
        while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t' || sv.back() == '\r'))
            sv.remove_suffix(1);
        if (sv.empty() || sv.front() == '#') continue;
        std::istringstream ls{std::string(sv)};
        std::string tag;
        ls >> tag;
        if (tag == "N") {
            if (have_n) fail("repeated N line");
            if (!(ls >> n)) fail("expected integer vertex count after N");
            std::string rest;
            if (ls >> rest) fail("trailing content '" + rest + "' after vertex count");
            have_n = true;
        } else if (tag == "E") {
            if (!have_n) fail("edge line before N line");
            int i = 0, j = 0;
            double coupling = 0.0;
            if (!(ls >> i >> j >> coupling)) fail("expected 'E <i> <j> <J>'");
            std::string rest;
            if (ls >> rest) fail("trailing content '" + rest + "' after edge");
            edges.push_back({i, j, coupling});
        } else {
            fail("unknown directive '" + tag + "' (expected N or E)");
        }
    }
    if (!have_n) {
        throw ParseError("missing N line");
    }
    return CouplingGraph(n, std::move(edges));
}

inline CouplingGraph load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    try {
        return parse_edge_list(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline void write_edge_list(const CouplingGraph& g, std::ostream& out) {
    out << "# ferro edge list\n";
    out << "N " << g.vertex_count() << "\n";
    std::ostringstream num;
    num.precision(17);
    for (const Edge& e : g.edges()) {
        num.str("");
        num << e.coupling;
        out << "E " << e.i << " " << e.j << " " << num.str() << "\n";
    }
}

inline void save_edge_list(const CouplingGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    write_edge_list(g, out);
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

} // namespace ferro

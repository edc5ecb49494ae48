#include "gnnie/graph.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gnnie/rng.hpp"

namespace gnnie {

uint64_t Graph::num_undirected_edges() const {
    uint64_t count = 0;
    for (VertexId u = 0; u < num_vertices; ++u) {
        for (VertexId v : neighbors(u)) {
            if (v >= u) ++count;
        }
    }
    return count;
}

bool Graph::has_self_loop(VertexId v) const {
    auto nb = neighbors(v);
    return std::binary_search(nb.begin(), nb.end(), v);
}

void Graph::validate() const {
    if (offsets.size() != static_cast<size_t>(num_vertices) + 1)
        throw std::invalid_argument("graph: offsets size mismatch");
    if (offsets.front() != 0 || offsets.back() != coords.size())
        throw std::invalid_argument("graph: offsets endpoints invalid");
    for (size_t i = 0; i + 1 < offsets.size(); ++i) {
        if (offsets[i] > offsets[i + 1])
            throw std::invalid_argument("graph: offsets not nondecreasing");
        if (degrees[i] != offsets[i + 1] - offsets[i])
            throw std::invalid_argument("graph: degree mismatch");
    }
    for (VertexId v : coords) {
        if (v >= num_vertices) throw std::invalid_argument("graph: coord out of range");
    }
}

Graph build_csr(std::span<const std::pair<VertexId, VertexId>> edges,
                uint32_t num_vertices, bool undirected) {
    for (const auto& [u, v] : edges) {
        if (u >= num_vertices || v >= num_vertices)
            throw std::out_of_range("build_csr: endpoint out of range");
    }

    // Expand to directed entries, dedup, then pack.
    std::vector<std::pair<VertexId, VertexId>> entries;
    entries.reserve(edges.size() * (undirected ? 2 : 1));
    for (const auto& [u, v] : edges) {
        entries.emplace_back(u, v);
        if (undirected && u != v) entries.emplace_back(v, u);
    }
    std::sort(entries.begin(), entries.end());
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

    Graph g;
    g.num_vertices = num_vertices;
    g.undirected = undirected;
    g.offsets.assign(static_cast<size_t>(num_vertices) + 1, 0);
    g.coords.reserve(entries.size());
    for (const auto& [u, v] : entries) g.offsets[u + 1]++;
    for (size_t i = 1; i < g.offsets.size(); ++i) g.offsets[i] += g.offsets[i - 1];
    for (const auto& [u, v] : entries) g.coords.push_back(v);

    g.degrees.resize(num_vertices);
    for (uint32_t i = 0; i < num_vertices; ++i)
        g.degrees[i] = static_cast<uint32_t>(g.offsets[i + 1] - g.offsets[i]);
    return g;
}

void VertexOrder::validate(const Graph& g) const {
    if (order.size() != g.num_vertices)
        throw std::invalid_argument("order: not a permutation (size)");
    std::vector<uint8_t> seen(g.num_vertices, 0);
    for (VertexId v : order) {
        if (v >= g.num_vertices || seen[v])
            throw std::invalid_argument("order: not a permutation");
        seen[v] = 1;
    }
    if (bin_boundaries.empty() || bin_boundaries.front() != 0 ||
        bin_boundaries.back() != g.num_vertices)
        throw std::invalid_argument("order: bad bin boundaries");
    // Bin degree monotonicity: min degree of a bin >= max degree of the next.
    for (size_t b = 0; b + 2 < bin_boundaries.size(); ++b) {
        uint32_t lo = bin_boundaries[b + 1];
        if (lo == bin_boundaries[b] || lo >= bin_boundaries[b + 2]) continue;
        uint32_t last_of_bin = g.degree(order[lo - 1]);
        uint32_t first_of_next = g.degree(order[lo]);
        if (last_of_bin < first_of_next)
            throw std::invalid_argument("order: bins not degree-descending");
    }
}

static VertexOrder make_bins(std::vector<VertexId> order, uint32_t n, uint32_t num_bins) {
    VertexOrder vo;
    vo.order = std::move(order);
    vo.bin_boundaries.resize(num_bins + 1);
    for (uint32_t b = 0; b <= num_bins; ++b)
        vo.bin_boundaries[b] = static_cast<uint32_t>(
            (static_cast<uint64_t>(n) * b) / num_bins);
    return vo;
}

VertexOrder degree_sort(const Graph& g, uint32_t num_bins) {
    if (num_bins < 1) throw std::invalid_argument("degree_sort: num_bins < 1");
    uint32_t n = g.num_vertices;
    uint32_t max_deg = 0;
    for (uint32_t d : g.degrees) max_deg = std::max(max_deg, d);

    // Counting sort, descending degree; ascending-ID iteration keeps ties in
    // dictionary order.
    std::vector<uint32_t> count(max_deg + 2, 0);
    for (uint32_t d : g.degrees) count[max_deg - d]++;
    std::vector<uint32_t> start(max_deg + 2, 0);
    for (size_t i = 1; i < count.size(); ++i) start[i] = start[i - 1] + count[i - 1];
    std::vector<VertexId> order(n);
    for (VertexId v = 0; v < n; ++v) order[start[max_deg - g.degrees[v]]++] = v;

    return make_bins(std::move(order), n, num_bins);
}

VertexOrder identity_order(const Graph& g, uint32_t num_bins) {
    if (num_bins < 1) throw std::invalid_argument("identity_order: num_bins < 1");
    std::vector<VertexId> order(g.num_vertices);
    std::iota(order.begin(), order.end(), 0);
    return make_bins(std::move(order), g.num_vertices, num_bins);
}

Graph generate_power_law(uint32_t n, uint32_t m_attach, uint64_t seed) {
    if (m_attach < 1 || n <= m_attach)
        throw std::invalid_argument("generate_power_law: need n > m_attach >= 1");

    Rng rng(seed);
    std::vector<std::pair<VertexId, VertexId>> edges;
    std::vector<VertexId> endpoints;  // every vertex repeated by its degree

    // Seed clique on m_attach+1 vertices.
    for (VertexId u = 0; u <= m_attach; ++u) {
        for (VertexId v = u + 1; v <= m_attach; ++v) {
            edges.emplace_back(u, v);
            endpoints.push_back(u);
            endpoints.push_back(v);
        }
    }

    std::vector<VertexId> targets;
    for (VertexId t = m_attach + 1; t < n; ++t) {
        targets.clear();
        while (targets.size() < m_attach) {
            VertexId cand = endpoints[rng_below(rng, endpoints.size())];
            if (std::find(targets.begin(), targets.end(), cand) == targets.end())
                targets.push_back(cand);
        }
        for (VertexId c : targets) {
            edges.emplace_back(t, c);
            endpoints.push_back(t);
            endpoints.push_back(c);
        }
    }

    // Relabel so vertex IDs carry no degree information.
    std::vector<VertexId> relabel(n);
    std::iota(relabel.begin(), relabel.end(), 0);
    for (uint32_t i = n; i > 1; --i)
        std::swap(relabel[i - 1], relabel[rng_below(rng, i)]);
    for (auto& [u, v] : edges) {
        u = relabel[u];
        v = relabel[v];
    }

    return build_csr(edges, n, true);
}

Graph load_edge_list(std::istream& in, bool undirected) {
    std::vector<std::pair<VertexId, VertexId>> edges;
    VertexId max_id = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        uint64_t u, v;
        if (!(ls >> u >> v)) throw std::runtime_error("edge list: bad line: " + line);
        edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
        max_id = std::max({max_id, static_cast<VertexId>(u), static_cast<VertexId>(v)});
    }
    uint32_t n = edges.empty() ? 0 : max_id + 1;
    return build_csr(edges, n, undirected);
}

Graph load_edge_list_file(const std::string& path, bool undirected) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list: " + path);
    return load_edge_list(in, undirected);
}

void save_edge_list_file(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write edge list: " + path);
    for (VertexId u = 0; u < g.num_vertices; ++u)
        for (VertexId v : g.neighbors(u))
            if (v >= u) out << u << ' ' << v << '\n';
}

namespace {

constexpr char kSnapshotMagic[4] = {'G', 'N', 'N', 'G'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void write_vec(std::ostream& out, const std::vector<T>& v) {
    uint64_t n = v.size();
    write_pod(out, n);
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(n * sizeof(T)));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("snapshot: truncated");
    return v;
}

template <typename T>
std::vector<T> read_vec(std::istream& in) {
    uint64_t n = read_pod<uint64_t>(in);
    std::vector<T> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in) throw std::runtime_error("snapshot: truncated");
    return v;
}

}  // namespace

void save_snapshot(const Graph& g, const VertexOrder* order, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write snapshot: " + path);
    out.write(kSnapshotMagic, 4);
    write_pod<uint32_t>(out, 1);  // version
    write_pod<uint32_t>(out, g.num_vertices);
    write_pod<uint8_t>(out, g.undirected ? 1 : 0);
    write_vec(out, g.offsets);
    write_vec(out, g.coords);
    write_pod<uint8_t>(out, order ? 1 : 0);
    if (order) {
        write_vec(out, order->order);
        write_vec(out, order->bin_boundaries);
    }
}

bool is_snapshot_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[4] = {};
    in.read(magic, 4);
    return in && std::memcmp(magic, kSnapshotMagic, 4) == 0;
}

Graph load_snapshot(const std::string& path, VertexOrder* order_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kSnapshotMagic, 4) != 0)
        throw std::runtime_error("snapshot: bad magic: " + path);
    uint32_t version = read_pod<uint32_t>(in);
    if (version != 1) throw std::runtime_error("snapshot: unsupported version");

    Graph g;
    g.num_vertices = read_pod<uint32_t>(in);
    g.undirected = read_pod<uint8_t>(in) != 0;
    g.offsets = read_vec<uint64_t>(in);
    g.coords = read_vec<VertexId>(in);
    g.degrees.resize(g.num_vertices);
    for (uint32_t i = 0; i < g.num_vertices; ++i)
        g.degrees[i] = static_cast<uint32_t>(g.offsets[i + 1] - g.offsets[i]);
    uint8_t has_order = read_pod<uint8_t>(in);
    if (has_order && order_out) {
        order_out->order = read_vec<VertexId>(in);
        order_out->bin_boundaries = read_vec<uint32_t>(in);
    }
    g.validate();
    return g;
}

}  // namespace gnnie

#include "mitig/netgraph.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mitig {

NetGraph::NetGraph(NodeId n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    out_.resize(n_);
    in_.resize(n_);
    for (EdgeId e = 0; e < (EdgeId)edges_.size(); e++) {
        const Edge& ed = edges_[e];
        if (ed.src < 0 || ed.src >= n_ || ed.dst < 0 || ed.dst >= n_)
            throw std::invalid_argument("edge endpoint out of range");
        if (!(ed.p > 0.0 && ed.p <= 1.0))
            throw std::invalid_argument("edge probability outside (0,1]");
        out_[ed.src].push_back(e);
        in_[ed.dst].push_back(e);
    }
    for (NodeId v = 0; v < n_; v++) {
        std::sort(out_[v].begin(), out_[v].end(),
                  [&](EdgeId a, EdgeId b) { return edges_[a].dst < edges_[b].dst; });
        std::sort(in_[v].begin(), in_[v].end(),
                  [&](EdgeId a, EdgeId b) { return edges_[a].src < edges_[b].src; });
    }
}

namespace {

struct RawEdge {
    int64_t u, v;
    double p;
    bool has_p;
};

std::vector<RawEdge> parse_lines(std::istream& is, ProbMode mode) {
    std::vector<RawEdge> raw;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        lineno++;
        size_t pos = line.find_first_not_of(" \t\r\n");
        if (pos == std::string::npos || line[pos] == '#') continue;
        std::istringstream ls(line);
        RawEdge e{};
        if (!(ls >> e.u >> e.v))
            throw std::runtime_error("edge list parse error at line " + std::to_string(lineno));
        if (e.u < 0 || e.v < 0)
            throw std::runtime_error("negative node id at line " + std::to_string(lineno));
        e.has_p = static_cast<bool>(ls >> e.p);
        std::string extra;
        if (ls >> extra)
            throw std::runtime_error("trailing tokens at line " + std::to_string(lineno));
        if (mode == ProbMode::Explicit && !e.has_p)
            throw std::runtime_error("missing probability column at line " + std::to_string(lineno));
        if (e.has_p && !(e.p > 0.0 && e.p <= 1.0))
            throw std::runtime_error("probability outside (0,1] at line " + std::to_string(lineno));
        raw.push_back(e);
    }
    return raw;
}

NetGraph build_graph(std::vector<RawEdge> raw, bool directed, ProbMode mode, double fixed_p,
                     LoadReport* report) {
    if (mode == ProbMode::Fixed && !(fixed_p > 0.0 && fixed_p <= 1.0))
        throw std::invalid_argument("fixed probability outside (0,1]");
    LoadReport local{};
    int64_t max_id = -1;
    for (const auto& e : raw) max_id = std::max({max_id, e.u, e.v});
    if (max_id >= (int64_t)1 << 31)
        throw std::runtime_error("node id too large; remap sparse ids first");
    NodeId n = (NodeId)(max_id + 1);

    // Undirected expansion happens before probability assignment.
    std::vector<RawEdge> expanded;
    expanded.reserve(raw.size() * (directed ? 1 : 2));
    for (const auto& e : raw) {
        if (e.u == e.v) {
            local.dropped_self_loops++;
            continue;
        }
        expanded.push_back(e);
        if (!directed) expanded.push_back({e.v, e.u, e.p, e.has_p});
    }
    std::sort(expanded.begin(), expanded.end(), [](const RawEdge& a, const RawEdge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    std::vector<Edge> edges;
    edges.reserve(expanded.size());
    for (const auto& e : expanded) {
        double p = mode == ProbMode::Fixed ? fixed_p : (e.has_p ? e.p : 1.0);
        if (!edges.empty() && edges.back().src == e.u && edges.back().dst == e.v) {
            local.merged_duplicates++;
            edges.back().p = std::max(edges.back().p, p);
        } else {
            edges.push_back({(NodeId)e.u, (NodeId)e.v, p});
        }
    }
    if (mode == ProbMode::InverseIndegree) {
        std::vector<int> indeg(n, 0);
        for (const auto& e : edges) indeg[e.dst]++;
        for (auto& e : edges) e.p = 1.0 / indeg[e.dst];
    }
    if (local.dropped_self_loops)
        std::fprintf(stderr, "warning: dropped %d self-loop(s)\n", local.dropped_self_loops);
    if (local.merged_duplicates)
        std::fprintf(stderr, "warning: merged %d duplicate edge(s), keeping max probability\n",
                     local.merged_duplicates);
    if (report) *report = local;
    return NetGraph(n, std::move(edges));
}

} // namespace

NetGraph load_edge_list(const std::string& path, bool directed, ProbMode mode, double fixed_p,
                        LoadReport* report) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open edge list: " + path);
    return build_graph(parse_lines(is, mode), directed, mode, fixed_p, report);
}

NetGraph parse_edge_list(const std::string& text, bool directed, ProbMode mode, double fixed_p,
                         LoadReport* report) {
    std::istringstream is(text);
    return build_graph(parse_lines(is, mode), directed, mode, fixed_p, report);
}

void save_edge_list(const NetGraph& g, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write edge list: " + path);
    char buf[96];
    for (const Edge& e : g.edges()) {
        std::snprintf(buf, sizeof buf, "%d %d %.17g\n", e.src, e.dst, e.p);
        os << buf;
    }
}

void save_id_map(const std::vector<std::pair<int64_t, NodeId>>& map, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write id map: " + path);
    for (const auto& [ext, internal] : map) os << ext << ' ' << internal << '\n';
}

std::vector<std::pair<int64_t, NodeId>> remap_edge_list(const std::string& in_path,
                                                        const std::string& out_path) {
    std::ifstream is(in_path);
    if (!is) throw std::runtime_error("cannot open edge list: " + in_path);
    auto raw = parse_lines(is, ProbMode::InverseIndegree);
    std::map<int64_t, NodeId> ids;
    for (const auto& e : raw) {
        ids.emplace(e.u, 0);
        ids.emplace(e.v, 0);
    }
    NodeId next = 0;
    for (auto& [ext, internal] : ids) internal = next++;
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot write edge list: " + out_path);
    for (const auto& e : raw) {
        os << ids[e.u] << ' ' << ids[e.v];
        if (e.has_p) os << ' ' << e.p;
        os << '\n';
    }
    return {ids.begin(), ids.end()};
}

std::string graph_stats(const NetGraph& g, const std::string& name) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s: nodes=%d edges=%d avg_degree=%.2f\n", name.c_str(),
                  g.num_nodes(), g.num_edges(), g.avg_degree());
    return buf;
}

void ModelParams::validate() const {
    if (!(meeting_prob_f > 0.0 && meeting_prob_f <= 1.0))
        throw std::invalid_argument("meeting_prob_f outside (0,1]");
    if (meeting_mode == MeetingMode::GlobalConstant &&
        !(meeting_global > 0.0 && meeting_global <= 1.0))
        throw std::invalid_argument("meeting probability outside (0,1]");
    if (meeting_mode == MeetingMode::EgoCentric && !(ego_c > 0.0))
        throw std::invalid_argument("ego-centric smoothing constant must be positive");
    if (!(aw_zero_probability >= 0.0 && aw_zero_probability <= 1.0))
        throw std::invalid_argument("aw_zero_probability outside [0,1]");
    if (aw_mode == AwMode::MixtureRaw) {
        double total = 0.0;
        for (auto [w, p] : aw_second_mixture) {
            if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("mixture rate outside (0,1]");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw std::invalid_argument("mixture weights must sum to 1");
    }
    if (aw_mode == AwMode::LearnedSingle && !(aw_rate_seconds > 0.0 && aw_rate_seconds <= 1.0))
        throw std::invalid_argument("aw_rate_seconds outside (0,1]");
    if (!(base_hop_seconds > 0.0)) throw std::invalid_argument("base_hop_seconds must be positive");
}

std::vector<double> assign_meeting_probs(const NetGraph& g, const ModelParams& params) {
    params.validate();
    std::vector<double> m(g.num_edges(), 0.0);
    switch (params.meeting_mode) {
    case MeetingMode::GlobalConstant:
        std::fill(m.begin(), m.end(), params.meeting_global);
        break;
    case MeetingMode::EgoCentric:
        for (EdgeId e = 0; e < g.num_edges(); e++)
            m[e] = params.ego_c / (g.out_degree(g.edge(e).src) + params.ego_c);
        break;
    case MeetingMode::PerEdge:
        if ((EdgeId)params.meeting_per_edge.size() != g.num_edges())
            throw std::invalid_argument("per-edge meeting table size mismatch");
        m = params.meeting_per_edge;
        break;
    }
    for (double x : m)
        if (!(x > 0.0 && x <= 1.0)) throw std::invalid_argument("meeting probability outside (0,1]");
    return m;
}

} // namespace mitig

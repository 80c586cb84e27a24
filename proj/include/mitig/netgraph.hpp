#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mitig {

using NodeId = int32_t;
using EdgeId = int32_t;

struct Edge {
    NodeId src;
    NodeId dst;
    double p; // propagation probability, in (0,1]
};

// Immutable directed graph with per-edge propagation probabilities.
// Undirected input is stored as two antiparallel directed edges.
class NetGraph {
public:
    NetGraph() = default;
    NetGraph(NodeId n, std::vector<Edge> edges);

    NodeId num_nodes() const { return n_; }
    EdgeId num_edges() const { return (EdgeId)edges_.size(); }
    const Edge& edge(EdgeId e) const { return edges_[e]; }
    const std::vector<Edge>& edges() const { return edges_; }

    // Edge ids, sorted by the opposite endpoint.
    const std::vector<EdgeId>& out_edges(NodeId v) const { return out_[v]; }
    const std::vector<EdgeId>& in_edges(NodeId v) const { return in_[v]; }

    int out_degree(NodeId v) const { return (int)out_[v].size(); }
    int in_degree(NodeId v) const { return (int)in_[v].size(); }

    double avg_degree() const { return n_ ? (double)edges_.size() / n_ : 0.0; }

private:
    NodeId n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<EdgeId>> out_;
    std::vector<std::vector<EdgeId>> in_;
};

enum class ProbMode { Explicit, InverseIndegree, Fixed };

struct LoadReport {
    int dropped_self_loops = 0;
    int merged_duplicates = 0;
};

// Reads whitespace-separated lines "u v [p]". Node ids are non-negative
// integers; n = max id + 1. Undirected graphs are expanded to antiparallel
// pairs before probability assignment, so inverse-indegree uses the
// post-expansion in-degree. Self-loops are dropped and duplicate edges merged
// (keeping the max probability), both with a warning.
NetGraph load_edge_list(const std::string& path, bool directed, ProbMode mode,
                        double fixed_p = 0.1, LoadReport* report = nullptr);

// Same contract, parsing from an in-memory string (used by tests and fixtures).
NetGraph parse_edge_list(const std::string& text, bool directed, ProbMode mode,
                         double fixed_p = 0.1, LoadReport* report = nullptr);

// Writes "u v p" lines; load_edge_list(-, directed=true, Explicit) round-trips.
void save_edge_list(const NetGraph& g, const std::string& path);

// "external_id internal_id" sidecar used when remapping sparse ids.
void save_id_map(const std::vector<std::pair<int64_t, NodeId>>& map, const std::string& path);

// Remaps arbitrary non-negative ids in an edge-list file to dense 0-based ids.
// Returns the external->internal map (sorted by external id).
std::vector<std::pair<int64_t, NodeId>> remap_edge_list(const std::string& in_path,
                                                        const std::string& out_path);

// n, m, avg degree block for the stats dump.
std::string graph_stats(const NetGraph& g, const std::string& name);

enum class MeetingMode { GlobalConstant, EgoCentric, PerEdge };
enum class AwMode { MixtureRaw, LearnedSingle, Constant, Uniform, CustomTable };

// Model knobs. Defaults follow the calibrated values: meeting success 1/6,
// no-read probability 0.6, reading time geometric with mean 74 s, base hop
// 200 s, and the 0.76/0.24 short/long-form reading mixture.
struct ModelParams {
    double meeting_prob_f = 1.0;                 // campaign F meets in one hop by default
    MeetingMode meeting_mode = MeetingMode::GlobalConstant;
    double meeting_global = 1.0 / 6.0;
    double ego_c = 5.0;
    std::vector<double> meeting_per_edge;        // PerEdge mode

    AwMode aw_mode = AwMode::LearnedSingle;
    double aw_zero_probability = 0.6;
    double aw_rate_seconds = 1.0 / 74.0;         // geometric success prob for reading seconds
    std::vector<std::pair<double, double>> aw_second_mixture = {{0.76, 1.0 / 57.0},
                                                                {0.24, 1.0 / 123.0}};
    double base_hop_seconds = 200.0;
    int64_t aw_constant_hops = 0;                // Constant mode
    int64_t aw_uniform_max = 0;                  // Uniform mode: 0..max inclusive
    std::vector<std::pair<int64_t, double>> aw_table; // CustomTable: (hops, prob)

    void validate() const;
};

// Per-edge meeting probability table for campaign M.
std::vector<double> assign_meeting_probs(const NetGraph& g, const ModelParams& params);

} // namespace mitig

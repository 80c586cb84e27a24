#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mitig/netgraph.hpp"
#include "mitig/rng.hpp"
#include "mitig/scratch.hpp"

namespace mitig {

using Step = int64_t;
constexpr Step kNever = std::numeric_limits<Step>::max() / 4;

// Distribution of a meeting length along one edge. Cap > 0 truncates the
// geometric, lumping the tail mass Pr[h >= cap] onto h = cap.
struct HopDist {
    double m = 1.0;
    int64_t cap = 0;     // 0 = untruncated
    int64_t fixed = 0;   // > 0 pins the value outright

    int64_t sample(Rng& rng) const {
        if (fixed > 0) return fixed;
        int64_t h = rng.geometric(m);
        if (cap > 0 && h > cap) h = cap;
        return h;
    }
};

// Distribution of one node's activation-window length.
struct AwDist {
    enum Kind { Model, Fixed, Table } kind = Model;
    int64_t fixed = 0;
    std::vector<std::pair<int64_t, double>> table; // (hops, prob), probs sum to 1
};

// Resolved sampling model for possible worlds: per-edge liveness comes from
// the graph's propagation probabilities, meeting lengths and window lengths
// from the specs below. Pinned fields (used by test fixtures) are constants.
struct WorldModel {
    const NetGraph* g = nullptr;
    ModelParams params;
    std::vector<HopDist> hop_m;                       // per edge
    std::vector<HopDist> hop_f;                       // per edge
    std::vector<AwDist> aw;                           // per node
    std::vector<int8_t> pinned_live;                  // per edge, -1 = random
    std::vector<std::vector<uint32_t>> pinned_perm;   // per node, empty = random

    static WorldModel from_params(const NetGraph& g, const ModelParams& params);

    bool edge_pinned(EdgeId e) const { return !pinned_live.empty() && pinned_live[e] >= 0; }
};

// Seconds-based window length: 0 with probability aw_zero_probability, else
// reading seconds from the configured geometric, normalized by the base hop
// length with round-to-nearest.
int64_t sample_aw_length(const ModelParams& params, Rng& rng);

// Geometric meeting length on {1,2,...}; validates m in (0,1].
int64_t sample_meeting_length(double m, Rng& rng);

// Backing buffers for one lazily sampled world; pooled per thread so that
// sampling loops do not pay a full-size clear per sample.
struct WorldStore {
    StampedArray<int8_t> live;
    StampedArray<Step> hm, hf, tau;
    std::vector<std::vector<uint32_t>> perm;
    StampedArray<int8_t> perm_set;
};

// Lazily materialized possible world. Fields are generated on first access
// from streams keyed by (seed, index, field, entity); two worlds with equal
// (seed, index) answer every query identically regardless of query order.
// A World is confined to one thread.
class World {
public:
    World(const WorldModel& model, uint64_t seed, uint64_t index);
    ~World();
    World(const World&) = delete;
    World& operator=(const World&) = delete;

    bool edge_live(EdgeId e) const;
    Step hop_m(EdgeId e) const;
    Step hop_f(EdgeId e) const;
    Step tau(NodeId v) const;
    // Permutation of positions into g.in_edges(v).
    const std::vector<uint32_t>& perm(NodeId v) const;

    const NetGraph& graph() const { return *model_->g; }
    uint64_t seed() const { return seed_; }
    uint64_t index() const { return index_; }

private:
    const WorldModel* model_;
    uint64_t seed_, index_;
    WorldStore* store_;
};

// Fully materialized world; the oracle enumerates these directly.
struct MaterializedWorld {
    const NetGraph* g = nullptr;
    std::vector<int8_t> live;
    std::vector<Step> hm;
    std::vector<Step> hf;
    std::vector<Step> tau;
    std::vector<std::vector<uint32_t>> perm; // per node, may be empty = identity

    bool edge_live(EdgeId e) const { return live[e] != 0; }
    Step hop_m(EdgeId e) const { return hm[e]; }
    Step hop_f(EdgeId e) const { return hf[e]; }
    Step tau_of(NodeId v) const { return tau[v]; }
    const std::vector<uint32_t>& perm_of(NodeId v) const;

    static MaterializedWorld materialize(const World& w);
};

// View with campaign M's meeting events removed on critical edges
// (h^M := 1 there); everything else passes through.
template <class W>
class CriticalOverlay {
public:
    CriticalOverlay(const W& base, const std::vector<uint8_t>& critical)
        : base_(&base), critical_(&critical) {}

    bool edge_live(EdgeId e) const { return base_->edge_live(e); }
    Step hop_m(EdgeId e) const { return (*critical_)[e] ? 1 : base_->hop_m(e); }
    Step hop_f(EdgeId e) const { return base_->hop_f(e); }
    Step tau(NodeId v) const { return tau_of_impl(v); }
    Step tau_of(NodeId v) const { return tau_of_impl(v); }
    const std::vector<uint32_t>& perm_of(NodeId v) const;

private:
    Step tau_of_impl(NodeId v) const;
    const W* base_;
    const std::vector<uint8_t>* critical_;
};

// Uniform accessors so simulation code can be written once for lazy worlds,
// materialized worlds, and overlays.
inline Step world_tau(const World& w, NodeId v) { return w.tau(v); }
inline Step world_tau(const MaterializedWorld& w, NodeId v) { return w.tau_of(v); }
inline const std::vector<uint32_t>& world_perm(const World& w, NodeId v) { return w.perm(v); }
inline const std::vector<uint32_t>& world_perm(const MaterializedWorld& w, NodeId v) {
    return w.perm_of(v);
}
template <class W>
Step world_tau(const CriticalOverlay<W>& w, NodeId v) { return w.tau_of(v); }
template <class W>
const std::vector<uint32_t>& world_perm(const CriticalOverlay<W>& w, NodeId v) {
    return w.perm_of(v);
}

template <class W>
Step CriticalOverlay<W>::tau_of_impl(NodeId v) const { return world_tau(*base_, v); }
template <class W>
const std::vector<uint32_t>& CriticalOverlay<W>::perm_of(NodeId v) const {
    return world_perm(*base_, v);
}

// Human-readable dump of a small, fully materialized world.
std::string dump_world(const MaterializedWorld& w);

} // namespace mitig

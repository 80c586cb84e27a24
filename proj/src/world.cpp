#include "mitig/world.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace mitig {

namespace {
// Stream tags; part of the replay format.
enum : uint64_t { kTagLive = 1, kTagHopM = 2, kTagHopF = 3, kTagTau = 4, kTagPerm = 5 };

const std::vector<uint32_t>& identity_perm(size_t k) {
    static thread_local std::vector<uint32_t> cache;
    if (cache.size() < k) {
        size_t old = cache.size();
        cache.resize(k);
        for (size_t i = old; i < k; i++) cache[i] = (uint32_t)i;
    }
    // All identity prefixes are shared; callers only read the first k slots.
    return cache;
}
} // namespace

WorldModel WorldModel::from_params(const NetGraph& g, const ModelParams& params) {
    WorldModel m;
    m.g = &g;
    m.params = params;
    auto meet = assign_meeting_probs(g, params);
    m.hop_m.resize(g.num_edges());
    m.hop_f.resize(g.num_edges());
    for (EdgeId e = 0; e < g.num_edges(); e++) {
        m.hop_m[e] = HopDist{meet[e], 0, 0};
        m.hop_f[e] = HopDist{params.meeting_prob_f, 0, params.meeting_prob_f >= 1.0 ? 1 : 0};
    }
    m.aw.assign(g.num_nodes(), AwDist{});
    return m;
}

int64_t sample_aw_length(const ModelParams& params, Rng& rng) {
    switch (params.aw_mode) {
    case AwMode::Constant:
        return params.aw_constant_hops;
    case AwMode::Uniform:
        return (int64_t)rng.below((uint64_t)params.aw_uniform_max + 1);
    case AwMode::CustomTable: {
        double u = rng.u01(), acc = 0.0;
        for (auto [hops, p] : params.aw_table) {
            acc += p;
            if (u < acc) return hops;
        }
        return params.aw_table.empty() ? 0 : params.aw_table.back().first;
    }
    case AwMode::MixtureRaw:
    case AwMode::LearnedSingle:
        break;
    }
    if (rng.bernoulli(params.aw_zero_probability)) return 0;
    double seconds;
    if (params.aw_mode == AwMode::LearnedSingle) {
        seconds = (double)rng.geometric(params.aw_rate_seconds);
    } else {
        double u = rng.u01(), acc = 0.0;
        double rate = params.aw_second_mixture.back().second;
        for (auto [w, p] : params.aw_second_mixture) {
            acc += w;
            if (u < acc) { rate = p; break; }
        }
        seconds = (double)rng.geometric(rate);
    }
    // Round to nearest hop, ties away from zero.
    return (int64_t)std::llround(seconds / params.base_hop_seconds);
}

int64_t sample_meeting_length(double m, Rng& rng) {
    if (!(m > 0.0 && m <= 1.0)) throw std::invalid_argument("meeting probability outside (0,1]");
    return rng.geometric(m);
}

namespace {

// Per-thread pool so nested Worlds each get their own buffers.
std::vector<std::unique_ptr<WorldStore>>& store_pool() {
    static thread_local std::vector<std::unique_ptr<WorldStore>> pool;
    return pool;
}

} // namespace

World::World(const WorldModel& model, uint64_t seed, uint64_t index)
    : model_(&model), seed_(seed), index_(index) {
    auto& pool = store_pool();
    if (pool.empty()) {
        store_ = new WorldStore();
    } else {
        store_ = pool.back().release();
        pool.pop_back();
    }
    const NetGraph& g = *model.g;
    store_->live.reset(g.num_edges(), 0);
    store_->hm.reset(g.num_edges(), 0);
    store_->hf.reset(g.num_edges(), 0);
    store_->tau.reset(g.num_nodes(), 0);
    store_->perm_set.reset(g.num_nodes(), 0);
    if (store_->perm.size() < (size_t)g.num_nodes()) store_->perm.resize(g.num_nodes());
}

World::~World() { store_pool().emplace_back(store_); }

bool World::edge_live(EdgeId e) const {
    StampedArray<int8_t>& live = store_->live;
    if (!live.touched(e)) {
        int8_t v;
        if (model_->edge_pinned(e)) {
            v = model_->pinned_live[e];
        } else {
            double p = model_->g->edge(e).p;
            v = p >= 1.0 || Rng(seed_, index_, kTagLive, (uint64_t)e).bernoulli(p);
        }
        live.set(e, v);
    }
    return live.get(e) != 0;
}

Step World::hop_m(EdgeId e) const {
    StampedArray<Step>& hm = store_->hm;
    if (!hm.touched(e)) {
        Rng rng(seed_, index_, kTagHopM, (uint64_t)e);
        hm.set(e, model_->hop_m[e].sample(rng));
    }
    return hm.get(e);
}

Step World::hop_f(EdgeId e) const {
    StampedArray<Step>& hf = store_->hf;
    if (!hf.touched(e)) {
        Rng rng(seed_, index_, kTagHopF, (uint64_t)e);
        hf.set(e, model_->hop_f[e].sample(rng));
    }
    return hf.get(e);
}

Step World::tau(NodeId v) const {
    StampedArray<Step>& tau = store_->tau;
    if (!tau.touched(v)) {
        const AwDist& d = model_->aw[v];
        Rng rng(seed_, index_, kTagTau, (uint64_t)v);
        Step val = 0;
        switch (d.kind) {
        case AwDist::Model:
            val = sample_aw_length(model_->params, rng);
            break;
        case AwDist::Fixed:
            val = d.fixed;
            break;
        case AwDist::Table: {
            double u = rng.u01(), acc = 0.0;
            val = d.table.back().first;
            for (auto [hops, p] : d.table) {
                acc += p;
                if (u < acc) { val = hops; break; }
            }
            break;
        }
        }
        tau.set(v, val);
    }
    return tau.get(v);
}

const std::vector<uint32_t>& World::perm(NodeId v) const {
    if (!store_->perm_set.touched(v)) {
        store_->perm_set.set(v, 1);
        uint32_t k = (uint32_t)model_->g->in_degree(v);
        if (!model_->pinned_perm.empty() && !model_->pinned_perm[v].empty()) {
            store_->perm[v] = model_->pinned_perm[v];
        } else {
            Rng rng(seed_, index_, kTagPerm, (uint64_t)v);
            store_->perm[v] = rng.permutation(k);
        }
    }
    return store_->perm[v];
}

const std::vector<uint32_t>& MaterializedWorld::perm_of(NodeId v) const {
    if (!perm.empty() && !perm[v].empty()) return perm[v];
    return identity_perm((size_t)g->in_degree(v));
}

MaterializedWorld MaterializedWorld::materialize(const World& w) {
    const NetGraph& g = w.graph();
    MaterializedWorld m;
    m.g = &g;
    m.live.resize(g.num_edges());
    m.hm.resize(g.num_edges());
    m.hf.resize(g.num_edges());
    m.tau.resize(g.num_nodes());
    m.perm.resize(g.num_nodes());
    for (EdgeId e = 0; e < g.num_edges(); e++) {
        m.live[e] = w.edge_live(e);
        m.hm[e] = w.hop_m(e);
        m.hf[e] = w.hop_f(e);
    }
    for (NodeId v = 0; v < g.num_nodes(); v++) {
        m.tau[v] = w.tau(v);
        m.perm[v] = w.perm(v);
    }
    return m;
}

std::string dump_world(const MaterializedWorld& w) {
    std::ostringstream os;
    const NetGraph& g = *w.g;
    for (EdgeId e = 0; e < g.num_edges(); e++) {
        const Edge& ed = g.edge(e);
        os << "edge " << ed.src << "->" << ed.dst << (w.live[e] ? " live" : " blocked")
           << " hF=" << w.hf[e] << " hM=" << w.hm[e] << '\n';
    }
    for (NodeId v = 0; v < g.num_nodes(); v++) {
        os << "node " << v << " tau=" << w.tau[v] << " pi=[";
        const auto& pi = w.perm_of(v);
        for (int i = 0; i < g.in_degree(v); i++) {
            if (i) os << ' ';
            os << g.edge(g.in_edges(v)[pi[i]]).src;
        }
        os << "]\n";
    }
    return os.str();
}

} // namespace mitig

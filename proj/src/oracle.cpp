#include "mitig/oracle.hpp"
#include "mitig/sim_impl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mitig {

namespace {

struct Axis {
    enum Kind { Live, HopM, Tau, Perm } kind;
    int32_t entity;
    std::vector<double> probs;                  // per state
    std::vector<int64_t> values;                // Live/HopM/Tau payloads
    std::vector<std::vector<uint32_t>> perms;   // Perm payloads
};

std::vector<Axis> build_axes(const EnumerableInstance& inst, bool liveness_only) {
    const NetGraph& g = inst.g();
    const WorldModel& m = inst.model;
    std::vector<Axis> axes;
    for (EdgeId e = 0; e < g.num_edges(); e++) {
        double p = g.edge(e).p;
        if (m.edge_pinned(e) || p >= 1.0) continue;
        axes.push_back({Axis::Live, e, {p, 1.0 - p}, {1, 0}, {}});
    }
    if (liveness_only) return axes;
    for (EdgeId e = 0; e < g.num_edges(); e++) {
        const HopDist& d = m.hop_m[e];
        if (d.fixed > 0 || d.m >= 1.0) continue;
        if (d.cap < 1)
            throw std::runtime_error("instance not enumerable: geometric meeting length without cap");
        Axis ax{Axis::HopM, e, {}, {}, {}};
        double tail = 1.0;
        for (int64_t t = 1; t <= d.cap; t++) {
            double mass = t == d.cap ? tail : tail * d.m;
            ax.probs.push_back(mass);
            ax.values.push_back(t);
            tail *= 1.0 - d.m;
        }
        axes.push_back(std::move(ax));
    }
    for (NodeId v = 0; v < g.num_nodes(); v++) {
        const AwDist& d = m.aw[v];
        if (d.kind == AwDist::Model)
            throw std::runtime_error("instance not enumerable: model-sampled window length");
        if (d.kind == AwDist::Fixed || d.table.size() <= 1) continue;
        Axis ax{Axis::Tau, v, {}, {}, {}};
        for (auto [hops, p] : d.table) {
            ax.probs.push_back(p);
            ax.values.push_back(hops);
        }
        axes.push_back(std::move(ax));
    }
    for (NodeId v = 0; v < g.num_nodes(); v++) {
        int deg = g.in_degree(v);
        if (deg < 2) continue;
        if (!m.pinned_perm.empty() && !m.pinned_perm[v].empty()) continue;
        if (deg > 5) throw std::runtime_error("instance not enumerable: in-degree above 5");
        Axis ax{Axis::Perm, v, {}, {}, {}};
        std::vector<uint32_t> perm(deg);
        std::iota(perm.begin(), perm.end(), 0);
        int64_t count = 1;
        for (int i = 2; i <= deg; i++) count *= i;
        do {
            ax.perms.push_back(perm);
            ax.probs.push_back(1.0 / count);
        } while (std::next_permutation(perm.begin(), perm.end()));
        axes.push_back(std::move(ax));
    }
    return axes;
}

MaterializedWorld base_world(const EnumerableInstance& inst) {
    const NetGraph& g = inst.g();
    const WorldModel& m = inst.model;
    MaterializedWorld w;
    w.g = &g;
    w.live.resize(g.num_edges());
    w.hm.resize(g.num_edges());
    w.hf.resize(g.num_edges());
    w.tau.resize(g.num_nodes());
    w.perm.resize(g.num_nodes());
    for (EdgeId e = 0; e < g.num_edges(); e++) {
        w.live[e] = m.edge_pinned(e) ? m.pinned_live[e] : 1;
        w.hm[e] = m.hop_m[e].fixed > 0 ? m.hop_m[e].fixed : (m.hop_m[e].m >= 1.0 ? 1 : 0);
        if (m.hop_f[e].fixed > 0 || m.hop_f[e].m >= 1.0) {
            w.hf[e] = std::max<int64_t>(m.hop_f[e].fixed, 1);
        } else {
            throw std::runtime_error("instance not enumerable: random F meeting lengths");
        }
    }
    for (NodeId v = 0; v < g.num_nodes(); v++) {
        const AwDist& d = m.aw[v];
        w.tau[v] = d.kind == AwDist::Fixed ? d.fixed : (d.table.empty() ? 0 : d.table[0].first);
        if (!m.pinned_perm.empty() && !m.pinned_perm[v].empty()) w.perm[v] = m.pinned_perm[v];
    }
    return w;
}

void enumerate_axes(const std::vector<Axis>& axes, MaterializedWorld& w,
                    const std::function<void(double, const MaterializedWorld&)>& fn) {
    // Depth-first odometer over axis states.
    std::function<void(size_t, double)> rec = [&](size_t depth, double prob) {
        if (depth == axes.size()) {
            fn(prob, w);
            return;
        }
        const Axis& ax = axes[depth];
        for (size_t s = 0; s < ax.probs.size(); s++) {
            switch (ax.kind) {
            case Axis::Live: w.live[ax.entity] = (int8_t)ax.values[s]; break;
            case Axis::HopM: w.hm[ax.entity] = ax.values[s]; break;
            case Axis::Tau: w.tau[ax.entity] = ax.values[s]; break;
            case Axis::Perm: w.perm[ax.entity] = ax.perms[s]; break;
            }
            rec(depth + 1, prob * ax.probs[s]);
        }
    };
    rec(0, 1.0);
}

} // namespace

int64_t EnumerableInstance::world_count(int64_t guard) const {
    auto axes = build_axes(*this, false);
    int64_t count = 1;
    for (const Axis& ax : axes) {
        int64_t states = (int64_t)std::max(ax.probs.size(), ax.perms.size());
        if (count > guard / std::max<int64_t>(states, 1))
            throw std::runtime_error("world space too large: more than " + std::to_string(guard) +
                                     " worlds");
        count *= states;
    }
    return count;
}

void EnumerableInstance::for_each_world(
    const std::function<void(double, const MaterializedWorld&)>& fn) const {
    world_count();
    auto axes = build_axes(*this, false);
    MaterializedWorld w = base_world(*this);
    enumerate_axes(axes, w, fn);
}

void EnumerableInstance::for_each_liveness(
    const std::function<void(double, const MaterializedWorld&)>& fn) const {
    auto axes = build_axes(*this, true);
    MaterializedWorld w = base_world(*this);
    enumerate_axes(axes, w, fn);
}

double enumerate_exact(const EnumerableInstance& inst, const std::vector<NodeId>& seeds_f,
                       Objective objective, const std::vector<NodeId>& seeds_m) {
    double total = 0.0;
    inst.for_each_world([&](double p, const MaterializedWorld& w) {
        total += p * objective_in_world(inst.g(), w, seeds_f, seeds_m, objective, nullptr, nullptr);
    });
    return total;
}

double exact_inf_f(const EnumerableInstance& inst, const std::vector<NodeId>& seeds_f) {
    double total = 0.0;
    inst.for_each_liveness([&](double p, const MaterializedWorld& w) {
        auto touch = f_reach(inst.g(), w, seeds_f);
        int64_t c = 0;
        for (uint8_t t : touch) c += t == 1;
        total += p * c;
    });
    return total;
}

double exact_rdr_expectation(const EnumerableInstance& inst, const std::vector<NodeId>& seeds_f,
                             BoundVariant variant, const std::vector<NodeId>& seeds_m) {
    const NetGraph& g = inst.g();
    double total = 0.0;
    inst.for_each_world([&](double p, const MaterializedWorld& w) {
        Phase1State p1 = phase1_forward(g, w, seeds_f);
        for (NodeId root = 0; root < g.num_nodes(); root++) {
            if (p1.f_touch[root] != 1) continue;
            RdrSet r = build_rdr_at(g, w, seeds_f, root, variant, p1);
            uint8_t best = 0;
            for (NodeId u : seeds_m) {
                uint8_t wgt = r.weight_of(u);
                if (wgt > best) best = wgt;
            }
            total += p * best;
        }
    });
    return total;
}

namespace {

// Per-world singleton reward table for the decomposable bounds; r[u][v] is the
// reward candidate u alone achieves at v.
std::vector<std::vector<int8_t>> singleton_rewards(const NetGraph& g, const MaterializedWorld& w,
                                                   const std::vector<NodeId>& seeds_f,
                                                   const std::vector<NodeId>& cands,
                                                   Objective objective) {
    auto reach = f_reach(g, w, seeds_f);
    std::vector<std::vector<int8_t>> table(cands.size());
    std::vector<NodeId> single(1);

    if (objective == Objective::MuLower) {
        for (size_t i = 0; i < cands.size(); i++) {
            single[0] = cands[i];
            CascadeTrace tr = simulate(g, w, seeds_f, single);
            table[i].resize(g.num_nodes());
            for (NodeId v = 0; v < g.num_nodes(); v++)
                table[i][v] = (int8_t)reward(tr, v, reach[v] == 1, w.tau_of(v));
        }
        return table;
    }
    std::vector<uint8_t> f_touch(g.num_nodes(), 0);
    for (NodeId v = 0; v < g.num_nodes(); v++) f_touch[v] = reach[v] != 0;
    auto crit = critical_edges(g, w, f_touch);
    CriticalOverlay<MaterializedWorld> prime(w, crit);
    for (size_t i = 0; i < cands.size(); i++) {
        single[0] = cands[i];
        CascadeTrace tr = simulate(g, prime, seeds_f, single);
        auto overlap = overlap_targets(g, prime, cands[i], f_touch);
        bool lift_all = f_touch[cands[i]] != 0;
        table[i].resize(g.num_nodes());
        for (NodeId v = 0; v < g.num_nodes(); v++) {
            Step tau = w.tau_of(v);
            table[i][v] = (int8_t)(overlap[v] || lift_all
                                       ? reward_lifted(reach[v] == 1, tr.t_f[v], tr.t_m[v], tau)
                                       : reward(tr, v, reach[v] == 1, tau));
        }
    }
    return table;
}

} // namespace

std::vector<SubmodularityViolation> check_submodularity(const EnumerableInstance& inst,
                                                        const std::vector<NodeId>& seeds_f,
                                                        Objective objective, int max_b,
                                                        double tol) {
    const NetGraph& g = inst.g();
    std::vector<NodeId> cands;
    {
        std::vector<uint8_t> fake(g.num_nodes(), 0);
        for (NodeId s : seeds_f) fake[s] = 1;
        for (NodeId v = 0; v < g.num_nodes(); v++)
            if (!fake[v]) cands.push_back(v);
    }
    if (cands.size() > 16) throw std::runtime_error("too many candidates for exhaustive triples");
    const uint32_t full = 1u << cands.size();

    // f over all masks of size <= max_b + 1, accumulated world by world.
    std::vector<uint32_t> masks;
    for (uint32_t m = 0; m < full; m++)
        if (__builtin_popcount(m) <= max_b + 1) masks.push_back(m);
    std::vector<double> f(full, 0.0);

    inst.for_each_world([&](double p, const MaterializedWorld& w) {
        if (objective == Objective::Mu) {
            std::vector<NodeId> seeds;
            for (uint32_t m : masks) {
                seeds.clear();
                for (size_t i = 0; i < cands.size(); i++)
                    if (m & (1u << i)) seeds.push_back(cands[i]);
                f[m] += p * objective_in_world(g, w, seeds_f, seeds, objective, nullptr, nullptr);
            }
            return;
        }
        auto table = singleton_rewards(g, w, seeds_f, cands, objective);
        for (uint32_t m : masks) {
            double val = 0.0;
            for (NodeId v = 0; v < g.num_nodes(); v++) {
                int8_t best = 0;
                for (size_t i = 0; i < cands.size(); i++)
                    if ((m & (1u << i)) && table[i][v] > best) best = table[i][v];
                val += best;
            }
            f[m] += p * val;
        }
    });

    auto expand = [&](uint32_t mask) {
        std::vector<NodeId> out;
        for (size_t i = 0; i < cands.size(); i++)
            if (mask & (1u << i)) out.push_back(cands[i]);
        return out;
    };

    std::vector<SubmodularityViolation> violations;
    for (uint32_t b = 0; b < full; b++) {
        if (__builtin_popcount(b) > max_b) continue;
        for (size_t wi = 0; wi < cands.size(); wi++) {
            uint32_t wbit = 1u << wi;
            if (b & wbit) continue;
            double marg_b = f[b | wbit] - f[b];
            // All A subset of B.
            for (uint32_t a = b;; a = (a - 1) & b) {
                double marg_a = f[a | wbit] - f[a];
                if (marg_a < marg_b - tol)
                    violations.push_back({expand(a), expand(b), cands[wi], marg_a, marg_b});
                if (a == 0) break;
            }
        }
    }
    return violations;
}

// ---------------------------------------------------------------------------
// Instance parsing and fixtures

EnumerableInstance parse_instance(const std::string& text, const std::string& name) {
    struct RawE {
        NodeId u, v;
        double p = 1.0;
        HopDist hm{1.0, 0, 1};
        int8_t live = -1;
    };
    NodeId n = 0;
    std::vector<RawE> redges;
    std::vector<std::pair<NodeId, AwDist>> taus;
    std::vector<std::pair<NodeId, std::vector<NodeId>>> perms;

    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        lineno++;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok) || tok[0] == '#') continue;
        auto fail = [&](const std::string& why) {
            throw std::runtime_error(name + ":" + std::to_string(lineno) + ": " + why);
        };
        if (tok == "nodes") {
            if (!(ls >> n)) fail("nodes needs a count");
        } else if (tok == "edge") {
            RawE e;
            if (!(ls >> e.u >> e.v)) fail("edge needs two endpoints");
            std::string opt;
            while (ls >> opt) {
                if (opt.rfind("p=", 0) == 0) {
                    e.p = std::stod(opt.substr(2));
                } else if (opt.rfind("hm=", 0) == 0) {
                    e.hm = HopDist{1.0, 0, std::stoll(opt.substr(3))};
                } else if (opt.rfind("hmgeom=", 0) == 0) {
                    std::string rest = opt.substr(7);
                    size_t comma = rest.find(',');
                    if (comma == std::string::npos) fail("hmgeom needs m,cap");
                    e.hm = HopDist{std::stod(rest.substr(0, comma)),
                                   std::stoll(rest.substr(comma + 1)), 0};
                } else if (opt.rfind("live=", 0) == 0) {
                    e.live = (int8_t)std::stoi(opt.substr(5));
                } else {
                    fail("unknown edge option " + opt);
                }
            }
            redges.push_back(e);
        } else if (tok == "tau") {
            NodeId v;
            int64_t h;
            if (!(ls >> v >> h)) fail("tau needs node and hops");
            taus.push_back({v, AwDist{AwDist::Fixed, h, {}}});
        } else if (tok == "tautable") {
            NodeId v;
            if (!(ls >> v)) fail("tautable needs a node");
            AwDist d{AwDist::Table, 0, {}};
            std::string cell;
            double total = 0.0;
            while (ls >> cell) {
                size_t colon = cell.find(':');
                if (colon == std::string::npos) fail("tautable cells are hops:prob");
                d.table.push_back({std::stoll(cell.substr(0, colon)),
                                   std::stod(cell.substr(colon + 1))});
                total += d.table.back().second;
            }
            if (std::abs(total - 1.0) > 1e-9) fail("tautable probabilities must sum to 1");
            taus.push_back({v, d});
        } else if (tok == "perm") {
            NodeId v;
            if (!(ls >> v)) fail("perm needs a node");
            std::vector<NodeId> order;
            NodeId id;
            while (ls >> id) order.push_back(id);
            perms.push_back({v, order});
        } else {
            fail("unknown directive " + tok);
        }
    }

    std::vector<Edge> edges;
    edges.reserve(redges.size());
    for (const RawE& e : redges) edges.push_back({e.u, e.v, e.p});

    EnumerableInstance inst;
    inst.name = name;
    inst.graph = std::make_shared<NetGraph>(n, std::move(edges));
    const NetGraph& g = *inst.graph;

    WorldModel& m = inst.model;
    m.g = inst.graph.get();
    m.params.meeting_prob_f = 1.0;
    m.hop_f.assign(g.num_edges(), HopDist{1.0, 0, 1});
    m.hop_m.assign(g.num_edges(), HopDist{1.0, 0, 1});
    m.pinned_live.assign(g.num_edges(), -1);
    m.aw.assign(g.num_nodes(), AwDist{AwDist::Fixed, 0, {}});
    m.pinned_perm.assign(g.num_nodes(), {});

    // The graph sorts edge lists; recover each edge's id by endpoints.
    for (const RawE& e : redges) {
        for (EdgeId id : g.out_edges(e.u)) {
            if (g.edge(id).dst == e.v) {
                m.hop_m[id] = e.hm;
                m.pinned_live[id] = e.live;
                break;
            }
        }
    }
    for (auto& [v, d] : taus) m.aw[v] = d;
    for (auto& [v, order] : perms) {
        const auto& in = g.in_edges(v);
        if (order.size() != in.size())
            throw std::runtime_error(name + ": perm for node " + std::to_string(v) +
                                     " must list all in-neighbours");
        std::vector<uint32_t> positions;
        for (NodeId src : order) {
            bool found = false;
            for (uint32_t i = 0; i < in.size(); i++)
                if (g.edge(in[i]).src == src) {
                    positions.push_back(i);
                    found = true;
                    break;
                }
            if (!found)
                throw std::runtime_error(name + ": perm lists a non-in-neighbour of node " +
                                         std::to_string(v));
        }
        m.pinned_perm[v] = positions;
    }
    return inst;
}

EnumerableInstance load_instance(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open instance: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_instance(buf.str(), path);
}

EnumerableInstance make_random_instance(uint64_t seed, int nodes, int extra_edges,
                                        int random_live_edges, int slow_edges,
                                        int windowed_nodes) {
    for (uint64_t attempt = 0;; attempt++) {
        Rng rng(mix_key(seed, attempt));
        std::ostringstream text;
        text << "nodes " << nodes << '\n';
        std::vector<std::pair<NodeId, NodeId>> pairs;
        std::vector<int> indeg(nodes, 0);
        auto add_edge = [&](NodeId u, NodeId v) {
            if (u == v || indeg[v] >= 3) return false;
            for (auto [a, b] : pairs)
                if (a == u && b == v) return false;
            pairs.push_back({u, v});
            indeg[v]++;
            return true;
        };
        for (NodeId v = 1; v < nodes; v++) add_edge((NodeId)rng.below((uint64_t)v), v);
        for (int i = 0; i < extra_edges; i++)
            add_edge((NodeId)rng.below((uint64_t)nodes), (NodeId)rng.below((uint64_t)nodes));

        std::vector<size_t> order(pairs.size());
        std::iota(order.begin(), order.end(), 0);
        auto shuffled = rng.permutation((uint32_t)order.size());
        int live_left = random_live_edges, slow_left = slow_edges;
        for (uint32_t pos : shuffled) {
            auto [u, v] = pairs[pos];
            text << "edge " << u << ' ' << v;
            if (live_left-- > 0) text << " p=0.5";
            if (slow_left > 0) {
                text << (slow_left % 2 ? " hmgeom=0.5,2" : " hm=2");
                slow_left--;
            }
            text << '\n';
        }
        for (int i = 0; i < windowed_nodes; i++) {
            NodeId v = (NodeId)rng.below((uint64_t)nodes);
            text << "tautable " << v << " 0:0.5 2:0.5\n";
        }
        EnumerableInstance inst =
            parse_instance(text.str(), "random-" + std::to_string(seed));
        try {
            if (inst.world_count(200'000) > 0) return inst;
        } catch (const std::runtime_error&) {
            continue; // too many worlds; redraw
        }
    }
}

namespace {

constexpr const char* kDiamond = R"(# supermodularity counterexample: two slow meeting edges guard the sink
nodes 7
edge 0 1
edge 1 2
edge 1 3
edge 2 4 hm=5
edge 3 4 hm=5
edge 5 2 hm=1
edge 6 3 hm=1
perm 2 1 5
perm 3 1 6
perm 4 2 3
)";

constexpr const char* kIntro = R"(# 16-node walkthrough network; cyan labels become hm=, red labels tau
nodes 16
edge 0 1
edge 0 2
edge 0 3
edge 0 4
edge 0 5
edge 0 6
edge 1 2 hm=5
edge 1 7
edge 2 8 hm=3
edge 2 9
edge 3 9
edge 10 3
edge 4 11
edge 11 4
edge 5 15
edge 7 8 hm=3
edge 5 6
edge 10 4
edge 12 11
edge 12 15 hm=2
edge 13 1
edge 14 10 hm=3
edge 12 14 hm=2
edge 5 11
edge 11 5
edge 3 2
edge 2 3
edge 6 1
edge 1 6
tau 3 4
tau 4 1
perm 1 0 13 6
perm 2 0 1 3
perm 3 0 10 2
perm 4 11 10 0
perm 5 0 11
perm 6 0 5 1
perm 8 2 7
perm 9 2 3
perm 11 4 12 5
perm 15 5 12
)";

constexpr const char* kRunning = R"(# 9-node three-phase construction example, world pinned to the worked figures
nodes 9
edge 0 1
edge 0 3
edge 1 4 hm=5
edge 1 2
edge 3 4 hm=2
edge 2 4 live=0
edge 6 3 hm=1
edge 6 7 hm=1
edge 7 4 hm=1
edge 5 4 live=0
edge 8 7 hm=2
tau 1 2
tau 3 1
tau 7 1
tau 4 2
perm 3 6 0
perm 4 7 3 1 2 5
perm 7 6 8
)";

} // namespace

EnumerableInstance diamond_instance() { return parse_instance(kDiamond, "diamond"); }
EnumerableInstance intro_instance() { return parse_instance(kIntro, "intro"); }
EnumerableInstance running_instance() { return parse_instance(kRunning, "running"); }

} // namespace mitig

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mitig/rdr.hpp"
#include "mitig/sim.hpp"
#include "mitig/world.hpp"

namespace mitig {

// Tiny instance whose randomness has finite support, so the possible-world
// space can be enumerated exactly: edges are live/blocked (or pinned),
// meeting lengths come from fixed values or truncated geometrics, window
// lengths from fixed values or tables, permutations enumerate fully unless
// pinned. Campaign F meets in one hop.
struct EnumerableInstance {
    std::shared_ptr<NetGraph> graph;
    WorldModel model; // model.g points into *graph
    std::string name;

    const NetGraph& g() const { return *graph; }

    // Number of worlds in the product space; throws past the guard.
    int64_t world_count(int64_t guard = 10'000'000) const;

    // Enumerates (probability, world); probabilities sum to 1.
    void for_each_world(const std::function<void(double, const MaterializedWorld&)>& fn) const;

    // Marginalizes everything except edge liveness (enough for INF_F).
    void for_each_liveness(const std::function<void(double, const MaterializedWorld&)>& fn) const;
};

// Parses the fixture format: "nodes N", "edge u v [p=..] [hm=..|hmgeom=m,cap]
// [live=0|1]", "tau v h", "tautable v h:p h:p ...", "perm v id id ...".
EnumerableInstance parse_instance(const std::string& text, const std::string& name = "instance");
EnumerableInstance load_instance(const std::string& path);

// Exact expected objective by exhausting the product space.
double enumerate_exact(const EnumerableInstance& inst, const std::vector<NodeId>& seeds_f,
                       Objective objective, const std::vector<NodeId>& seeds_m);

// Exact E[|R_F^X|] excluding the seeds.
double exact_inf_f(const EnumerableInstance& inst, const std::vector<NodeId>& seeds_f);

// Exact E over (world, F-reached root) pairs of the RDR coverage weight of S,
// i.e. the pair-sum form of Corollary-1's estimator target.
double exact_rdr_expectation(const EnumerableInstance& inst, const std::vector<NodeId>& seeds_f,
                             BoundVariant variant, const std::vector<NodeId>& seeds_m);

struct SubmodularityViolation {
    std::vector<NodeId> set_a, set_b;
    NodeId added;
    double marginal_a, marginal_b;
};

// Exhausts all (A subset of B, w outside B) triples over candidate subsets of
// size at most max_b and reports every violated diminishing-returns check.
std::vector<SubmodularityViolation> check_submodularity(const EnumerableInstance& inst,
                                                        const std::vector<NodeId>& seeds_f,
                                                        Objective objective, int max_b = 4,
                                                        double tol = 1e-9);

// Random small instance with a bounded world space (for equivalence and
// submodularity sweeps).
EnumerableInstance make_random_instance(uint64_t seed, int nodes = 6, int extra_edges = 3,
                                        int random_live_edges = 3, int slow_edges = 2,
                                        int windowed_nodes = 2);

// Shipped fixtures.
EnumerableInstance diamond_instance();     // supermodularity counterexample
EnumerableInstance intro_instance();       // 16-node walkthrough network
EnumerableInstance running_instance();     // 9-node RDR construction example

} // namespace mitig

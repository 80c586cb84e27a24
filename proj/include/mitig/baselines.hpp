#pragma once

#include <vector>

#include "mitig/netgraph.hpp"
#include "mitig/selector.hpp"

namespace mitig {

enum class BaselineMethod { ImRr, Influential, Proximity, Random };

struct BaselineSpec {
    BaselineMethod method = BaselineMethod::Random;
    int k = 1;
    int64_t budget = 20000; // RR samples for the ranking-based methods
    double eps = 0.1;       // im-rr loop parameters
    double delta = 0.0;     // 0 = 1/n
    uint64_t seed = 0;
    int workers = 0;
};

// Time-oblivious comparison methods. All return at most k nodes disjoint from
// the fake seeds.
//   im-rr:       reverse-reachable-set greedy for plain influence maximization
//   influential: top-k nodes by singleton RR coverage frequency
//   proximity:   out-neighbours of the fake seeds by incoming edge probability
//   random:      uniform without replacement
std::vector<NodeId> select_baseline(const NetGraph& g, const std::vector<NodeId>& seeds_f,
                                    const BaselineSpec& spec);

// Frequency ranking used by the influential baseline and fake-seed generation.
std::vector<NodeId> rank_by_rr_frequency(const NetGraph& g, int64_t budget, uint64_t seed,
                                         int workers = 0);

// Exposed for tests: plain reverse reachable set under the IC model.
std::vector<NodeId> plain_rr_set(const NetGraph& g, uint64_t seed, uint64_t index);

} // namespace mitig

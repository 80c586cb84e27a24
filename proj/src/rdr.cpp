#include "mitig/rdr.hpp"

#include <sstream>
#include <stdexcept>

#include "mitig/parallel.hpp"

namespace mitig {

std::optional<NodeId> choose_root(const std::vector<uint8_t>& f_touch, NodeId n, RdrMode mode,
                                  Rng& rng) {
    if (mode == RdrMode::RS) {
        NodeId v = (NodeId)rng.below((uint64_t)n);
        if (f_touch[v] == 1) return v;
        return std::nullopt;
    }
    int64_t count = 0;
    for (NodeId v = 0; v < n; v++) count += f_touch[v] == 1;
    if (count == 0) throw std::runtime_error("importance sampling needs a non-empty F-reached set");
    int64_t pick = (int64_t)rng.below((uint64_t)count);
    for (NodeId v = 0; v < n; v++)
        if (f_touch[v] == 1 && pick-- == 0) return v;
    return std::nullopt; // unreachable
}

namespace {
enum : uint64_t { kTagRoot = 9, kTagWorld = 11 };
constexpr int64_t kMaxAttempts = 2'000'000;
} // namespace

RdrSet build_rdr(const WorldModel& model, const std::vector<NodeId>& seeds_f, BoundVariant variant,
                 RdrMode mode, uint64_t seed, uint64_t index) {
    const NetGraph& g = *model.g;
    const NodeId n = g.num_nodes();
    static thread_local std::vector<NodeId> coreach;
    for (int64_t attempt = 0;; attempt++) {
        uint64_t world_index = mix_key(kTagWorld, index, (uint64_t)attempt);
        World w(model, seed, world_index);
        Rng root_rng(seed, world_index, kTagRoot, 0);
        NodeId root = (NodeId)root_rng.below((uint64_t)n);
        // Backward membership test first; the forward spread is only needed
        // for accepted samples.
        if (!f_reaches_target(g, w, seeds_f, root, coreach)) {
            if (mode == RdrMode::RS) {
                RdrSet r;
                r.root = root;
                r.mode = mode;
                r.variant = variant;
                r.empty_sample = true;
                return r;
            }
            if (attempt + 1 >= kMaxAttempts)
                throw std::runtime_error(
                    "importance sampling gave up: the misinformation almost never spreads "
                    "(no F-reached root found)");
            continue; // IS: reject the (world, root) pair and redraw both
        }
        Phase1State p1 = phase1_forward(g, w, seeds_f);
        RdrSet r = build_rdr_at(g, w, seeds_f, root, variant, p1, &coreach);
        r.mode = mode;
        return r;
    }
}

std::vector<RdrSet> build_rdr_collection(const WorldModel& model,
                                         const std::vector<NodeId>& seeds_f, BoundVariant variant,
                                         RdrMode mode, uint64_t seed, uint64_t stream, int64_t from,
                                         int64_t to, std::vector<RdrSet> existing, int workers) {
    if ((int64_t)existing.size() != from)
        throw std::logic_error("collection extension must continue at its current size");
    existing.resize(to);
    parallel_for(
        to - from,
        [&](int64_t i) {
            uint64_t sample = mix_key(stream, (uint64_t)(from + i));
            existing[from + i] = build_rdr(model, seeds_f, variant, mode, seed, sample);
        },
        workers);
    return existing;
}

std::string dump_rdr_collection(const std::vector<RdrSet>& sets) {
    std::ostringstream os;
    for (const RdrSet& r : sets) {
        os << r.root << '|';
        for (size_t i = 0; i < r.entries.size(); i++) {
            if (i) os << ',';
            os << r.entries[i].first << ':' << (int)r.entries[i].second;
        }
        os << '\n';
    }
    return os.str();
}

} // namespace mitig

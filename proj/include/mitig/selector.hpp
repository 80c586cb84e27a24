#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mitig/rdr.hpp"
#include "mitig/sim.hpp"

namespace mitig {

// Sampling-bound parameters of one selection run.
struct BoundParams {
    double eps = 0.1;
    double delta = 0.0;       // default 1/n, filled at run time
    double eps_prime = 0.05;  // eps/2 under IS, 0 under RS
    double delta_prime = 0.0; // delta/9 under IS, 0 under RS
    double big_delta = 0.0;   // delta - delta_prime
    double delta1 = 0.0, delta2 = 0.0;
    int k = 1;
    double lb = 0.0;
    int64_t n_max = 0;
    int64_t n0 = 0;
    int i_max = 1;
    double gamma_lo = 1.0, gamma_hi = 1.0; // [1 - eps', 1 + eps']
};

struct IterationRecord {
    int64_t size1 = 0, size2 = 0;
    double lambda1 = 0.0, lambda2 = 0.0;
    double sigma_l = 0.0, sigma_u = 0.0;
    double alpha = 0.0;
};

struct SelectionResult {
    std::vector<NodeId> seeds;
    double alpha = 0.0;
    bool alpha_reached = false; // false = the iteration cap ended the run
    BoundVariant variant = BoundVariant::Lower;
    RdrMode mode = RdrMode::IS;
    std::vector<IterationRecord> iterations;
    BoundParams bounds;
    double inf_f_hat = 0.0;
    int64_t inf_f_sims = 0;
    int64_t total_samples = 0;
    int64_t empty_samples = 0;
    double wall_ms = 0.0;

    // sandwich-only fields
    std::string chosen_label;
    double mitigation_mean = 0.0, mitigation_se = 0.0;
    double beta = 0.0, beta_se = 0.0;
};

struct GreedyResult {
    std::vector<NodeId> seeds;
    double covered_weight = 0.0;
};

// k rounds of lazy greedy over the weighted coverage objective; a set is
// covered with the max weight among chosen members. Ties go to the smaller
// node id, and zero-gain rounds pad with the smallest unused ids.
GreedyResult greedy_weighted_cover(const std::vector<RdrSet>& collection, int k, NodeId n,
                                   const std::vector<NodeId>& exclude = {});

double coverage_weight(const std::vector<RdrSet>& collection, const std::vector<NodeId>& seeds);

// Depth-1 MIA lower bound on the optimal mitigation: sum of the top-k
// activation probabilities among out-neighbours of the fake seeds.
double compute_lb_mia(const NetGraph& g, const std::vector<NodeId>& seeds_f, int k,
                      bool* floored = nullptr);

// Worst-case RDR sample count for a (1-1/e-eps) guarantee.
int64_t compute_n_max(NodeId n, int k, double eps, double eps_prime, double big_delta, double lb);

// One-sided mitigation bounds from normalized weighted coverage.
double sigma_lower(double lambda2, double theta2, double delta2, double eps_prime, NodeId n);
double sigma_upper(double lambda1, double theta1, double delta1, double eps_prime, NodeId n);

struct NammOptions {
    int workers = 0;
    double alpha_target = -1.0;  // < 0: use 1 - 1/e - eps
    bool anytime_deltas = false; // delta1 = delta2 = delta/2 instead of Delta/(3 i_max)
    int max_iterations = 0;      // 0: i_max from the bound parameters
    std::function<bool()> stop;  // checked after each iteration
    std::function<void(const SelectionResult&)> on_iteration;
};

// Nominator/assessor selection loop: greedy on R1, certified against the
// independent R2, doubling both until alpha reaches the target.
SelectionResult namm(const WorldModel& model, const std::vector<NodeId>& seeds_f,
                     BoundVariant variant, int k, double eps, double delta, RdrMode mode,
                     uint64_t seed, const NammOptions& opts = {});

// Runs both bound variants and returns the seed set with the larger simulated
// mitigation, plus the beta = mu(S^U) / mu_upper(S^U) guarantee estimate.
SelectionResult sandwich(const WorldModel& model, const std::vector<NodeId>& seeds_f, int k,
                         double eps, double delta, RdrMode mode, uint64_t seed, int64_t eval_sims,
                         const NammOptions& opts = {});

struct AnytimeEmission {
    SelectionResult lower;
    SelectionResult upper;
    int64_t samples_per_collection = 0;
};

// Interleaved anytime run: grows lower- and upper-variant collections in
// lockstep and emits certified (seed set, alpha) pairs after every doubling,
// with delta1 = delta2 = delta/2. The last emission is the final answer.
std::vector<AnytimeEmission> namm_anytime(const WorldModel& model,
                                          const std::vector<NodeId>& seeds_f, int k, double eps,
                                          double delta, RdrMode mode, uint64_t seed,
                                          const NammOptions& opts = {});

std::string selection_report(const SelectionResult& res);
std::string selection_csv_row(const SelectionResult& res);

} // namespace mitig

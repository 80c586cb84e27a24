#pragma once

#include <map>
#include <string>
#include <vector>

#include "mitig/baselines.hpp"
#include "mitig/selector.hpp"

namespace mitig {

// Preferential-attachment testbed graph (undirected attachments, emitted as
// an edge list that the loader expands to antiparallel pairs).
NetGraph make_scale_free(NodeId n, int attach, uint64_t seed);

enum class FakeSeedMode { TopInfluential, Random, Explicit };

// Flat key=value run configuration; unknown keys are rejected so typos fail
// loudly. See README for the key list.
struct RunConfig {
    std::string dataset = "testbed";
    std::string graph_path;          // empty: generate the testbed
    NodeId gen_nodes = 1000;
    int gen_attach = 2;
    bool directed = true;
    ProbMode prob_mode = ProbMode::InverseIndegree;
    double fixed_p = 0.1;

    ModelParams params;

    FakeSeedMode fake_mode = FakeSeedMode::TopInfluential;
    int fake_count = 10;
    std::vector<NodeId> fake_explicit;

    std::vector<std::string> methods = {"namm", "im-rr", "influential", "proximity", "random"};
    std::vector<int> k_list = {1, 5, 10, 20};
    double eps = 0.1;
    double delta = 0.0; // 0 = 1/n
    RdrMode mode = RdrMode::IS;
    int64_t eval_sims = 20000;
    int64_t baseline_budget = 20000;
    uint64_t seed = 1;
    std::string outdir = "out";
    int workers = 0;

    static RunConfig from_file(const std::string& path);
    static RunConfig from_text(const std::string& text);
    std::string canonical() const; // sorted key=value dump, hashed for replay
    uint64_t hash() const;
};

struct ExperimentRow {
    std::string dataset;
    std::string method;
    int k = 0;
    double mitigation = 0.0;
    double se = 0.0;
    double reward2_frac = 0.0;
    double reward1_frac = 0.0;
    double beta = 0.0, beta_se = 0.0; // sandwich only
    double alpha = 0.0;               // selection guarantee, when applicable
    double wall_ms = 0.0;
    int64_t samples = 0;
    uint64_t config_hash = 0;
    std::string error;

    std::string csv() const;
    static std::string csv_header();
};

struct ExperimentOutput {
    std::vector<ExperimentRow> rows;
    std::vector<NodeId> fake_seeds;
    std::map<std::string, std::vector<NodeId>> selections; // "method/k" -> seeds
};

// Selects and evaluates every configured method at every k; writes
// experiment.csv and plot_mitigation.csv under cfg.outdir (unless empty).
ExperimentOutput run_experiment(const RunConfig& cfg);

enum class SweepAxis { MeetingLength, AwSeconds, ReadProb };

struct SweepRow {
    std::string method;
    double axis_value = 0.0;
    double mitigation = 0.0, se = 0.0;
    double delta_vs_base = 0.0, delta_se = 0.0;
    bool is_base = false;
};

// Re-runs selection + evaluation at each axis value (first k of the config)
// and reports absolute and delta-vs-base mitigation.
std::vector<SweepRow> sweep_parameter(const RunConfig& cfg, SweepAxis axis,
                                      const std::vector<double>& values,
                                      const std::vector<std::string>& methods);

struct JaccardRow {
    std::string perturbation;
    int k = 0;
    double jaccard = 0.0;
};

// Jaccard similarity of the seed sets selected under perturbed parameters
// against the default-parameter ground truth. "P5"/"P10" apply 5%/10%
// Gaussian noise to the temporal parameters, "CIC" turns them off.
std::vector<JaccardRow> robustness_jaccard(const RunConfig& cfg,
                                           const std::vector<std::string>& perturbations = {
                                               "P5", "P10", "CIC"});

struct BenchRow {
    std::string mode;
    int k = 0;
    double alpha_target = 0.0;
    double alpha = 0.0;
    double wall_ms = 0.0;
    int64_t samples = 0;
    int64_t empty_samples = 0;
    double empty_rate = 0.0;
};

// IS-vs-RS running time and sample accounting, optionally pushing past the
// default guarantee to caller-chosen alpha targets.
std::vector<BenchRow> bench_sampling(const RunConfig& cfg, const std::vector<RdrMode>& modes,
                                     const std::vector<double>& alpha_targets = {});

// Helpers shared by the CLI.
NetGraph load_or_generate_graph(const RunConfig& cfg);
std::vector<NodeId> make_fake_seeds(const RunConfig& cfg, const NetGraph& g);
double jaccard(const std::vector<NodeId>& a, const std::vector<NodeId>& b);
void write_file(const std::string& path, const std::string& content);

} // namespace mitig

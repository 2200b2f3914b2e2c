#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nsnn/cartpole.hpp"
#include "nsnn/network.hpp"
#include "nsnn/rng.hpp"

namespace nsnn {

/// How a network is scored: `trials` episodes from the fixed initial-state
/// stream `env_seed`, summarized by their median.
struct TrialProtocol
{
    std::size_t trials = 1;
    std::uint64_t env_seed = 0;
    CartPoleConfig cartpole;
};

/// 1 trial for deterministic kinds, 20 for noisy ones.
std::size_t default_trials(NeuronKind kind) noexcept;
/// 15000 for deterministic kinds, 12000 (on the median) for noisy ones.
double default_acceptance(NeuronKind kind) noexcept;

double median(std::vector<double> values);
double median(std::span<const std::uint64_t> values);

/// Median balancing cycles of `net` under `protocol`, noise from `net_seed`.
double score_network(const CompiledNetwork& net, const TrialProtocol& protocol, std::uint64_t net_seed);

struct MutationRates
{
    double add_neuron = 0.05;
    double remove_neuron = 0.05;
    double add_synapse = 0.05;
    double remove_synapse = 0.05;
    double perturb_weight = 0.30; ///< per synapse
    double perturb_delay = 0.05;  ///< per synapse
    double crossover = 0.10;

    void validate() const;
};

struct EvoConfig
{
    NeuronKind kind = NeuronKind::perfect;
    NetworkParams params;               ///< neuron dynamics (see default_params)
    std::size_t population = 100;
    std::size_t generations = 50;       ///< each generation breeds `population` offspring
    std::size_t tournament = 4;
    MutationRates rates;
    double weight_range = 1.0;          ///< |w| <= weight_range * tau
    double weight_sigma = 0.1;          ///< perturbation sd as a fraction of tau
    /// L > 0 keeps weights on k * weight_range * tau / L, |k| <= L; weight
    /// perturbation then moves one level instead of a Gaussian step.
    std::uint32_t weight_levels = 0;
    std::uint32_t max_delay = 3;
    std::size_t initial_synapses = 24;
    bool dense_init = true;             ///< start with every input wired to every output
    std::size_t trials = 1;
    double acceptance = 15000.0;
    /// Independent re-scorings a candidate must also pass before it is
    /// accepted; guards noisy kinds against lucky evaluations.
    std::size_t confirmations = 0;
    std::size_t max_accepted = 0;       ///< stop once this many are accepted (0: run the full budget)
    CartPoleConfig cartpole;
    std::uint64_t env_seed = 1;         ///< initial-state stream shared by every genome
    std::uint64_t seed = 1;
    unsigned jobs = 1;

    /// Kind-specific defaults for params, trials, acceptance and
    /// confirmations (2 for noisy kinds).
    static EvoConfig for_kind(NeuronKind kind);
    void validate() const;
};

struct Genome
{
    NetworkGraph graph;
    std::vector<std::uint64_t> trials;
    double fitness = 0.0; ///< median of `trials`
};

struct EvoResult
{
    std::vector<Genome> accepted;
    std::vector<double> best_per_generation; ///< entry 0 is the initial population
    std::size_t evaluations = 0;
    std::size_t generations_run = 0;
    std::string summary;
};

/// A random network with left/right outputs wired to random input ports.
NetworkGraph random_network(const EvoConfig& config, Rng& rng);

/// Applies each operator with its configured probability. The result always
/// passes validate_connected(); an operator that would break it is skipped.
NetworkGraph mutate(const NetworkGraph& parent, const EvoConfig& config, Rng& rng);

/// Single-point crossover of the synapse lists. Falls back to a copy of `a`
/// when the child would be invalid.
NetworkGraph crossover(const NetworkGraph& a, const NetworkGraph& b, Rng& rng);

/// Steady-state evolution: each generation breeds `population` children by
/// tournament selection, scores them in parallel, then each replaces the
/// current worst member if it is at least as fit. Returns every distinct
/// genome meeting the acceptance threshold on its own evaluation and on
/// `confirmations` re-scorings with fresh noise.
EvoResult evolve(const EvoConfig& config);

struct FitnessSummary
{
    std::vector<std::uint64_t> counts;
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    double lower_whisker = 0, upper_whisker = 0; ///< extreme data within 1.5 IQR of the box
    std::vector<std::uint64_t> outliers;
};

/// Quartiles by linear interpolation between order statistics.
FitnessSummary summarize_fitness(std::vector<std::uint64_t> counts);

FitnessSummary fitness_distribution(const NetworkGraph& graph, const TrialProtocol& protocol,
                                    std::uint64_t net_seed);

struct ManifestRow
{
    std::string file;
    NeuronKind kind;
    double median_fitness;
    std::size_t trials;
};

void write_manifest_csv(std::ostream& os, const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> read_manifest_csv(std::istream& is);

} // namespace nsnn

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "nsnn/rng.hpp"

namespace nsnn {

/// Full parameterization of an integrate-and-fire neuron. Continuous-time
/// simulation uses `leak` in 1/ms and `noise_sigma` in mV/sqrt(ms); the clocked
/// form uses `leak` in 1/cycle and `escape_sigma` (dimensionless).
struct NeuronParams
{
    double threshold = 1.0;
    double capacitance = 1.0;
    double leak = 0.0;
    double noise_sigma = 0.0;
    double escape_sigma = 0.0;

    /// Throws InvalidInput on a negative or non-finite field, a non-positive
    /// threshold, or both noise forms set at once.
    void validate() const;

    bool operator==(const NeuronParams&) const = default;
};

enum class NeuronKind
{
    perfect,
    leaky,
    noisy,
    leaky_noisy,
};

std::string_view to_string(NeuronKind kind) noexcept;
NeuronKind parse_neuron_kind(std::string_view name);
bool is_noisy(NeuronKind kind) noexcept;
bool is_leaky(NeuronKind kind) noexcept;

using WeightVector = std::vector<double>;

struct SpikeEvent
{
    double time;
    std::size_t synapse;
};

/// Per-synapse spike times, strictly ascending and finite.
class SpikeTrain
{
public:
    explicit SpikeTrain(std::size_t synapses = 0);
    explicit SpikeTrain(std::vector<std::vector<double>> times);

    std::size_t synapse_count() const noexcept { return times_.size(); }
    std::span<const double> times(std::size_t synapse) const { return times_.at(synapse); }
    std::size_t count(std::size_t synapse) const { return times_.at(synapse).size(); }
    std::size_t total_count() const noexcept;
    bool empty() const noexcept { return total_count() == 0; }

    /// Appends a spike; `t` must exceed the synapse's last spike.
    void add(std::size_t synapse, double t);

    /// Latest spike over all synapses, or 0 for an empty train.
    double last_time() const noexcept;

    /// All spikes merged and ordered by (time, synapse).
    std::vector<SpikeEvent> events() const;

    bool operator==(const SpikeTrain&) const = default;

private:
    std::vector<std::vector<double>> times_;
};

/// Voltage samples of one run. A spike produces two samples at the same time:
/// the crossing value and the post-reset 0.
struct SimTrace
{
    std::vector<double> times;
    std::vector<double> voltage;
    std::vector<double> spike_times;

    void sample(double t, double v)
    {
        times.push_back(t);
        voltage.push_back(v);
    }

    bool operator==(const SimTrace&) const = default;
};

/// Event-driven perfect neuron: simultaneous arrivals are summed before the
/// threshold test and excess charge above threshold is discarded at reset.
SimTrace integrate_perfect(std::span<const double> weights, const SpikeTrain& train, double threshold);

/// Number of equal-weight spikes a single-input perfect neuron needs to fire,
/// ceil(threshold / w1). Throws NonExcitatory for w1 <= 0.
std::uint64_t fire_count_single(double threshold, double w1);

/// Sub-threshold closed-form leaky voltage at time t (no reset applied).
double voltage_leaky(std::span<const double> weights, const SpikeTrain& train, double leak, double t);

/// Threshold-and-reset SDE C dV = (-gL V + I(t)) dt + sigma dW integrated
/// with a Milstein step on a grid split at spike arrivals. Synaptic deltas
/// are instantaneous jumps of w_i.
SimTrace simulate_sde(const NeuronParams& params, std::span<const double> weights, const SpikeTrain& train,
                      double dt, double horizon, std::uint64_t seed);

struct LaneOutcome
{
    double terminal_voltage = 0.0;
    std::size_t spike_count = 0;
};

/// Runs the same train through many independent lanes in lockstep. Lane j
/// uses weight `lane_weights[i * lanes + j]` for synapse i and its own stream
/// `seeds[j]`; each lane reproduces simulate_sde with that seed exactly.
std::vector<LaneOutcome> simulate_sde_lanes(const NeuronParams& params, std::span<const double> lane_weights,
                                            const SpikeTrain& train, double dt, double horizon,
                                            std::span<const std::uint64_t> seeds);

/// Arrhenius escape probability min(1, exp(-(tau - v) / (tau sigma_a^2))).
/// Throws InvalidInput for sigma_a <= 0.
double escape_fire_prob(double v, double threshold, double escape_sigma);

struct ClockedStep
{
    double voltage;
    bool fired;
};

/// One network cycle for a clocked neuron: v' = v exp(-leak) + charge, then a
/// deterministic threshold test, or an escape draw on cycles where the
/// potential changed. Resets to 0 on a spike.
ClockedStep step_clocked(double voltage, double incoming_charge, const NeuronParams& params, Rng& rng);

} // namespace nsnn

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsnn/neuron.hpp"
#include "nsnn/rng.hpp"

namespace nsnn {

struct NetworkNeuron
{
    std::int64_t id = 0;
    double threshold = 1.0;

    bool operator==(const NetworkNeuron&) const = default;
};

/// A weighted, delayed connection. The source is either a neuron id or an
/// index into NetworkGraph::inputs.
struct Synapse
{
    bool from_input = false;
    std::int64_t pre = 0;
    std::int64_t post = 0;
    double weight = 0.0;
    std::uint32_t delay = 1;

    bool operator==(const Synapse&) const = default;
};

struct OutputPort
{
    std::string name;
    std::int64_t neuron = 0;

    bool operator==(const OutputPort&) const = default;
};

/// Network-wide neuron dynamics. T_cycles = 0 means no leak; sigma_a = 0
/// means deterministic firing.
struct NetworkParams
{
    double T_cycles = 0.0;
    double sigma_a = 0.0;

    bool operator==(const NetworkParams&) const = default;
};

/// Default dynamics for each neuron kind: leak time constant 50 cycles and
/// escape deviation 0.60 where the kind uses them.
NetworkParams default_params(NeuronKind kind) noexcept;

/// The evolvable genome: neurons, synapses and named I/O bindings.
struct NetworkGraph
{
    NeuronKind kind = NeuronKind::perfect;
    NetworkParams params;
    std::vector<NetworkNeuron> neurons;
    std::vector<Synapse> synapses;
    std::vector<std::string> inputs;
    std::vector<OutputPort> outputs;

    /// Index of a neuron id in `neurons`, or -1.
    std::ptrdiff_t neuron_index(std::int64_t id) const noexcept;

    /// Structural checks: unique ids and port names, valid endpoints,
    /// delay >= 1, finite weights, params consistent with the kind.
    /// Throws ValidationError naming the offending element.
    void validate() const;

    /// True when every output neuron is reachable from some input port.
    bool outputs_reachable() const;

    /// validate() plus the reachability requirement.
    void validate_connected() const;

    /// Per-neuron clocked parameters (leak in 1/cycle).
    NeuronParams neuron_params(std::size_t index) const;

    bool operator==(const NetworkGraph&) const = default;
};

/// Flat, index-based form of a graph used by the simulator. The graph it was
/// built from may be discarded.
class CompiledNetwork
{
public:
    explicit CompiledNetwork(const NetworkGraph& graph);

    struct Edge
    {
        std::uint32_t target;
        std::uint32_t delay;
        double weight;
    };

    std::size_t neuron_count() const noexcept { return thresholds_.size(); }
    std::size_t input_count() const noexcept { return input_names_.size(); }
    std::size_t output_count() const noexcept { return output_neurons_.size(); }
    std::uint32_t max_delay() const noexcept { return max_delay_; }
    double decay() const noexcept { return decay_; }
    double escape_sigma() const noexcept { return escape_sigma_; }

    std::span<const double> thresholds() const noexcept { return thresholds_; }
    std::span<const Edge> neuron_edges(std::size_t neuron) const noexcept;
    std::span<const Edge> input_edges(std::size_t port) const noexcept;
    std::span<const std::uint32_t> output_neurons() const noexcept { return output_neurons_; }
    const std::vector<std::string>& input_names() const noexcept { return input_names_; }
    const std::vector<std::string>& output_names() const noexcept { return output_names_; }

    /// Index of an input or output port by name; throws InvalidInput if unknown.
    std::size_t input_index(std::string_view name) const;
    std::size_t output_index(std::string_view name) const;
    /// Same, returning -1 instead of throwing.
    std::ptrdiff_t find_input(std::string_view name) const noexcept;
    std::ptrdiff_t find_output(std::string_view name) const noexcept;

private:
    std::vector<double> thresholds_;
    std::vector<std::size_t> neuron_offsets_;
    std::vector<Edge> neuron_edges_;
    std::vector<std::size_t> input_offsets_;
    std::vector<Edge> input_edges_;
    std::vector<std::uint32_t> output_neurons_;
    std::vector<std::string> input_names_;
    std::vector<std::string> output_names_;
    std::uint32_t max_delay_ = 1;
    double decay_ = 1.0;
    double escape_sigma_ = 0.0;
};

/// Membrane voltages plus in-flight charge keyed by arrival cycle.
struct ClockedState
{
    std::vector<double> voltage;
    std::vector<double> pending; ///< ring of (max_delay + 1) slots x neurons
    std::uint64_t cycle = 0;

    /// Optional charge accounting (enabled by `track_charge`).
    bool track_charge = false;
    std::vector<double> injected;
    std::vector<double> discarded;
    std::vector<std::uint64_t> fire_count;

    explicit ClockedState(const CompiledNetwork& net, bool track = false);
    void reset();
};

/// Scratch buffers reused across cycles.
struct StepWorkspace
{
    std::vector<double> charge;
    std::vector<double> before;
    std::vector<std::uint8_t> fired;
    std::vector<std::uint8_t> changed;
};

/// One network cycle: deliver arrivals, update every neuron, route spikes of
/// fired neurons and of this cycle's input ports to cycle + delay. Adds one
/// to `output_counts[k]` for each output port k whose neuron fired.
void step_network(const CompiledNetwork& net, ClockedState& state, std::span<const std::size_t> input_ports,
                  Rng& rng, std::span<std::uint32_t> output_counts, StepWorkspace& ws);

/// Convenience overload by port name; returns the names of fired outputs.
/// Throws InvalidInput for an unknown input port.
std::vector<std::string> step_network(const CompiledNetwork& net, ClockedState& state,
                                      std::span<const std::string> input_ports, Rng& rng);

/// A closed-loop task driven by the network once per decision period.
class Environment
{
public:
    virtual ~Environment() = default;

    /// Binds port names to `net`'s indices; called once per run_episode.
    virtual void bind(const CompiledNetwork& net) = 0;
    /// Starts a new trial.
    virtual void reset(Rng& rng) = 0;
    virtual bool failed() const = 0;
    /// Input port indices that spike this decision period.
    virtual void encode(std::vector<std::size_t>& ports) const = 0;
    /// Consumes the period's per-output spike counts and advances the task.
    virtual void act(std::span<const std::uint32_t> output_counts) = 0;
};

struct EpisodeOptions
{
    std::uint64_t max_cycles = 15000;
    std::uint32_t sub_cycles = 1;
};

/// Runs `trials` closed-loop episodes. Trial t draws its task state from
/// stream (env_seed, t) and its neuron noise from (net_seed, t). Returns the
/// number of decision periods survived per trial, capped at max_cycles.
std::vector<std::uint64_t> run_episode(const CompiledNetwork& net, Environment& env, const EpisodeOptions& options,
                                       std::size_t trials, std::uint64_t env_seed, std::uint64_t net_seed);

} // namespace nsnn

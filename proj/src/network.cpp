#include "nsnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "nsnn/error.hpp"
#include "nsnn/simd.hpp"

namespace nsnn {

NetworkParams default_params(NeuronKind kind) noexcept
{
    NetworkParams p;
    if (is_leaky(kind))
        p.T_cycles = 50.0;
    if (is_noisy(kind))
        p.sigma_a = 0.60;
    return p;
}

std::ptrdiff_t NetworkGraph::neuron_index(std::int64_t id) const noexcept
{
    for (std::size_t i = 0; i < neurons.size(); ++i)
        if (neurons[i].id == id)
            return static_cast<std::ptrdiff_t>(i);
    return -1;
}

void NetworkGraph::validate() const
{
    if (!std::isfinite(params.T_cycles) || params.T_cycles < 0.0)
        throw ValidationError("params.T_cycles must be finite and non-negative");
    if (!std::isfinite(params.sigma_a) || params.sigma_a < 0.0)
        throw ValidationError("params.sigma_a must be finite and non-negative");
    if (is_leaky(kind) != (params.T_cycles > 0.0))
        throw ValidationError(std::string("params.T_cycles must be ") + (is_leaky(kind) ? "positive" : "0") +
                              " for neuron_kind " + std::string(to_string(kind)));
    if (is_noisy(kind) != (params.sigma_a > 0.0))
        throw ValidationError(std::string("params.sigma_a must be ") + (is_noisy(kind) ? "positive" : "0") +
                              " for neuron_kind " + std::string(to_string(kind)));

    std::unordered_set<std::int64_t> ids;
    for (std::size_t i = 0; i < neurons.size(); ++i)
    {
        if (!ids.insert(neurons[i].id).second)
            throw ValidationError("neurons[" + std::to_string(i) + "]: duplicate id " +
                                  std::to_string(neurons[i].id));
        if (!std::isfinite(neurons[i].threshold) || neurons[i].threshold <= 0.0)
            throw ValidationError("neurons[" + std::to_string(i) + "]: threshold must be positive");
    }

    std::unordered_set<std::string> names;
    for (std::size_t i = 0; i < inputs.size(); ++i)
        if (inputs[i].empty() || !names.insert(inputs[i]).second)
            throw ValidationError("inputs[" + std::to_string(i) + "]: empty or duplicate port name");
    names.clear();
    for (std::size_t i = 0; i < outputs.size(); ++i)
    {
        if (outputs[i].name.empty() || !names.insert(outputs[i].name).second)
            throw ValidationError("outputs[" + std::to_string(i) + "]: empty or duplicate port name");
        if (!ids.count(outputs[i].neuron))
            throw ValidationError("outputs[" + std::to_string(i) + "]: unknown neuron " +
                                  std::to_string(outputs[i].neuron));
    }

    for (std::size_t i = 0; i < synapses.size(); ++i)
    {
        const auto& s = synapses[i];
        const std::string where = "synapses[" + std::to_string(i) + "]";
        if (s.from_input)
        {
            if (s.pre < 0 || static_cast<std::size_t>(s.pre) >= inputs.size())
                throw ValidationError(where + ": unknown input port index " + std::to_string(s.pre));
        }
        else if (!ids.count(s.pre))
        {
            throw ValidationError(where + ": dangling pre neuron " + std::to_string(s.pre));
        }
        if (!ids.count(s.post))
            throw ValidationError(where + ": dangling post neuron " + std::to_string(s.post));
        if (s.delay < 1)
            throw ValidationError(where + ": delay must be at least 1 cycle");
        if (!std::isfinite(s.weight))
            throw ValidationError(where + ": weight is not finite");
    }
}

bool NetworkGraph::outputs_reachable() const
{
    std::unordered_map<std::int64_t, std::vector<std::int64_t>> adj;
    std::queue<std::int64_t> frontier;
    std::unordered_set<std::int64_t> seen;
    for (const auto& s : synapses)
    {
        if (s.from_input)
        {
            if (seen.insert(s.post).second)
                frontier.push(s.post);
        }
        else
        {
            adj[s.pre].push_back(s.post);
        }
    }
    while (!frontier.empty())
    {
        const auto n = frontier.front();
        frontier.pop();
        for (auto m : adj[n])
            if (seen.insert(m).second)
                frontier.push(m);
    }
    return std::all_of(outputs.begin(), outputs.end(), [&](const OutputPort& o) { return seen.count(o.neuron) > 0; });
}

void NetworkGraph::validate_connected() const
{
    validate();
    if (!outputs_reachable())
        throw ValidationError("an output port is not reachable from any input port");
}

NeuronParams NetworkGraph::neuron_params(std::size_t index) const
{
    NeuronParams p;
    p.threshold = neurons.at(index).threshold;
    p.leak = params.T_cycles > 0.0 ? 1.0 / params.T_cycles : 0.0;
    p.escape_sigma = params.sigma_a;
    return p;
}

// --- CompiledNetwork ---

CompiledNetwork::CompiledNetwork(const NetworkGraph& graph)
{
    graph.validate();
    const std::size_t n = graph.neurons.size();
    thresholds_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        thresholds_[i] = graph.neurons[i].threshold;

    std::unordered_map<std::int64_t, std::uint32_t> index;
    for (std::size_t i = 0; i < n; ++i)
        index[graph.neurons[i].id] = static_cast<std::uint32_t>(i);

    std::vector<std::vector<Edge>> from_neuron(n), from_input(graph.inputs.size());
    for (const auto& s : graph.synapses)
    {
        const Edge e{index.at(s.post), s.delay, s.weight};
        max_delay_ = std::max(max_delay_, s.delay);
        if (s.from_input)
            from_input[static_cast<std::size_t>(s.pre)].push_back(e);
        else
            from_neuron[index.at(s.pre)].push_back(e);
    }
    auto flatten = [](const std::vector<std::vector<Edge>>& lists, std::vector<std::size_t>& offsets,
                      std::vector<Edge>& flat) {
        offsets.assign(1, 0);
        for (const auto& l : lists)
        {
            flat.insert(flat.end(), l.begin(), l.end());
            offsets.push_back(flat.size());
        }
    };
    flatten(from_neuron, neuron_offsets_, neuron_edges_);
    flatten(from_input, input_offsets_, input_edges_);

    for (const auto& o : graph.outputs)
    {
        output_neurons_.push_back(index.at(o.neuron));
        output_names_.push_back(o.name);
    }
    input_names_ = graph.inputs;
    decay_ = graph.params.T_cycles > 0.0 ? std::exp(-1.0 / graph.params.T_cycles) : 1.0;
    escape_sigma_ = graph.params.sigma_a;
}

std::span<const CompiledNetwork::Edge> CompiledNetwork::neuron_edges(std::size_t neuron) const noexcept
{
    return {neuron_edges_.data() + neuron_offsets_[neuron], neuron_offsets_[neuron + 1] - neuron_offsets_[neuron]};
}

std::span<const CompiledNetwork::Edge> CompiledNetwork::input_edges(std::size_t port) const noexcept
{
    return {input_edges_.data() + input_offsets_[port], input_offsets_[port + 1] - input_offsets_[port]};
}

std::ptrdiff_t CompiledNetwork::find_input(std::string_view name) const noexcept
{
    for (std::size_t i = 0; i < input_names_.size(); ++i)
        if (input_names_[i] == name)
            return static_cast<std::ptrdiff_t>(i);
    return -1;
}

std::ptrdiff_t CompiledNetwork::find_output(std::string_view name) const noexcept
{
    for (std::size_t i = 0; i < output_names_.size(); ++i)
        if (output_names_[i] == name)
            return static_cast<std::ptrdiff_t>(i);
    return -1;
}

std::size_t CompiledNetwork::input_index(std::string_view name) const
{
    const auto i = find_input(name);
    if (i < 0)
        throw InvalidInput("unknown input port '" + std::string(name) + "'");
    return static_cast<std::size_t>(i);
}

std::size_t CompiledNetwork::output_index(std::string_view name) const
{
    const auto i = find_output(name);
    if (i < 0)
        throw InvalidInput("unknown output port '" + std::string(name) + "'");
    return static_cast<std::size_t>(i);
}

// --- simulation ---

ClockedState::ClockedState(const CompiledNetwork& net, bool track)
    : voltage(net.neuron_count(), 0.0), pending((net.max_delay() + 1) * net.neuron_count(), 0.0),
      track_charge(track)
{
    if (track_charge)
    {
        injected.assign(net.neuron_count(), 0.0);
        discarded.assign(net.neuron_count(), 0.0);
        fire_count.assign(net.neuron_count(), 0);
    }
}

void ClockedState::reset()
{
    std::fill(voltage.begin(), voltage.end(), 0.0);
    std::fill(pending.begin(), pending.end(), 0.0);
    cycle = 0;
    std::fill(injected.begin(), injected.end(), 0.0);
    std::fill(discarded.begin(), discarded.end(), 0.0);
    std::fill(fire_count.begin(), fire_count.end(), 0);
}

void step_network(const CompiledNetwork& net, ClockedState& state, std::span<const std::size_t> input_ports,
                  Rng& rng, std::span<std::uint32_t> output_counts, StepWorkspace& ws)
{
    const auto& k = simd::active();
    const std::size_t n = net.neuron_count();
    const std::size_t ring = net.max_delay() + 1;
    const std::size_t slot = static_cast<std::size_t>(state.cycle % ring);
    double* arriving = state.pending.data() + slot * n;

    ws.charge.assign(arriving, arriving + n);
    std::fill(arriving, arriving + n, 0.0);
    ws.fired.resize(n);

    const double decay = net.decay();
    const double sigma_a = net.escape_sigma();
    if (sigma_a > 0.0)
        ws.before.assign(state.voltage.begin(), state.voltage.end());

    k.leak_accumulate(state.voltage.data(), ws.charge.data(), decay, n);

    if (state.track_charge)
    {
        for (std::size_t i = 0; i < n; ++i)
            state.injected[i] += ws.charge[i];
    }

    if (sigma_a > 0.0)
    {
        const auto thr = net.thresholds();
        for (std::size_t i = 0; i < n; ++i)
        {
            const bool changed = ws.charge[i] != 0.0 || (decay != 1.0 && ws.before[i] != 0.0);
            const bool f = changed && uniform01(rng) < escape_fire_prob(state.voltage[i], thr[i], sigma_a);
            ws.fired[i] = f ? 1 : 0;
            if (f)
            {
                if (state.track_charge)
                {
                    state.discarded[i] += state.voltage[i] - thr[i];
                    ++state.fire_count[i];
                }
                state.voltage[i] = 0.0;
            }
        }
    }
    else
    {
        if (state.track_charge)
        {
            const auto thr = net.thresholds();
            for (std::size_t i = 0; i < n; ++i)
                if (state.voltage[i] >= thr[i])
                {
                    state.discarded[i] += state.voltage[i] - thr[i];
                    ++state.fire_count[i];
                }
        }
        k.threshold_reset(state.voltage.data(), net.thresholds().data(), ws.fired.data(), n);
    }

    const std::uint64_t cycle = state.cycle;
    auto enqueue = [&](std::span<const CompiledNetwork::Edge> edges) {
        for (const auto& e : edges)
            state.pending[((cycle + e.delay) % ring) * n + e.target] += e.weight;
    };
    for (std::size_t port : input_ports)
        enqueue(net.input_edges(port));
    for (std::size_t i = 0; i < n; ++i)
        if (ws.fired[i])
            enqueue(net.neuron_edges(i));

    const auto outs = net.output_neurons();
    for (std::size_t o = 0; o < outs.size(); ++o)
        output_counts[o] += ws.fired[outs[o]];

    ++state.cycle;
}

std::vector<std::string> step_network(const CompiledNetwork& net, ClockedState& state,
                                      std::span<const std::string> input_ports, Rng& rng)
{
    std::vector<std::size_t> ports;
    ports.reserve(input_ports.size());
    for (const auto& name : input_ports)
        ports.push_back(net.input_index(name));

    std::vector<std::uint32_t> counts(net.output_count(), 0);
    StepWorkspace ws;
    step_network(net, state, ports, rng, counts, ws);

    std::vector<std::string> fired;
    for (std::size_t o = 0; o < counts.size(); ++o)
        if (counts[o] != 0)
            fired.push_back(net.output_names()[o]);
    return fired;
}

std::vector<std::uint64_t> run_episode(const CompiledNetwork& net, Environment& env, const EpisodeOptions& options,
                                       std::size_t trials, std::uint64_t env_seed, std::uint64_t net_seed)
{
    if (trials == 0)
        throw InvalidInput("run_episode needs at least one trial");
    if (options.sub_cycles == 0)
        throw InvalidInput("sub_cycles must be at least 1");

    env.bind(net);
    ClockedState state(net);
    StepWorkspace ws;
    std::vector<std::size_t> ports;
    std::vector<std::uint32_t> counts(net.output_count());
    const std::vector<std::size_t> no_ports;

    std::vector<std::uint64_t> fitness;
    fitness.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t)
    {
        Rng env_rng = make_rng(env_seed, {t});
        Rng net_rng = make_rng(net_seed, {t});
        env.reset(env_rng);
        state.reset();

        std::uint64_t cycle = 0;
        for (; cycle < options.max_cycles; ++cycle)
        {
            if (env.failed())
                break;
            ports.clear();
            env.encode(ports);
            std::fill(counts.begin(), counts.end(), 0);
            for (std::uint32_t s = 0; s < options.sub_cycles; ++s)
                step_network(net, state, s == 0 ? std::span<const std::size_t>(ports) : no_ports, net_rng, counts,
                             ws);
            env.act(counts);
        }
        fitness.push_back(cycle);
    }
    return fitness;
}

} // namespace nsnn

#include "nsnn/neuron.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "nsnn/error.hpp"
#include "nsnn/simd.hpp"

namespace nsnn {

void NeuronParams::validate() const
{
    auto finite_nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
    if (!std::isfinite(threshold) || threshold <= 0.0)
        throw InvalidInput("neuron threshold must be positive and finite");
    if (!std::isfinite(capacitance) || capacitance <= 0.0)
        throw InvalidInput("neuron capacitance must be positive and finite");
    if (!finite_nonneg(leak) || !finite_nonneg(noise_sigma) || !finite_nonneg(escape_sigma))
        throw InvalidInput("leak, noise_sigma and escape_sigma must be finite and non-negative");
    if (noise_sigma > 0.0 && escape_sigma > 0.0)
        throw InvalidInput("continuous noise and escape noise cannot both be set");
}

std::string_view to_string(NeuronKind kind) noexcept
{
    switch (kind)
    {
    case NeuronKind::perfect: return "perfect";
    case NeuronKind::leaky: return "leaky";
    case NeuronKind::noisy: return "noisy";
    case NeuronKind::leaky_noisy: return "leaky_noisy";
    }
    return "perfect";
}

NeuronKind parse_neuron_kind(std::string_view name)
{
    if (name == "perfect") return NeuronKind::perfect;
    if (name == "leaky") return NeuronKind::leaky;
    if (name == "noisy") return NeuronKind::noisy;
    if (name == "leaky_noisy") return NeuronKind::leaky_noisy;
    throw InvalidInput("unknown neuron kind '" + std::string(name) + "'");
}

bool is_noisy(NeuronKind kind) noexcept
{
    return kind == NeuronKind::noisy || kind == NeuronKind::leaky_noisy;
}

bool is_leaky(NeuronKind kind) noexcept
{
    return kind == NeuronKind::leaky || kind == NeuronKind::leaky_noisy;
}

// --- SpikeTrain ---

SpikeTrain::SpikeTrain(std::size_t synapses) : times_(synapses) {}

SpikeTrain::SpikeTrain(std::vector<std::vector<double>> times) : times_(std::move(times))
{
    for (std::size_t i = 0; i < times_.size(); ++i)
    {
        const auto& ts = times_[i];
        for (std::size_t j = 0; j < ts.size(); ++j)
        {
            if (!std::isfinite(ts[j]))
                throw InvalidInput("spike time on synapse " + std::to_string(i) + " is not finite");
            if (j > 0 && !(ts[j] > ts[j - 1]))
                throw InvalidInput("spike times on synapse " + std::to_string(i) + " are not strictly ascending");
        }
    }
}

std::size_t SpikeTrain::total_count() const noexcept
{
    std::size_t n = 0;
    for (const auto& ts : times_)
        n += ts.size();
    return n;
}

void SpikeTrain::add(std::size_t synapse, double t)
{
    auto& ts = times_.at(synapse);
    if (!std::isfinite(t))
        throw InvalidInput("spike time is not finite");
    if (!ts.empty() && !(t > ts.back()))
        throw InvalidInput("spike times must be strictly ascending");
    ts.push_back(t);
}

double SpikeTrain::last_time() const noexcept
{
    double last = 0.0;
    bool any = false;
    for (const auto& ts : times_)
    {
        if (!ts.empty())
        {
            last = any ? std::max(last, ts.back()) : ts.back();
            any = true;
        }
    }
    return last;
}

std::vector<SpikeEvent> SpikeTrain::events() const
{
    std::vector<SpikeEvent> out;
    out.reserve(total_count());
    for (std::size_t i = 0; i < times_.size(); ++i)
        for (double t : times_[i])
            out.push_back({t, i});
    std::sort(out.begin(), out.end(), [](const SpikeEvent& a, const SpikeEvent& b) {
        return a.time < b.time || (a.time == b.time && a.synapse < b.synapse);
    });
    return out;
}

// --- perfect neuron ---

SimTrace integrate_perfect(std::span<const double> weights, const SpikeTrain& train, double threshold)
{
    if (weights.empty())
        throw InvalidInput("weight vector is empty");
    if (weights.size() != train.synapse_count())
        throw InvalidInput("weight count does not match synapse count");
    if (!(threshold > 0.0))
        throw InvalidInput("threshold must be positive");

    const auto events = train.events();
    SimTrace trace;
    const double start = events.empty() ? 0.0 : std::min(0.0, events.front().time);
    trace.sample(start, 0.0);

    double v = 0.0;
    for (std::size_t e = 0; e < events.size();)
    {
        const double t = events[e].time;
        for (; e < events.size() && events[e].time == t; ++e)
            v = v + 1.0 * weights[events[e].synapse];
        trace.sample(t, v);
        if (v >= threshold)
        {
            trace.spike_times.push_back(t);
            v = 0.0;
            trace.sample(t, v);
        }
    }
    return trace;
}

std::uint64_t fire_count_single(double threshold, double w1)
{
    if (!(threshold > 0.0))
        throw InvalidInput("threshold must be positive");
    if (!(w1 > 0.0))
        throw NonExcitatory("a single-input neuron with weight <= 0 never fires");
    return static_cast<std::uint64_t>(std::ceil(threshold / w1));
}

double voltage_leaky(std::span<const double> weights, const SpikeTrain& train, double leak, double t)
{
    if (weights.size() != train.synapse_count())
        throw InvalidInput("weight count does not match synapse count");
    double v = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
    {
        double decayed = 0.0;
        for (double tj : train.times(i))
        {
            if (t >= tj)
                decayed += std::exp(-leak * (t - tj));
        }
        v += weights[i] * decayed;
    }
    return v;
}

// --- continuous-time SDE ---

namespace {

void check_sde_inputs(const NeuronParams& params, std::size_t synapses, const SpikeTrain& train, double dt,
                      double horizon)
{
    params.validate();
    if (params.escape_sigma > 0.0)
        throw InvalidInput("escape noise is a clocked-mode parameter");
    if (!std::isfinite(dt) || dt <= 0.0)
        throw InvalidInput("dt must be positive and finite");
    if (!std::isfinite(horizon) || horizon < train.last_time())
        throw InvalidInput("horizon must cover the latest spike");
    if (synapses != train.synapse_count())
        throw InvalidInput("weight count does not match synapse count");
    for (const auto& ev : train.events())
        if (ev.time < 0.0)
            throw InvalidInput("spike times must be non-negative");
}

// Lockstep integrator shared by the single-trace and multi-lane entry points.
// `on_sample(t, lane_voltages, fired_mask_or_null)` observes every step.
template <typename Observer>
void run_sde(const NeuronParams& params, std::span<const double> lane_weights, std::size_t lanes,
             const SpikeTrain& train, double dt, double horizon, std::span<const std::uint64_t> seeds,
             std::vector<double>& v, std::vector<std::size_t>& spikes, Observer&& on_sample)
{
    const auto& k = simd::active();
    const auto events = train.events();
    const double gl = params.leak / params.capacitance;
    const double sigma = params.noise_sigma / params.capacitance;
    const double inv_c = 1.0 / params.capacitance;

    v.assign(lanes, 0.0);
    spikes.assign(lanes, 0);
    std::vector<double> thresholds(lanes, params.threshold);
    std::vector<double> dw(lanes, 0.0);
    std::vector<std::uint8_t> fired(lanes, 0);

    std::vector<Rng> rngs;
    std::vector<std::normal_distribution<double>> normals;
    if (sigma > 0.0)
    {
        rngs.reserve(lanes);
        for (std::size_t j = 0; j < lanes; ++j)
            rngs.emplace_back(seeds[j]);
        normals.assign(lanes, std::normal_distribution<double>(0.0, 1.0));
    }

    auto check_fire = [&](double t) {
        on_sample(t, false);
        if (k.threshold_reset(v.data(), thresholds.data(), fired.data(), lanes) > 0)
        {
            for (std::size_t j = 0; j < lanes; ++j)
                spikes[j] += fired[j];
            on_sample(t, true);
        }
    };

    double t = 0.0;
    std::uint64_t grid_index = 0;
    std::size_t e = 0;
    on_sample(t, false);
    while (true)
    {
        // Apply every arrival at the current instant before testing threshold.
        if (e < events.size() && events[e].time == t)
        {
            for (; e < events.size() && events[e].time == t; ++e)
                k.add_scaled(v.data(), lane_weights.data() + events[e].synapse * lanes, inv_c, lanes);
            check_fire(t);
            continue;
        }
        if (t >= horizon)
            break;

        double next = static_cast<double>(grid_index + 1) * dt;
        if (e < events.size())
            next = std::min(next, events[e].time);
        next = std::min(next, horizon);
        const double h = next - t;
        if (sigma > 0.0)
        {
            const double sqrt_h = std::sqrt(h);
            for (std::size_t j = 0; j < lanes; ++j)
                dw[j] = sqrt_h * normals[j](rngs[j]);
        }
        k.milstein_step(v.data(), dw.data(), gl, sigma, 0.0, h, lanes);
        t = next;
        if (t >= static_cast<double>(grid_index + 1) * dt)
            ++grid_index;
        check_fire(t);
    }
}

} // namespace

SimTrace simulate_sde(const NeuronParams& params, std::span<const double> weights, const SpikeTrain& train,
                      double dt, double horizon, std::uint64_t seed)
{
    check_sde_inputs(params, weights.size(), train, dt, horizon);
    SimTrace trace;
    std::vector<double> v;
    std::vector<std::size_t> spikes;
    const std::uint64_t seeds[1] = {seed};
    run_sde(params, weights, 1, train, dt, horizon, seeds, v, spikes, [&](double t, bool reset) {
        if (reset)
        {
            trace.spike_times.push_back(t);
            trace.sample(t, 0.0);
        }
        else
        {
            trace.sample(t, v[0]);
        }
    });
    return trace;
}

std::vector<LaneOutcome> simulate_sde_lanes(const NeuronParams& params, std::span<const double> lane_weights,
                                            const SpikeTrain& train, double dt, double horizon,
                                            std::span<const std::uint64_t> seeds)
{
    const std::size_t lanes = seeds.size();
    if (lanes == 0)
        return {};
    if (lane_weights.size() != train.synapse_count() * lanes)
        throw InvalidInput("lane weight matrix does not match synapse and lane counts");
    check_sde_inputs(params, train.synapse_count(), train, dt, horizon);

    std::vector<double> v;
    std::vector<std::size_t> spikes;
    run_sde(params, lane_weights, lanes, train, dt, horizon, seeds, v, spikes, [](double, bool) {});

    std::vector<LaneOutcome> out(lanes);
    for (std::size_t j = 0; j < lanes; ++j)
        out[j] = {v[j], spikes[j]};
    return out;
}

// --- clocked escape-noise neuron ---

double escape_fire_prob(double v, double threshold, double escape_sigma)
{
    if (!(threshold > 0.0))
        throw InvalidInput("threshold must be positive");
    if (!(escape_sigma > 0.0))
        throw InvalidInput("escape probability needs sigma_a > 0; use the deterministic threshold test");
    if (v >= threshold)
        return 1.0;
    return std::min(1.0, std::exp(-(threshold - v) / (threshold * escape_sigma * escape_sigma)));
}

ClockedStep step_clocked(double voltage, double incoming_charge, const NeuronParams& params, Rng& rng)
{
    const double decay = std::exp(-params.leak);
    const double v = voltage * decay + incoming_charge;
    bool fired;
    if (params.escape_sigma > 0.0)
    {
        const bool changed = incoming_charge != 0.0 || (decay != 1.0 && voltage != 0.0);
        fired = changed && uniform01(rng) < escape_fire_prob(v, params.threshold, params.escape_sigma);
    }
    else
    {
        fired = v >= params.threshold;
    }
    return {fired ? 0.0 : v, fired};
}

} // namespace nsnn

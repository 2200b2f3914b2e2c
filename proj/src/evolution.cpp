#include "nsnn/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "nsnn/error.hpp"
#include "nsnn/parallel.hpp"

namespace nsnn {

namespace {

std::size_t pick(Rng& rng, std::size_t n)
{
    return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

bool chance(Rng& rng, double p)
{
    return p > 0.0 && uniform01(rng) < p;
}

std::uint32_t random_delay(Rng& rng, std::uint32_t max_delay)
{
    return 1 + static_cast<std::uint32_t>(pick(rng, max_delay));
}

double random_weight(Rng& rng, double range, double threshold)
{
    return (2.0 * uniform01(rng) - 1.0) * range * threshold;
}

double snap(double w, double tau, const EvoConfig& c)
{
    if (c.weight_levels == 0)
        return w;
    const double step = c.weight_range * tau / c.weight_levels;
    return std::round(w / step) * step;
}

bool is_output(const NetworkGraph& g, std::int64_t id)
{
    return std::any_of(g.outputs.begin(), g.outputs.end(), [&](const OutputPort& o) { return o.neuron == id; });
}

bool connected(const NetworkGraph& g)
{
    try
    {
        g.validate_connected();
        return true;
    }
    catch (const ValidationError&)
    {
        return false;
    }
}

double post_threshold(const NetworkGraph& g, std::int64_t post)
{
    return g.neurons[static_cast<std::size_t>(g.neuron_index(post))].threshold;
}

} // namespace

std::size_t default_trials(NeuronKind kind) noexcept
{
    return is_noisy(kind) ? 20 : 1;
}

double default_acceptance(NeuronKind kind) noexcept
{
    return is_noisy(kind) ? 12000.0 : 15000.0;
}

double median(std::vector<double> v)
{
    if (v.empty())
        throw InvalidInput("median of an empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double median(std::span<const std::uint64_t> values)
{
    return median(std::vector<double>(values.begin(), values.end()));
}

double score_network(const CompiledNetwork& net, const TrialProtocol& protocol, std::uint64_t net_seed)
{
    const auto counts = evaluate_fitness(net, protocol.cartpole, protocol.trials, protocol.env_seed, net_seed);
    return median(counts);
}

void MutationRates::validate() const
{
    for (double r : {add_neuron, remove_neuron, add_synapse, remove_synapse, perturb_weight, perturb_delay, crossover})
        if (!(r >= 0.0 && r <= 1.0))
            throw InvalidInput("mutation rates must lie in [0, 1]");
}

EvoConfig EvoConfig::for_kind(NeuronKind kind)
{
    EvoConfig c;
    c.kind = kind;
    c.params = default_params(kind);
    c.trials = default_trials(kind);
    c.acceptance = default_acceptance(kind);
    c.confirmations = is_noisy(kind) ? 2 : 0;
    return c;
}

void EvoConfig::validate() const
{
    if (population < 2)
        throw InvalidInput("population must be at least 2");
    if (tournament < 1 || tournament > population)
        throw InvalidInput("tournament size must lie in [1, population]");
    rates.validate();
    if (!(weight_range > 0.0) || !(weight_sigma >= 0.0))
        throw InvalidInput("weight_range must be positive and weight_sigma non-negative");
    if (max_delay < 1)
        throw InvalidInput("max_delay must be at least 1");
    if (initial_synapses < 2)
        throw InvalidInput("initial_synapses must be at least 2 (one per output)");
    if (trials < 1)
        throw InvalidInput("trials must be at least 1");
    cartpole.validate();
}

NetworkGraph random_network(const EvoConfig& config, Rng& rng)
{
    NetworkGraph g;
    g.kind = config.kind;
    g.params = config.params;
    g.inputs = cartpole_input_ports(config.cartpole.bins);
    g.neurons = {{0, 1.0}, {1, 1.0}};
    g.outputs = {{"left", 0}, {"right", 1}};
    if (config.dense_init)
    {
        for (std::size_t in = 0; in < g.inputs.size(); ++in)
            for (std::int64_t out = 0; out < 2; ++out)
                g.synapses.push_back({true, static_cast<std::int64_t>(in), out,
                                      snap(random_weight(rng, config.weight_range, 1.0), 1.0, config), 1});
        g.validate_connected();
        return g;
    }
    for (std::size_t i = 0; i < config.initial_synapses; ++i)
    {
        Synapse s;
        s.from_input = true;
        s.pre = static_cast<std::int64_t>(pick(rng, g.inputs.size()));
        s.post = i < 2 ? static_cast<std::int64_t>(i) : static_cast<std::int64_t>(pick(rng, 2));
        s.weight = snap(random_weight(rng, config.weight_range, 1.0), 1.0, config);
        s.delay = random_delay(rng, config.max_delay);
        g.synapses.push_back(s);
    }
    g.validate_connected();
    return g;
}

NetworkGraph mutate(const NetworkGraph& parent, const EvoConfig& config, Rng& rng)
{
    const auto& r = config.rates;
    NetworkGraph g = parent;

    if (chance(rng, r.add_neuron) && !g.synapses.empty())
    {
        // Split a synapse through a new relay neuron.
        const std::size_t k = pick(rng, g.synapses.size());
        std::int64_t id = 0;
        for (const auto& n : g.neurons)
            id = std::max(id, n.id + 1);
        g.neurons.push_back({id, 1.0});
        Synapse tail = g.synapses[k];
        tail.from_input = false;
        tail.pre = id;
        tail.delay = 1;
        g.synapses[k].post = id;
        g.synapses[k].weight = 1.0;
        g.synapses.push_back(tail);
    }

    if (chance(rng, r.remove_neuron))
    {
        std::vector<std::int64_t> hidden;
        for (const auto& n : g.neurons)
            if (!is_output(g, n.id))
                hidden.push_back(n.id);
        if (!hidden.empty())
        {
            const std::int64_t id = hidden[pick(rng, hidden.size())];
            NetworkGraph trial = g;
            std::erase_if(trial.neurons, [&](const NetworkNeuron& n) { return n.id == id; });
            std::erase_if(trial.synapses, [&](const Synapse& s) {
                return s.post == id || (!s.from_input && s.pre == id);
            });
            if (connected(trial))
                g = std::move(trial);
        }
    }

    if (chance(rng, r.add_synapse))
    {
        Synapse s;
        const std::size_t sources = g.inputs.size() + g.neurons.size();
        const std::size_t src = pick(rng, sources);
        s.from_input = src < g.inputs.size();
        s.pre = s.from_input ? static_cast<std::int64_t>(src) : g.neurons[src - g.inputs.size()].id;
        s.post = g.neurons[pick(rng, g.neurons.size())].id;
        const double tau = post_threshold(g, s.post);
        s.weight = snap(random_weight(rng, config.weight_range, tau), tau, config);
        s.delay = random_delay(rng, config.max_delay);
        g.synapses.push_back(s);
    }

    if (chance(rng, r.remove_synapse) && !g.synapses.empty())
    {
        NetworkGraph trial = g;
        trial.synapses.erase(trial.synapses.begin() + static_cast<std::ptrdiff_t>(pick(rng, g.synapses.size())));
        if (connected(trial))
            g = std::move(trial);
    }

    if (r.perturb_weight > 0.0 || r.perturb_delay > 0.0)
    {
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (auto& s : g.synapses)
        {
            if (chance(rng, r.perturb_weight))
            {
                const double tau = post_threshold(g, s.post);
                const double limit = config.weight_range * tau;
                if (config.weight_levels > 0)
                {
                    // One level up or down; a Gaussian step would mostly round back.
                    const double step = limit / config.weight_levels;
                    s.weight = snap(std::clamp(s.weight + (chance(rng, 0.5) ? step : -step), -limit, limit), tau,
                                    config);
                }
                else
                {
                    s.weight = std::clamp(s.weight + config.weight_sigma * tau * gauss(rng), -limit, limit);
                }
            }
            if (chance(rng, r.perturb_delay))
                s.delay = random_delay(rng, config.max_delay);
        }
    }

    return connected(g) ? g : parent;
}

NetworkGraph crossover(const NetworkGraph& a, const NetworkGraph& b, Rng& rng)
{
    NetworkGraph child = a;
    if (a.inputs != b.inputs || a.outputs != b.outputs || a.kind != b.kind)
        return child;
    const std::size_t cut = pick(rng, std::min(a.synapses.size(), b.synapses.size()) + 1);
    child.synapses.assign(a.synapses.begin(), a.synapses.begin() + static_cast<std::ptrdiff_t>(cut));
    for (std::size_t i = cut; i < b.synapses.size(); ++i)
        child.synapses.push_back(b.synapses[i]);
    for (const auto& n : b.neurons)
        if (child.neuron_index(n.id) < 0)
            child.neurons.push_back(n);
    // Drop hidden neurons that lost every incoming synapse.
    std::erase_if(child.neurons, [&](const NetworkNeuron& n) {
        return !is_output(child, n.id) &&
               std::none_of(child.synapses.begin(), child.synapses.end(),
                            [&](const Synapse& s) { return s.post == n.id; });
    });
    std::erase_if(child.synapses, [&](const Synapse& s) {
        return (!s.from_input && child.neuron_index(s.pre) < 0) || child.neuron_index(s.post) < 0;
    });
    return connected(child) ? child : a;
}

EvoResult evolve(const EvoConfig& config)
{
    config.validate();
    TrialProtocol protocol{config.trials, config.env_seed, config.cartpole};

    EvoResult result;
    std::vector<Genome> pop(config.population);
    auto evaluate = [&](std::vector<Genome>& batch, std::uint64_t generation) {
        parallel_for(batch.size(), config.jobs, [&](std::size_t i) {
            const CompiledNetwork net(batch[i].graph);
            batch[i].trials = evaluate_fitness(net, protocol.cartpole, protocol.trials, protocol.env_seed,
                                               derive_seed(config.seed, {generation, i, 1}));
            batch[i].fitness = median(batch[i].trials);
        });
        result.evaluations += batch.size();
        for (std::size_t i = 0; i < batch.size(); ++i)
        {
            const Genome& g = batch[i];
            if (g.fitness < config.acceptance)
                continue;
            const bool seen = std::any_of(result.accepted.begin(), result.accepted.end(),
                                          [&](const Genome& a) { return a.graph == g.graph; });
            if (seen)
                continue;
            const CompiledNetwork net(g.graph);
            bool confirmed = true;
            for (std::size_t c = 0; c < config.confirmations && confirmed; ++c)
            {
                confirmed = score_network(net, protocol, derive_seed(config.seed, {generation, i, 2, c})) >=
                            config.acceptance;
                ++result.evaluations;
            }
            if (confirmed)
                result.accepted.push_back(g);
        }
    };
    auto done = [&] { return config.max_accepted > 0 && result.accepted.size() >= config.max_accepted; };
    auto best = [&] {
        return std::max_element(pop.begin(), pop.end(),
                                [](const Genome& x, const Genome& y) { return x.fitness < y.fitness; })
            ->fitness;
    };

    {
        Rng rng = make_rng(config.seed, {0, 0});
        for (auto& g : pop)
            g.graph = random_network(config, rng);
        evaluate(pop, 0);
        result.best_per_generation.push_back(best());
    }

    for (std::size_t gen = 1; gen <= config.generations && !done(); ++gen)
    {
        std::vector<Genome> children(config.population);
        for (std::size_t i = 0; i < children.size(); ++i)
        {
            Rng rng = make_rng(config.seed, {gen, i, 0});
            auto select = [&]() -> const Genome& {
                const Genome* winner = &pop[pick(rng, pop.size())];
                for (std::size_t t = 1; t < config.tournament; ++t)
                {
                    const Genome& c = pop[pick(rng, pop.size())];
                    if (c.fitness > winner->fitness)
                        winner = &c;
                }
                return *winner;
            };
            const Genome& p1 = select();
            NetworkGraph base = p1.graph;
            if (chance(rng, config.rates.crossover))
                base = crossover(p1.graph, select().graph, rng);
            children[i].graph = mutate(base, config, rng);
        }
        evaluate(children, gen);

        for (auto& c : children)
        {
            auto worst = std::min_element(pop.begin(), pop.end(),
                                          [](const Genome& x, const Genome& y) { return x.fitness < y.fitness; });
            if (c.fitness >= worst->fitness)
                *worst = std::move(c);
        }
        result.best_per_generation.push_back(best());
        result.generations_run = gen;
    }

    std::ostringstream s;
    s << "kind=" << to_string(config.kind) << " generations=" << result.generations_run
      << " evaluations=" << result.evaluations << " best=" << result.best_per_generation.back()
      << " accepted=" << result.accepted.size();
    result.summary = s.str();
    return result;
}

FitnessSummary summarize_fitness(std::vector<std::uint64_t> counts)
{
    if (counts.empty())
        throw InvalidInput("fitness summary of an empty sample");
    FitnessSummary f;
    std::sort(counts.begin(), counts.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(counts.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, counts.size() - 1);
        return static_cast<double>(counts[lo]) +
               (pos - static_cast<double>(lo)) * (static_cast<double>(counts[hi]) - static_cast<double>(counts[lo]));
    };
    f.min = static_cast<double>(counts.front());
    f.max = static_cast<double>(counts.back());
    f.q1 = quantile(0.25);
    f.median = quantile(0.5);
    f.q3 = quantile(0.75);
    const double iqr = f.q3 - f.q1;
    const double lo_fence = f.q1 - 1.5 * iqr, hi_fence = f.q3 + 1.5 * iqr;
    f.lower_whisker = f.max;
    f.upper_whisker = f.min;
    for (auto c : counts)
    {
        const auto v = static_cast<double>(c);
        if (v < lo_fence || v > hi_fence)
        {
            f.outliers.push_back(c);
            continue;
        }
        f.lower_whisker = std::min(f.lower_whisker, v);
        f.upper_whisker = std::max(f.upper_whisker, v);
    }
    f.counts = std::move(counts);
    return f;
}

FitnessSummary fitness_distribution(const NetworkGraph& graph, const TrialProtocol& protocol, std::uint64_t net_seed)
{
    if (protocol.trials < 1)
        throw InvalidInput("trials must be at least 1");
    const CompiledNetwork net(graph);
    return summarize_fitness(
        evaluate_fitness(net, protocol.cartpole, protocol.trials, protocol.env_seed, net_seed));
}

void write_manifest_csv(std::ostream& os, const std::vector<ManifestRow>& rows)
{
    os << "file,kind,median_fitness,trials\n";
    for (const auto& r : rows)
        os << r.file << ',' << to_string(r.kind) << ',' << r.median_fitness << ',' << r.trials << '\n';
}

std::vector<ManifestRow> read_manifest_csv(std::istream& is)
{
    std::vector<ManifestRow> rows;
    std::string line;
    bool header = false;
    std::size_t lineno = 0;
    while (std::getline(is, line))
    {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        if (!header)
        {
            if (line != "file,kind,median_fitness,trials")
                throw ParseError("line " + std::to_string(lineno), "unexpected manifest header");
            header = true;
            continue;
        }
        std::istringstream fields(line);
        std::string file, kind, med, trials;
        if (!std::getline(fields, file, ',') || !std::getline(fields, kind, ',') || !std::getline(fields, med, ',') ||
            !std::getline(fields, trials))
            throw ParseError("line " + std::to_string(lineno), "expected 4 fields");
        try
        {
            rows.push_back({file, parse_neuron_kind(kind), std::stod(med), std::stoul(trials)});
        }
        catch (const std::exception& e)
        {
            throw ParseError("line " + std::to_string(lineno), e.what());
        }
    }
    return rows;
}

} // namespace nsnn

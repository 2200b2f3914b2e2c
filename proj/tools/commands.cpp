#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <locale>
#include <map>
#include <sstream>

#include "nsnn/cartpole.hpp"
#include "nsnn/evolution.hpp"
#include "nsnn/network_io.hpp"
#include "nsnn/neuron.hpp"
#include "nsnn/reram.hpp"
#include "nsnn/robustness.hpp"
#include "nsnn/weight_space.hpp"

#ifndef NSNN_VERSION
#define NSNN_VERSION "dev"
#endif

namespace nsnn::cli {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- output

std::string header(const RunContext& ctx, std::string_view prefix)
{
    return std::string(prefix) + " nsnn " NSNN_VERSION " command=" + ctx.command + " config=" + ctx.hash +
           " seed=" + std::to_string(ctx.seed) + "\n";
}

/// Buffered output file written in one piece on commit().
class OutputFile
{
public:
    OutputFile(const RunContext& ctx, fs::path relative, std::string_view comment = "#")
        : path_(ctx.out / std::move(relative))
    {
        buf_.imbue(std::locale::classic());
        buf_ << header(ctx, comment);
    }

    std::ostream& os() { return buf_; }

    void commit()
    {
        fs::create_directories(path_.parent_path());
        std::ofstream f(path_, std::ios::binary | std::ios::trunc);
        const std::string text = buf_.str();
        f.write(text.data(), static_cast<std::streamsize>(text.size()));
        f.close();
        if (!f)
            throw Error("cannot write " + path_.string());
    }

private:
    fs::path path_;
    std::ostringstream buf_;
};

// ---------------------------------------------------------------- parsing

fs::path resolve(const RunContext& ctx, const std::string& p)
{
    const fs::path path(p);
    return path.is_absolute() ? path : ctx.base_dir / path;
}

template <class F>
auto as_config_error(const std::string& path, F&& fn)
{
    try
    {
        return fn();
    }
    catch (const ParseError&)
    {
        throw;
    }
    catch (const Error& e)
    {
        throw ParseError(path, e.what());
    }
}

NeuronParams parse_neuron(const ConfigNode& n)
{
    n.allow({"threshold", "capacitance", "leak", "noise_sigma"});
    NeuronParams p;
    p.threshold = n.get<double>("threshold", 50.0);
    p.capacitance = n.get<double>("capacitance", 1.0);
    p.leak = n.get<double>("leak", 0.0);
    p.noise_sigma = n.get<double>("noise_sigma", 0.0);
    as_config_error(n.path(), [&] { p.validate(); });
    return p;
}

CartPoleConfig parse_cartpole(const ConfigNode& block)
{
    CartPoleConfig c;
    const auto node = block.find_object("cartpole");
    if (!node)
        return c;
    const auto& n = *node;
    n.allow({"dt", "max_cycles", "force", "theta_limit_deg", "x_limit", "x_dot_range", "theta_dot_range", "jitter",
             "bins", "initial_action", "sub_cycles", "physics"});
    c.dt = n.get<double>("dt", c.dt);
    c.max_cycles = n.get<std::uint64_t>("max_cycles", c.max_cycles);
    c.force = n.get<double>("force", c.force);
    if (n.has("theta_limit_deg"))
        c.theta_limit = n.get<double>("theta_limit_deg") * std::numbers::pi / 180.0;
    c.x_limit = n.get<double>("x_limit", c.x_limit);
    c.x_dot_range = n.get<double>("x_dot_range", c.x_dot_range);
    c.theta_dot_range = n.get<double>("theta_dot_range", c.theta_dot_range);
    c.jitter = n.get<double>("jitter", c.jitter);
    c.bins = n.get<std::uint32_t>("bins", c.bins);
    c.initial_action = n.get<int>("initial_action", c.initial_action);
    c.sub_cycles = n.get<std::uint32_t>("sub_cycles", c.sub_cycles);
    if (const auto ph = n.find_object("physics"))
    {
        ph->allow({"cart_mass", "pole_mass", "half_length", "gravity"});
        c.physics.cart_mass = ph->get<double>("cart_mass", c.physics.cart_mass);
        c.physics.pole_mass = ph->get<double>("pole_mass", c.physics.pole_mass);
        c.physics.half_length = ph->get<double>("half_length", c.physics.half_length);
        c.physics.gravity = ph->get<double>("gravity", c.physics.gravity);
    }
    as_config_error(n.path(), [&] { c.validate(); });
    return c;
}

NeuronKind parse_kind(const ConfigNode& n, std::string_view key)
{
    const auto name = n.get<std::string>(key);
    return as_config_error(n.child_path(key), [&] { return parse_neuron_kind(name); });
}

struct NetworkEntry
{
    std::string label;
    NetworkGraph graph;
};

NetworkGraph load_checked(const fs::path& file, const std::string& path)
{
    if (!fs::is_regular_file(file))
        throw ParseError(path, "no such file: " + file.string());
    try
    {
        return load_network(file);
    }
    catch (const Error& e)
    {
        throw ParseError(path, file.string() + ": " + e.what());
    }
}

/// Networks listed under "networks" and/or read from "manifest" CSVs (one
/// path or a list).
std::vector<NetworkEntry> load_networks(const RunContext& ctx, const ConfigNode& block)
{
    std::vector<NetworkEntry> out;
    if (block.has("networks"))
    {
        const auto files = block.get<std::vector<std::string>>("networks");
        for (std::size_t i = 0; i < files.size(); ++i)
        {
            const std::string path = block.child_path("networks") + "[" + std::to_string(i) + "]";
            out.push_back({files[i], load_checked(resolve(ctx, files[i]), path)});
        }
    }
    std::vector<std::string> manifests;
    if (block.has("manifest"))
        manifests = block.raw().at("manifest").is_array() ? block.get<std::vector<std::string>>("manifest")
                                                          : std::vector{block.get<std::string>("manifest")};
    for (std::size_t m = 0; m < manifests.size(); ++m)
    {
        const auto path = block.child_path("manifest") + (manifests.size() > 1 ? "[" + std::to_string(m) + "]" : "");
        const auto manifest = resolve(ctx, manifests[m]);
        std::ifstream in(manifest);
        if (!in)
            throw ParseError(path, "no such file: " + manifest.string());
        const auto rows = as_config_error(path, [&] { return read_manifest_csv(in); });
        for (const auto& row : rows)
        {
            const fs::path f(row.file);
            out.push_back({row.file, load_checked(f.is_absolute() ? f : manifest.parent_path() / f, path)});
        }
    }
    if (out.empty())
        throw ParseError(block.path(), "no networks given (use \"networks\" or \"manifest\")");
    return out;
}

TrialProtocol protocol_for(NeuronKind kind, std::size_t trials, std::uint64_t env_seed, const CartPoleConfig& c)
{
    return {trials > 0 ? trials : default_trials(kind), env_seed, c};
}

double quantile(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// ---------------------------------------------------------------- neuron-trace

class NeuronTrace final : public Experiment
{
public:
    explicit NeuronTrace(const ConfigNode& b)
    {
        b.allow({"neuron", "weights", "train", "dt", "horizon"});
        params_ = parse_neuron(b.object("neuron"));
        weights_ = b.get<std::vector<double>>("weights");
        train_ = as_config_error(b.child_path("train"), [&] {
            return SpikeTrain(b.get<std::vector<std::vector<double>>>("train"));
        });
        if (train_.synapse_count() != weights_.size())
            throw ParseError(b.child_path("train"), "needs one spike list per weight");
        dt_ = b.get<double>("dt", 0.1);
        horizon_ = b.get<double>("horizon", train_.last_time() + 50.0);
        if (!(dt_ > 0.0))
            throw ParseError(b.child_path("dt"), "must be positive");
        if (!(horizon_ > 0.0))
            throw ParseError(b.child_path("horizon"), "must be positive");
    }

    void run(const RunContext& ctx) override
    {
        const auto trace = simulate_sde(params_, weights_, train_, dt_, horizon_, derive_seed(ctx.seed, {0}));
        OutputFile f(ctx, "trace.csv");
        auto& os = f.os();
        os << std::setprecision(12) << "time,voltage,spike\n";
        std::size_t k = 0;
        for (std::size_t i = 0; i < trace.times.size(); ++i)
        {
            // A spike is logged as the crossing sample followed by the reset,
            // which is the last sample at that time.
            const auto n = trace.times.size();
            const bool spike = k < trace.spike_times.size() && trace.times[i] == trace.spike_times[k] &&
                               i + 1 < n && trace.times[i + 1] == trace.times[i] &&
                               (i + 2 == n || trace.times[i + 2] != trace.times[i]);
            k += spike;
            os << trace.times[i] << ',' << trace.voltage[i] << ',' << (spike ? 1 : 0) << '\n';
        }
        f.commit();
        std::cout << "neuron-trace: " << trace.times.size() << " samples, " << trace.spike_times.size()
                  << " spikes\n";
    }

private:
    NeuronParams params_;
    std::vector<double> weights_;
    SpikeTrain train_;
    double dt_ = 0.1;
    double horizon_ = 0.0;
};

// ---------------------------------------------------------------- boundary-map

class BoundaryMapCommand final : public Experiment
{
public:
    explicit BoundaryMapCommand(const ConfigNode& b)
    {
        b.allow({"neuron", "grid", "battery", "dt", "overlay_max_spikes"});
        params_ = b.has("neuron") ? parse_neuron(b.object("neuron")) : parse_neuron(ConfigNode(empty_, "neuron"));
        if (const auto g = b.find_object("grid"))
        {
            g->allow({"n1", "n2", "max_w1", "max_w2"});
            grid_.n1 = g->get<std::size_t>("n1", grid_.n1);
            grid_.n2 = g->get<std::size_t>("n2", grid_.n2);
            grid_.max_w1 = g->get<double>("max_w1", params_.threshold);
            grid_.max_w2 = g->get<double>("max_w2", params_.threshold);
        }
        else
        {
            grid_.max_w1 = grid_.max_w2 = params_.threshold;
        }
        if (grid_.n1 < 2 || grid_.n2 < 2)
            throw ParseError(b.child_path("grid"), "needs at least 2 cells per axis");
        if (!(grid_.max_w1 > 0.0 && grid_.max_w1 <= params_.threshold))
            throw ParseError(b.child_path("grid.max_w1"), "must lie in (0, threshold]");
        if (!(grid_.max_w2 > 0.0 && grid_.max_w2 <= params_.threshold))
            throw ParseError(b.child_path("grid.max_w2"), "must lie in (0, threshold]");
        if (const auto p = b.find_object("battery"))
        {
            p->allow({"count", "min_spikes", "max_spikes", "window"});
            count_ = p->get<std::size_t>("count", count_);
            min_spikes_ = p->get<std::uint32_t>("min_spikes", min_spikes_);
            max_spikes_ = p->get<std::uint32_t>("max_spikes", max_spikes_);
            window_ = p->get<double>("window", window_);
        }
        if (count_ < 1 || min_spikes_ < 1 || max_spikes_ < min_spikes_ || !(window_ > 0.0))
            throw ParseError(b.child_path("battery"), "needs count >= 1, 1 <= min_spikes <= max_spikes, window > 0");
        dt_ = b.get<double>("dt", 0.5);
        if (!(dt_ > 0.0))
            throw ParseError(b.child_path("dt"), "must be positive");
        overlay_ = b.get<std::uint32_t>("overlay_max_spikes", max_spikes_);
    }

    void run(const RunContext& ctx) override
    {
        const auto battery =
            ProbeBattery::generate(count_, 2, min_spikes_, max_spikes_, window_, derive_seed(ctx.seed, {1}));
        const auto map =
            map_behavior_boundaries(params_, grid_, battery, derive_seed(ctx.seed, {2}), {dt_, ctx.jobs});
        const auto planes = enumerate_hyperplanes(2, overlay_, params_.threshold);
        const auto dist = boundary_plane_distances(map, planes);

        OutputFile m(ctx, "boundary_map.csv");
        map.write_csv(m.os());
        m.commit();

        OutputFile h(ctx, "hyperplanes.csv");
        h.os() << std::setprecision(17) << "n1,n2,offset\n";
        for (const auto& p : planes)
            h.os() << p.normal[0] << ',' << p.normal[1] << ',' << p.offset << '\n';
        h.commit();

        const auto within1 = std::count_if(dist.begin(), dist.end(), [](double d) { return d <= 1.0; });
        const auto beyond2 = std::count_if(dist.begin(), dist.end(), [](double d) { return d > 2.0; });
        OutputFile s(ctx, "boundary_summary.csv");
        s.os() << std::setprecision(12) << "boundary_cells,within_1_cell,beyond_2_cells,fraction_within_1\n"
               << dist.size() << ',' << within1 << ',' << beyond2 << ','
               << (dist.empty() ? 1.0 : static_cast<double>(within1) / static_cast<double>(dist.size())) << '\n';
        s.commit();
        std::cout << "boundary-map: " << dist.size() << " boundary cells, " << within1 << " within 1 cell of "
                  << planes.size() << " planes\n";
    }

private:
    inline static const json empty_ = json::object();
    NeuronParams params_;
    GridSpec grid_;
    std::size_t count_ = 64;
    std::uint32_t min_spikes_ = 1;
    std::uint32_t max_spikes_ = 8;
    double window_ = 200.0;
    double dt_ = 0.5;
    std::uint32_t overlay_ = 8;
};

// ---------------------------------------------------------------- evolve

class EvolveCommand final : public Experiment
{
public:
    explicit EvolveCommand(const ConfigNode& b)
    {
        b.allow({"kind", "population", "generations", "tournament", "rates", "weight_range", "weight_sigma",
                 "weight_levels", "max_delay", "initial_synapses", "dense_init", "trials", "acceptance", "confirmations", "env_seed",
                 "params", "cartpole", "runs", "max_accepted_per_run", "target_accepted"});
        cfg_ = EvoConfig::for_kind(parse_kind(b, "kind"));
        cfg_.population = b.get<std::size_t>("population", cfg_.population);
        cfg_.generations = b.get<std::size_t>("generations", cfg_.generations);
        cfg_.tournament = b.get<std::size_t>("tournament", cfg_.tournament);
        if (const auto r = b.find_object("rates"))
        {
            r->allow({"add_neuron", "remove_neuron", "add_synapse", "remove_synapse", "perturb_weight",
                      "perturb_delay", "crossover"});
            auto& m = cfg_.rates;
            m.add_neuron = r->get<double>("add_neuron", m.add_neuron);
            m.remove_neuron = r->get<double>("remove_neuron", m.remove_neuron);
            m.add_synapse = r->get<double>("add_synapse", m.add_synapse);
            m.remove_synapse = r->get<double>("remove_synapse", m.remove_synapse);
            m.perturb_weight = r->get<double>("perturb_weight", m.perturb_weight);
            m.perturb_delay = r->get<double>("perturb_delay", m.perturb_delay);
            m.crossover = r->get<double>("crossover", m.crossover);
        }
        cfg_.weight_range = b.get<double>("weight_range", cfg_.weight_range);
        cfg_.weight_sigma = b.get<double>("weight_sigma", cfg_.weight_sigma);
        cfg_.weight_levels = b.get<std::uint32_t>("weight_levels", cfg_.weight_levels);
        cfg_.max_delay = b.get<std::uint32_t>("max_delay", cfg_.max_delay);
        cfg_.initial_synapses = b.get<std::size_t>("initial_synapses", cfg_.initial_synapses);
        cfg_.dense_init = b.get<bool>("dense_init", cfg_.dense_init);
        cfg_.trials = b.get<std::size_t>("trials", cfg_.trials);
        cfg_.acceptance = b.get<double>("acceptance", cfg_.acceptance);
        cfg_.confirmations = b.get<std::size_t>("confirmations", cfg_.confirmations);
        cfg_.env_seed = b.get<std::uint64_t>("env_seed", cfg_.env_seed);
        if (const auto p = b.find_object("params"))
        {
            p->allow({"T_cycles", "sigma_a"});
            cfg_.params.T_cycles = p->get<double>("T_cycles", cfg_.params.T_cycles);
            cfg_.params.sigma_a = p->get<double>("sigma_a", cfg_.params.sigma_a);
        }
        cfg_.cartpole = parse_cartpole(b);
        cfg_.max_accepted = b.get<std::size_t>("max_accepted_per_run", 0);
        runs_ = b.get<std::size_t>("runs", 1);
        target_ = b.get<std::size_t>("target_accepted", 0);
        if (runs_ < 1)
            throw ParseError(b.child_path("runs"), "must be at least 1");
        as_config_error(b.path(), [&] { cfg_.validate(); });
        // The params must suit the kind; checked the same way a network file is.
        NetworkGraph probe;
        probe.kind = cfg_.kind;
        probe.params = cfg_.params;
        as_config_error(b.child_path("params"), [&] { probe.validate(); });
    }

    void run(const RunContext& ctx) override
    {
        const std::string kind(to_string(cfg_.kind));
        std::vector<ManifestRow> manifest;
        OutputFile progress(ctx, "progress.csv");
        progress.os() << "run,generation,best_fitness\n";
        for (std::size_t r = 0; r < runs_ && (target_ == 0 || manifest.size() < target_); ++r)
        {
            auto c = cfg_;
            c.seed = derive_seed(ctx.seed, {r});
            c.jobs = ctx.jobs;
            const auto result = evolve(c);
            for (std::size_t g = 0; g < result.best_per_generation.size(); ++g)
                progress.os() << r << ',' << g << ',' << result.best_per_generation[g] << '\n';
            for (const auto& genome : result.accepted)
            {
                if (target_ > 0 && manifest.size() >= target_)
                    break;
                std::ostringstream name;
                name << "networks/" << kind << '_' << std::setw(3) << std::setfill('0') << manifest.size()
                     << ".json";
                OutputFile net(ctx, name.str(), "//");
                net.os() << serialize_network(genome.graph);
                net.commit();
                manifest.push_back({name.str(), cfg_.kind, genome.fitness, genome.trials.size()});
            }
            std::cout << "evolve run " << r << ": " << result.summary << std::endl;
        }
        progress.commit();
        OutputFile m(ctx, "manifest.csv");
        write_manifest_csv(m.os(), manifest);
        m.commit();
        std::cout << "evolve: " << manifest.size() << " accepted " << kind << " networks\n";
    }

private:
    EvoConfig cfg_;
    std::size_t runs_ = 1;
    std::size_t target_ = 0;
};

// ---------------------------------------------------------------- perturb

class PerturbCommand final : public Experiment
{
public:
    PerturbCommand(const RunContext& ctx, const ConfigNode& b)
    {
        b.allow({"networks", "manifest", "magnitudes", "samples", "env_seed", "cartpole", "trials", "max_fitness"});
        nets_ = load_networks(ctx, b);
        magnitudes_ = b.get<std::vector<double>>("magnitudes", default_magnitude_grid());
        if (magnitudes_.empty() || magnitudes_[0] != 0.0 || !std::is_sorted(magnitudes_.begin(), magnitudes_.end()))
            throw ParseError(b.child_path("magnitudes"), "must ascend from 0");
        samples_ = b.get<std::size_t>("samples", 10);
        if (samples_ < 1)
            throw ParseError(b.child_path("samples"), "must be at least 1");
        env_seed_ = b.get<std::uint64_t>("env_seed", 1);
        cartpole_ = parse_cartpole(b);
        trials_ = b.get<std::size_t>("trials", 0);
        max_fitness_ = b.get<double>("max_fitness", static_cast<double>(cartpole_.max_cycles));
        if (!(max_fitness_ > 0.0))
            throw ParseError(b.child_path("max_fitness"), "must be positive");
    }

    void run(const RunContext& ctx) override
    {
        std::vector<MetricRow> metrics;
        std::map<NeuronKind, std::vector<double>> by_kind;
        std::map<NeuronKind, std::vector<PerturbationCurve>> curves;
        for (std::size_t j = 0; j < nets_.size(); ++j)
        {
            const auto& [label, graph] = nets_[j];
            const auto protocol = protocol_for(graph.kind, trials_, env_seed_, cartpole_);
            auto curve =
                robustness_curve(graph, magnitudes_, samples_, protocol, derive_seed(ctx.seed, {j}), ctx.jobs);

            std::ostringstream name;
            name << "curves/" << std::setw(3) << std::setfill('0') << j << '_' << fs::path(label).stem().string()
                 << ".csv";
            OutputFile f(ctx, name.str());
            write_curve_csv(f.os(), curve);
            f.commit();

            HalfFitness h{std::nan(""), false};
            try
            {
                h = half_fitness_magnitude(curve, max_fitness_);
                by_kind[graph.kind].push_back(h.magnitude);
            }
            catch (const UndefinedMetric&)
            {
                std::cerr << "nsnn: " << label << ": unperturbed median below half fitness, metric undefined\n";
            }
            metrics.push_back({label, graph.kind, h});
            curves[graph.kind].push_back(std::move(curve));
            std::cout << "perturb " << label << ": half-fitness magnitude " << h.magnitude
                      << (h.censored ? " (censored)" : "") << '\n';
        }

        OutputFile m(ctx, "metrics.csv");
        write_metric_csv(m.os(), metrics);
        m.commit();

        OutputFile pooled(ctx, "pooled.csv");
        pooled.os() << "kind,magnitude,pooled_median\n";
        for (const auto& [kind, list] : curves)
        {
            const auto p = pooled_median_curve(list);
            for (std::size_t i = 0; i < p.size(); ++i)
                pooled.os() << to_string(kind) << ',' << magnitudes_[i] << ',' << p[i] << '\n';
        }
        pooled.commit();

        std::vector<TTestRow> rows;
        for (auto a = by_kind.begin(); a != by_kind.end(); ++a)
            for (auto b = std::next(a); b != by_kind.end(); ++b)
            {
                const std::string ga(to_string(a->first)), gb(to_string(b->first));
                try
                {
                    const auto t = welch_t_test(a->second, b->second);
                    rows.push_back({ga, gb, a->second.size(), b->second.size(), median(a->second),
                                    median(b->second), t});
                    std::cout << "welch " << ga << " vs " << gb << ": t=" << t.t << " dof=" << t.dof
                              << " p=" << t.p << '\n';
                }
                catch (const Error& e)
                {
                    std::cerr << "nsnn: t-test " << ga << " vs " << gb << " skipped: " << e.what() << '\n';
                }
            }
        OutputFile t(ctx, "ttest.csv");
        write_ttest_csv(t.os(), rows);
        t.commit();
    }

private:
    std::vector<NetworkEntry> nets_;
    std::vector<double> magnitudes_;
    std::size_t samples_ = 10;
    std::uint64_t env_seed_ = 1;
    CartPoleConfig cartpole_;
    std::size_t trials_ = 0;
    double max_fitness_ = 15000.0;
};

// ---------------------------------------------------------------- reram

class ReramCommand final : public Experiment
{
public:
    ReramCommand(const RunContext& ctx, const ConfigNode& b) : table_(ResistanceLevelTable::defaults())
    {
        b.allow({"table", "distribution", "ramp"});
        if (b.has("table"))
        {
            const auto file = resolve(ctx, b.get<std::string>("table"));
            if (!fs::is_regular_file(file))
                throw ParseError(b.child_path("table"), "no such file: " + file.string());
            table_ = as_config_error(b.child_path("table"), [&] { return ResistanceLevelTable::load_csv(file); });
        }
        if (!b.has("distribution") && !b.has("ramp"))
            throw ParseError(b.path(), "needs a \"distribution\" or \"ramp\" block");
        if (const auto d = b.find_object("distribution"))
        {
            d->allow({"lambdas", "draws", "bins"});
            dist_lambdas_ = d->get<std::vector<double>>("lambdas", {0.0, 1.0});
            check_lambdas(dist_lambdas_, d->child_path("lambdas"));
            draws_ = d->get<std::size_t>("draws", 1000);
            bins_ = d->get<std::size_t>("bins", 60);
            if (draws_ < 1 || bins_ < 1)
                throw ParseError(d->path(), "draws and bins must be at least 1");
            distribution_ = true;
        }
        if (const auto r = b.find_object("ramp"))
        {
            r->allow({"networks", "manifest", "lambdas", "samples", "env_seed", "cartpole", "trials",
                      "required_fitness"});
            nets_ = load_networks(ctx, *r);
            std::vector<double> grid;
            for (int i = 0; i <= 10; ++i)
                grid.push_back(i / 10.0);
            ramp_lambdas_ = r->get<std::vector<double>>("lambdas", grid);
            check_lambdas(ramp_lambdas_, r->child_path("lambdas"));
            samples_ = r->get<std::size_t>("samples", 100);
            if (samples_ < 1)
                throw ParseError(r->child_path("samples"), "must be at least 1");
            env_seed_ = r->get<std::uint64_t>("env_seed", 1);
            cartpole_ = parse_cartpole(*r);
            trials_ = r->get<std::size_t>("trials", 0);
            required_ = r->get<double>("required_fitness", static_cast<double>(cartpole_.max_cycles));
        }
    }

    void run(const RunContext& ctx) override
    {
        if (distribution_)
            run_distribution(ctx);
        if (!nets_.empty())
            run_ramp(ctx);
    }

private:
    static void check_lambdas(const std::vector<double>& l, const std::string& path)
    {
        if (l.empty())
            throw ParseError(path, "needs at least one value");
        for (double x : l)
            if (!(x >= 0.0 && x <= 1.0))
                throw ParseError(path, "values must lie in [0, 1]");
    }

    void run_distribution(const RunContext& ctx)
    {
        const int n = table_.size();
        std::vector<WeightDistribution> dists;
        for (std::size_t a = 0; a < dist_lambdas_.size(); ++a)
            for (int k = -(n - 1); k <= n - 1; ++k)
            {
                Rng rng = make_rng(ctx.seed, {0, a, static_cast<std::uint64_t>(k + n - 1)});
                dists.push_back(weight_value_distribution(k, table_, dist_lambdas_[a], draws_, rng, bins_));
            }
        OutputFile f(ctx, "weight_distribution.csv");
        write_weight_distribution_csv(f.os(), dists);
        f.commit();

        OutputFile s(ctx, "weight_summary.csv");
        s.os() << std::setprecision(12) << "level,lambda,mean,sd\n";
        for (const auto& d : dists)
            s.os() << d.level << ',' << d.lambda << ',' << d.mean << ',' << d.sd << '\n';
        s.commit();

        OutputFile h(ctx, "weight_histogram.csv");
        h.os() << std::setprecision(12) << "level,lambda,bin_lo,bin_hi,count\n";
        for (const auto& d : dists)
        {
            const double width = (d.hi - d.lo) / static_cast<double>(d.histogram.size());
            for (std::size_t i = 0; i < d.histogram.size(); ++i)
                h.os() << d.level << ',' << d.lambda << ',' << d.lo + width * static_cast<double>(i) << ','
                       << d.lo + width * static_cast<double>(i + 1) << ',' << d.histogram[i] << '\n';
        }
        h.commit();
        std::cout << "reram: " << dists.size() << " weight distributions of " << draws_ << " draws\n";
    }

    void run_ramp(const RunContext& ctx)
    {
        struct Pick
        {
            std::size_t index;
            QuantizationScheme scheme;
            NetworkGraph quantized;
            TrialProtocol protocol;
        };
        std::map<NeuronKind, Pick> picks;
        OutputFile sel(ctx, "selection.csv");
        sel.os() << "network_file,kind,original_fitness,quantized_fitness,selected\n";
        for (std::size_t j = 0; j < nets_.size(); ++j)
        {
            const auto& [label, graph] = nets_[j];
            const auto protocol = protocol_for(graph.kind, trials_, env_seed_, cartpole_);
            const auto scheme = default_scheme(graph, table_.size());
            auto q = quantize_network(graph, scheme);
            const double orig = score_network(CompiledNetwork(graph), protocol, derive_seed(ctx.seed, {1, j, 0}));
            const double quant = score_network(CompiledNetwork(q), protocol, derive_seed(ctx.seed, {1, j, 1}));
            const bool take = quant >= required_ && !picks.contains(graph.kind);
            if (take)
                picks.emplace(graph.kind, Pick{j, scheme, std::move(q), protocol});
            sel.os() << label << ',' << to_string(graph.kind) << ',' << orig << ',' << quant << ','
                     << (take ? 1 : 0) << '\n';
        }
        sel.commit();
        if (picks.empty())
        {
            std::ostringstream msg;
            msg << "no candidate network keeps fitness " << required_ << " after quantization (see selection.csv)";
            throw Error(msg.str());
        }

        OutputFile summary(ctx, "ramp_summary.csv");
        summary.os() << "kind,lambda,median,q1,q3\n";
        for (const auto& [kind, pick] : picks)
        {
            const std::string k(to_string(kind));
            OutputFile net(ctx, "quantized_" + k + ".json", "//");
            net.os() << serialize_network(pick.quantized);
            net.commit();

            const auto ramp = variability_ramp(pick.quantized, pick.scheme, table_, ramp_lambdas_, samples_,
                                               pick.protocol, derive_seed(ctx.seed, {2, pick.index}), ctx.jobs);
            OutputFile f(ctx, "ramp_" + k + ".csv");
            write_ramp_csv(f.os(), ramp);
            f.commit();
            for (std::size_t i = 0; i < ramp.lambdas.size(); ++i)
                summary.os() << k << ',' << ramp.lambdas[i] << ',' << quantile(ramp.fitness[i], 0.5) << ','
                             << quantile(ramp.fitness[i], 0.25) << ',' << quantile(ramp.fitness[i], 0.75) << '\n';
            std::cout << "reram ramp " << nets_[pick.index].label << " (" << k << "): median at lambda "
                      << ramp.lambdas.back() << " = " << quantile(ramp.fitness.back(), 0.5) << '\n';
        }
        summary.commit();
    }

    ResistanceLevelTable table_;
    bool distribution_ = false;
    std::vector<double> dist_lambdas_;
    std::size_t draws_ = 1000;
    std::size_t bins_ = 60;
    std::vector<NetworkEntry> nets_;
    std::vector<double> ramp_lambdas_;
    std::size_t samples_ = 100;
    std::uint64_t env_seed_ = 1;
    CartPoleConfig cartpole_;
    std::size_t trials_ = 0;
    double required_ = 15000.0;
};

} // namespace

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"neuron-trace", "boundary-map", "evolve", "perturb", "reram"};
    return names;
}

std::string block_name(std::string_view command)
{
    std::string s(command);
    std::replace(s.begin(), s.end(), '-', '_');
    return s;
}

std::unique_ptr<Experiment> prepare_experiment(const RunContext& ctx, const ConfigNode& block)
{
    if (ctx.command == "neuron-trace")
        return std::make_unique<NeuronTrace>(block);
    if (ctx.command == "boundary-map")
        return std::make_unique<BoundaryMapCommand>(block);
    if (ctx.command == "evolve")
        return std::make_unique<EvolveCommand>(block);
    if (ctx.command == "perturb")
        return std::make_unique<PerturbCommand>(ctx, block);
    if (ctx.command == "reram")
        return std::make_unique<ReramCommand>(ctx, block);
    throw ParseError("command", "unknown command '" + ctx.command + "'");
}

} // namespace nsnn::cli

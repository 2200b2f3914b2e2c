#include "nsnn/reram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "nsnn/error.hpp"
#include "nsnn/parallel.hpp"

namespace nsnn {

ResistanceLevelTable::ResistanceLevelTable(std::vector<ResistanceLevel> levels) : levels_(std::move(levels))
{
    if (levels_.size() < 2)
        throw InvalidInput("resistance table needs at least 2 levels");
    for (std::size_t i = 0; i < levels_.size(); ++i)
    {
        const auto& l = levels_[i];
        if (!(l.mean_ohm > 0.0) || !(l.sd_ohm > 0.0) || !std::isfinite(l.mean_ohm) || !std::isfinite(l.sd_ohm))
            throw InvalidInput("level " + std::to_string(i + 1) + ": mean and sd must be positive");
        if (i > 0 && !(l.mean_ohm > levels_[i - 1].mean_ohm))
            throw InvalidInput("level " + std::to_string(i + 1) + ": means must ascend strictly");
    }
}

ResistanceLevelTable ResistanceLevelTable::defaults()
{
    return ResistanceLevelTable({{2750, 2790, 41.3}, {5000, 5610, 425}, {7750, 8380, 479}, {10500, 11300, 617}});
}

ResistanceLevelTable ResistanceLevelTable::load_csv(std::istream& is)
{
    std::vector<ResistanceLevel> levels;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(is, line))
    {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        const std::string where = "line " + std::to_string(lineno);
        if (!header)
        {
            if (line != "level,target_ohm,mean_ohm,sd_ohm")
                throw ParseError(where, "expected header level,target_ohm,mean_ohm,sd_ohm");
            header = true;
            continue;
        }
        std::istringstream fields(line);
        std::string f[4];
        for (int i = 0; i < 4; ++i)
            if (!std::getline(fields, f[i], i < 3 ? ',' : '\n'))
                throw ParseError(where, "expected 4 fields");
        try
        {
            std::size_t used = 0;
            const int level = std::stoi(f[0], &used);
            if (used != f[0].size() || level != static_cast<int>(levels.size()) + 1)
                throw ParseError(where, "levels must be numbered 1, 2, ... in order");
            levels.push_back({std::stod(f[1]), std::stod(f[2]), std::stod(f[3])});
        }
        catch (const std::logic_error& e)
        {
            throw ParseError(where, std::string("bad number: ") + e.what());
        }
    }
    if (!header)
        throw ParseError("", "empty resistance table");
    try
    {
        return ResistanceLevelTable(std::move(levels));
    }
    catch (const InvalidInput& e)
    {
        throw ParseError("", e.what());
    }
}

ResistanceLevelTable ResistanceLevelTable::load_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open resistance table " + path.string());
    return load_csv(in);
}

const ResistanceLevel& ResistanceLevelTable::level(int l) const
{
    if (l < 1 || l > size())
        throw InvalidInput("device level " + std::to_string(l) + " out of range");
    return levels_[static_cast<std::size_t>(l - 1)];
}

std::vector<TwinRepresentation> representations_for_level(int k, int n)
{
    if (n < 2)
        throw InvalidInput("need at least 2 device levels");
    if (std::abs(k) >= n)
        throw InvalidInput("weight level " + std::to_string(k) + " not representable with " + std::to_string(n) +
                           " device levels");
    std::vector<TwinRepresentation> reps;
    for (int plus = 1; plus <= n; ++plus)
    {
        const int minus = plus + k;
        if (minus >= 1 && minus <= n)
            reps.push_back({plus, minus});
    }
    return reps;
}

double sample_device_resistance(int level, const ResistanceLevelTable& table, double lambda, Rng& rng)
{
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw InvalidInput("variability scale must lie in [0, 1]");
    const auto& l = table.level(level);
    if (lambda == 0.0)
        return l.mean_ohm;
    std::normal_distribution<double> gauss(0.0, 1.0);
    double z = gauss(rng);
    while (std::abs(z) > 4.0)
        z = gauss(rng);
    return std::max(1.0, l.mean_ohm + lambda * l.sd_ohm * z);
}

double twin_weight(double r_plus, double r_minus, const ResistanceLevelTable& table)
{
    const double span = 1.0 / table.level(1).mean_ohm - 1.0 / table.level(table.size()).mean_ohm;
    return (1.0 / r_plus - 1.0 / r_minus) / span;
}

double ideal_weight(const TwinRepresentation& rep, const ResistanceLevelTable& table)
{
    return twin_weight(table.level(rep.plus).mean_ohm, table.level(rep.minus).mean_ohm, table);
}

WeightDraw sample_weight_draw(int k, const ResistanceLevelTable& table, double lambda, Rng& rng)
{
    const auto reps = representations_for_level(k, table.size());
    const auto i = std::min(reps.size() - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(reps.size())));
    const auto rep = reps[i];
    const double rp = sample_device_resistance(rep.plus, table, lambda, rng);
    const double rm = sample_device_resistance(rep.minus, table, lambda, rng);
    return {rep, twin_weight(rp, rm, table)};
}

double sample_weight(int k, const ResistanceLevelTable& table, double lambda, Rng& rng)
{
    return sample_weight_draw(k, table, lambda, rng).value;
}

WeightDistribution weight_value_distribution(int k, const ResistanceLevelTable& table, double lambda,
                                             std::size_t draws, Rng& rng, std::size_t bins)
{
    if (draws < 1 || bins < 1)
        throw InvalidInput("need at least one draw and one bin");
    WeightDistribution d;
    d.level = k;
    d.lambda = lambda;
    d.values.reserve(draws);
    for (std::size_t i = 0; i < draws; ++i)
        d.values.push_back(sample_weight(k, table, lambda, rng));

    double sum = 0.0;
    for (double v : d.values)
        sum += v;
    d.mean = sum / static_cast<double>(draws);
    double ss = 0.0;
    for (double v : d.values)
        ss += (v - d.mean) * (v - d.mean);
    d.sd = draws > 1 ? std::sqrt(ss / static_cast<double>(draws - 1)) : 0.0;

    d.histogram.assign(bins, 0);
    const double width = (d.hi - d.lo) / static_cast<double>(bins);
    for (double v : d.values)
    {
        const double pos = std::floor((v - d.lo) / width);
        ++d.histogram[static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)))];
    }
    return d;
}

int QuantizationScheme::level_of(double weight) const
{
    const double k = std::round(weight / scale);
    return static_cast<int>(std::clamp(k, -static_cast<double>(max_level), static_cast<double>(max_level)));
}

QuantizationScheme default_scheme(const NetworkGraph& graph, int device_levels)
{
    if (device_levels < 2)
        throw InvalidInput("need at least 2 device levels");
    double peak = 0.0;
    for (const auto& s : graph.synapses)
        peak = std::max(peak, std::abs(s.weight));
    QuantizationScheme q;
    q.max_level = device_levels - 1;
    q.scale = peak > 0.0 ? peak / q.max_level : 1.0;
    return q;
}

NetworkGraph quantize_network(const NetworkGraph& graph, const QuantizationScheme& scheme)
{
    if (!(scheme.scale > 0.0) || scheme.max_level < 1)
        throw InvalidInput("quantization scale and max level must be positive");
    NetworkGraph out = graph;
    for (auto& s : out.synapses)
        s.weight = scheme.scale * scheme.level_of(s.weight);
    return out;
}

NetworkGraph sample_network_weights(const NetworkGraph& quantized, const QuantizationScheme& scheme,
                                    const ResistanceLevelTable& table, double lambda, Rng& rng)
{
    if (scheme.max_level != table.size() - 1)
        throw InvalidInput("quantization levels do not match the resistance table");
    NetworkGraph out = quantized;
    for (auto& s : out.synapses)
    {
        const int k = scheme.level_of(s.weight);
        const auto draw = sample_weight_draw(k, table, lambda, rng);
        if (k == 0)
            s.weight = draw.value * scheme.max_level * scheme.scale;
        else
            s.weight = scheme.scale * k * (draw.value / ideal_weight(draw.rep, table));
    }
    return out;
}

RampResult variability_ramp(const NetworkGraph& quantized, const QuantizationScheme& scheme,
                            const ResistanceLevelTable& table, std::span<const double> lambdas, std::size_t samples,
                            const TrialProtocol& protocol, std::uint64_t seed, unsigned jobs)
{
    if (lambdas.empty() || samples == 0)
        throw InvalidInput("ramp needs at least one lambda and one sample");
    RampResult r;
    r.lambdas.assign(lambdas.begin(), lambdas.end());
    r.fitness.assign(lambdas.size(), std::vector<double>(samples));
    parallel_for(lambdas.size() * samples, jobs, [&](std::size_t cell) {
        const std::size_t i = cell / samples, s = cell % samples;
        Rng rng = make_rng(seed, {i, s, 0});
        const CompiledNetwork net(sample_network_weights(quantized, scheme, table, lambdas[i], rng));
        r.fitness[i][s] = score_network(net, protocol, derive_seed(seed, {i, s, 1}));
    });
    return r;
}

void write_ramp_csv(std::ostream& os, const RampResult& ramp)
{
    os << "lambda,sample_index,fitness\n";
    for (std::size_t i = 0; i < ramp.lambdas.size(); ++i)
        for (std::size_t s = 0; s < ramp.fitness[i].size(); ++s)
            os << ramp.lambdas[i] << ',' << s << ',' << ramp.fitness[i][s] << '\n';
}

void write_weight_distribution_csv(std::ostream& os, const std::vector<WeightDistribution>& dists)
{
    os << "level,lambda,sample_index,weight\n";
    const auto old = os.precision(17);
    for (const auto& d : dists)
        for (std::size_t i = 0; i < d.values.size(); ++i)
            os << d.level << ',' << d.lambda << ',' << i << ',' << d.values[i] << '\n';
    os.precision(old);
}

} // namespace nsnn

#include "nsnn/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <boost/math/distributions/students_t.hpp>

#include "nsnn/error.hpp"
#include "nsnn/parallel.hpp"

namespace nsnn {

NetworkGraph perturb_weights(const NetworkGraph& graph, double magnitude, Rng& rng)
{
    if (!(magnitude >= 0.0) || !std::isfinite(magnitude))
        throw InvalidInput("perturbation magnitude must be finite and non-negative");
    NetworkGraph out = graph;
    if (magnitude == 0.0)
        return out;

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::size_t> incoming;
    std::vector<double> dir;
    for (const auto& n : graph.neurons)
    {
        incoming.clear();
        for (std::size_t k = 0; k < graph.synapses.size(); ++k)
            if (graph.synapses[k].post == n.id)
                incoming.push_back(k);
        if (incoming.empty())
            continue;

        dir.resize(incoming.size());
        double norm = 0.0;
        while (norm == 0.0)
        {
            double sq = 0.0;
            for (auto& d : dir)
            {
                d = gauss(rng);
                sq += d * d;
            }
            norm = std::sqrt(sq);
        }
        for (std::size_t j = 0; j < incoming.size(); ++j)
            out.synapses[incoming[j]].weight += n.threshold * magnitude * dir[j] / norm;
    }
    return out;
}

std::vector<double> default_magnitude_grid()
{
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i)
        grid.push_back(0.02 * i);
    return grid;
}

PerturbationCurve robustness_curve(const NetworkGraph& graph, std::span<const double> magnitudes,
                                   std::size_t samples, const TrialProtocol& protocol, std::uint64_t seed,
                                   unsigned jobs)
{
    if (magnitudes.empty() || samples == 0)
        throw InvalidInput("robustness curve needs at least one magnitude and one sample");
    if (magnitudes[0] != 0.0 || !std::is_sorted(magnitudes.begin(), magnitudes.end()))
        throw InvalidInput("magnitudes must ascend from 0");

    PerturbationCurve curve;
    curve.magnitudes.assign(magnitudes.begin(), magnitudes.end());
    curve.samples.assign(magnitudes.size(), std::vector<double>(samples));

    parallel_for(magnitudes.size() * samples, jobs, [&](std::size_t cell) {
        const std::size_t m = cell / samples, s = cell % samples;
        Rng rng = make_rng(seed, {m, s, 0});
        const CompiledNetwork net(perturb_weights(graph, magnitudes[m], rng));
        curve.samples[m][s] = score_network(net, protocol, derive_seed(seed, {m, s, 1}));
    });

    for (const auto& row : curve.samples)
        curve.medians.push_back(median(row));
    return curve;
}

HalfFitness half_fitness_magnitude(std::span<const double> magnitudes, std::span<const double> medians,
                                   double max_fitness)
{
    if (magnitudes.empty() || magnitudes.size() != medians.size())
        throw InvalidInput("magnitudes and medians must be non-empty and of equal length");
    const double half = 0.5 * max_fitness;
    if (medians[0] < half)
        throw UndefinedMetric("curve starts below half fitness");
    for (std::size_t i = 1; i < medians.size(); ++i)
    {
        if (medians[i] < half)
        {
            const double frac = (medians[i - 1] - half) / (medians[i - 1] - medians[i]);
            return {magnitudes[i - 1] + frac * (magnitudes[i] - magnitudes[i - 1]), false};
        }
    }
    return {magnitudes.back(), true};
}

HalfFitness half_fitness_magnitude(const PerturbationCurve& curve, double max_fitness)
{
    return half_fitness_magnitude(curve.magnitudes, curve.medians, max_fitness);
}

std::vector<double> pooled_median_curve(std::span<const PerturbationCurve> curves)
{
    if (curves.empty())
        throw InvalidInput("no curves to pool");
    std::vector<double> pooled;
    for (std::size_t m = 0; m < curves[0].medians.size(); ++m)
    {
        std::vector<double> column;
        for (const auto& c : curves)
        {
            if (c.magnitudes != curves[0].magnitudes)
                throw InvalidInput("curves use different magnitude grids");
            column.push_back(c.medians[m]);
        }
        pooled.push_back(median(std::move(column)));
    }
    return pooled;
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b)
{
    if (a.size() < 2 || b.size() < 2)
        throw InvalidInput("welch_t_test needs at least 2 values per sample");
    auto moments = [](std::span<const double> x) {
        double mean = 0.0;
        for (double v : x)
            mean += v;
        mean /= static_cast<double>(x.size());
        double ss = 0.0;
        for (double v : x)
            ss += (v - mean) * (v - mean);
        return std::pair{mean, ss / static_cast<double>(x.size() - 1)};
    };
    const auto [ma, va] = moments(a);
    const auto [mb, vb] = moments(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double sa = va / na, sb = vb / nb;
    if (sa + sb == 0.0)
        throw UndefinedMetric("both samples have zero variance");

    TTestResult r;
    r.t = (ma - mb) / std::sqrt(sa + sb);
    r.dof = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    const boost::math::students_t dist(r.dof);
    r.p = std::min(1.0, 2.0 * boost::math::cdf(dist, -std::abs(r.t)));
    return r;
}

void write_curve_csv(std::ostream& os, const PerturbationCurve& curve)
{
    os << "magnitude,sample_index,fitness,is_median_row\n";
    for (std::size_t m = 0; m < curve.magnitudes.size(); ++m)
    {
        for (std::size_t s = 0; s < curve.samples[m].size(); ++s)
            os << curve.magnitudes[m] << ',' << s << ',' << curve.samples[m][s] << ",0\n";
        os << curve.magnitudes[m] << ",-1," << curve.medians[m] << ",1\n";
    }
}

void write_metric_csv(std::ostream& os, const std::vector<MetricRow>& rows)
{
    os << "network_file,kind,half_fitness_magnitude,censored\n";
    for (const auto& r : rows)
        os << r.network_file << ',' << to_string(r.kind) << ',' << r.metric.magnitude << ','
           << (r.metric.censored ? 1 : 0) << '\n';
}

void write_ttest_csv(std::ostream& os, const std::vector<TTestRow>& rows)
{
    os << "group_a,group_b,n_a,n_b,median_a,median_b,t,dof,p\n";
    const auto old = os.precision(10);
    for (const auto& r : rows)
        os << r.group_a << ',' << r.group_b << ',' << r.n_a << ',' << r.n_b << ',' << r.median_a << ','
           << r.median_b << ',' << r.result.t << ',' << r.result.dof << ',' << r.result.p << '\n';
    os.precision(old);
}

} // namespace nsnn

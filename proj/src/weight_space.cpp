#include "nsnn/weight_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "nsnn/error.hpp"
#include "nsnn/parallel.hpp"
#include "nsnn/rng.hpp"
#include "nsnn/simd.hpp"

namespace nsnn {

namespace {

using Wide = __int128;

void check_square(const FiringConditionMatrix& f)
{
    const std::size_t n = f.size();
    if (n == 0)
        throw InvalidInput("firing-condition matrix is empty");
    for (const auto& row : f.rows)
        if (row.size() != n)
            throw InvalidInput("firing-condition matrix is not square");
}

std::int64_t narrow(Wide x)
{
    if (x > std::numeric_limits<std::int64_t>::max() || x < std::numeric_limits<std::int64_t>::min())
        throw Error("determinant overflows 64-bit integers");
    return static_cast<std::int64_t>(x);
}

// Bareiss fraction-free elimination; every division is exact.
std::int64_t bareiss_determinant(std::vector<std::vector<Wide>> m)
{
    const std::size_t n = m.size();
    int sign = 1;
    Wide prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k)
    {
        if (m[k][k] == 0)
        {
            std::size_t p = k + 1;
            while (p < n && m[p][k] == 0)
                ++p;
            if (p == n)
                return 0;
            std::swap(m[k], m[p]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
        {
            for (std::size_t j = k + 1; j < n; ++j)
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
        }
        prev = m[k][k];
    }
    return narrow(sign * m[n - 1][n - 1]);
}

std::vector<std::vector<Wide>> widen(const FiringConditionMatrix& f)
{
    std::vector<std::vector<Wide>> m(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        m[i].assign(f.rows[i].begin(), f.rows[i].end());
    return m;
}

} // namespace

std::int64_t determinant(const FiringConditionMatrix& f)
{
    check_square(f);
    return bareiss_determinant(widen(f));
}

WeightVector critical_weights(const FiringConditionMatrix& f, double threshold)
{
    check_square(f);
    for (const auto& row : f.rows)
        for (auto x : row)
            if (x < 0)
                throw InvalidInput("firing conditions are non-negative spike counts");
    if (!(threshold > 0.0))
        throw InvalidInput("threshold must be positive");

    const auto base = widen(f);
    const std::int64_t det = bareiss_determinant(base);
    if (det == 0)
        throw SingularSystem("firing-condition matrix is singular");

    // Cramer's rule on integers: w_i = tau * det(F with column i = 1) / det(F).
    const std::size_t n = f.size();
    WeightVector w(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        auto m = base;
        for (std::size_t r = 0; r < n; ++r)
            m[r][i] = 1;
        const std::int64_t det_i = bareiss_determinant(std::move(m));
        w[i] = threshold * (static_cast<double>(det_i) / static_cast<double>(det));
    }
    return w;
}

std::vector<double> harmonic_boundaries(double threshold, std::uint32_t f_max)
{
    std::vector<double> out;
    out.reserve(f_max);
    for (std::uint32_t f = 1; f <= f_max; ++f)
        out.push_back(threshold / static_cast<double>(f));
    return out;
}

std::vector<Hyperplane> enumerate_hyperplanes(std::size_t synapses, std::uint32_t max_spikes, double threshold)
{
    if (synapses == 0 || max_spikes == 0)
        throw InvalidInput("need at least one synapse and one spike");

    std::vector<Hyperplane> out;
    std::vector<std::uint32_t> counts(synapses, 0);
    // Odometer over {0..max}^s, least significant digit first.
    while (true)
    {
        std::size_t d = 0;
        while (d < synapses && counts[d] == max_spikes)
            counts[d++] = 0;
        if (d == synapses)
            break;
        ++counts[d];
        out.push_back({counts, threshold});
    }

    auto total = [](const Hyperplane& h) {
        std::uint64_t s = 0;
        for (auto c : h.normal)
            s += c;
        return s;
    };
    std::stable_sort(out.begin(), out.end(), [&](const Hyperplane& a, const Hyperplane& b) {
        const auto ta = total(a), tb = total(b);
        if (ta != tb)
            return ta < tb;
        return std::lexicographical_compare(b.normal.begin(), b.normal.end(), a.normal.begin(), a.normal.end());
    });
    return out;
}

ProbeBattery ProbeBattery::generate(std::size_t count, std::size_t synapses, std::uint32_t min_spikes,
                                    std::uint32_t max_spikes, double window, std::uint64_t seed)
{
    if (min_spikes > max_spikes || max_spikes == 0)
        throw InvalidInput("probe spike range is empty");
    if (!(window > 0.0))
        throw InvalidInput("probe window must be positive");

    ProbeBattery battery;
    battery.seed = seed;
    battery.window = window;
    battery.max_spikes = max_spikes;
    battery.probes.reserve(count);
    for (std::size_t p = 0; p < count; ++p)
    {
        Rng rng = make_rng(seed, {p});
        std::vector<std::vector<double>> times(synapses);
        for (std::size_t s = 0; s < synapses; ++s)
        {
            const auto n = min_spikes + static_cast<std::uint32_t>(rng() % (max_spikes - min_spikes + 1));
            auto& ts = times[s];
            while (ts.size() < n)
            {
                ts.clear();
                for (std::uint32_t k = 0; k < n; ++k)
                    ts.push_back(uniform01(rng) * window);
                std::sort(ts.begin(), ts.end());
                ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
            }
        }
        battery.probes.emplace_back(std::move(times));
    }
    return battery;
}

// --- BoundaryMap ---

BoundaryMap::BoundaryMap(std::vector<double> axis1, std::vector<double> axis2, std::size_t probe_count)
    : axis1_(std::move(axis1)), axis2_(std::move(axis2)), probes_(probe_count),
      words_(std::max<std::size_t>(1, (probe_count + 63) / 64)),
      bits_(axis1_.size() * axis2_.size() * words_, 0), boundary_(axis1_.size() * axis2_.size(), 0)
{
}

bool BoundaryMap::fired(std::size_t i, std::size_t j, std::size_t probe) const
{
    const std::size_t cell = i * axis2_.size() + j;
    return (bits_.at(cell * words_ + probe / 64) >> (probe % 64)) & 1U;
}

void BoundaryMap::set_fired(std::size_t i, std::size_t j, std::size_t probe)
{
    const std::size_t cell = i * axis2_.size() + j;
    bits_.at(cell * words_ + probe / 64) |= std::uint64_t{1} << (probe % 64);
}

bool BoundaryMap::same_signature(std::size_t i1, std::size_t j1, std::size_t i2, std::size_t j2) const
{
    const auto a = (i1 * axis2_.size() + j1) * words_;
    const auto b = (i2 * axis2_.size() + j2) * words_;
    return std::equal(bits_.begin() + a, bits_.begin() + a + words_, bits_.begin() + b);
}

std::string BoundaryMap::signature_hex(std::size_t i, std::size_t j) const
{
    static constexpr char digits[] = "0123456789abcdef";
    const std::size_t nibbles = std::max<std::size_t>(1, (probes_ + 3) / 4);
    std::string out(nibbles, '0');
    const std::size_t base = (i * axis2_.size() + j) * words_;
    for (std::size_t k = 0; k < nibbles; ++k)
    {
        const std::size_t bit = 4 * k;
        const auto nibble = (bits_[base + bit / 64] >> (bit % 64)) & 0xFU;
        out[nibbles - 1 - k] = digits[nibble];
    }
    return out;
}

std::size_t BoundaryMap::boundary_count() const noexcept
{
    return static_cast<std::size_t>(std::count(boundary_.begin(), boundary_.end(), std::uint8_t{1}));
}

void BoundaryMap::flag_boundaries()
{
    const std::size_t n1 = axis1_.size(), n2 = axis2_.size();
    std::fill(boundary_.begin(), boundary_.end(), 0);
    for (std::size_t i = 0; i < n1; ++i)
    {
        for (std::size_t j = 0; j < n2; ++j)
        {
            if (i + 1 < n1 && !same_signature(i, j, i + 1, j))
                boundary_[i * n2 + j] = boundary_[(i + 1) * n2 + j] = 1;
            if (j + 1 < n2 && !same_signature(i, j, i, j + 1))
                boundary_[i * n2 + j] = boundary_[i * n2 + j + 1] = 1;
        }
    }
}

void BoundaryMap::write_csv(std::ostream& os) const
{
    os << "w1,w2,signature,boundary\n";
    char buf[64];
    for (std::size_t i = 0; i < axis1_.size(); ++i)
    {
        for (std::size_t j = 0; j < axis2_.size(); ++j)
        {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,", axis1_[i], axis2_[j]);
            os << buf << signature_hex(i, j) << ',' << (boundary(i, j) ? 1 : 0) << '\n';
        }
    }
}

// --- empirical mapping ---

namespace {

// Exact event-driven integration of a deterministic (possibly leaky) neuron
// for one probe across a row of lanes; sets `fired_any` per lane.
void deterministic_row(const NeuronParams& params, std::span<const double> lane_weights, std::size_t lanes,
                       const SpikeTrain& probe, std::vector<std::uint8_t>& fired_any)
{
    const auto& k = simd::active();
    std::vector<double> v(lanes, 0.0);
    std::vector<double> zero(lanes, 0.0);
    std::vector<double> thresholds(lanes, params.threshold);
    std::vector<std::uint8_t> fired(lanes, 0);
    fired_any.assign(lanes, 0);

    const auto events = probe.events();
    const double inv_c = 1.0 / params.capacitance;
    double t_prev = events.empty() ? 0.0 : events.front().time;
    for (std::size_t e = 0; e < events.size();)
    {
        const double t = events[e].time;
        if (params.leak > 0.0)
            k.leak_accumulate(v.data(), zero.data(), std::exp(-params.leak / params.capacitance * (t - t_prev)),
                              lanes);
        for (; e < events.size() && events[e].time == t; ++e)
            k.add_scaled(v.data(), lane_weights.data() + events[e].synapse * lanes, inv_c, lanes);
        k.threshold_reset(v.data(), thresholds.data(), fired.data(), lanes);
        for (std::size_t j = 0; j < lanes; ++j)
            fired_any[j] |= fired[j];
        t_prev = t;
    }
}

} // namespace

BoundaryMap map_behavior_boundaries(const NeuronParams& params, const GridSpec& grid, const ProbeBattery& battery,
                                    std::uint64_t seed, const BoundaryMapOptions& options)
{
    params.validate();
    if (params.escape_sigma > 0.0)
        throw InvalidInput("boundary mapping runs continuous-time neurons");
    if (grid.n1 == 0 || grid.n2 == 0)
        throw InvalidInput("grid must have at least one cell per axis");
    if (!(grid.max_w1 > 0.0) || !(grid.max_w2 > 0.0))
        throw InvalidInput("grid extent must be positive");
    if (grid.max_w1 > params.threshold || grid.max_w2 > params.threshold)
        throw InvalidInput("grid exceeds the neuron threshold");
    for (const auto& probe : battery.probes)
        if (probe.synapse_count() != 2)
            throw InvalidInput("boundary mapping needs two-synapse probes");

    std::vector<double> axis1(grid.n1), axis2(grid.n2);
    for (std::size_t i = 0; i < grid.n1; ++i)
        axis1[i] = grid.max_w1 * static_cast<double>(i + 1) / static_cast<double>(grid.n1);
    for (std::size_t j = 0; j < grid.n2; ++j)
        axis2[j] = grid.max_w2 * static_cast<double>(j + 1) / static_cast<double>(grid.n2);

    BoundaryMap map(axis1, axis2, battery.probes.size());
    const std::size_t lanes = grid.n2;

    parallel_for(grid.n1, options.jobs, [&](std::size_t i) {
        std::vector<double> lane_weights(2 * lanes);
        std::fill(lane_weights.begin(), lane_weights.begin() + lanes, axis1[i]);
        std::copy(axis2.begin(), axis2.end(), lane_weights.begin() + lanes);

        std::vector<std::uint8_t> fired_any;
        std::vector<std::uint64_t> seeds(lanes);
        for (std::size_t p = 0; p < battery.probes.size(); ++p)
        {
            const auto& probe = battery.probes[p];
            if (params.noise_sigma > 0.0)
            {
                for (std::size_t j = 0; j < lanes; ++j)
                    seeds[j] = derive_seed(seed, {i * grid.n2 + j, p});
                const double horizon = std::max(battery.window, probe.last_time());
                const auto outcome = simulate_sde_lanes(params, lane_weights, probe, options.dt, horizon, seeds);
                fired_any.assign(lanes, 0);
                for (std::size_t j = 0; j < lanes; ++j)
                    fired_any[j] = outcome[j].spike_count > 0;
            }
            else
            {
                deterministic_row(params, lane_weights, lanes, probe, fired_any);
            }
            for (std::size_t j = 0; j < lanes; ++j)
                if (fired_any[j])
                    map.set_fired(i, j, p);
        }
    });

    map.flag_boundaries();
    return map;
}

std::vector<double> boundary_plane_distances(const BoundaryMap& map, const std::vector<Hyperplane>& planes)
{
    const auto& a1 = map.axis1();
    const auto& a2 = map.axis2();
    if (a1.empty() || a2.empty())
        return {};
    // Cell pitch; the axes are regular and start one pitch above zero.
    const double h1 = a1.front();
    const double h2 = a2.front();

    std::vector<double> out;
    for (std::size_t i = 0; i < a1.size(); ++i)
    {
        for (std::size_t j = 0; j < a2.size(); ++j)
        {
            if (!map.boundary(i, j))
                continue;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& plane : planes)
            {
                if (plane.normal.size() != 2)
                    throw InvalidInput("boundary maps are two-dimensional");
                // In cell coordinates x = w / h the plane reads (f1 h1) x1 + (f2 h2) x2 = tau.
                const double c1 = plane.normal[0] * h1;
                const double c2 = plane.normal[1] * h2;
                const double d = std::abs(c1 * (a1[i] / h1) + c2 * (a2[j] / h2) - plane.offset) / std::hypot(c1, c2);
                best = std::min(best, d);
            }
            out.push_back(best);
        }
    }
    return out;
}

} // namespace nsnn

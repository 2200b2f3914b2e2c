#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "nsnn/error.hpp"
#include "nsnn/weight_space.hpp"

using namespace nsnn;

namespace {

// Fire/no-fire bits of a two-synapse perfect neuron over a battery, computed
// by the event-driven reference integrator.
std::vector<bool> perfect_signature(double w1, double w2, const ProbeBattery& battery, double tau)
{
    const std::vector<double> w{w1, w2};
    std::vector<bool> sig;
    for (const auto& p : battery.probes)
        sig.push_back(!integrate_perfect(w, p, tau).spike_times.empty());
    return sig;
}

double side(const Hyperplane& h, double w1, double w2)
{
    return h.normal[0] * w1 + h.normal[1] * w2 - h.offset;
}

} // namespace

TEST(CriticalWeights, Examples)
{
    const auto w = critical_weights({{{2, 0}, {1, 2}}}, 1.0);
    ASSERT_EQ(w.size(), 2u);
    EXPECT_DOUBLE_EQ(w[0], 0.5);
    EXPECT_DOUBLE_EQ(w[1], 0.25);

    const auto ones = critical_weights({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, 1.0);
    EXPECT_EQ(ones, WeightVector({1.0, 1.0, 1.0}));

    EXPECT_THROW(critical_weights({{{1, 1}, {1, 1}}}, 1.0), SingularSystem);
    EXPECT_THROW(critical_weights({{{1, 1}, {1}}}, 1.0), InvalidInput);
    EXPECT_THROW(critical_weights({{{1, 0, 2}, {0, 1, 1}}}, 1.0), InvalidInput);
}

TEST(CriticalWeights, RoundTripOnRandomInvertibleMatrices)
{
    Rng rng(77);
    int solved = 0;
    for (int trial = 0; trial < 2000; ++trial)
    {
        const std::size_t s = 1 + rng() % 5;
        FiringConditionMatrix f;
        f.rows.assign(s, std::vector<std::int64_t>(s));
        for (auto& row : f.rows)
            for (auto& x : row)
                x = static_cast<std::int64_t>(rng() % 6);
        if (determinant(f) == 0)
        {
            EXPECT_THROW(critical_weights(f, 50.0), SingularSystem);
            continue;
        }
        const auto w = critical_weights(f, 50.0);
        for (const auto& row : f.rows)
        {
            double sum = 0.0;
            for (std::size_t i = 0; i < s; ++i)
                sum += row[i] * w[i];
            EXPECT_NEAR(sum, 50.0, 50.0 * 1e-10);
        }
        ++solved;
    }
    EXPECT_GT(solved, 1000);
}

TEST(Determinant, ExactIntegers)
{
    EXPECT_EQ(determinant({{{2, 0}, {1, 2}}}), 4);
    EXPECT_EQ(determinant({{{0, 1}, {1, 0}}}), -1);
    EXPECT_EQ(determinant({{{1, 2, 3}, {4, 5, 6}, {7, 8, 10}}}), -3);
}

TEST(HarmonicBoundaries, Examples)
{
    const auto a = harmonic_boundaries(1.0, 3);
    ASSERT_EQ(a.size(), 3u);
    EXPECT_DOUBLE_EQ(a[0], 1.0);
    EXPECT_DOUBLE_EQ(a[1], 0.5);
    EXPECT_DOUBLE_EQ(a[2], 1.0 / 3.0);
    EXPECT_EQ(harmonic_boundaries(50.0, 1), std::vector<double>({50.0}));
    const auto b = harmonic_boundaries(50.0, 5);
    const std::vector<double> expected{50, 25, 50.0 / 3, 12.5, 10};
    for (std::size_t i = 0; i < 5; ++i)
        EXPECT_DOUBLE_EQ(b[i], expected[i]);
}

TEST(EnumerateHyperplanes, Examples)
{
    const auto one = enumerate_hyperplanes(1, 3, 1.0);
    ASSERT_EQ(one.size(), 3u);
    const auto harmonic = harmonic_boundaries(1.0, 3);
    for (std::size_t f = 0; f < 3; ++f)
    {
        EXPECT_EQ(one[f].normal, std::vector<std::uint32_t>({static_cast<std::uint32_t>(f + 1)}));
        // The axis crossing of each s=1 plane is a harmonic boundary.
        EXPECT_DOUBLE_EQ(one[f].offset / one[f].normal[0], harmonic[f]);
    }

    const auto two = enumerate_hyperplanes(2, 1, 1.0);
    ASSERT_EQ(two.size(), 3u);
    EXPECT_EQ(two[0].normal, std::vector<std::uint32_t>({1, 0}));
    EXPECT_EQ(two[1].normal, std::vector<std::uint32_t>({0, 1}));
    EXPECT_EQ(two[2].normal, std::vector<std::uint32_t>({1, 1}));

    const auto eight = enumerate_hyperplanes(2, 2, 1.0);
    EXPECT_EQ(eight.size(), 8u);
    std::set<std::vector<std::uint32_t>> unique;
    for (const auto& h : eight)
        unique.insert(h.normal);
    EXPECT_EQ(unique.size(), 8u);
    EXPECT_EQ(unique.count({0, 0}), 0u);
    // Multiples are distinct conditions and both kept.
    EXPECT_EQ(unique.count({1, 1}) + unique.count({2, 2}), 2u);
}

TEST(ProbeBattery, FixedBySeedAndWithinRange)
{
    const auto a = ProbeBattery::generate(16, 2, 1, 8, 200.0, 5);
    const auto b = ProbeBattery::generate(16, 2, 1, 8, 200.0, 5);
    const auto c = ProbeBattery::generate(16, 2, 1, 8, 200.0, 6);
    EXPECT_EQ(a.probes, b.probes);
    EXPECT_NE(a.probes, c.probes);
    for (const auto& p : a.probes)
        for (std::size_t s = 0; s < 2; ++s)
        {
            EXPECT_GE(p.count(s), 1u);
            EXPECT_LE(p.count(s), 8u);
            for (double t : p.times(s))
            {
                EXPECT_GE(t, 0.0);
                EXPECT_LT(t, 200.0);
            }
        }
}

TEST(BoundaryMap, SingleSpikeProbeOnlyBoundaryAtThreshold)
{
    ProbeBattery battery;
    battery.probes.push_back(SpikeTrain({{10.0}, {}}));
    battery.max_spikes = 1;
    NeuronParams p;
    p.threshold = 50.0;
    const GridSpec grid{20, 5, 50.0, 50.0};
    const auto map = map_behavior_boundaries(p, grid, battery, 1);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = 0; j < 5; ++j)
        {
            EXPECT_EQ(map.fired(i, j, 0), i == 19);
            EXPECT_EQ(map.boundary(i, j), i >= 18) << i << "," << j;
        }
}

TEST(BoundaryMap, FlagsAreSymmetricAndExplained)
{
    NeuronParams p;
    p.threshold = 50.0;
    const auto battery = ProbeBattery::generate(16, 2, 1, 4, 200.0, 3);
    const auto map = map_behavior_boundaries(p, {30, 30, 50.0, 50.0}, battery, 1);
    ASSERT_GT(map.boundary_count(), 0u);
    for (std::size_t i = 0; i < 30; ++i)
        for (std::size_t j = 0; j < 30; ++j)
        {
            bool differs = false;
            auto check = [&](std::size_t a, std::size_t b) {
                if (!map.same_signature(i, j, a, b))
                {
                    differs = true;
                    EXPECT_TRUE(map.boundary(a, b));
                }
            };
            if (i > 0)
                check(i - 1, j);
            if (i + 1 < 30)
                check(i + 1, j);
            if (j > 0)
                check(i, j - 1);
            if (j + 1 < 30)
                check(i, j + 1);
            EXPECT_EQ(map.boundary(i, j), differs);
        }
}

TEST(BoundaryMap, MatchesReferenceIntegratorCellByCell)
{
    NeuronParams p;
    p.threshold = 50.0;
    const auto battery = ProbeBattery::generate(12, 2, 1, 6, 200.0, 8);
    const auto map = map_behavior_boundaries(p, {25, 25, 50.0, 50.0}, battery, 1);
    for (std::size_t i = 0; i < 25; ++i)
        for (std::size_t j = 0; j < 25; ++j)
        {
            const auto sig = perfect_signature(map.axis1()[i], map.axis2()[j], battery, 50.0);
            for (std::size_t k = 0; k < sig.size(); ++k)
                EXPECT_EQ(map.fired(i, j, k), sig[k]);
        }
}

TEST(BoundaryMap, ConstantInsidePolytopes)
{
    const auto battery = ProbeBattery::generate(32, 2, 1, 5, 200.0, 21);
    const auto planes = enumerate_hyperplanes(2, 5, 50.0);
    Rng rng(4);
    int tested = 0;
    for (int trial = 0; trial < 4000 && tested < 500; ++trial)
    {
        const double a1 = 50.0 * uniform01(rng), a2 = 50.0 * uniform01(rng);
        const double b1 = std::clamp(a1 + 2.0 * (uniform01(rng) - 0.5), 0.0, 50.0);
        const double b2 = std::clamp(a2 + 2.0 * (uniform01(rng) - 0.5), 0.0, 50.0);
        const bool crosses = std::any_of(planes.begin(), planes.end(), [&](const Hyperplane& h) {
            const double sa = side(h, a1, a2), sb = side(h, b1, b2);
            return sa == 0.0 || sb == 0.0 || (sa < 0) != (sb < 0);
        });
        if (crosses)
            continue;
        ++tested;
        EXPECT_EQ(perfect_signature(a1, a2, battery, 50.0), perfect_signature(b1, b2, battery, 50.0));
    }
    EXPECT_GE(tested, 100);
}

TEST(BoundaryMap, ChangesAcrossEveryPlane)
{
    const double tau = 50.0;
    for (const auto& h : enumerate_hyperplanes(2, 3, tau))
    {
        // A probe realizing the condition: f1 spikes on synapse 1, then f2 on synapse 2.
        SpikeTrain probe(2);
        for (std::uint32_t k = 0; k < h.normal[0]; ++k)
            probe.add(0, 1.0 + k);
        for (std::uint32_t k = 0; k < h.normal[1]; ++k)
            probe.add(1, 10.0 + k);
        ProbeBattery battery;
        battery.probes.push_back(probe);

        // Foot of the perpendicular from the origin, nudged to either side.
        const double n1 = h.normal[0], n2 = h.normal[1];
        const double scale = tau / (n1 * n1 + n2 * n2);
        const auto below = perfect_signature(n1 * scale * 0.999, n2 * scale * 0.999, battery, tau);
        const auto above = perfect_signature(n1 * scale * 1.001, n2 * scale * 1.001, battery, tau);
        EXPECT_NE(below, above) << "plane " << h.normal[0] << "," << h.normal[1];
    }
}

TEST(BoundaryMap, NoisyNeuronNearBoundaryIsNonDeterministic)
{
    NeuronParams p;
    p.threshold = 50.0;
    p.noise_sigma = 5.0;
    const SpikeTrain probe({{10.0}, {20.0}});
    std::set<std::size_t> outcomes;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
    {
        const std::vector<double> w{24.0, 25.0};
        outcomes.insert(simulate_sde(p, w, probe, 0.5, 200.0, seed).spike_times.size());
    }
    EXPECT_GE(outcomes.size(), 2u);
}

TEST(BoundaryMap, ScheduleIndependent)
{
    NeuronParams p;
    p.threshold = 50.0;
    p.noise_sigma = 5.0;
    const auto battery = ProbeBattery::generate(8, 2, 1, 4, 50.0, 2);
    const GridSpec grid{12, 12, 50.0, 50.0};
    const auto a = map_behavior_boundaries(p, grid, battery, 9, {0.5, 1});
    const auto b = map_behavior_boundaries(p, grid, battery, 9, {0.5, 3});
    std::ostringstream sa, sb;
    a.write_csv(sa);
    b.write_csv(sb);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(BoundaryMap, CsvFormat)
{
    ProbeBattery battery;
    battery.probes.push_back(SpikeTrain({{1.0}, {2.0}}));
    NeuronParams p;
    p.threshold = 2.0;
    const auto map = map_behavior_boundaries(p, {2, 2, 2.0, 2.0}, battery, 1);
    std::ostringstream os;
    map.write_csv(os);
    EXPECT_EQ(os.str(), "w1,w2,signature,boundary\n1,1,1,0\n1,2,1,0\n2,1,1,0\n2,2,1,0\n");
}

TEST(BoundaryMap, RejectsGridBeyondThreshold)
{
    NeuronParams p;
    p.threshold = 50.0;
    const auto battery = ProbeBattery::generate(2, 2, 1, 2, 10.0, 1);
    EXPECT_THROW(map_behavior_boundaries(p, {10, 10, 60.0, 50.0}, battery, 1), InvalidInput);
    EXPECT_THROW(map_behavior_boundaries(p, {10, 10, 50.0, 50.1}, battery, 1), InvalidInput);
}

TEST(BoundaryPlaneDistances, PerpendicularInCellUnits)
{
    BoundaryMap map({1, 2, 3, 4}, {1, 2, 3, 4}, 1);
    map.set_fired(2, 0, 0);
    map.flag_boundaries();
    // Plane w1 = 2.5 lies half a cell from both flagged columns.
    const auto d = boundary_plane_distances(map, {{{1, 0}, 2.5}});
    ASSERT_FALSE(d.empty());
    for (double x : d)
        EXPECT_LE(x, 1.5);
    EXPECT_DOUBLE_EQ(*std::min_element(d.begin(), d.end()), 0.5);
}

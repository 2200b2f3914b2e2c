#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "nsnn/error.hpp"
#include "nsnn/reram.hpp"
#include "support/controllers.hpp"

using namespace nsnn;
using nsnn::testing::symmetric_controller;

namespace {

std::pair<double, double> mean_sd(const std::vector<double>& v)
{
    double m = 0;
    for (double x : v)
        m += x;
    m /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v)
        ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

} // namespace

TEST(ResistanceTable, Defaults)
{
    const auto t = ResistanceLevelTable::defaults();
    ASSERT_EQ(t.size(), 4);
    const double means[] = {2790, 5610, 8380, 11300}, sds[] = {41.3, 425, 479, 617},
                 targets[] = {2750, 5000, 7750, 10500};
    for (int l = 1; l <= 4; ++l)
    {
        EXPECT_EQ(t.level(l).mean_ohm, means[l - 1]);
        EXPECT_EQ(t.level(l).sd_ohm, sds[l - 1]);
        EXPECT_EQ(t.level(l).target_ohm, targets[l - 1]);
    }
    EXPECT_THROW(t.level(0), InvalidInput);
    EXPECT_THROW(t.level(5), InvalidInput);
    EXPECT_THROW(ResistanceLevelTable({{1, 100, 1}}), InvalidInput);
    EXPECT_THROW(ResistanceLevelTable({{1, 200, 1}, {1, 100, 1}}), InvalidInput);
    EXPECT_THROW(ResistanceLevelTable({{1, 100, 0}, {1, 200, 1}}), InvalidInput);
}

TEST(ResistanceTable, LoadCsv)
{
    std::istringstream in("# measured\nlevel,target_ohm,mean_ohm,sd_ohm\n1,1000,1100,10\n2,2000,2100,20\n"
                          "3,3000,3300,30\n");
    const auto t = ResistanceLevelTable::load_csv(in);
    ASSERT_EQ(t.size(), 3);
    EXPECT_EQ(t.level(2).mean_ohm, 2100);
    EXPECT_EQ(t.level(3).sd_ohm, 30);

    std::istringstream bad_header("lvl,mean\n1,2\n");
    EXPECT_THROW(ResistanceLevelTable::load_csv(bad_header), ParseError);
    std::istringstream bad_number("level,target_ohm,mean_ohm,sd_ohm\n1,1000,abc,10\n2,1,2,3\n");
    EXPECT_THROW(ResistanceLevelTable::load_csv(bad_number), ParseError);
    std::istringstream order("level,target_ohm,mean_ohm,sd_ohm\n2,1000,1100,10\n1,2000,2100,20\n");
    EXPECT_THROW(ResistanceLevelTable::load_csv(order), ParseError);
}

TEST(Representations, CountsAndAntisymmetry)
{
    for (int n = 2; n <= 6; ++n)
    {
        std::size_t total = 0;
        std::set<int> levels;
        for (int k = -(n - 1); k <= n - 1; ++k)
        {
            const auto reps = representations_for_level(k, n);
            EXPECT_EQ(reps.size(), static_cast<std::size_t>(n - std::abs(k)));
            total += reps.size();
            levels.insert(k);
            for (const auto& r : reps)
            {
                EXPECT_EQ(r.minus - r.plus, k);
                EXPECT_GE(r.plus, 1);
                EXPECT_LE(r.minus, n);
            }
            auto mirrored = representations_for_level(-k, n);
            for (auto& r : mirrored)
                std::swap(r.plus, r.minus);
            std::sort(mirrored.begin(), mirrored.end(),
                      [](auto a, auto b) { return std::pair(a.plus, a.minus) < std::pair(b.plus, b.minus); });
            auto sorted = reps;
            std::sort(sorted.begin(), sorted.end(),
                      [](auto a, auto b) { return std::pair(a.plus, a.minus) < std::pair(b.plus, b.minus); });
            EXPECT_EQ(sorted, mirrored);
        }
        EXPECT_EQ(levels.size(), static_cast<std::size_t>(2 * n - 1));
        EXPECT_EQ(total, static_cast<std::size_t>(n * n));
        EXPECT_THROW(representations_for_level(n, n), InvalidInput);
        EXPECT_THROW(representations_for_level(-n, n), InvalidInput);
    }
    const auto zero = representations_for_level(0, 4);
    EXPECT_EQ(zero, (std::vector<TwinRepresentation>{{1, 1}, {2, 2}, {3, 3}, {4, 4}}));
    EXPECT_EQ(representations_for_level(3, 4), (std::vector<TwinRepresentation>{{1, 4}}));
}

TEST(DeviceSampling, ZeroVariabilityReturnsMean)
{
    const auto t = ResistanceLevelTable::defaults();
    Rng rng(1);
    EXPECT_EQ(sample_device_resistance(1, t, 0.0, rng), 2790.0);
    EXPECT_EQ(sample_device_resistance(4, t, 0.0, rng), 11300.0);
    EXPECT_THROW(sample_device_resistance(1, t, 1.5, rng), InvalidInput);
    EXPECT_THROW(sample_device_resistance(1, t, -0.1, rng), InvalidInput);
}

TEST(DeviceSampling, MomentsMatchTable)
{
    const auto t = ResistanceLevelTable::defaults();
    Rng rng(2);
    for (int l = 1; l <= 4; ++l)
    {
        std::vector<double> full, half;
        for (int i = 0; i < 10000; ++i)
        {
            full.push_back(sample_device_resistance(l, t, 1.0, rng));
            half.push_back(sample_device_resistance(l, t, 0.5, rng));
        }
        const auto [m, sd] = mean_sd(full);
        EXPECT_NEAR(m, t.level(l).mean_ohm, 0.02 * t.level(l).mean_ohm);
        EXPECT_NEAR(sd, t.level(l).sd_ohm, 0.10 * t.level(l).sd_ohm);
        const auto [mh, sdh] = mean_sd(half);
        EXPECT_NEAR(sdh / sd, 0.5, 0.03);
        for (double r : full)
        {
            EXPECT_LE(std::abs(r - t.level(l).mean_ohm), 4 * t.level(l).sd_ohm);
            EXPECT_GE(r, 1.0);
        }
    }
}

TEST(WeightSampling, IdealValues)
{
    const auto t = ResistanceLevelTable::defaults();
    Rng rng(3);
    EXPECT_DOUBLE_EQ(sample_weight(3, t, 0.0, rng), 1.0);
    EXPECT_DOUBLE_EQ(sample_weight(-3, t, 0.0, rng), -1.0);
    for (int i = 0; i < 50; ++i)
        EXPECT_EQ(sample_weight(0, t, 0.0, rng), 0.0);
    // (1/R2 - 1/R3) / (1/R1 - 1/R4) with the table means.
    EXPECT_NEAR(ideal_weight({2, 3}, t), 0.21828604683288527, 1e-14);
    EXPECT_NEAR(ideal_weight({1, 2}, t), 0.6674751943294143, 1e-14);
    EXPECT_NEAR(ideal_weight({2, 4}, t), 0.3325248056705857, 1e-14);
    EXPECT_NEAR(ideal_weight({3, 2}, t), -0.21828604683288527, 1e-14);

    // Equal-probability representation choice at level +1.
    std::map<std::pair<int, int>, int> seen;
    for (int i = 0; i < 3000; ++i)
    {
        const auto d = sample_weight_draw(1, t, 0.0, rng);
        ++seen[{d.rep.plus, d.rep.minus}];
        EXPECT_DOUBLE_EQ(d.value, ideal_weight(d.rep, t));
    }
    ASSERT_EQ(seen.size(), 3u);
    for (const auto& [rep, count] : seen)
        EXPECT_NEAR(count, 1000, 120);
}

TEST(WeightSampling, Distributions)
{
    const auto t = ResistanceLevelTable::defaults();
    Rng rng(4);
    std::vector<double> means;
    for (int k = -3; k <= 3; ++k)
    {
        const auto ideal = weight_value_distribution(k, t, 0.0, 100, rng);
        if (std::abs(k) == 3 || k == 0)
            EXPECT_EQ(ideal.sd, 0.0);
        const auto d = weight_value_distribution(k, t, 1.0, 1000, rng);
        EXPECT_EQ(d.values.size(), 1000u);
        EXPECT_EQ(d.lambda, 1.0);
        std::size_t binned = 0;
        for (auto c : d.histogram)
            binned += c;
        EXPECT_EQ(binned, 1000u);
        EXPECT_EQ(d.histogram.size(), 60u);
        means.push_back(d.mean);
    }
    EXPECT_TRUE(std::is_sorted(means.begin(), means.end()));
    for (int k = 1; k <= 3; ++k)
        EXPECT_NEAR(means[3 + k], -means[3 - k], 0.03);
    EXPECT_THROW(weight_value_distribution(1, t, 1.0, 0, rng), InvalidInput);
}

TEST(Quantization, Rounding)
{
    const QuantizationScheme s{0.5, 3};
    EXPECT_EQ(s.level_of(1.0), 2);
    EXPECT_EQ(s.level_of(1.2), 2);
    EXPECT_EQ(s.level_of(1.25), 3);
    EXPECT_EQ(s.level_of(-1.25), -3);
    EXPECT_EQ(s.level_of(0.25), 1);
    EXPECT_EQ(s.level_of(-0.2), 0);
    EXPECT_EQ(s.level_of(9.0), 3);
    EXPECT_EQ(s.level_of(-9.0), -3);

    auto g = symmetric_controller(NeuronKind::perfect);
    g.synapses[0].weight = 2.4 * s.scale;
    g.synapses[1].weight = 2.0 * s.scale;
    const auto q = quantize_network(g, s);
    EXPECT_EQ(q.synapses[0].weight, 2.0 * s.scale);
    EXPECT_EQ(q.synapses[1].weight, 2.0 * s.scale);
    for (const auto& syn : q.synapses)
    {
        const double lv = syn.weight / s.scale;
        EXPECT_EQ(lv, std::round(lv));
        EXPECT_LE(std::abs(lv), 3.0);
    }
    EXPECT_EQ(quantize_network(q, s), q);
}

TEST(Quantization, DefaultScheme)
{
    auto g = symmetric_controller(NeuronKind::perfect);
    double max_w = 0;
    for (const auto& s : g.synapses)
        max_w = std::max(max_w, std::abs(s.weight));
    const auto scheme = default_scheme(g);
    EXPECT_DOUBLE_EQ(scheme.scale, max_w / 3);
    EXPECT_EQ(scheme.max_level, 3);
    const auto q = quantize_network(g, scheme);
    EXPECT_EQ(quantize_network(q, default_scheme(q)), q);

    for (auto& s : g.synapses)
        s.weight = 0.0;
    EXPECT_EQ(default_scheme(g).scale, 1.0);
    EXPECT_EQ(quantize_network(g, default_scheme(g)), g);
}

TEST(NetworkSampling, ZeroVariabilityReproducesQuantizedNetwork)
{
    const auto g = symmetric_controller(NeuronKind::perfect);
    const auto scheme = default_scheme(g);
    const auto q = quantize_network(g, scheme);
    const auto t = ResistanceLevelTable::defaults();
    Rng rng(5);
    EXPECT_EQ(sample_network_weights(q, scheme, t, 0.0, rng), q);

    const auto noisy = sample_network_weights(q, scheme, t, 1.0, rng);
    EXPECT_NE(noisy, q);
    for (std::size_t k = 0; k < q.synapses.size(); ++k)
        EXPECT_NEAR(noisy.synapses[k].weight, q.synapses[k].weight, 1.5 * scheme.scale);

    EXPECT_THROW(sample_network_weights(q, {scheme.scale, 2}, t, 0.0, rng), InvalidInput);
}

TEST(Ramp, ZeroLambdaIsDeterministicAndJobsInvariant)
{
    const auto g = symmetric_controller(NeuronKind::perfect);
    const auto scheme = default_scheme(g);
    const auto q = quantize_network(g, scheme);
    TrialProtocol p{1, 1, {}};
    p.cartpole.max_cycles = 2000;
    const std::vector<double> lambdas{0.0, 0.5, 1.0};
    const auto t = ResistanceLevelTable::defaults();
    const auto r = variability_ramp(q, scheme, t, lambdas, 6, p, 7);
    ASSERT_EQ(r.fitness.size(), 3u);
    const double base = score_network(CompiledNetwork(q), p, 0);
    for (double f : r.fitness[0])
        EXPECT_EQ(f, base);
    const auto again = variability_ramp(q, scheme, t, lambdas, 6, p, 7, 4);
    EXPECT_EQ(again.fitness, r.fitness);

    std::ostringstream os;
    write_ramp_csv(os, {{0.0, 0.5}, {{10, 20}, {30, 40}}});
    EXPECT_EQ(os.str(), "lambda,sample_index,fitness\n0,0,10\n0,1,20\n0.5,0,30\n0.5,1,40\n");
}

TEST(Ramp, WeightDistributionCsv)
{
    WeightDistribution d;
    d.level = -2;
    d.lambda = 1.0;
    d.values = {-0.5, -0.25};
    std::ostringstream os;
    write_weight_distribution_csv(os, {d});
    EXPECT_EQ(os.str(), "level,lambda,sample_index,weight\n-2,1,0,-0.5\n-2,1,1,-0.25\n");
}

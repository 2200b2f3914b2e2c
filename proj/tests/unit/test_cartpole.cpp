#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "nsnn/cartpole.hpp"
#include "nsnn/error.hpp"
#include "support/controllers.hpp"

using namespace nsnn;
using nsnn::testing::symmetric_controller;

namespace {

// Accelerations from the rigid-body equations of motion written as a 2x2
// linear system in (x_acc, theta_acc), solved by Cramer's rule.
std::pair<double, double> reference_accelerations(const CartPoleState& s, double force, const CartPolePhysics& p)
{
    const double m = p.pole_mass, M = p.cart_mass, l = p.half_length;
    const double c = std::cos(s.theta), sn = std::sin(s.theta);
    // (M + m) xa + m l c ta = F + m l td^2 sn
    // c xa + (4/3) l ta = g sn
    const double a11 = M + m, a12 = m * l * c, b1 = force + m * l * s.theta_dot * s.theta_dot * sn;
    const double a21 = c, a22 = 4.0 / 3.0 * l, b2 = p.gravity * sn;
    const double det = a11 * a22 - a12 * a21;
    return {(b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det};
}

std::vector<TrajectoryRow> closed_loop(const NetworkGraph& g, CartPoleConfig cfg, const CartPoleState& start,
                                       std::uint64_t cycles)
{
    const CompiledNetwork net(g);
    std::vector<TrajectoryRow> rows;
    CartPoleEnv env(cfg, &rows);
    env.bind(net);
    Rng rng(1);
    env.reset(rng);
    env.set_state(start);
    ClockedState state(net);
    StepWorkspace ws;
    std::vector<std::uint32_t> counts(net.output_count());
    for (std::uint64_t c = 0; c < cycles && !env.failed(); ++c)
    {
        std::vector<std::size_t> ports;
        env.encode(ports);
        std::fill(counts.begin(), counts.end(), 0);
        step_network(net, state, ports, rng, counts, ws);
        env.act(counts);
    }
    return rows;
}

} // namespace

TEST(Physics, EquilibriumIsFixed)
{
    const CartPoleState s{};
    EXPECT_EQ(physics_step(s, 0.0, 0.02), s);
}

TEST(Physics, MatchesReferenceEquations)
{
    Rng rng(3);
    const CartPolePhysics p;
    for (int i = 0; i < 200; ++i)
    {
        const CartPoleState s{uniform01(rng) - 0.5, uniform01(rng) - 0.5, 0.4 * (uniform01(rng) - 0.5),
                              2 * (uniform01(rng) - 0.5)};
        const double force = (i % 3 - 1) * 10.0;
        const auto [xa, ta] = reference_accelerations(s, force, p);
        const double dt = 0.02;
        const auto n = physics_step(s, force, dt, p);
        EXPECT_NEAR(n.x_dot, s.x_dot + dt * xa, 1e-12);
        EXPECT_NEAR(n.theta_dot, s.theta_dot + dt * ta, 1e-12);
        // Semi-implicit: positions advance with the updated velocities.
        EXPECT_NEAR(n.x, s.x + dt * n.x_dot, 1e-15);
        EXPECT_NEAR(n.theta, s.theta + dt * n.theta_dot, 1e-15);
    }
}

TEST(Physics, TiltGrowsWithoutForce)
{
    CartPoleState s{0, 0, 0.01, 0};
    for (int i = 0; i < 50; ++i)
    {
        const auto n = physics_step(s, 0.0, 0.02);
        EXPECT_GT(n.theta, s.theta);
        s = n;
    }
}

TEST(Physics, OddSymmetry)
{
    Rng rng(8);
    for (int i = 0; i < 100; ++i)
    {
        const CartPoleState s{uniform01(rng) - 0.5, uniform01(rng) - 0.5, 0.2 * (uniform01(rng) - 0.5),
                              uniform01(rng) - 0.5};
        const auto a = physics_step(s, 10.0, 0.02);
        const auto b = physics_step({-s.x, -s.x_dot, -s.theta, -s.theta_dot}, -10.0, 0.02);
        EXPECT_EQ(b, (CartPoleState{-a.x, -a.x_dot, -a.theta, -a.theta_dot}));
    }
}

TEST(Encoding, Examples)
{
    const CartPoleConfig cfg;
    EXPECT_EQ(encode_inputs({}, cfg), std::vector<std::string>({"x_4", "xd_4", "th_4", "thd_4"}));
    EXPECT_EQ(encode_bins({cfg.x_limit, 0, 0, 0}, cfg)[0], 7u);
    EXPECT_EQ(encode_bins({-cfg.x_limit, 0, 0, 0}, cfg)[0], 0u);
    EXPECT_EQ(encode_inputs({0.01, 0.01, 0.001, 0.01}, cfg), encode_inputs({0.02, 0.05, 0.002, 0.03}, cfg));
}

TEST(Encoding, TotalOverStates)
{
    const CartPoleConfig cfg;
    const auto names = cartpole_input_ports(8);
    ASSERT_EQ(names.size(), 32u);
    EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), 32u);
    Rng rng(4);
    for (int i = 0; i < 1000; ++i)
    {
        const CartPoleState s{(2 * uniform01(rng) - 1) * 2.4, (2 * uniform01(rng) - 1) * 5,
                              (2 * uniform01(rng) - 1) * 0.2, (2 * uniform01(rng) - 1) * 5};
        const auto bins = encode_bins(s, cfg);
        const auto ports = encode_inputs(s, cfg);
        ASSERT_EQ(ports.size(), 4u);
        for (std::size_t v = 0; v < 4; ++v)
        {
            EXPECT_LT(bins[v], 8u);
            EXPECT_EQ(ports[v], names[v * 8 + bins[v]]);
        }
    }
}

TEST(Decoding, Votes)
{
    EXPECT_EQ(decode_action(0, 3, -1), 1);
    EXPECT_EQ(decode_action(5, 0, 1), -1);
    EXPECT_EQ(decode_action(2, 2, -1), -1);
    EXPECT_EQ(decode_action(2, 2, 1), 1);
    EXPECT_EQ(decode_action(0, 0, 1), 1);
}

TEST(Fitness, DisconnectedNetworkEqualsOpenLoopSurvival)
{
    auto g = symmetric_controller(NeuronKind::perfect);
    g.synapses.clear();
    g.synapses.push_back({true, 0, 0, 0.0, 1});
    const CompiledNetwork net(g);
    const CartPoleConfig cfg;
    const auto counts = evaluate_fitness(net, cfg, 5, 12, 13);
    for (std::size_t t = 0; t < 5; ++t)
    {
        Rng rng = make_rng(12, {t});
        auto s = initial_state(cfg, rng);
        std::uint64_t n = 0;
        while (!has_failed(s, cfg) && n < cfg.max_cycles)
        {
            s = physics_step(s, -cfg.force, cfg.dt);
            ++n;
        }
        EXPECT_EQ(counts[t], n);
    }
}

TEST(Fitness, CappedAndRepeatable)
{
    const CompiledNetwork net(symmetric_controller(NeuronKind::perfect));
    CartPoleConfig cfg;
    cfg.max_cycles = 2000;
    const auto a = evaluate_fitness(net, cfg, 6, 1, 2);
    EXPECT_EQ(a, evaluate_fitness(net, cfg, 6, 1, 2));
    for (auto f : a)
        EXPECT_LE(f, cfg.max_cycles);
}

TEST(Fitness, NonSpikingControllerBalancesFullEpisode)
{
    // Bang-bang on the sign of a linear form of the binned state, one decision
    // period late, through the same physics and encoder.
    const CartPoleConfig cfg;
    const double gains[4] = {1, 1, 3, 3};
    for (std::uint64_t t = 0; t < 5; ++t)
    {
        Rng rng = make_rng(99, {t});
        auto s = initial_state(cfg, rng);
        auto observed = s;
        int action = cfg.initial_action;
        std::uint64_t n = 0;
        for (; n < cfg.max_cycles && !has_failed(s, cfg); ++n)
        {
            const auto bins = encode_bins(observed, cfg);
            double u = 0;
            for (int v = 0; v < 4; ++v)
                u += gains[v] * (bins[v] - 3.5);
            observed = s;
            action = u > 0 ? 1 : (u < 0 ? -1 : action);
            s = physics_step(s, action * cfg.force, cfg.dt);
        }
        EXPECT_EQ(n, cfg.max_cycles) << "trial " << t;
    }
}

TEST(Fitness, MirroredNetworkGivesMirroredTrajectory)
{
    const auto g = symmetric_controller(NeuronKind::perfect);
    CartPoleConfig cfg;
    Rng rng(21);
    for (int trial = 0; trial < 5; ++trial)
    {
        const auto s = initial_state(cfg, rng);
        const auto a = closed_loop(g, cfg, s, 500);

        // Mirrored network: bin b of every variable becomes bin 7 - b and the
        // left/right outputs swap. It runs on the mirrored state with the
        // mirrored tie rule.
        auto mirrored = g;
        for (auto& syn : mirrored.synapses)
            syn.pre = (syn.pre / 8) * 8 + (7 - syn.pre % 8);
        std::swap(mirrored.outputs[0].neuron, mirrored.outputs[1].neuron);
        CartPoleConfig mcfg = cfg;
        mcfg.initial_action = -cfg.initial_action;
        const auto b = closed_loop(mirrored, mcfg, {-s.x, -s.x_dot, -s.theta, -s.theta_dot}, 500);

        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            EXPECT_EQ(b[i].state.x, -a[i].state.x);
            EXPECT_EQ(b[i].state.theta, -a[i].state.theta);
            EXPECT_EQ(b[i].action, -a[i].action);
        }
    }
}

TEST(Fitness, HandBuiltSpikingControllerBalances)
{
    const CompiledNetwork net(symmetric_controller(NeuronKind::perfect));
    const auto f = evaluate_fitness(net, {}, 5, 3, 4);
    for (auto x : f)
        EXPECT_EQ(x, 15000u);
}

TEST(Trajectory, CsvColumns)
{
    std::vector<TrajectoryRow> rows{{0, {0.5, 0, 0.25, 0}, 1}};
    std::ostringstream os;
    write_trajectory_csv(os, rows);
    EXPECT_EQ(os.str(), "cycle,x,x_dot,theta,theta_dot,action\n0,0.5,0,0.25,0,1\n");
}

TEST(Config, Validation)
{
    CartPoleConfig c;
    EXPECT_NO_THROW(c.validate());
    c.dt = 0;
    EXPECT_THROW(c.validate(), InvalidInput);
    c = {};
    c.max_cycles = 0;
    EXPECT_THROW(c.validate(), InvalidInput);
    c = {};
    c.initial_action = 0;
    EXPECT_THROW(c.validate(), InvalidInput);
}

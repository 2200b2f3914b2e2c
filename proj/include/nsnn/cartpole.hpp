#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <string>
#include <vector>

#include "nsnn/network.hpp"

namespace nsnn {

struct CartPoleState
{
    double x = 0.0;
    double x_dot = 0.0;
    double theta = 0.0;
    double theta_dot = 0.0;

    bool operator==(const CartPoleState&) const = default;
};

struct CartPolePhysics
{
    double cart_mass = 1.0;
    double pole_mass = 0.1;
    double half_length = 0.5;
    double gravity = 9.8;
};

/// Episode and encoder settings. Velocities have no failure limit; their
/// encoder range is given separately.
struct CartPoleConfig
{
    double dt = 0.02;
    std::uint64_t max_cycles = 15000;
    double force = 10.0;
    double theta_limit = 12.0 * std::numbers::pi / 180.0;
    double x_limit = 2.4;
    double x_dot_range = 1.5;
    double theta_dot_range = 1.0;
    double jitter = 0.05;        ///< initial state uniform in +-jitter of each range
    std::uint32_t bins = 8;
    int initial_action = -1;     ///< action taken on a tie before any vote
    std::uint32_t sub_cycles = 1;
    CartPolePhysics physics;

    /// Encoder range per variable (x, x_dot, theta, theta_dot).
    std::array<double, 4> ranges() const noexcept { return {x_limit, x_dot_range, theta_limit, theta_dot_range}; }
    void validate() const;
};

/// One semi-implicit Euler step of the cart-pole dynamics.
CartPoleState physics_step(const CartPoleState& s, double force, double dt, const CartPolePhysics& physics = {});

bool has_failed(const CartPoleState& s, const CartPoleConfig& config) noexcept;

/// Occupied bin per variable; values beyond the range fall in the end bins.
std::array<std::uint32_t, 4> encode_bins(const CartPoleState& s, const CartPoleConfig& config) noexcept;

/// Port names x_0.., xd_0.., th_0.., thd_0.. in variable-major order.
std::vector<std::string> cartpole_input_ports(std::uint32_t bins = 8);

/// Input ports that spike for this state, one per variable.
std::vector<std::string> encode_inputs(const CartPoleState& s, const CartPoleConfig& config);

/// +1 (push right) or -1 (push left); ties repeat `previous`.
int decode_action(std::uint32_t left_votes, std::uint32_t right_votes, int previous) noexcept;

CartPoleState initial_state(const CartPoleConfig& config, Rng& rng);

struct TrajectoryRow
{
    std::uint64_t cycle;
    CartPoleState state;
    int action;
};

/// Closed-loop pole-balancing task. Input ports missing from the network are
/// ignored; missing "left"/"right" outputs count as zero votes.
class CartPoleEnv : public Environment
{
public:
    explicit CartPoleEnv(CartPoleConfig config, std::vector<TrajectoryRow>* trajectory = nullptr);

    void bind(const CompiledNetwork& net) override;
    void reset(Rng& rng) override;
    bool failed() const override;
    void encode(std::vector<std::size_t>& ports) const override;
    void act(std::span<const std::uint32_t> output_counts) override;

    const CartPoleState& state() const noexcept { return state_; }
    void set_state(const CartPoleState& s) noexcept { state_ = s; }

private:
    CartPoleConfig config_;
    std::vector<TrajectoryRow>* trajectory_;
    std::vector<std::ptrdiff_t> port_of_bin_;
    std::ptrdiff_t left_ = -1;
    std::ptrdiff_t right_ = -1;
    CartPoleState state_;
    int action_ = -1;
    std::uint64_t cycle_ = 0;
};

/// Per-trial balancing cycles for `trials` episodes; trial t uses initial
/// state stream (env_seed, t) and neuron noise stream (net_seed, t).
std::vector<std::uint64_t> evaluate_fitness(const CompiledNetwork& net, const CartPoleConfig& config,
                                            std::size_t trials, std::uint64_t env_seed, std::uint64_t net_seed);

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows);

} // namespace nsnn

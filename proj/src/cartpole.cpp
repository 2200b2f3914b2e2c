#include "nsnn/cartpole.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "nsnn/error.hpp"

namespace nsnn {

void CartPoleConfig::validate() const
{
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw InvalidInput("cartpole dt must be positive");
    if (max_cycles == 0)
        throw InvalidInput("cartpole max_cycles must be positive");
    if (!(force > 0.0) || !(theta_limit > 0.0) || !(x_limit > 0.0) || !(x_dot_range > 0.0) ||
        !(theta_dot_range > 0.0))
        throw InvalidInput("cartpole force, limits and ranges must be positive");
    if (!(jitter >= 0.0) || jitter > 1.0)
        throw InvalidInput("cartpole jitter must lie in [0, 1]");
    if (bins < 2)
        throw InvalidInput("cartpole encoder needs at least 2 bins");
    if (initial_action != -1 && initial_action != 1)
        throw InvalidInput("cartpole initial_action must be -1 or +1");
    if (sub_cycles == 0)
        throw InvalidInput("cartpole sub_cycles must be at least 1");
}

CartPoleState physics_step(const CartPoleState& s, double force, double dt, const CartPolePhysics& p)
{
    const double total_mass = p.cart_mass + p.pole_mass;
    const double pole_ml = p.pole_mass * p.half_length;
    const double sin_t = std::sin(s.theta);
    const double cos_t = std::cos(s.theta);

    const double temp = (force + pole_ml * s.theta_dot * s.theta_dot * sin_t) / total_mass;
    const double theta_acc = (p.gravity * sin_t - cos_t * temp) /
                             (p.half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
    const double x_acc = temp - pole_ml * theta_acc * cos_t / total_mass;

    CartPoleState n;
    n.x_dot = s.x_dot + dt * x_acc;
    n.x = s.x + dt * n.x_dot;
    n.theta_dot = s.theta_dot + dt * theta_acc;
    n.theta = s.theta + dt * n.theta_dot;
    return n;
}

bool has_failed(const CartPoleState& s, const CartPoleConfig& c) noexcept
{
    return !(std::abs(s.theta) <= c.theta_limit) || !(std::abs(s.x) <= c.x_limit);
}

std::array<std::uint32_t, 4> encode_bins(const CartPoleState& s, const CartPoleConfig& c) noexcept
{
    const std::array<double, 4> v{s.x, s.x_dot, s.theta, s.theta_dot};
    const auto r = c.ranges();
    std::array<std::uint32_t, 4> out{};
    for (std::size_t i = 0; i < 4; ++i)
    {
        const double u = std::floor((v[i] / r[i] + 1.0) * 0.5 * c.bins);
        out[i] = static_cast<std::uint32_t>(std::clamp(u, 0.0, static_cast<double>(c.bins - 1)));
    }
    return out;
}

std::vector<std::string> cartpole_input_ports(std::uint32_t bins)
{
    static constexpr const char* prefix[] = {"x_", "xd_", "th_", "thd_"};
    std::vector<std::string> names;
    names.reserve(4 * bins);
    for (const char* p : prefix)
        for (std::uint32_t b = 0; b < bins; ++b)
            names.push_back(p + std::to_string(b));
    return names;
}

std::vector<std::string> encode_inputs(const CartPoleState& s, const CartPoleConfig& c)
{
    const auto names = cartpole_input_ports(c.bins);
    const auto bins = encode_bins(s, c);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < 4; ++i)
        out.push_back(names[i * c.bins + bins[i]]);
    return out;
}

int decode_action(std::uint32_t left_votes, std::uint32_t right_votes, int previous) noexcept
{
    if (right_votes > left_votes)
        return 1;
    if (left_votes > right_votes)
        return -1;
    return previous;
}

CartPoleState initial_state(const CartPoleConfig& c, Rng& rng)
{
    const auto r = c.ranges();
    std::array<double, 4> v{};
    for (std::size_t i = 0; i < 4; ++i)
        v[i] = (2.0 * uniform01(rng) - 1.0) * c.jitter * r[i];
    return {v[0], v[1], v[2], v[3]};
}

CartPoleEnv::CartPoleEnv(CartPoleConfig config, std::vector<TrajectoryRow>* trajectory)
    : config_(std::move(config)), trajectory_(trajectory)
{
    config_.validate();
    action_ = config_.initial_action;
}

void CartPoleEnv::bind(const CompiledNetwork& net)
{
    const auto names = cartpole_input_ports(config_.bins);
    port_of_bin_.resize(names.size());
    for (std::size_t i = 0; i < names.size(); ++i)
        port_of_bin_[i] = net.find_input(names[i]);
    left_ = net.find_output("left");
    right_ = net.find_output("right");
}

void CartPoleEnv::reset(Rng& rng)
{
    state_ = initial_state(config_, rng);
    action_ = config_.initial_action;
    cycle_ = 0;
}

bool CartPoleEnv::failed() const
{
    return has_failed(state_, config_);
}

void CartPoleEnv::encode(std::vector<std::size_t>& ports) const
{
    const auto bins = encode_bins(state_, config_);
    for (std::size_t i = 0; i < 4; ++i)
    {
        const auto p = port_of_bin_[i * config_.bins + bins[i]];
        if (p >= 0)
            ports.push_back(static_cast<std::size_t>(p));
    }
}

void CartPoleEnv::act(std::span<const std::uint32_t> counts)
{
    const std::uint32_t left = left_ >= 0 ? counts[static_cast<std::size_t>(left_)] : 0;
    const std::uint32_t right = right_ >= 0 ? counts[static_cast<std::size_t>(right_)] : 0;
    action_ = decode_action(left, right, action_);
    if (trajectory_)
        trajectory_->push_back({cycle_, state_, action_});
    state_ = physics_step(state_, action_ * config_.force, config_.dt, config_.physics);
    ++cycle_;
}

std::vector<std::uint64_t> evaluate_fitness(const CompiledNetwork& net, const CartPoleConfig& config,
                                            std::size_t trials, std::uint64_t env_seed, std::uint64_t net_seed)
{
    CartPoleEnv env(config);
    return run_episode(net, env, {config.max_cycles, config.sub_cycles}, trials, env_seed, net_seed);
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows)
{
    os << "cycle,x,x_dot,theta,theta_dot,action\n";
    const auto old = os.precision(17);
    for (const auto& r : rows)
        os << r.cycle << ',' << r.state.x << ',' << r.state.x_dot << ',' << r.state.theta << ','
           << r.state.theta_dot << ',' << r.action << '\n';
    os.precision(old);
}

} // namespace nsnn

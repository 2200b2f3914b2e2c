#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "nsnn/evolution.hpp"
#include "nsnn/network.hpp"
#include "nsnn/rng.hpp"

namespace nsnn {

struct ResistanceLevel
{
    double target_ohm;
    double mean_ohm;
    double sd_ohm;
};

/// Resistance distribution of each programmable device state, level 1 being
/// the lowest resistance.
class ResistanceLevelTable
{
public:
    explicit ResistanceLevelTable(std::vector<ResistanceLevel> levels);

    /// Four measured states: means 2790/5610/8380/11300 ohm.
    static ResistanceLevelTable defaults();
    /// CSV with header level,target_ohm,mean_ohm,sd_ohm; '#' lines skipped.
    static ResistanceLevelTable load_csv(std::istream& is);
    static ResistanceLevelTable load_csv(const std::filesystem::path& path);

    int size() const noexcept { return static_cast<int>(levels_.size()); }
    /// 1-based.
    const ResistanceLevel& level(int l) const;

private:
    std::vector<ResistanceLevel> levels_;
};

/// Device pair realizing a signed weight. The level index is
/// k = minus - plus, so a low-resistance `plus` device makes k positive.
struct TwinRepresentation
{
    int plus;
    int minus;

    bool operator==(const TwinRepresentation&) const = default;
};

/// All n - |k| device pairs for level k. Throws InvalidInput for |k| >= n.
std::vector<TwinRepresentation> representations_for_level(int k, int n);

/// Truncated normal draw (within 4 sd, at least 1 ohm) with sd scaled by
/// `lambda`; lambda = 0 returns the mean.
double sample_device_resistance(int level, const ResistanceLevelTable& table, double lambda, Rng& rng);

/// (G+ - G-) / (G_1 - G_n) with mean conductances; level n-1 maps to 1.
double ideal_weight(const TwinRepresentation& rep, const ResistanceLevelTable& table);

/// Normalized weight of device resistances.
double twin_weight(double r_plus, double r_minus, const ResistanceLevelTable& table);

struct WeightDraw
{
    TwinRepresentation rep;
    double value;
};

/// Picks one of level k's representations uniformly and samples both devices.
WeightDraw sample_weight_draw(int k, const ResistanceLevelTable& table, double lambda, Rng& rng);
double sample_weight(int k, const ResistanceLevelTable& table, double lambda, Rng& rng);

struct WeightDistribution
{
    int level = 0;
    double lambda = 0.0;
    std::vector<double> values;
    double mean = 0.0;
    double sd = 0.0;
    std::vector<std::size_t> histogram; ///< `bins` equal bins over [lo, hi]; values outside are clamped
    double lo = -1.5;
    double hi = 1.5;
};

WeightDistribution weight_value_distribution(int k, const ResistanceLevelTable& table, double lambda,
                                             std::size_t draws, Rng& rng, std::size_t bins = 60);

/// Evenly spaced network weight grid s_w * k, |k| <= max_level.
struct QuantizationScheme
{
    double scale = 1.0;
    int max_level = 3;

    int level_of(double weight) const;
};

/// s_w = max |w| / (n - 1); 1 for an all-zero graph.
QuantizationScheme default_scheme(const NetworkGraph& graph, int device_levels = 4);

/// Rounds every weight to the nearest grid point (ties away from zero).
NetworkGraph quantize_network(const NetworkGraph& graph, const QuantizationScheme& scheme);

/// Replaces every synapse of a quantized graph with a device-sampled weight.
/// A level-k synapse (k != 0) gets s_w k v / v0, where v is the sampled value
/// and v0 the chosen pair's ideal value; level-0 synapses get v (n-1) s_w.
NetworkGraph sample_network_weights(const NetworkGraph& quantized, const QuantizationScheme& scheme,
                                    const ResistanceLevelTable& table, double lambda, Rng& rng);

struct RampResult
{
    std::vector<double> lambdas;
    std::vector<std::vector<double>> fitness; ///< [lambda][sample]
};

/// At each lambda, `samples` independent weight draws, each scored under
/// `protocol`. Sample (i, s) draws weights from (seed, i, s, 0) and neuron
/// noise from (seed, i, s, 1).
RampResult variability_ramp(const NetworkGraph& quantized, const QuantizationScheme& scheme,
                            const ResistanceLevelTable& table, std::span<const double> lambdas, std::size_t samples,
                            const TrialProtocol& protocol, std::uint64_t seed, unsigned jobs = 1);

void write_ramp_csv(std::ostream& os, const RampResult& ramp);
void write_weight_distribution_csv(std::ostream& os, const std::vector<WeightDistribution>& dists);

} // namespace nsnn

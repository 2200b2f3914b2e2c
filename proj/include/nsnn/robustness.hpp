#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nsnn/evolution.hpp"
#include "nsnn/network.hpp"
#include "nsnn/rng.hpp"

namespace nsnn {

/// Moves every neuron's incoming weight vector, measured in units of that
/// neuron's threshold, by exactly `magnitude` in a uniformly random
/// direction. Neurons without incoming synapses are left alone.
NetworkGraph perturb_weights(const NetworkGraph& graph, double magnitude, Rng& rng);

struct PerturbationCurve
{
    std::vector<double> magnitudes;
    std::vector<std::vector<double>> samples; ///< [magnitude][sample] fitness
    std::vector<double> medians;
};

/// 0, 0.02, ..., 0.40.
std::vector<double> default_magnitude_grid();

/// Fitness of `samples` independent perturbations at each magnitude, each
/// scored under `protocol`. Cell (m, s) draws its direction from
/// (seed, m, s, 0) and its neuron noise from (seed, m, s, 1).
PerturbationCurve robustness_curve(const NetworkGraph& graph, std::span<const double> magnitudes,
                                   std::size_t samples, const TrialProtocol& protocol, std::uint64_t seed,
                                   unsigned jobs = 1);

struct HalfFitness
{
    double magnitude = 0.0;
    bool censored = false; ///< the median never fell below half; `magnitude` is the largest tested
};

/// First magnitude where the median drops below half of `max_fitness`,
/// linearly interpolated. Throws UndefinedMetric if the curve starts below.
HalfFitness half_fitness_magnitude(std::span<const double> magnitudes, std::span<const double> medians,
                                   double max_fitness);
HalfFitness half_fitness_magnitude(const PerturbationCurve& curve, double max_fitness);

/// Per-magnitude median across several networks' median curves (all on the
/// same grid).
std::vector<double> pooled_median_curve(std::span<const PerturbationCurve> curves);

struct TTestResult
{
    double t = 0.0;
    double dof = 0.0;
    double p = 1.0;
};

/// Welch's unequal-variances t-test, two-sided. Throws InvalidInput for a
/// sample smaller than 2 and UndefinedMetric when both variances are zero.
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

void write_curve_csv(std::ostream& os, const PerturbationCurve& curve);

struct MetricRow
{
    std::string network_file;
    NeuronKind kind;
    HalfFitness metric;
};

void write_metric_csv(std::ostream& os, const std::vector<MetricRow>& rows);

struct TTestRow
{
    std::string group_a;
    std::string group_b;
    std::size_t n_a;
    std::size_t n_b;
    double median_a;
    double median_b;
    TTestResult result;
};

void write_ttest_csv(std::ostream& os, const std::vector<TTestRow>& rows);

} // namespace nsnn

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nsnn/neuron.hpp"

namespace nsnn {

/// Square matrix of per-synapse spike counts; row r is one firing condition
/// sum_i F[r][i] w_i = tau.
struct FiringConditionMatrix
{
    std::vector<std::vector<std::int64_t>> rows;

    std::size_t size() const noexcept { return rows.size(); }
};

/// Exact determinant of an integer matrix (fraction-free elimination).
/// Throws InvalidInput for a non-square matrix and Error on overflow.
std::int64_t determinant(const FiringConditionMatrix& f);

/// Weights meeting every firing condition exactly: w = F^-1 tau.
/// Throws InvalidInput for a non-square or negative matrix, SingularSystem
/// when det F = 0.
WeightVector critical_weights(const FiringConditionMatrix& f, double threshold);

/// {tau / f : f = 1..f_max}, descending.
std::vector<double> harmonic_boundaries(double threshold, std::uint32_t f_max);

struct Hyperplane
{
    std::vector<std::uint32_t> normal; ///< spike count per synapse
    double offset;                     ///< the threshold: normal . w = offset

    bool operator==(const Hyperplane&) const = default;
};

/// Every firing condition with 0..max_spikes spikes per synapse (not all
/// zero), ordered by total spike count.
std::vector<Hyperplane> enumerate_hyperplanes(std::size_t synapses, std::uint32_t max_spikes, double threshold);

/// Fixed set of random probe trains applied at every grid point.
struct ProbeBattery
{
    std::vector<SpikeTrain> probes;
    std::uint64_t seed = 0;
    double window = 200.0;
    std::uint32_t max_spikes = 0;

    /// Each probe gets a uniform 1..max_spikes spikes per synapse with
    /// Poisson-process arrival times (uniform order statistics) in [0, window).
    static ProbeBattery generate(std::size_t count, std::size_t synapses, std::uint32_t min_spikes,
                                 std::uint32_t max_spikes, double window, std::uint64_t seed);
};

/// Regular grid over (0, max_w1] x (0, max_w2]; cell (i, j) sits at
/// (max_w1 (i + 1) / n1, max_w2 (j + 1) / n2).
struct GridSpec
{
    std::size_t n1 = 100;
    std::size_t n2 = 100;
    double max_w1 = 50.0;
    double max_w2 = 50.0;
};

struct BoundaryMapOptions
{
    double dt = 0.5;        ///< SDE step for noisy neurons (ms)
    unsigned jobs = 1;
};

class BoundaryMap
{
public:
    BoundaryMap(std::vector<double> axis1, std::vector<double> axis2, std::size_t probe_count);

    const std::vector<double>& axis1() const noexcept { return axis1_; }
    const std::vector<double>& axis2() const noexcept { return axis2_; }
    std::size_t probe_count() const noexcept { return probes_; }
    std::size_t words_per_cell() const noexcept { return words_; }

    bool fired(std::size_t i, std::size_t j, std::size_t probe) const;
    void set_fired(std::size_t i, std::size_t j, std::size_t probe);
    bool same_signature(std::size_t i1, std::size_t j1, std::size_t i2, std::size_t j2) const;

    /// Signature as hex, probe 0 in the least significant bit.
    std::string signature_hex(std::size_t i, std::size_t j) const;

    bool boundary(std::size_t i, std::size_t j) const { return boundary_.at(i * axis2_.size() + j) != 0; }
    std::size_t boundary_count() const noexcept;

    /// Flags every cell whose signature differs from one of its 4 axis neighbours.
    void flag_boundaries();

    void write_csv(std::ostream& os) const;

private:
    std::vector<double> axis1_;
    std::vector<double> axis2_;
    std::size_t probes_;
    std::size_t words_;
    std::vector<std::uint64_t> bits_;
    std::vector<std::uint8_t> boundary_;
};

/// Runs every probe once at every grid cell through a two-synapse neuron and
/// flags behaviour boundaries. Deterministic neurons (noise_sigma = 0) are
/// integrated exactly between events; noisy ones through the SDE with cell
/// streams derived from (seed, cell, probe). Throws InvalidInput if the grid
/// exceeds the threshold on either axis.
BoundaryMap map_behavior_boundaries(const NeuronParams& params, const GridSpec& grid, const ProbeBattery& battery,
                                    std::uint64_t seed, const BoundaryMapOptions& options = {});

/// Perpendicular distance, in grid cells, from each flagged boundary cell to
/// the nearest plane. Ordered by cell (row-major).
std::vector<double> boundary_plane_distances(const BoundaryMap& map, const std::vector<Hyperplane>& planes);

} // namespace nsnn

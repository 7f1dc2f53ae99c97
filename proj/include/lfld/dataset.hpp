#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lfld/errors.hpp"

// Trajectory datasets: a shared spatial grid and time grid, plus per-sample
// input-signal matrices and field tensors produced by small 1D reference
// solvers. Scalar parameters of each simulation are replicated into the input
// signals as constant-in-time channels, so the surrogate sees one uniform
// interface: I(t) in, u(x,t) out.
//
// On disk a dataset is a directory: manifest.json (shapes, channel names,
// parameter records, seed, generator, format version "1") next to flat
// little-endian f32 blobs — coords.bin, times.bin, mask.bin, and per sample
// I_<k>.bin / u_<k>.bin. Reads are bit-exact inverses of writes.

namespace lfld {

struct SampleRecord {
    std::vector<float> inputs;  ///< [t_steps x n_inputs] row-major
    std::vector<float> fields;  ///< [t_steps x n_nodes x n_out] row-major
};

struct TrajectoryDataset {
    std::string generator;
    std::uint64_t seed = 0;
    std::int64_t n_dim = 1;
    std::int64_t n_inputs = 0;
    std::int64_t n_out = 1;

    std::vector<float> coords;       ///< [n_nodes x n_dim]
    std::vector<float> times;        ///< [t_steps], strictly increasing, > 0
    std::vector<std::uint8_t> mask;  ///< [n_nodes]; 1 = Dirichlet-forced node
    float mask_value = 0.0f;

    std::vector<std::string> input_names;            ///< length n_inputs
    std::vector<std::string> param_names;            ///< sampled parameters
    std::vector<std::array<double, 2>> param_ranges; ///< aligned with param_names
    std::vector<std::vector<double>> param_values;   ///< one record per sample

    std::vector<SampleRecord> samples;

    std::int64_t n_nodes() const {
        return n_dim > 0 ? std::int64_t(coords.size()) / n_dim : 0;
    }
    std::int64_t t_steps() const { return std::int64_t(times.size()); }
    std::int64_t n_samples() const { return std::int64_t(samples.size()); }
    std::vector<double> times_f64() const { return {times.begin(), times.end()}; }

    /// Internal-consistency check (shapes align, grids strictly increasing,
    /// every value finite). Violations -> ContractError.
    void validate() const;
};

void write_dataset(const TrajectoryDataset& ds, const std::string& dir);
TrajectoryDataset read_dataset(const std::string& dir);

inline constexpr const char* kDatasetFormatVersion = "1";

// ---------------------------------------------------------------------------
// Sampling and solvers
// ---------------------------------------------------------------------------

/// Stratified space-filling draw: per dimension, one uniform point inside
/// each of n_samples equal strata, independently permuted across samples.
/// Returns row-major [n_samples x ranges.size()].
std::vector<double> latin_hypercube(std::int64_t n_samples,
                                    const std::vector<std::array<double, 2>>& ranges,
                                    std::uint64_t seed);

/// Shared 1D solver grid. Fields are saved every save_stride solver steps,
/// so the dataset time step is save_stride * dt (much coarser than dt).
struct Grid1d {
    std::int64_t n_nodes = 64;
    double length = 1.0;
    double dt = 0.005;
    double t_end = 30.0;
    std::int64_t save_stride = 100;
};

/// Two-variable excitable-media cable (reduced ionic model) with homogeneous
/// Neumann ends. A fixed stimulus fires at t = 0 on the left end; a second
/// stimulus fires at t = t_stim on the right end. Input channels, in order:
/// stim_left(t), stim_right(t), D, k, eps0.
struct MonodomainParams {
    double D = 1e-3;      ///< conductivity
    double t_stim = 5.0;  ///< second stimulus onset
    double k = 8.0;       ///< excitability
    double eps0 = 0.01;   ///< recovery rate
    double stim_amplitude = 1.0;  ///< 0 silences both stimuli
};
SampleRecord solve_monodomain_1d(const MonodomainParams& p, const Grid1d& g);

/// Periodic advection-diffusion with a fixed Gaussian initial pulse and a
/// pulsatile Gaussian source. Input channels, in order:
/// src(t), a, nu, src_width.
struct AdvDiffParams {
    double a = 0.4;         ///< transport velocity
    double nu = 2e-3;       ///< diffusivity
    double src_amp = 1.0;   ///< source amplitude scale (0 disables the source)
    double src_width = 0.06;
    double src_period = 0.5;
    double src_center = 0.25;
    double ic_amp = 1.0;    ///< initial Gaussian pulse
    double ic_width = 0.1;
    double ic_center = 0.5;
};
SampleRecord solve_advdiff_1d(const AdvDiffParams& p, const Grid1d& g);

/// Total discrete mass (sum(u) * dx) at every saved step, accumulated in the
/// integrator's working precision. Conservation checks use this instead of
/// summing the saved f32 fields, whose quantization (~2e-8 relative) would
/// mask the scheme's actual conservation behavior.
std::vector<double> advdiff_mass_trace(const AdvDiffParams& p, const Grid1d& g);

// ---------------------------------------------------------------------------
// Dataset presets
// ---------------------------------------------------------------------------

Grid1d monodomain_grid();  ///< 64 nodes, dt 0.005, T 30, save every 0.5
Grid1d advdiff_grid();     ///< 128 nodes, dt 0.00125, T 2, save every 0.025

/// Excitable-cable dataset: n_samples parameter points by latin hypercube
/// over (D, t_stim, k, eps0). Default preset size is 50.
TrajectoryDataset make_monodomain_dataset(std::int64_t n_samples, std::uint64_t seed,
                                          const Grid1d& g = monodomain_grid());

/// Advection-diffusion dataset over (a, nu, amp_factor, width_factor) with
/// the factor ranges [0.8, 1.2]. Default preset size is 32.
TrajectoryDataset make_advdiff_dataset(std::int64_t n_samples, std::uint64_t seed,
                                       const Grid1d& g = advdiff_grid());

/// Constant-zero target fields with sinusoidal input channels; the smallest
/// dataset every training path can drive to ~zero loss.
TrajectoryDataset make_zero_dataset(std::int64_t n_samples, std::int64_t n_nodes,
                                    std::int64_t t_steps, std::uint64_t seed);

}  // namespace lfld

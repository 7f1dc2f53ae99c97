#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lfld/cfc.hpp"
#include "lfld/errors.hpp"
#include "lfld/nn.hpp"
#include "lfld/ode.hpp"
#include "lfld/reconstruction.hpp"
#include "lfld/tensor.hpp"
#include "lfld/wiring.hpp"

// Assembly of the three surrogate variants:
//   ldnet   — feed-forward ODE dynamics (forward Euler) + raw-coordinate MLP
//   lldnet  — liquid (gated continuous-time) dynamics + raw-coordinate MLP
//   lfldnet — liquid dynamics + trainable Fourier coordinate embedding
// plus everything a trained model owns: normalization statistics, the optional
// Dirichlet boundary mask, chunked inference, parameter counting, and the
// checkpoint file format.
//
// Coordinate features follow one rule everywhere: the Fourier embedding when
// n_freq > 0, the raw normalized coordinates when n_freq == 0. An lfldnet
// with n_freq == 0 is therefore structurally identical to an lldnet — the
// ablations differ from the full model by exactly one knob.

namespace lfld {

enum class Variant { ldnet, lldnet, lfldnet };

std::string variant_name(Variant v);
Variant variant_from_string(const std::string& s);  ///< unknown name -> ConfigError

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Per-channel range observed on the training split. lo == hi marks a
/// constant channel.
struct ChannelRange {
    float lo = 0.0f;
    float hi = 0.0f;
    bool constant() const { return lo == hi; }
};

/// Linear map lo -> -1, hi -> +1; constant channels map to 0.
inline float normalize_value(float v, const ChannelRange& r) {
    if (r.constant()) return 0.0f;
    return (v - r.lo) / (r.hi - r.lo) * 2.0f - 1.0f;
}

/// Inverse map; constant channels recover their single value.
inline float denormalize_value(float v, const ChannelRange& r) {
    if (r.constant()) return r.lo;
    return (v + 1.0f) * 0.5f * (r.hi - r.lo) + r.lo;
}

/// Per-channel (column) ranges for the three value families a model touches.
struct NormalizationStats {
    std::vector<ChannelRange> inputs;   ///< I(t) channels
    std::vector<ChannelRange> coords;   ///< coordinate components
    std::vector<ChannelRange> outputs;  ///< u channels

    bool ready() const { return !outputs.empty(); }
};

/// Column-wise min/max over a row-major [n_rows x n_cols] buffer.
std::vector<ChannelRange> fit_ranges(const std::vector<float>& buf, std::int64_t n_cols);

/// In-place column-wise application over a row-major buffer whose column
/// count equals ranges.size().
void normalize_columns(std::vector<float>& buf, const std::vector<ChannelRange>& ranges);
void denormalize_columns(std::vector<float>& buf, const std::vector<ChannelRange>& ranges);

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/// Every hyperparameter a model is built from; echoed verbatim into
/// checkpoints and command-line output.
struct ModelConfig {
    Variant variant = Variant::lfldnet;
    std::int64_t n_inputs = 1;   ///< I(t) channel count
    std::int64_t n_states = 8;   ///< latent state width
    std::int64_t n_dim = 1;      ///< coordinate dimension
    std::int64_t n_out = 1;      ///< field channel count
    std::int64_t dyn_total = 64; ///< liquid neuron budget / ODE-baseline hidden width
    std::int64_t rec_layers = 4; ///< reconstruction hidden layer count
    std::int64_t rec_width = 64; ///< reconstruction hidden width
    std::int64_t n_freq = 16;    ///< Fourier frequencies (0 = raw coordinates)
    double fourier_scale = 1.0;  ///< kernel init stddev
    bool mixed_memory = true;    ///< liquid variants: auxiliary LSTM at the command layer
    std::int64_t ode_substeps = 1;  ///< ldnet: Euler substeps per observation gap
    std::uint64_t init_seed = 0;
};

struct ParameterCounts {
    std::int64_t dynamics = 0;
    std::int64_t kernel = 0;
    std::int64_t reconstruction = 0;
    std::int64_t total() const { return dynamics + kernel + reconstruction; }
};

struct LatentModel {
    ModelConfig config;

    // Dynamics: liquid variants own a wiring graph + gated cell network, the
    // ODE baseline owns a plain feed-forward right-hand side.
    std::optional<WiringGraph> wiring;
    std::optional<CfcNetT<float>> liquid;
    std::optional<FcnnT<float>> ode_rhs;

    TensorT<float> kernel;  ///< Fourier kernel [n_freq x n_dim]; 0 rows when disabled
    ReconstructionNetT<float> recon;

    NormalizationStats stats;  ///< empty until fitted on a training split
    BoundaryMask boundary;     ///< empty = no Dirichlet constraint

    /// Construct with fresh parameter draws. Sub-network init streams are
    /// derived independently from init_seed, so e.g. toggling the Fourier
    /// kernel does not reshuffle the dynamics draws.
    static LatentModel build(const ModelConfig& cfg);

    /// Trainable tensors in the frozen checkpoint/optimizer order:
    /// dynamics blocks, Fourier kernel (when nonempty), reconstruction.
    /// The refs share storage with the model, so writes flow back.
    ParamList<float> parameters() const;

    /// Latent trajectory [T x n_states] for physical-unit inputs, normalized
    /// internally; depends only on I_series and times, never on coordinates.
    TensorT<float> trajectory(const std::vector<float>& I_series,
                              const std::vector<double>& times) const;

    /// Dynamics on already-normalized inputs (the training loop's entry).
    TensorT<float> dynamics_forward(const std::vector<float>& I_norm,
                                    const std::vector<double>& times) const;
};

ParameterCounts count_model_parameters(const LatentModel& m);

/// Full inference: normalize inputs and coordinates, run the dynamics once,
/// reconstruct every (step, node) pair, denormalize, then apply the boundary
/// mask. Returns row-major [T x n_nodes x n_out]. `chunks` partitions the
/// nodes into that many contiguous groups evaluated independently; the result
/// is bitwise identical for any chunk count.
std::vector<float> model_forward(const LatentModel& m, const std::vector<float>& I_series,
                                 const std::vector<double>& times,
                                 const std::vector<float>& coords, std::int64_t chunks = 1);

// ---------------------------------------------------------------------------
// Checkpoints and exports
// ---------------------------------------------------------------------------

/// Binary checkpoint: magic "LFLD", u16 format version, u32 JSON header
/// length, JSON header (variant, config, stats, boundary, wiring, parameter
/// block names + shapes), then raw little-endian f32 parameter blocks in
/// header order. Round trips are bit-exact.
void save_checkpoint(const LatentModel& m, const std::string& path);
LatentModel load_checkpoint(const std::string& path);

constexpr std::uint16_t kCheckpointVersion = 1;

/// CSV with header "time,s_1,...,s_N" and one row per step.
void write_states_csv(const std::string& path, const std::vector<double>& times,
                      const TensorT<float>& states);

}  // namespace lfld

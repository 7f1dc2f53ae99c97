#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lfld/dataset.hpp"
#include "lfld/model.hpp"
#include "lfld/optim.hpp"
#include "lfld/rng.hpp"

// Training engine: normalized-space MSE, Adam with wiring-mask re-application,
// an epoch loop with fresh spatial subsampling per epoch, a seeded train/val
// split, best-validation model retention, and a seeded uniform random search
// over finite hyperparameter sets.
//
// Everything is single-threaded and deterministic: identical dataset bytes,
// config, and seeds reproduce identical loss sequences bit for bit.

namespace lfld {

struct TrainConfig {
    Variant variant = Variant::lfldnet;

    // Architecture.
    std::int64_t dyn_total = 64;   ///< dynamics neuron budget
    std::int64_t rec_layers = 4;   ///< reconstruction hidden layers
    std::int64_t rec_width = 64;   ///< reconstruction hidden width
    std::int64_t n_freq = 16;      ///< Fourier frequencies (lfldnet only; 0 = raw coords)
    std::int64_t n_states = 8;     ///< latent state width
    bool mixed_memory = true;
    double fourier_scale = 1.0;
    std::int64_t ode_substeps = 1; ///< ldnet Euler substeps

    // Optimization.
    double lr = 3e-4;
    std::int64_t batch_size = 5;
    std::int64_t points_per_epoch = 1000;  ///< spatial points sampled per epoch
    std::int64_t max_epochs = 100;

    // Data handling.
    double train_fraction = 0.8;  ///< floor(fraction * n_samples) training samples

    // Optional early stop: end training once validation MSE drops below this
    // value. 0 disables the check and all max_epochs run.
    double stop_at_val = 0.0;

    // Seeds. Three independent streams so e.g. changing the sampling seed
    // never reshuffles the initial weights or the split.
    std::uint64_t init_seed = 0;
    std::uint64_t sampling_seed = 0;
    std::uint64_t split_seed = 0;
};

struct TrainHistory {
    std::vector<double> train_loss;  ///< one entry per completed epoch
    std::vector<double> val_loss;
    std::vector<double> seconds;     ///< wall time per epoch (not reproducible)
    std::int64_t best_epoch = 0;     ///< 1-based epoch of the best validation loss
    double best_val = std::numeric_limits<double>::infinity();
    bool diverged = false;           ///< true when training aborted on non-finite values
    std::int64_t diverged_epoch = 0; ///< 1-based epoch that aborted (when diverged)
    std::int64_t epochs() const { return std::int64_t(train_loss.size()); }
};

struct TrainResult {
    LatentModel model;  ///< parameters restored to the best-validation epoch
    TrainHistory history;
};

/// Mean of squared elementwise differences, in whatever space the operands
/// live in (the training loop passes [-1,1]-normalized values).
inline TensorT<float> mse_loss(const TensorT<float>& pred, const TensorT<float>& obs) {
    return mse(pred, obs);
}

/// Uniform draw of min(k, n_nodes) distinct node indices, ascending. k >= n
/// returns all nodes in natural order without consuming the generator.
std::vector<std::int64_t> sample_spatial_points(std::int64_t n_nodes, std::int64_t k,
                                                SplitMix64& rng);

/// Seeded permutation split: floor(train_fraction * n) training samples
/// (clamped so both sides are nonempty), remainder validation.
struct SplitIndices {
    std::vector<std::int64_t> train;
    std::vector<std::int64_t> val;
};
SplitIndices split_dataset(std::int64_t n_samples, double train_fraction, std::uint64_t seed);

/// Model hyperparameters for this dataset: dimensions from the data, the
/// rest from the train config.
ModelConfig model_config_from(const TrainConfig& cfg, const TrajectoryDataset& ds);

/// Full training run. Normalization statistics come from the training split
/// only; every epoch draws fresh spatial points, walks shuffled minibatches,
/// and evaluates validation loss on the full spatial set. The returned model
/// carries the parameters of the best-validation epoch. Non-finite loss or
/// gradients abort training (history.diverged) and return the best model
/// seen so far rather than the poisoned one.
TrainResult train(const TrajectoryDataset& ds, const TrainConfig& cfg);

/// CSV export: header "epoch,train_loss,val_loss,seconds", one row per epoch.
void write_history_csv(const std::string& path, const TrainHistory& h);

// ---------------------------------------------------------------------------
// Random hyperparameter search
// ---------------------------------------------------------------------------

/// Finite candidate sets; an empty set keeps the base config's value.
struct SearchSpace {
    std::vector<std::int64_t> dyn_total;
    std::vector<std::int64_t> rec_layers;
    std::vector<std::int64_t> rec_width;
    std::vector<std::int64_t> n_freq;
    std::vector<std::int64_t> n_states;
    std::vector<double> lr;
    bool empty() const {
        return dyn_total.empty() && rec_layers.empty() && rec_width.empty() &&
               n_freq.empty() && n_states.empty() && lr.empty();
    }
};

struct TrialResult {
    std::int64_t trial = 0;  ///< 1-based draw order
    TrainConfig config;
    double final_val = std::numeric_limits<double>::infinity();
    bool rejected = false;   ///< config failed validation; never trained
    std::string note;        ///< rejection reason when rejected
    TrainHistory history;
};

/// Seeded uniform search: `trials` configs drawn independently per populated
/// set, each trained for epochs_per_trial, ranked by final validation loss
/// (rejected configs sort last, with their rejection reason). The split seed
/// is shared across trials so every trial sees the same train/val division.
std::vector<TrialResult> random_search(const TrajectoryDataset& ds, const TrainConfig& base,
                                       const SearchSpace& space, std::int64_t trials,
                                       std::int64_t epochs_per_trial, std::uint64_t seed);

/// JSON table of every trial (rank order), with config, status, and losses.
void write_search_table_json(const std::string& path,
                             const std::vector<TrialResult>& table);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalReport {
    std::vector<double> per_sample_mse;  ///< normalized space, one per sample
    double mean_mse = 0.0;
    /// Physical-unit pointwise |prediction - observation| per sample, shaped
    /// [t_steps x n_nodes x n_out]; filled only when requested.
    std::vector<std::vector<float>> error_fields;
};

/// Per-sample normalized MSE of full-grid predictions against the dataset,
/// plus optional physical-unit absolute-error fields.
EvalReport evaluate(const LatentModel& m, const TrajectoryDataset& ds,
                    bool with_error_fields = false);

}  // namespace lfld

#include "lfld/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "lfld/reconstruction.hpp"

namespace lfld {

namespace {

void check_train_config(const TrainConfig& c) {
    if (!(c.lr > 0.0)) throw ConfigError("train: lr must be positive");
    if (c.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (c.points_per_epoch < 1) throw ConfigError("train: points_per_epoch must be >= 1");
    if (c.max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
    if (!(c.train_fraction > 0.0) || !(c.train_fraction < 1.0))
        throw ConfigError("train: train_fraction must lie strictly inside (0, 1)");
    if (c.stop_at_val < 0.0) throw ConfigError("train: stop_at_val must be >= 0");
}

std::vector<std::vector<float>> snapshot_params(const ParamList<float>& ps) {
    std::vector<std::vector<float>> out;
    out.reserve(ps.size());
    for (const auto& p : ps) out.push_back(p.tensor.values());
    return out;
}

void restore_params(ParamList<float>& ps, const std::vector<std::vector<float>>& snap) {
    for (std::size_t i = 0; i < ps.size(); ++i)
        std::memcpy(ps[i].tensor.data(), snap[i].data(), snap[i].size() * sizeof(float));
}

/// Rows of `flat` ([n_rows_total x n_cols] with node-major inner layout
/// [T x N x C]) gathered at `points` for every time step: out[(t*P+p)*C + c].
std::vector<float> gather_points(const std::vector<float>& flat, std::int64_t t_steps,
                                 std::int64_t n_nodes, std::int64_t n_cols,
                                 const std::vector<std::int64_t>& points) {
    std::vector<float> out(std::size_t(t_steps * std::int64_t(points.size()) * n_cols));
    std::size_t w = 0;
    for (std::int64_t t = 0; t < t_steps; ++t)
        for (std::int64_t p : points)
            for (std::int64_t c = 0; c < n_cols; ++c)
                out[w++] = flat[std::size_t((t * n_nodes + p) * n_cols + c)];
    return out;
}

}  // namespace

std::vector<std::int64_t> sample_spatial_points(std::int64_t n_nodes, std::int64_t k,
                                                SplitMix64& rng) {
    if (n_nodes < 1) throw ContractError("sample_spatial_points: n_nodes must be >= 1");
    if (k < 1) throw ContractError("sample_spatial_points: need at least one point");
    std::vector<std::int64_t> out;
    if (k >= n_nodes) {
        if (k > n_nodes)
            std::fprintf(stderr,
                         "[train] warning: %lld points requested but only %lld nodes exist; "
                         "using every node\n",
                         static_cast<long long>(k), static_cast<long long>(n_nodes));
        out.resize(std::size_t(n_nodes));
        std::iota(out.begin(), out.end(), 0);
        return out;
    }
    const auto picked = rng.choose_distinct(std::size_t(n_nodes), std::size_t(k));
    out.assign(picked.begin(), picked.end());
    std::sort(out.begin(), out.end());
    return out;
}

SplitIndices split_dataset(std::int64_t n_samples, double train_fraction, std::uint64_t seed) {
    if (n_samples < 2)
        throw ConfigError("split: at least 2 samples are required to hold out validation data");
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw ConfigError("split: train_fraction must lie strictly inside (0, 1)");
    std::vector<std::int64_t> order(static_cast<std::size_t>(n_samples));
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(seed);
    rng.shuffle(order);
    const std::int64_t n_train = std::clamp<std::int64_t>(
        std::int64_t(std::floor(train_fraction * double(n_samples))), 1, n_samples - 1);
    SplitIndices s;
    s.train.assign(order.begin(), order.begin() + n_train);
    s.val.assign(order.begin() + n_train, order.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    return s;
}

ModelConfig model_config_from(const TrainConfig& cfg, const TrajectoryDataset& ds) {
    ModelConfig m;
    m.variant = cfg.variant;
    m.n_inputs = ds.n_inputs;
    m.n_states = cfg.n_states;
    m.n_dim = ds.n_dim;
    m.n_out = ds.n_out;
    m.dyn_total = cfg.dyn_total;
    m.rec_layers = cfg.rec_layers;
    m.rec_width = cfg.rec_width;
    m.n_freq = cfg.n_freq;
    m.fourier_scale = cfg.fourier_scale;
    m.mixed_memory = cfg.mixed_memory;
    m.ode_substeps = cfg.ode_substeps;
    m.init_seed = cfg.init_seed;
    return m;
}

TrainResult train(const TrajectoryDataset& ds, const TrainConfig& cfg) {
    check_train_config(cfg);
    ds.validate();
    if (ds.n_samples() < 2)
        throw ConfigError("train: the dataset holds " + std::to_string(ds.n_samples()) +
                          " samples; at least 2 are required for a train/validation split");

    const std::int64_t n_nodes = ds.n_nodes();
    const std::int64_t t_steps = ds.t_steps();
    const std::int64_t n_out = ds.n_out;

    LatentModel model = LatentModel::build(model_config_from(cfg, ds));

    const SplitIndices split = split_dataset(ds.n_samples(), cfg.train_fraction, cfg.split_seed);

    // Normalization statistics come from training samples only; validation
    // data must not leak into them.
    {
        std::vector<float> all_inputs, all_fields;
        all_inputs.reserve(split.train.size() * std::size_t(t_steps * ds.n_inputs));
        all_fields.reserve(split.train.size() * std::size_t(t_steps * n_nodes * n_out));
        for (std::int64_t k : split.train) {
            const SampleRecord& rec = ds.samples[std::size_t(k)];
            all_inputs.insert(all_inputs.end(), rec.inputs.begin(), rec.inputs.end());
            all_fields.insert(all_fields.end(), rec.fields.begin(), rec.fields.end());
        }
        model.stats.inputs = fit_ranges(all_inputs, ds.n_inputs);
        model.stats.outputs = fit_ranges(all_fields, n_out);
        model.stats.coords = fit_ranges(ds.coords, ds.n_dim);
    }

    // Dirichlet boundary handling. In normalized space the forced value is a
    // single scalar per channel; the training loss path supports it for
    // single-channel fields (every shipped preset; multi-channel masked
    // training is rejected rather than silently mishandled).
    bool any_forced = false;
    for (std::uint8_t f : ds.mask) any_forced = any_forced || f != 0;
    if (any_forced) {
        if (n_out != 1)
            throw ConfigError(
                "train: Dirichlet-masked training supports a single output channel");
        model.boundary.forced = ds.mask;
        model.boundary.value = ds.mask_value;
    }
    const float forced_norm =
        any_forced ? normalize_value(ds.mask_value, model.stats.outputs[0]) : 0.0f;

    // Precompute normalized inputs, targets, and coordinates once.
    const std::vector<double> times = ds.times_f64();
    std::vector<std::vector<float>> I_norm(std::size_t(ds.n_samples()));
    std::vector<std::vector<float>> U_norm(std::size_t(ds.n_samples()));
    for (std::int64_t k = 0; k < ds.n_samples(); ++k) {
        I_norm[std::size_t(k)] = ds.samples[std::size_t(k)].inputs;
        normalize_columns(I_norm[std::size_t(k)], model.stats.inputs);
        U_norm[std::size_t(k)] = ds.samples[std::size_t(k)].fields;
        normalize_columns(U_norm[std::size_t(k)], model.stats.outputs);
    }
    std::vector<float> coords_norm = ds.coords;
    normalize_columns(coords_norm, model.stats.coords);
    const auto x_full =
        TensorT<float>::from_data(coords_norm, Shape{n_nodes, ds.n_dim});

    // Validation targets live on the full grid.
    std::vector<TensorT<float>> val_target;
    for (std::int64_t k : split.val)
        val_target.push_back(TensorT<float>::from_data(U_norm[std::size_t(k)],
                                                       Shape{t_steps * n_nodes, n_out}));
    std::vector<std::uint8_t> keep_full;
    if (any_forced) {
        keep_full.resize(std::size_t(t_steps * n_nodes));
        for (std::int64_t t = 0; t < t_steps; ++t)
            for (std::int64_t i = 0; i < n_nodes; ++i)
                keep_full[std::size_t(t * n_nodes + i)] = ds.mask[std::size_t(i)] ? 0 : 1;
    }

    const auto validation_loss = [&]() {
        double sum = 0.0;
        for (std::size_t vi = 0; vi < split.val.size(); ++vi) {
            const std::int64_t k = split.val[vi];
            const auto states = model.dynamics_forward(I_norm[std::size_t(k)], times);
            auto pred = reconstruct(model.recon, model.kernel, states, x_full);
            if (any_forced) pred = mask_rows(pred, keep_full, forced_norm);
            sum += double(mse(pred, val_target[vi]).item());
        }
        return sum / double(split.val.size());
    };

    Adam opt(cfg.lr);
    ParamList<float> params = model.parameters();
    auto best = snapshot_params(params);

    TrainHistory hist;
    const std::int64_t eff_points = std::min(cfg.points_per_epoch, n_nodes);
    if (cfg.points_per_epoch > n_nodes)
        std::fprintf(stderr,
                     "[train] warning: points_per_epoch %lld exceeds the %lld grid nodes; "
                     "every epoch uses the full node set\n",
                     static_cast<long long>(cfg.points_per_epoch),
                     static_cast<long long>(n_nodes));

    const SplitMix64 sampler_root(cfg.sampling_seed);

    for (std::int64_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto tic = std::chrono::steady_clock::now();
        SplitMix64 epoch_rng = sampler_root.derive(std::uint64_t(epoch));

        const auto points = sample_spatial_points(n_nodes, eff_points, epoch_rng);
        const std::int64_t n_pts = std::int64_t(points.size());

        // Point-level views of coordinates, targets, and the boundary mask.
        const auto x_pts = TensorT<float>::from_data(
            gather_points(coords_norm, 1, n_nodes, ds.n_dim, points), Shape{n_pts, ds.n_dim});
        std::vector<std::uint8_t> keep_pts;
        if (any_forced) {
            keep_pts.resize(std::size_t(t_steps * n_pts));
            for (std::int64_t t = 0; t < t_steps; ++t)
                for (std::int64_t p = 0; p < n_pts; ++p)
                    keep_pts[std::size_t(t * n_pts + p)] =
                        ds.mask[std::size_t(points[std::size_t(p)])] ? 0 : 1;
        }

        std::vector<std::int64_t> order = split.train;
        epoch_rng.shuffle(order);

        double epoch_loss_sum = 0.0;
        bool aborted = false;
        std::string abort_note;

        for (std::size_t b0 = 0; b0 < order.size() && !aborted;
             b0 += std::size_t(cfg.batch_size)) {
            const std::size_t b1 = std::min(order.size(), b0 + std::size_t(cfg.batch_size));
            const double batch_n = double(b1 - b0);

            Tape tape;
            TensorT<float> batch_sum;
            bool first = true;
            for (std::size_t bi = b0; bi < b1; ++bi) {
                const std::int64_t k = order[bi];
                const auto states = model.dynamics_forward(I_norm[std::size_t(k)], times);
                auto pred = reconstruct(model.recon, model.kernel, states, x_pts);
                if (any_forced) pred = mask_rows(pred, keep_pts, forced_norm);
                const auto target = TensorT<float>::from_data(
                    gather_points(U_norm[std::size_t(k)], t_steps, n_nodes, n_out, points),
                    Shape{t_steps * n_pts, n_out});
                const auto sample_loss = mse(pred, target);
                batch_sum = first ? sample_loss : add(batch_sum, sample_loss);
                first = false;
            }
            const auto batch_loss = affine(batch_sum, 1.0f / float(batch_n), 0.0f);
            const double loss_value = double(batch_loss.item());
            if (!std::isfinite(loss_value)) {
                aborted = true;
                abort_note = "non-finite training loss";
                break;
            }
            opt.zero_grad(params);
            tape.backward(batch_loss);
            try {
                opt.step(params);
            } catch (const DivergenceError& e) {
                aborted = true;
                abort_note = e.what();
                break;
            }
            epoch_loss_sum += loss_value * batch_n;
        }

        if (aborted) {
            hist.diverged = true;
            hist.diverged_epoch = epoch;
            std::fprintf(stderr, "[train] aborted at epoch %lld: %s\n",
                         static_cast<long long>(epoch), abort_note.c_str());
            break;
        }

        const double train_loss = epoch_loss_sum / double(split.train.size());
        const double val_loss = validation_loss();
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();

        hist.train_loss.push_back(train_loss);
        hist.val_loss.push_back(val_loss);
        hist.seconds.push_back(secs);
        if (std::isfinite(val_loss) && val_loss < hist.best_val) {
            hist.best_val = val_loss;
            hist.best_epoch = epoch;
            best = snapshot_params(params);
        }
        if (cfg.stop_at_val > 0.0 && val_loss < cfg.stop_at_val) break;
    }

    restore_params(params, best);
    return TrainResult{std::move(model), std::move(hist)};
}

void write_history_csv(const std::string& path, const TrainHistory& h) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << "epoch,train_loss,val_loss,seconds\n";
    char buf[160];
    for (std::size_t e = 0; e < h.train_loss.size(); ++e) {
        std::snprintf(buf, sizeof buf, "%lld,%.9g,%.9g,%.9g\n",
                      static_cast<long long>(e + 1), h.train_loss[e], h.val_loss[e],
                      h.seconds[e]);
        out << buf;
    }
    out.flush();
    if (!out) throw ConfigError("failed while writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Random search
// ---------------------------------------------------------------------------

std::vector<TrialResult> random_search(const TrajectoryDataset& ds, const TrainConfig& base,
                                       const SearchSpace& space, std::int64_t trials,
                                       std::int64_t epochs_per_trial, std::uint64_t seed) {
    if (space.empty())
        throw ConfigError(
            "random_search: the search space is empty; populate at least one candidate set");
    if (trials < 1) throw ConfigError("random_search: trials must be >= 1");
    if (epochs_per_trial < 1) throw ConfigError("random_search: epochs_per_trial must be >= 1");

    SplitMix64 cfg_rng(seed);
    SplitMix64 seed_rng = SplitMix64(seed).derive(0x5EED5u);

    const auto pick_i64 = [&](const std::vector<std::int64_t>& set, std::int64_t fallback) {
        return set.empty() ? fallback : set[std::size_t(cfg_rng.below(set.size()))];
    };
    const auto pick_f64 = [&](const std::vector<double>& set, double fallback) {
        return set.empty() ? fallback : set[std::size_t(cfg_rng.below(set.size()))];
    };

    std::vector<TrialResult> out;
    for (std::int64_t t = 1; t <= trials; ++t) {
        TrainConfig c = base;
        c.max_epochs = epochs_per_trial;
        // Fixed draw order keeps the sequence stable across code changes.
        c.dyn_total = pick_i64(space.dyn_total, base.dyn_total);
        c.rec_layers = pick_i64(space.rec_layers, base.rec_layers);
        c.rec_width = pick_i64(space.rec_width, base.rec_width);
        c.n_freq = pick_i64(space.n_freq, base.n_freq);
        c.n_states = pick_i64(space.n_states, base.n_states);
        c.lr = pick_f64(space.lr, base.lr);
        // Fresh init/sampling seeds per trial; the split seed stays shared so
        // every trial competes on the same train/validation division.
        c.init_seed = seed_rng.next_u64();
        c.sampling_seed = seed_rng.next_u64();

        TrialResult r;
        r.trial = t;
        r.config = c;
        try {
            TrainResult res = train(ds, c);
            r.history = std::move(res.history);
            if (r.history.diverged || r.history.val_loss.empty()) {
                r.final_val = std::numeric_limits<double>::infinity();
                r.note = r.history.diverged ? "diverged during training" : "no epochs completed";
            } else {
                r.final_val = r.history.val_loss.back();
            }
        } catch (const ConfigError& e) {
            r.rejected = true;
            r.note = e.what();
        }
        out.push_back(std::move(r));
    }

    std::stable_sort(out.begin(), out.end(), [](const TrialResult& a, const TrialResult& b) {
        const double fa = a.rejected ? std::numeric_limits<double>::infinity() : a.final_val;
        const double fb = b.rejected ? std::numeric_limits<double>::infinity() : b.final_val;
        return fa < fb;
    });
    return out;
}

void write_search_table_json(const std::string& path,
                             const std::vector<TrialResult>& table) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (std::size_t rank = 0; rank < table.size(); ++rank) {
        const TrialResult& r = table[rank];
        nlohmann::ordered_json row;
        row["rank"] = rank + 1;
        row["trial"] = r.trial;
        row["status"] = r.rejected            ? "rejected"
                        : r.history.diverged  ? "diverged"
                                              : "ok";
        if (!r.note.empty()) row["note"] = r.note;
        if (!r.rejected) {
            row["final_val_loss"] = r.final_val;
            row["best_val_loss"] = r.history.best_val;
            row["best_epoch"] = r.history.best_epoch;
            row["epochs"] = r.history.epochs();
        }
        nlohmann::ordered_json cfg;
        cfg["variant"] = variant_name(r.config.variant);
        cfg["dyn_total"] = r.config.dyn_total;
        cfg["rec_layers"] = r.config.rec_layers;
        cfg["rec_width"] = r.config.rec_width;
        cfg["n_freq"] = r.config.n_freq;
        cfg["n_states"] = r.config.n_states;
        cfg["lr"] = r.config.lr;
        cfg["init_seed"] = r.config.init_seed;
        cfg["sampling_seed"] = r.config.sampling_seed;
        cfg["split_seed"] = r.config.split_seed;
        row["config"] = std::move(cfg);
        arr.push_back(std::move(row));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << arr.dump(2) << "\n";
    out.flush();
    if (!out) throw ConfigError("failed while writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

EvalReport evaluate(const LatentModel& m, const TrajectoryDataset& ds,
                    bool with_error_fields) {
    ds.validate();
    if (!m.stats.ready())
        throw StateError(
            "evaluate: model has no normalization statistics; train it or load a trained "
            "checkpoint first");
    if (m.config.n_inputs != ds.n_inputs)
        throw ShapeError("evaluate: model expects " + std::to_string(m.config.n_inputs) +
                         " input channels, dataset has " + std::to_string(ds.n_inputs));
    if (m.config.n_dim != ds.n_dim)
        throw ShapeError("evaluate: model expects " + std::to_string(m.config.n_dim) +
                         "-dimensional coordinates, dataset has " + std::to_string(ds.n_dim));
    if (m.config.n_out != ds.n_out)
        throw ShapeError("evaluate: model predicts " + std::to_string(m.config.n_out) +
                         " output channels, dataset has " + std::to_string(ds.n_out));

    const std::vector<double> times = ds.times_f64();
    EvalReport rep;
    for (std::int64_t k = 0; k < ds.n_samples(); ++k) {
        const SampleRecord& rec = ds.samples[std::size_t(k)];
        const std::vector<float> pred =
            model_forward(m, rec.inputs, times, ds.coords);

        // Normalized-space MSE.
        std::vector<float> pred_n = pred;
        std::vector<float> obs_n = rec.fields;
        normalize_columns(pred_n, m.stats.outputs);
        normalize_columns(obs_n, m.stats.outputs);
        double sum = 0.0;
        for (std::size_t i = 0; i < pred_n.size(); ++i) {
            const double d = double(pred_n[i]) - double(obs_n[i]);
            sum += d * d;
        }
        rep.per_sample_mse.push_back(sum / double(pred_n.size()));

        if (with_error_fields) {
            std::vector<float> err(pred.size());
            for (std::size_t i = 0; i < pred.size(); ++i)
                err[i] = std::abs(pred[i] - rec.fields[i]);
            rep.error_fields.push_back(std::move(err));
        }
    }
    double total = 0.0;
    for (double v : rep.per_sample_mse) total += v;
    rep.mean_mse = total / double(rep.per_sample_mse.size());
    return rep;
}

}  // namespace lfld

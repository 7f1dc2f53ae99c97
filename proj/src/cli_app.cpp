#include "lfld/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lfld/dataset.hpp"
#include "lfld/model.hpp"
#include "lfld/train.hpp"

namespace lfld {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// Seeds absent from a config file resolve to these fixed values, so omitting
// them still yields reproducible runs and the echo makes them explicit.
constexpr std::uint64_t kDefaultDataSeed = 0;
constexpr std::uint64_t kDefaultInitSeed = 1;
constexpr std::uint64_t kDefaultSamplingSeed = 2;
constexpr std::uint64_t kDefaultSplitSeed = 3;
constexpr std::uint64_t kDefaultSearchSeed = 0;

// ---------------------------------------------------------------------------
// Config-file plumbing
// ---------------------------------------------------------------------------

json load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return json::parse(in, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
    const std::string label = where.empty() ? "top level" : "section '" + where + "'";
    if (!obj.is_object()) throw ConfigError("config: the " + label + " must be a JSON object");
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known) {
            std::string keys;
            for (const char* k : allowed) keys += std::string(keys.empty() ? "" : ", ") + k;
            throw ConfigError("config: unknown key '" +
                              (where.empty() ? item.key() : where + "." + item.key()) +
                              "' (the " + label + " accepts: " + keys + ")");
        }
    }
}

template <typename T>
T get_or(const json& obj, const char* key, const T& fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: key '" + (where.empty() ? key : where + "." + key) +
                          "' has an invalid type or value");
    }
}

/// TrainConfig from the optional "train" section, defaults materialized.
TrainConfig parse_train_section(const json& root) {
    TrainConfig c;
    c.init_seed = kDefaultInitSeed;
    c.sampling_seed = kDefaultSamplingSeed;
    c.split_seed = kDefaultSplitSeed;
    if (!root.contains("train")) return c;
    const json& t = root.at("train");
    reject_unknown_keys(t, "train",
                        {"variant", "dyn_total", "rec_layers", "rec_width", "n_freq",
                         "n_states", "mixed_memory", "fourier_scale", "ode_substeps", "lr",
                         "batch_size", "points_per_epoch", "max_epochs", "train_fraction",
                         "stop_at_val", "init_seed", "sampling_seed", "split_seed"});
    c.variant = variant_from_string(
        get_or<std::string>(t, "variant", variant_name(c.variant), "train"));
    c.dyn_total = get_or<std::int64_t>(t, "dyn_total", c.dyn_total, "train");
    c.rec_layers = get_or<std::int64_t>(t, "rec_layers", c.rec_layers, "train");
    c.rec_width = get_or<std::int64_t>(t, "rec_width", c.rec_width, "train");
    c.n_freq = get_or<std::int64_t>(t, "n_freq", c.n_freq, "train");
    c.n_states = get_or<std::int64_t>(t, "n_states", c.n_states, "train");
    c.mixed_memory = get_or<bool>(t, "mixed_memory", c.mixed_memory, "train");
    c.fourier_scale = get_or<double>(t, "fourier_scale", c.fourier_scale, "train");
    c.ode_substeps = get_or<std::int64_t>(t, "ode_substeps", c.ode_substeps, "train");
    c.lr = get_or<double>(t, "lr", c.lr, "train");
    c.batch_size = get_or<std::int64_t>(t, "batch_size", c.batch_size, "train");
    c.points_per_epoch = get_or<std::int64_t>(t, "points_per_epoch", c.points_per_epoch, "train");
    c.max_epochs = get_or<std::int64_t>(t, "max_epochs", c.max_epochs, "train");
    c.train_fraction = get_or<double>(t, "train_fraction", c.train_fraction, "train");
    c.stop_at_val = get_or<double>(t, "stop_at_val", c.stop_at_val, "train");
    c.init_seed = get_or<std::uint64_t>(t, "init_seed", c.init_seed, "train");
    c.sampling_seed = get_or<std::uint64_t>(t, "sampling_seed", c.sampling_seed, "train");
    c.split_seed = get_or<std::uint64_t>(t, "split_seed", c.split_seed, "train");
    return c;
}

ordered_json train_section_echo(const TrainConfig& c) {
    ordered_json t;
    t["variant"] = variant_name(c.variant);
    t["dyn_total"] = c.dyn_total;
    t["rec_layers"] = c.rec_layers;
    t["rec_width"] = c.rec_width;
    t["n_freq"] = c.n_freq;
    t["n_states"] = c.n_states;
    t["mixed_memory"] = c.mixed_memory;
    t["fourier_scale"] = c.fourier_scale;
    t["ode_substeps"] = c.ode_substeps;
    t["lr"] = c.lr;
    t["batch_size"] = c.batch_size;
    t["points_per_epoch"] = c.points_per_epoch;
    t["max_epochs"] = c.max_epochs;
    t["train_fraction"] = c.train_fraction;
    t["stop_at_val"] = c.stop_at_val;
    t["init_seed"] = c.init_seed;
    t["sampling_seed"] = c.sampling_seed;
    t["split_seed"] = c.split_seed;
    return t;
}

struct SearchSettings {
    SearchSpace space;
    std::int64_t trials = 20;
    std::int64_t epochs_per_trial = 10;
    std::uint64_t seed = kDefaultSearchSeed;
};

SearchSettings parse_search_section(const json& root) {
    SearchSettings s;
    if (!root.contains("search")) return s;
    const json& j = root.at("search");
    reject_unknown_keys(j, "search",
                        {"trials", "epochs_per_trial", "seed", "dyn_total", "rec_layers",
                         "rec_width", "n_freq", "n_states", "lr"});
    s.trials = get_or<std::int64_t>(j, "trials", s.trials, "search");
    s.epochs_per_trial = get_or<std::int64_t>(j, "epochs_per_trial", s.epochs_per_trial, "search");
    s.seed = get_or<std::uint64_t>(j, "seed", s.seed, "search");
    s.space.dyn_total = get_or<std::vector<std::int64_t>>(j, "dyn_total", {}, "search");
    s.space.rec_layers = get_or<std::vector<std::int64_t>>(j, "rec_layers", {}, "search");
    s.space.rec_width = get_or<std::vector<std::int64_t>>(j, "rec_width", {}, "search");
    s.space.n_freq = get_or<std::vector<std::int64_t>>(j, "n_freq", {}, "search");
    s.space.n_states = get_or<std::vector<std::int64_t>>(j, "n_states", {}, "search");
    s.space.lr = get_or<std::vector<double>>(j, "lr", {}, "search");
    return s;
}

ordered_json search_section_echo(const SearchSettings& s) {
    ordered_json j;
    j["trials"] = s.trials;
    j["epochs_per_trial"] = s.epochs_per_trial;
    j["seed"] = s.seed;
    j["dyn_total"] = s.space.dyn_total;
    j["rec_layers"] = s.space.rec_layers;
    j["rec_width"] = s.space.rec_width;
    j["n_freq"] = s.space.n_freq;
    j["n_states"] = s.space.n_states;
    j["lr"] = s.space.lr;
    return j;
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

fs::path prepare_out_dir(const std::string& out, bool force) {
    const fs::path p(out);
    std::error_code ec;
    if (fs::exists(p)) {
        if (!force)
            throw ConfigError("output directory '" + out +
                              "' already exists; pass --force to replace it");
        fs::remove_all(p, ec);
        if (ec)
            throw ConfigError("cannot clear output directory '" + out + "': " + ec.message());
    }
    fs::create_directories(p, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out + "': " + ec.message());
    return p;
}

/// Resolved-config echo: stderr (diagnostics channel) + <out>/config.json.
/// The output location itself is deliberately absent from the echo — it is
/// implicit in where the file lives — so identical configs produce
/// byte-identical echoes no matter where their runs land.
void emit_config_echo(const fs::path& out_dir, const ordered_json& echo) {
    const std::string text = echo.dump(2) + "\n";
    const fs::path path = out_dir / "config.json";
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    f << text;
    f.flush();
    if (!f) throw ConfigError("failed while writing '" + path.string() + "'");
    std::fputs("resolved config:\n", stderr);
    std::fputs(text.c_str(), stderr);
}

void write_f32_blob(const fs::path& path, const std::vector<float>& data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    f.write(reinterpret_cast<const char*>(data.data()),
            std::streamsize(data.size() * sizeof(float)));
    f.flush();
    if (!f) throw ConfigError("failed while writing '" + path.string() + "'");
}

long long ll(std::int64_t v) { return static_cast<long long>(v); }

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct DatagenArgs {
    std::string config, out;
    bool force = false;
};

int cmd_datagen(const DatagenArgs& a) {
    const json cfg = load_config_file(a.config);
    reject_unknown_keys(cfg, "", {"generator", "samples", "seed", "grid", "train", "search"});
    const std::string gen = get_or<std::string>(cfg, "generator", "", "");
    if (gen != "monodomain" && gen != "advdiff" && gen != "zero")
        throw ConfigError(gen.empty()
                              ? "config: datagen requires a 'generator' key "
                                "(monodomain | advdiff | zero)"
                              : "config: unknown generator '" + gen +
                                    "' (expected monodomain | advdiff | zero)");
    const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", kDefaultDataSeed, "");
    const json grid_obj = cfg.contains("grid") ? cfg.at("grid") : json::object();

    ordered_json echo;
    echo["command"] = "datagen";
    echo["generator"] = gen;
    echo["seed"] = seed;

    std::int64_t samples = 0;
    Grid1d grid;
    std::int64_t zero_nodes = 16, zero_steps = 10;
    if (gen == "zero") {
        reject_unknown_keys(grid_obj, "grid", {"n_nodes", "t_steps"});
        samples = get_or<std::int64_t>(cfg, "samples", 8, "");
        zero_nodes = get_or<std::int64_t>(grid_obj, "n_nodes", zero_nodes, "grid");
        zero_steps = get_or<std::int64_t>(grid_obj, "t_steps", zero_steps, "grid");
        echo["samples"] = samples;
        echo["grid"] = ordered_json{{"n_nodes", zero_nodes}, {"t_steps", zero_steps}};
    } else {
        reject_unknown_keys(grid_obj, "grid", {"n_nodes", "length", "dt", "t_end", "save_stride"});
        samples = get_or<std::int64_t>(cfg, "samples", gen == "monodomain" ? 50 : 32, "");
        grid = gen == "monodomain" ? monodomain_grid() : advdiff_grid();
        grid.n_nodes = get_or<std::int64_t>(grid_obj, "n_nodes", grid.n_nodes, "grid");
        grid.length = get_or<double>(grid_obj, "length", grid.length, "grid");
        grid.dt = get_or<double>(grid_obj, "dt", grid.dt, "grid");
        grid.t_end = get_or<double>(grid_obj, "t_end", grid.t_end, "grid");
        grid.save_stride = get_or<std::int64_t>(grid_obj, "save_stride", grid.save_stride, "grid");
        echo["samples"] = samples;
        echo["grid"] = ordered_json{{"n_nodes", grid.n_nodes},
                                    {"length", grid.length},
                                    {"dt", grid.dt},
                                    {"t_end", grid.t_end},
                                    {"save_stride", grid.save_stride}};
    }

    const fs::path out_dir = prepare_out_dir(a.out, a.force);
    emit_config_echo(out_dir, echo);

    TrajectoryDataset ds;
    try {
        if (gen == "monodomain")
            ds = make_monodomain_dataset(samples, seed, grid);
        else if (gen == "advdiff")
            ds = make_advdiff_dataset(samples, seed, grid);
        else
            ds = make_zero_dataset(samples, zero_nodes, zero_steps, seed);
        write_dataset(ds, out_dir.string());
    } catch (const ConfigError&) {
        throw;  // bad sizes/steps in the config -> exit 2 upstream
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: dataset generation failed: %s\n", e.what());
        return kExitDatagen;
    }
    std::printf("dataset written to %s (%lld samples, %lld nodes, %lld steps, %lld channels)\n",
                out_dir.string().c_str(), ll(ds.n_samples()), ll(ds.n_nodes()), ll(ds.t_steps()),
                ll(ds.n_inputs));
    return kExitOk;
}

struct TrainArgs {
    std::string config, data, out;
    bool force = false;
    std::int64_t max_epochs = -1;  // -1 = keep the config's value
};

int cmd_train(const TrainArgs& a) {
    const json cfg = load_config_file(a.config);
    reject_unknown_keys(cfg, "", {"generator", "samples", "seed", "grid", "train", "search"});
    TrainConfig tc = parse_train_section(cfg);
    if (a.max_epochs >= 1) tc.max_epochs = a.max_epochs;

    const TrajectoryDataset ds = read_dataset(a.data);

    ordered_json echo;
    echo["command"] = "train";
    echo["data"] = a.data;
    echo["train"] = train_section_echo(tc);
    const fs::path out_dir = prepare_out_dir(a.out, a.force);
    emit_config_echo(out_dir, echo);

    if (tc.variant == Variant::lfldnet && tc.n_freq == 0)
        std::fputs(
            "note: variant 'lfldnet' with n_freq = 0 has no Fourier embedding; "
            "it is structurally identical to 'lldnet'\n",
            stderr);

    const TrainResult r = train(ds, tc);
    write_history_csv((out_dir / "history.csv").string(), r.history);
    save_checkpoint(r.model, (out_dir / "model.ckpt").string());

    if (r.history.diverged) {
        std::fprintf(stderr,
                     "error: training diverged at epoch %lld; %s holds the last good "
                     "parameters and history.csv the epochs before the failure\n",
                     ll(r.history.diverged_epoch), (out_dir / "model.ckpt").string().c_str());
        return kExitDivergence;
    }
    std::printf("trained %lld epochs: final train %.6g, final val %.6g, best val %.6g "
                "at epoch %lld\n",
                ll(r.history.epochs()), r.history.train_loss.back(), r.history.val_loss.back(),
                r.history.best_val, ll(r.history.best_epoch));
    std::printf("checkpoint: %s\nhistory: %s\n", (out_dir / "model.ckpt").string().c_str(),
                (out_dir / "history.csv").string().c_str());
    return kExitOk;
}

struct InferArgs {
    std::string checkpoint, data, out;
    std::int64_t sample = 0;
    std::int64_t chunks = 1;
    bool force = false;
};

int cmd_infer(const InferArgs& a) {
    if (a.chunks < 1) throw ConfigError("--chunks must be >= 1");
    const LatentModel m = load_checkpoint(a.checkpoint);
    const TrajectoryDataset ds = read_dataset(a.data);

    if (m.config.n_inputs != ds.n_inputs)
        throw ShapeError("checkpoint expects " + std::to_string(m.config.n_inputs) +
                         " input channels, dataset has " + std::to_string(ds.n_inputs));
    if (m.config.n_dim != ds.n_dim)
        throw ShapeError("checkpoint expects " + std::to_string(m.config.n_dim) +
                         "-dimensional coordinates, dataset has " + std::to_string(ds.n_dim));
    if (m.config.n_out != ds.n_out)
        throw ShapeError("checkpoint predicts " + std::to_string(m.config.n_out) +
                         " output channels, dataset has " + std::to_string(ds.n_out));
    if (a.sample < 0 || a.sample >= ds.n_samples())
        throw ShapeError("sample index " + std::to_string(a.sample) +
                         " out of range; the dataset holds " + std::to_string(ds.n_samples()) +
                         " samples");

    ordered_json echo;
    echo["command"] = "infer";
    echo["checkpoint"] = a.checkpoint;
    echo["data"] = a.data;
    echo["sample"] = a.sample;
    echo["chunks"] = a.chunks;
    const fs::path out_dir = prepare_out_dir(a.out, a.force);
    emit_config_echo(out_dir, echo);

    const SampleRecord& rec = ds.samples[std::size_t(a.sample)];
    const std::vector<double> times = ds.times_f64();
    const std::vector<float> pred = model_forward(m, rec.inputs, times, ds.coords, a.chunks);
    write_f32_blob(out_dir / "prediction.bin", pred);

    const auto states = m.trajectory(rec.inputs, times);
    write_states_csv((out_dir / "states.csv").string(), times, states);

    std::printf("prediction written to %s (%lld steps x %lld nodes x %lld channels, f32)\n",
                (out_dir / "prediction.bin").string().c_str(), ll(ds.t_steps()), ll(ds.n_nodes()),
                ll(ds.n_out));
    std::printf("states written to %s (%lld rows, %lld state columns)\n",
                (out_dir / "states.csv").string().c_str(), ll(ds.t_steps()),
                ll(m.config.n_states));
    return kExitOk;
}

struct EvalArgs {
    std::string checkpoint, data, out;
    bool error_fields = false;
    bool force = false;
};

int cmd_eval(const EvalArgs& a) {
    const LatentModel m = load_checkpoint(a.checkpoint);
    const TrajectoryDataset ds = read_dataset(a.data);

    ordered_json echo;
    echo["command"] = "eval";
    echo["checkpoint"] = a.checkpoint;
    echo["data"] = a.data;
    echo["error_fields"] = a.error_fields;
    const fs::path out_dir = prepare_out_dir(a.out, a.force);
    emit_config_echo(out_dir, echo);

    const EvalReport rep = evaluate(m, ds, a.error_fields);

    ordered_json metrics;
    metrics["mean_mse"] = rep.mean_mse;
    metrics["n_samples"] = ds.n_samples();
    metrics["per_sample_mse"] = rep.per_sample_mse;
    if (a.error_fields) {
        fs::create_directories(out_dir / "error_fields");
        std::vector<std::string> files;
        for (std::size_t k = 0; k < rep.error_fields.size(); ++k) {
            char name[48];
            std::snprintf(name, sizeof name, "error_fields/err_%03zu.bin", k);
            write_f32_blob(out_dir / name, rep.error_fields[k]);
            files.emplace_back(name);
        }
        metrics["error_field_files"] = files;
    }

    const std::string text = metrics.dump(2) + "\n";
    const fs::path mpath = out_dir / "metrics.json";
    std::ofstream f(mpath, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + mpath.string() + "'");
    f << text;
    f.flush();
    if (!f) throw ConfigError("failed while writing '" + mpath.string() + "'");
    std::fputs(text.c_str(), stdout);
    return kExitOk;
}

struct SweepArgs {
    std::string config, data, out;
    bool force = false;
};

int cmd_sweep(const SweepArgs& a) {
    const json cfg = load_config_file(a.config);
    reject_unknown_keys(cfg, "", {"generator", "samples", "seed", "grid", "train", "search"});
    const TrainConfig base = parse_train_section(cfg);
    const SearchSettings s = parse_search_section(cfg);

    const TrajectoryDataset ds = read_dataset(a.data);

    ordered_json echo;
    echo["command"] = "sweep";
    echo["data"] = a.data;
    echo["train"] = train_section_echo(base);
    echo["search"] = search_section_echo(s);
    const fs::path out_dir = prepare_out_dir(a.out, a.force);
    emit_config_echo(out_dir, echo);

    const std::vector<TrialResult> table =
        random_search(ds, base, s.space, s.trials, s.epochs_per_trial, s.seed);
    write_search_table_json((out_dir / "search.json").string(), table);
    for (const TrialResult& t : table) {
        if (t.rejected || t.history.epochs() == 0) continue;
        char name[32];
        std::snprintf(name, sizeof name, "trial_%03lld.csv", ll(t.trial));
        write_history_csv((out_dir / name).string(), t.history);
    }

    std::printf("ran %lld trials for %lld epochs each; table: %s\n", ll(s.trials),
                ll(s.epochs_per_trial), (out_dir / "search.json").string().c_str());
    for (const TrialResult& t : table) {
        if (t.rejected)
            std::printf("  trial %lld: rejected (%s)\n", ll(t.trial), t.note.c_str());
        else
            std::printf("  trial %lld: final val %.6g%s\n", ll(t.trial), t.final_val,
                        t.note.empty() ? "" : (" (" + t.note + ")").c_str());
    }
    return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

int cli_main(int argc, const char* const* argv) {
    CLI::App app{
        "Latent-dynamics surrogates for parameterized PDEs: generate trajectory "
        "datasets, train liquid/Fourier latent models, run chunked inference, "
        "evaluate, and sweep hyperparameters.\n"
        "Each command takes one JSON config file (comments allowed, unknown keys "
        "rejected) and echoes the fully-resolved configuration to stderr and "
        "<out>/config.json."};
    app.require_subcommand(1);

    DatagenArgs dg;
    CLI::App* datagen = app.add_subcommand(
        "datagen", "Generate a trajectory dataset (generators: monodomain, advdiff, zero)");
    datagen->add_option("config", dg.config, "JSON config file")->required();
    datagen->add_option("--out", dg.out, "output dataset directory")->required();
    datagen->add_flag("--force", dg.force, "replace the output directory if it exists");

    TrainArgs tr;
    CLI::App* train_cmd =
        app.add_subcommand("train", "Train a model; writes model.ckpt and history.csv");
    train_cmd->add_option("config", tr.config, "JSON config file")->required();
    train_cmd->add_option("--data", tr.data, "dataset directory")->required();
    train_cmd->add_option("--out", tr.out, "output run directory")->required();
    train_cmd->add_flag("--force", tr.force, "replace the output directory if it exists");
    train_cmd->add_option("--max-epochs", tr.max_epochs,
                          "override the config's train.max_epochs");

    InferArgs in;
    CLI::App* infer = app.add_subcommand(
        "infer", "Predict one sample's fields (prediction.bin) and latent states (states.csv)");
    infer->add_option("--checkpoint", in.checkpoint, "trained model checkpoint")->required();
    infer->add_option("--data", in.data, "dataset directory")->required();
    infer->add_option("--out", in.out, "output run directory")->required();
    infer->add_option("--sample", in.sample, "sample index (default 0)");
    infer->add_option("--chunks", in.chunks,
                      "node partitions for memory-bounded inference (output is "
                      "bitwise identical for any count)");
    infer->add_flag("--force", in.force, "replace the output directory if it exists");

    EvalArgs ev;
    CLI::App* eval_cmd = app.add_subcommand(
        "eval", "Per-sample normalized MSE; metrics JSON on stdout and <out>/metrics.json");
    eval_cmd->add_option("--checkpoint", ev.checkpoint, "trained model checkpoint")->required();
    eval_cmd->add_option("--data", ev.data, "dataset directory")->required();
    eval_cmd->add_option("--out", ev.out, "output run directory")->required();
    eval_cmd->add_flag("--error-fields", ev.error_fields,
                       "also export per-sample |prediction - observation| blobs");
    eval_cmd->add_flag("--force", ev.force, "replace the output directory if it exists");

    SweepArgs sw;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "Seeded random hyperparameter search; ranked table + per-trial histories");
    sweep->add_option("config", sw.config, "JSON config file with a 'search' section")
        ->required();
    sweep->add_option("--data", sw.data, "dataset directory")->required();
    sweep->add_option("--out", sw.out, "output run directory")->required();
    sweep->add_flag("--force", sw.force, "replace the output directory if it exists");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, returns 0
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage error
        return kExitConfig;
    }

    try {
        if (datagen->parsed()) return cmd_datagen(dg);
        if (train_cmd->parsed()) return cmd_train(tr);
        if (infer->parsed()) return cmd_infer(in);
        if (eval_cmd->parsed()) return cmd_eval(ev);
        if (sweep->parsed()) return cmd_sweep(sw);
        std::fputs("error: no command given\n", stderr);
        return kExitConfig;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDivergence;
    } catch (const ShapeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIncompatible;
    } catch (const StateError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIncompatible;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const FormatError& e) {  // covers VersionError
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const IntegrityError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return kExitUnexpected;
    }
}

}  // namespace lfld

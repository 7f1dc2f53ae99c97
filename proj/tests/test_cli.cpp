#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "lfld/cli.hpp"
#include "lfld/dataset.hpp"

// Integration tests that drive the real binary named by LFLD_CLI_BINARY
// (set by ctest). Every case builds its own artifacts under a fresh
// directory, so cases can run in any order or in isolation.

using namespace lfld;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string cli_binary() {
    const char* bin = std::getenv("LFLD_CLI_BINARY");
    REQUIRE_MESSAGE(bin != nullptr,
                    "LFLD_CLI_BINARY must point at the CLI executable (ctest sets it)");
    return bin;
}

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("lfld_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(bool(in), "cannot open " << p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    REQUIRE(bool(out));
    out << text;
}

CmdResult run_cli(const std::string& args, const fs::path& scratch, const std::string& tag) {
    const fs::path so = scratch / ("stdout_" + tag + ".txt");
    const fs::path se = scratch / ("stderr_" + tag + ".txt");
    const std::string cmd =
        "\"" + cli_binary() + "\" " + args + " >\"" + so.string() + "\" 2>\"" + se.string() + "\"";
    const int rc = std::system(cmd.c_str());
    CmdResult r;
    r.code = (rc >= 0 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(so);
    r.err = slurp(se);
    return r;
}

/// Relative-path listing + byte contents must match between two directories.
bool dirs_bitwise_equal(const fs::path& a, const fs::path& b,
                        const std::vector<std::string>& skip = {}) {
    auto listing = [&](const fs::path& root) {
        std::vector<std::string> rel;
        for (const auto& e : fs::recursive_directory_iterator(root))
            if (e.is_regular_file()) {
                std::string r = fs::relative(e.path(), root).string();
                bool skipped = false;
                for (const std::string& s : skip) skipped = skipped || r == s;
                if (!skipped) rel.push_back(std::move(r));
            }
        std::sort(rel.begin(), rel.end());
        return rel;
    };
    const auto la = listing(a), lb = listing(b);
    if (la != lb) return false;
    for (const std::string& r : la)
        if (slurp(a / r) != slurp(b / r)) return false;
    return true;
}

/// Parsed CSV rows (no header), cells as strings.
std::vector<std::vector<std::string>> csv_rows(const fs::path& p, std::string* header = nullptr) {
    std::ifstream in(p);
    REQUIRE_MESSAGE(bool(in), "cannot open " << p.string());
    std::string line;
    REQUIRE(std::getline(in, line));
    if (header) *header = line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string zero_datagen_config() {
    return R"({"generator": "zero", "samples": 26, "seed": 42,
               "grid": {"n_nodes": 12, "t_steps": 8}})";
}

/// Calibrated so the constant-zero target trains below 1e-6 in 50 epochs.
std::string zero_train_config(std::int64_t max_epochs = 50) {
    return std::string(R"({"train": {"variant": "lfldnet", "dyn_total": 32, "rec_layers": 2,
               "rec_width": 32, "n_freq": 2, "n_states": 2, "lr": 1e-2, "batch_size": 1,
               "points_per_epoch": 12, "max_epochs": )") +
           std::to_string(max_epochs) +
           R"(, "init_seed": 1, "sampling_seed": 2, "split_seed": 3}})";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage problems exit with the config code") {
    const fs::path dir = fresh_dir("usage");

    CHECK(run_cli("", dir, "noargs").code == kExitConfig);
    CHECK(run_cli("frobnicate", dir, "badcmd").code == kExitConfig);
    CHECK(run_cli("train cfg.json --data x", dir, "missingout").code == kExitConfig);
    CHECK(run_cli("datagen /nonexistent/cfg.json --out " + (dir / "d").string(), dir,
                  "missingcfg")
              .code == kExitConfig);

    const CmdResult help = run_cli("--help", dir, "help");
    CHECK(help.code == 0);
    CHECK(help.out.find("datagen") != std::string::npos);
    CHECK(help.out.find("sweep") != std::string::npos);
}

TEST_CASE("datagen writes a valid dataset, refuses overwrites, and is bitwise deterministic") {
    const fs::path dir = fresh_dir("datagen");
    const fs::path cfg = dir / "gen.json";
    write_text(cfg, "// human-readable config with comments\n" + zero_datagen_config());
    const fs::path out1 = dir / "ds1";

    const CmdResult first =
        run_cli("datagen " + cfg.string() + " --out " + out1.string(), dir, "first");
    CHECK(first.code == 0);
    CHECK(first.err.find("resolved config") != std::string::npos);
    CHECK(first.err.find("\"seed\": 42") != std::string::npos);

    const TrajectoryDataset ds = read_dataset(out1.string());
    CHECK(ds.n_samples() == 26);
    CHECK(ds.n_nodes() == 12);
    CHECK(ds.t_steps() == 8);

    // The echo file materializes every default.
    const auto echo = nlohmann::json::parse(slurp(out1 / "config.json"));
    CHECK(echo.at("generator") == "zero");
    CHECK(echo.at("samples") == 26);
    CHECK(echo.at("grid").at("t_steps") == 8);

    const CmdResult dup =
        run_cli("datagen " + cfg.string() + " --out " + out1.string(), dir, "dup");
    CHECK(dup.code == kExitConfig);
    CHECK(dup.err.find("--force") != std::string::npos);
    CHECK(run_cli("datagen " + cfg.string() + " --out " + out1.string() + " --force", dir,
                  "forced")
              .code == 0);

    const fs::path out2 = dir / "ds2";
    CHECK(run_cli("datagen " + cfg.string() + " --out " + out2.string(), dir, "second").code ==
          0);
    CHECK(dirs_bitwise_equal(out1, out2));

    // A different seed must not produce the same bytes.
    const fs::path cfg3 = dir / "gen3.json";
    write_text(cfg3, R"({"generator": "zero", "samples": 26, "seed": 43,
                         "grid": {"n_nodes": 12, "t_steps": 8}})");
    const fs::path out3 = dir / "ds3";
    CHECK(run_cli("datagen " + cfg3.string() + " --out " + out3.string(), dir, "third").code ==
          0);
    CHECK_FALSE(dirs_bitwise_equal(out1, out3));
}

TEST_CASE("datagen rejects malformed configs and impossible numerics") {
    const fs::path dir = fresh_dir("datagen_bad");

    const fs::path unknown = dir / "unknown.json";
    write_text(unknown, R"({"generator": "zero", "surprise": 1})");
    const CmdResult u =
        run_cli("datagen " + unknown.string() + " --out " + (dir / "o1").string(), dir, "u");
    CHECK(u.code == kExitConfig);
    CHECK(u.err.find("surprise") != std::string::npos);

    const fs::path badgrid = dir / "badgrid.json";
    write_text(badgrid, R"({"generator": "zero", "grid": {"dt": 0.1}})");
    CHECK(run_cli("datagen " + badgrid.string() + " --out " + (dir / "o2").string(), dir, "g")
              .code == kExitConfig);

    const fs::path badgen = dir / "badgen.json";
    write_text(badgen, R"({"generator": "heat3d"})");
    const CmdResult bg =
        run_cli("datagen " + badgen.string() + " --out " + (dir / "o3").string(), dir, "bg");
    CHECK(bg.code == kExitConfig);
    CHECK(bg.err.find("heat3d") != std::string::npos);

    // An unstable monodomain step size is a config-shaped failure.
    const fs::path unstable = dir / "unstable.json";
    write_text(unstable,
               R"({"generator": "monodomain", "samples": 2, "grid": {"dt": 0.1}})");
    const CmdResult us =
        run_cli("datagen " + unstable.string() + " --out " + (dir / "o4").string(), dir, "us");
    CHECK(us.code == kExitConfig);
    CHECK(us.err.find("stability") != std::string::npos);

    const fs::path notjson = dir / "broken.json";
    write_text(notjson, "{\"generator\": ");
    CHECK(run_cli("datagen " + notjson.string() + " --out " + (dir / "o5").string(), dir, "nj")
              .code == kExitConfig);
}

TEST_CASE("train reaches the zero-target bar, echoes defaults, and honors --max-epochs") {
    const fs::path dir = fresh_dir("train");
    const fs::path gen_cfg = dir / "gen.json";
    write_text(gen_cfg, zero_datagen_config());
    const fs::path ds = dir / "ds";
    REQUIRE(run_cli("datagen " + gen_cfg.string() + " --out " + ds.string(), dir, "gen").code ==
            0);

    const fs::path tr_cfg = dir / "train.json";
    write_text(tr_cfg, zero_train_config());
    const fs::path run = dir / "run";
    const CmdResult t =
        run_cli("train " + tr_cfg.string() + " --data " + ds.string() + " --out " + run.string(),
                dir, "train");
    CHECK(t.code == 0);
    CHECK(fs::file_size(run / "model.ckpt") > 0);

    std::string header;
    const auto rows = csv_rows(run / "history.csv", &header);
    CHECK(header == "epoch,train_loss,val_loss,seconds");
    REQUIRE(rows.size() == 50);
    REQUIRE(rows.back().size() == 4);
    CHECK(std::stod(rows.back()[1]) < 1e-6);

    // The run directory names its artifacts in stdout.
    CHECK(t.out.find("model.ckpt") != std::string::npos);

    // Seeds omitted from the config surface in the echo with their defaults.
    const fs::path tr_noseed = dir / "train_noseed.json";
    write_text(tr_noseed, R"({"train": {"dyn_total": 24, "rec_layers": 1, "rec_width": 8,
                              "n_freq": 2, "n_states": 2, "batch_size": 4}})");
    const fs::path run2 = dir / "run_noseed";
    const CmdResult t2 = run_cli("train " + tr_noseed.string() + " --data " + ds.string() +
                                     " --out " + run2.string() + " --max-epochs 1",
                                 dir, "noseed");
    CHECK(t2.code == 0);
    const auto echo = nlohmann::json::parse(slurp(run2 / "config.json"));
    CHECK(echo.at("train").at("init_seed") == 1);
    CHECK(echo.at("train").at("sampling_seed") == 2);
    CHECK(echo.at("train").at("split_seed") == 3);
    CHECK(echo.at("train").at("lr") == 3e-4);
    CHECK(echo.at("train").at("max_epochs") == 1);  // the flag override is echoed
    CHECK(csv_rows(run2 / "history.csv").size() == 1);

    // Unknown keys in the train section are refused.
    const fs::path tr_bad = dir / "train_bad.json";
    write_text(tr_bad, R"({"train": {"learning_rate": 1e-3}})");
    const CmdResult tb = run_cli("train " + tr_bad.string() + " --data " + ds.string() +
                                     " --out " + (dir / "run_bad").string(),
                                 dir, "bad");
    CHECK(tb.code == kExitConfig);
    CHECK(tb.err.find("learning_rate") != std::string::npos);
}

TEST_CASE("train warns that a Fourier-free lfldnet equals the liquid ablation") {
    const fs::path dir = fresh_dir("train_nf0");
    const fs::path gen_cfg = dir / "gen.json";
    write_text(gen_cfg, R"({"generator": "zero", "samples": 4, "seed": 1,
                            "grid": {"n_nodes": 8, "t_steps": 6}})");
    const fs::path ds = dir / "ds";
    REQUIRE(run_cli("datagen " + gen_cfg.string() + " --out " + ds.string(), dir, "gen").code ==
            0);
    const fs::path cfg = dir / "train.json";
    write_text(cfg, R"({"train": {"variant": "lfldnet", "n_freq": 0, "dyn_total": 24,
                        "rec_layers": 1, "rec_width": 8, "n_states": 2, "batch_size": 2}})");
    const CmdResult t = run_cli("train " + cfg.string() + " --data " + ds.string() + " --out " +
                                    (dir / "run").string() + " --max-epochs 1",
                                dir, "t");
    CHECK(t.code == 0);
    CHECK(t.err.find("lldnet") != std::string::npos);
}

TEST_CASE("training divergence exits with its own code and names the epoch") {
    const fs::path dir = fresh_dir("train_div");
    const fs::path gen_cfg = dir / "gen.json";
    // Constant-zero data normalizes to all-zero inputs, which the saturating
    // activations keep bounded at any learning rate, so real PDE data is used.
    write_text(gen_cfg, R"({"generator": "monodomain", "samples": 4, "seed": 3})");
    const fs::path ds = dir / "ds";
    REQUIRE(run_cli("datagen " + gen_cfg.string() + " --out " + ds.string(), dir, "gen").code ==
            0);
    const fs::path cfg = dir / "train.json";
    write_text(cfg, R"({"train": {"dyn_total": 24, "rec_layers": 1, "rec_width": 8,
                        "n_freq": 2, "n_states": 2, "lr": 1e20, "batch_size": 2,
                        "points_per_epoch": 16, "max_epochs": 10}})");
    const CmdResult t = run_cli(
        "train " + cfg.string() + " --data " + ds.string() + " --out " + (dir / "run").string(),
        dir, "t");
    CHECK(t.code == kExitDivergence);
    CHECK(t.err.find("diverged at epoch") != std::string::npos);
    CHECK(fs::exists(dir / "run" / "model.ckpt"));
    CHECK(fs::exists(dir / "run" / "history.csv"));
}

TEST_CASE("inference is chunk-invariant, repeatable, and checks compatibility") {
    const fs::path dir = fresh_dir("infer");
    const fs::path gen_cfg = dir / "gen.json";
    write_text(gen_cfg, zero_datagen_config());
    const fs::path ds = dir / "ds";
    REQUIRE(run_cli("datagen " + gen_cfg.string() + " --out " + ds.string(), dir, "gen").code ==
            0);
    const fs::path tr_cfg = dir / "train.json";
    write_text(tr_cfg, zero_train_config(5));
    const fs::path run = dir / "run";
    REQUIRE(run_cli("train " + tr_cfg.string() + " --data " + ds.string() + " --out " +
                        run.string(),
                    dir, "train")
                .code == 0);
    const std::string ckpt = (run / "model.ckpt").string();

    const fs::path i1 = dir / "infer1", i7 = dir / "infer7", i1b = dir / "infer1b";
    const std::string base_args = "infer --checkpoint " + ckpt + " --data " + ds.string();
    CHECK(run_cli(base_args + " --sample 1 --chunks 1 --out " + i1.string(), dir, "c1").code ==
          0);
    CHECK(run_cli(base_args + " --sample 1 --chunks 7 --out " + i7.string(), dir, "c7").code ==
          0);
    CHECK(run_cli(base_args + " --sample 1 --chunks 1 --out " + i1b.string(), dir, "c1b").code ==
          0);

    const std::string p1 = slurp(i1 / "prediction.bin");
    CHECK(p1 == slurp(i7 / "prediction.bin"));       // chunked == unchunked, bitwise
    CHECK(p1 == slurp(i1b / "prediction.bin"));      // repeat run, bitwise
    CHECK(p1.size() == std::size_t(8 * 12 * 4));     // T x N x n_out, f32
    CHECK(slurp(i1 / "states.csv") == slurp(i1b / "states.csv"));

    std::string header;
    const auto srows = csv_rows(i1 / "states.csv", &header);
    CHECK(header == "time,s_1,s_2");  // n_states + 1 columns
    CHECK(srows.size() == 8);         // one row per step
    for (const auto& row : srows) CHECK(row.size() == 3);

    const CmdResult oob =
        run_cli(base_args + " --sample 99 --out " + (dir / "oob").string(), dir, "oob");
    CHECK(oob.code == kExitIncompatible);
    CHECK(oob.err.find("out of range") != std::string::npos);

    // A dataset with a different input-channel count is refused, naming it.
    const fs::path mono_cfg = dir / "mono.json";
    write_text(mono_cfg, R"({"generator": "monodomain", "samples": 2, "seed": 1})");
    const fs::path mono_ds = dir / "mono_ds";
    REQUIRE(run_cli("datagen " + mono_cfg.string() + " --out " + mono_ds.string(), dir, "mg")
                .code == 0);
    const CmdResult mism = run_cli("infer --checkpoint " + ckpt + " --data " + mono_ds.string() +
                                       " --out " + (dir / "mism").string(),
                                   dir, "mism");
    CHECK(mism.code == kExitIncompatible);
    CHECK(mism.err.find("input channels") != std::string::npos);

    CHECK(run_cli(base_args + " --chunks 0 --out " + (dir / "c0").string(), dir, "c0").code ==
          kExitConfig);
}

TEST_CASE("eval prints metrics JSON to stdout, writes it to disk, and exports error fields") {
    const fs::path dir = fresh_dir("eval");
    const fs::path gen_cfg = dir / "gen.json";
    write_text(gen_cfg, R"({"generator": "monodomain", "samples": 6, "seed": 5})");
    const fs::path ds_dir = dir / "ds";
    REQUIRE(run_cli("datagen " + gen_cfg.string() + " --out " + ds_dir.string(), dir, "gen")
                .code == 0);
    const fs::path tr_cfg = dir / "train.json";
    write_text(tr_cfg, R"({"train": {"dyn_total": 24, "rec_layers": 2, "rec_width": 16,
                           "n_freq": 4, "n_states": 4, "lr": 3e-3, "batch_size": 2,
                           "points_per_epoch": 16, "max_epochs": 10}})");
    const fs::path run = dir / "run";
    REQUIRE(run_cli("train " + tr_cfg.string() + " --data " + ds_dir.string() + " --out " +
                        run.string(),
                    dir, "train")
                .code == 0);
    const std::string ckpt = (run / "model.ckpt").string();

    const fs::path ev = dir / "ev";
    const CmdResult plain = run_cli(
        "eval --checkpoint " + ckpt + " --data " + ds_dir.string() + " --out " + ev.string(),
        dir, "plain");
    CHECK(plain.code == 0);
    const auto metrics = nlohmann::json::parse(plain.out);
    CHECK(metrics.at("n_samples") == 6);
    REQUIRE(metrics.at("per_sample_mse").size() == 6);
    CHECK(metrics.at("mean_mse").get<double>() > 0.0);
    CHECK_FALSE(metrics.contains("error_field_files"));
    // stdout and the file carry the same document.
    CHECK(nlohmann::json::parse(slurp(ev / "metrics.json")) == metrics);
    CHECK_FALSE(fs::exists(ev / "error_fields"));

    const fs::path ev2 = dir / "ev2";
    const CmdResult withf = run_cli("eval --checkpoint " + ckpt + " --data " + ds_dir.string() +
                                        " --out " + ev2.string() + " --error-fields",
                                    dir, "fields");
    CHECK(withf.code == 0);
    const auto m2 = nlohmann::json::parse(withf.out);
    REQUIRE(m2.at("error_field_files").size() == 6);
    const TrajectoryDataset ds = read_dataset(ds_dir.string());
    const std::uintmax_t blob_bytes =
        std::uintmax_t(ds.t_steps() * ds.n_nodes() * ds.n_out) * 4;
    for (const auto& name : m2.at("error_field_files")) {
        const fs::path blob = ev2 / name.get<std::string>();
        REQUIRE(fs::exists(blob));
        CHECK(fs::file_size(blob) == blob_bytes);
    }

    // Mismatched dataset dims exit with the incompatibility code.
    const fs::path zgen = dir / "zgen.json";
    write_text(zgen, R"({"generator": "zero", "samples": 3, "seed": 1,
                         "grid": {"n_nodes": 8, "t_steps": 6}})");
    const fs::path zds = dir / "zds";
    REQUIRE(run_cli("datagen " + zgen.string() + " --out " + zds.string(), dir, "zg").code == 0);
    CHECK(run_cli("eval --checkpoint " + ckpt + " --data " + zds.string() + " --out " +
                      (dir / "ev3").string(),
                  dir, "mism")
              .code == kExitIncompatible);
}

TEST_CASE("sweep ranks trials into JSON, writes per-trial histories, and is seed-stable") {
    const fs::path dir = fresh_dir("sweep");
    const fs::path gen_cfg = dir / "gen.json";
    write_text(gen_cfg, R"({"generator": "zero", "samples": 6, "seed": 42,
                            "grid": {"n_nodes": 16, "t_steps": 10}})");
    const fs::path ds = dir / "ds";
    REQUIRE(run_cli("datagen " + gen_cfg.string() + " --out " + ds.string(), dir, "gen").code ==
            0);

    const fs::path cfg = dir / "sweep.json";
    write_text(cfg, R"({"train": {"dyn_total": 32, "rec_layers": 1, "rec_width": 16,
                        "n_freq": 2, "n_states": 2, "batch_size": 2, "points_per_epoch": 16,
                        "split_seed": 3},
                        "search": {"trials": 2, "epochs_per_trial": 3, "seed": 5,
                                   "rec_width": [8, 16], "lr": [1e-2, 3e-3]}})");
    const fs::path s1 = dir / "s1";
    const CmdResult r1 = run_cli(
        "sweep " + cfg.string() + " --data " + ds.string() + " --out " + s1.string(), dir, "s1");
    CHECK(r1.code == 0);

    const auto table = nlohmann::json::parse(slurp(s1 / "search.json"));
    REQUIRE(table.is_array());
    REQUIRE(table.size() == 2);
    CHECK(table[0].at("rank") == 1);
    CHECK(table[1].at("rank") == 2);
    CHECK(table[0].at("final_val_loss").get<double>() <=
          table[1].at("final_val_loss").get<double>());
    CHECK(fs::exists(s1 / "trial_001.csv"));
    CHECK(fs::exists(s1 / "trial_002.csv"));
    CHECK(csv_rows(s1 / "trial_001.csv").size() == 3);

    // Same seed, new directory: identical table bytes.
    const fs::path s2 = dir / "s2";
    REQUIRE(run_cli("sweep " + cfg.string() + " --data " + ds.string() + " --out " + s2.string(),
                    dir, "s2")
                .code == 0);
    CHECK(slurp(s1 / "search.json") == slurp(s2 / "search.json"));

    // No search section means an empty space: a config failure.
    const fs::path empty_cfg = dir / "empty.json";
    write_text(empty_cfg, R"({"train": {"dyn_total": 24}})");
    const CmdResult re = run_cli("sweep " + empty_cfg.string() + " --data " + ds.string() +
                                     " --out " + (dir / "s3").string(),
                                 dir, "s3");
    CHECK(re.code == kExitConfig);
    CHECK(re.err.find("empty") != std::string::npos);
}

TEST_CASE("the full pipeline reproduces losses and predictions bitwise under one seed set") {
    const fs::path dir = fresh_dir("pipeline");
    const fs::path gen_cfg = dir / "gen.json";
    write_text(gen_cfg, R"({"generator": "monodomain", "samples": 6, "seed": 7})");
    const fs::path tr_cfg = dir / "train.json";
    write_text(tr_cfg, R"({"train": {"dyn_total": 24, "rec_layers": 2, "rec_width": 24,
                           "n_freq": 4, "n_states": 4, "lr": 3e-3, "batch_size": 2,
                           "points_per_epoch": 16, "max_epochs": 10,
                           "init_seed": 1, "sampling_seed": 2, "split_seed": 3}})");

    auto pipeline = [&](const std::string& tag) {
        const fs::path ds = dir / ("ds_" + tag);
        const fs::path run = dir / ("run_" + tag);
        const fs::path inf = dir / ("inf_" + tag);
        REQUIRE(run_cli("datagen " + gen_cfg.string() + " --out " + ds.string(), dir,
                        "gen_" + tag)
                    .code == 0);
        REQUIRE(run_cli("train " + tr_cfg.string() + " --data " + ds.string() + " --out " +
                            run.string(),
                        dir, "train_" + tag)
                    .code == 0);
        REQUIRE(run_cli("infer --checkpoint " + (run / "model.ckpt").string() + " --data " +
                            ds.string() + " --sample 0 --out " + inf.string(),
                        dir, "infer_" + tag)
                    .code == 0);
        return std::make_tuple(ds, run, inf);
    };

    const auto [ds_a, run_a, inf_a] = pipeline("a");
    const auto [ds_b, run_b, inf_b] = pipeline("b");

    CHECK(dirs_bitwise_equal(ds_a, ds_b));
    CHECK(slurp(run_a / "model.ckpt") == slurp(run_b / "model.ckpt"));
    CHECK(slurp(inf_a / "prediction.bin") == slurp(inf_b / "prediction.bin"));
    CHECK(slurp(inf_a / "states.csv") == slurp(inf_b / "states.csv"));

    // Histories match on the loss columns; the wall-time column may not.
    const auto rows_a = csv_rows(run_a / "history.csv");
    const auto rows_b = csv_rows(run_b / "history.csv");
    REQUIRE(rows_a.size() == rows_b.size());
    REQUIRE(rows_a.size() == 10);
    for (std::size_t i = 0; i < rows_a.size(); ++i)
        for (std::size_t c = 0; c < 3; ++c)  // epoch, train_loss, val_loss
            CHECK(rows_a[i][c] == rows_b[i][c]);
}

}  // TEST_SUITE("cli")

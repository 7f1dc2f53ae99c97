#include "lfld/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lfld/rng.hpp"

namespace lfld {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string sample_blob_name(char prefix, std::int64_t k) {
    return std::string(1, prefix) + "_" + std::to_string(k) + ".bin";
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ContractError(msg);
}

bool all_finite(const std::vector<float>& v) {
    for (float x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Little-endian f32 blob I/O. The in-memory float layout on every supported
// target is already little-endian IEEE-754, so the byte copy is exact.
void write_f32_file(const fs::path& path, const std::vector<float>& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    static_assert(sizeof(float) == 4, "float must be 32-bit");
    if (!data.empty())
        out.write(reinterpret_cast<const char*>(data.data()),
                  std::streamsize(data.size() * 4));
    out.flush();
    if (!out) throw ConfigError("failed while writing '" + path.string() + "'");
}

std::vector<float> read_f32_file(const fs::path& path, std::int64_t expected_count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IntegrityError("dataset blob missing: '" + path.string() + "'");
    in.seekg(0, std::ios::end);
    const std::int64_t bytes = std::int64_t(in.tellg());
    in.seekg(0, std::ios::beg);
    if (bytes != expected_count * 4) {
        std::ostringstream msg;
        msg << "dataset blob '" << path.filename().string() << "' holds " << bytes
            << " bytes, expected " << expected_count * 4 << " (" << expected_count
            << " f32 values)";
        throw IntegrityError(msg.str());
    }
    std::vector<float> data(static_cast<std::size_t>(expected_count));
    if (expected_count > 0)
        in.read(reinterpret_cast<char*>(data.data()), std::streamsize(bytes));
    if (!in) throw IntegrityError("failed while reading '" + path.string() + "'");
    return data;
}

}  // namespace

void TrajectoryDataset::validate() const {
    require(n_dim > 0, "dataset: n_dim must be positive");
    require(n_inputs >= 0, "dataset: n_inputs must be non-negative");
    require(n_out > 0, "dataset: n_out must be positive");
    require(!generator.empty(), "dataset: generator name must not be empty");
    require(std::int64_t(coords.size()) % n_dim == 0,
            "dataset: coords length is not a multiple of n_dim");
    const std::int64_t nn = n_nodes();
    const std::int64_t ts = t_steps();
    require(nn > 0, "dataset: no spatial nodes");
    require(ts > 0, "dataset: no time steps");
    require(std::int64_t(mask.size()) == nn,
            "dataset: mask length does not match the node count");
    for (std::uint8_t m : mask)
        require(m == 0 || m == 1, "dataset: mask entries must be 0 or 1");
    require(std::int64_t(input_names.size()) == n_inputs,
            "dataset: input_names length does not match n_inputs");
    require(param_names.size() == param_ranges.size(),
            "dataset: param_names and param_ranges lengths differ");
    require(std::isfinite(mask_value), "dataset: mask_value must be finite");

    float prev = 0.0f;
    for (std::size_t i = 0; i < times.size(); ++i) {
        require(std::isfinite(times[i]), "dataset: non-finite time value");
        require(times[i] > prev, "dataset: times must be strictly increasing and > 0");
        prev = times[i];
    }
    require(all_finite(coords), "dataset: non-finite coordinate");

    require(param_values.size() == samples.size(),
            "dataset: one parameter record per sample is required");
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const SampleRecord& rec = samples[s];
        require(std::int64_t(rec.inputs.size()) == ts * n_inputs,
                "dataset: sample " + std::to_string(s) + " has a misshapen input matrix");
        require(std::int64_t(rec.fields.size()) == ts * nn * n_out,
                "dataset: sample " + std::to_string(s) + " has a misshapen field tensor");
        require(all_finite(rec.inputs),
                "dataset: sample " + std::to_string(s) + " has non-finite inputs");
        require(all_finite(rec.fields),
                "dataset: sample " + std::to_string(s) + " has non-finite fields");
        require(param_values[s].size() == param_names.size(),
                "dataset: sample " + std::to_string(s) + " parameter record length mismatch");
        for (double v : param_values[s])
            require(std::isfinite(v),
                    "dataset: sample " + std::to_string(s) + " has a non-finite parameter");
    }
}

void write_dataset(const TrajectoryDataset& ds, const std::string& dir) {
    ds.validate();
    const fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw ConfigError("cannot create dataset directory '" + dir + "': " + ec.message());

    json manifest;
    manifest["format"] = kDatasetFormatVersion;
    manifest["generator"] = ds.generator;
    manifest["seed"] = ds.seed;
    manifest["n_samples"] = ds.n_samples();
    manifest["n_nodes"] = ds.n_nodes();
    manifest["n_dim"] = ds.n_dim;
    manifest["t_steps"] = ds.t_steps();
    manifest["n_inputs"] = ds.n_inputs;
    manifest["n_out"] = ds.n_out;
    manifest["input_names"] = ds.input_names;
    manifest["mask_value"] = double(ds.mask_value);
    json params = json::array();
    for (std::size_t j = 0; j < ds.param_names.size(); ++j) {
        json p;
        p["name"] = ds.param_names[j];
        p["lo"] = ds.param_ranges[j][0];
        p["hi"] = ds.param_ranges[j][1];
        json vals = json::array();
        for (const auto& rec : ds.param_values) vals.push_back(rec[j]);
        p["values"] = std::move(vals);
        params.push_back(std::move(p));
    }
    manifest["params"] = std::move(params);

    {
        std::ofstream out(root / "manifest.json", std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open '" + (root / "manifest.json").string() +
                                    "' for writing");
        out << manifest.dump(2) << "\n";
        out.flush();
        if (!out) throw ConfigError("failed while writing the dataset manifest");
    }

    write_f32_file(root / "coords.bin", ds.coords);
    write_f32_file(root / "times.bin", ds.times);
    std::vector<float> mask_f(ds.mask.size());
    for (std::size_t i = 0; i < ds.mask.size(); ++i) mask_f[i] = float(ds.mask[i]);
    write_f32_file(root / "mask.bin", mask_f);
    for (std::int64_t k = 0; k < ds.n_samples(); ++k) {
        write_f32_file(root / sample_blob_name('I', k), ds.samples[std::size_t(k)].inputs);
        write_f32_file(root / sample_blob_name('u', k), ds.samples[std::size_t(k)].fields);
    }
}

TrajectoryDataset read_dataset(const std::string& dir) {
    const fs::path root(dir);
    const fs::path manifest_path = root / "manifest.json";
    if (!fs::exists(manifest_path))
        throw FormatError("no dataset manifest at '" + manifest_path.string() + "'");

    json manifest;
    try {
        std::ifstream in(manifest_path, std::ios::binary);
        if (!in) throw FormatError("cannot open '" + manifest_path.string() + "'");
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("unparsable dataset manifest: " + std::string(e.what()));
    }

    TrajectoryDataset ds;
    std::int64_t n_samples = 0, n_nodes = 0, t_steps = 0;
    try {
        const std::string fmt = manifest.at("format").get<std::string>();
        if (fmt != kDatasetFormatVersion)
            throw VersionError("unsupported dataset format version '" + fmt +
                               "' (this build reads version '" +
                               std::string(kDatasetFormatVersion) + "')");
        ds.generator = manifest.at("generator").get<std::string>();
        ds.seed = manifest.at("seed").get<std::uint64_t>();
        n_samples = manifest.at("n_samples").get<std::int64_t>();
        n_nodes = manifest.at("n_nodes").get<std::int64_t>();
        ds.n_dim = manifest.at("n_dim").get<std::int64_t>();
        t_steps = manifest.at("t_steps").get<std::int64_t>();
        ds.n_inputs = manifest.at("n_inputs").get<std::int64_t>();
        ds.n_out = manifest.at("n_out").get<std::int64_t>();
        ds.input_names = manifest.at("input_names").get<std::vector<std::string>>();
        ds.mask_value = float(manifest.at("mask_value").get<double>());
        for (const json& p : manifest.at("params")) {
            ds.param_names.push_back(p.at("name").get<std::string>());
            ds.param_ranges.push_back({p.at("lo").get<double>(), p.at("hi").get<double>()});
            const auto vals = p.at("values").get<std::vector<double>>();
            if (std::int64_t(vals.size()) != n_samples)
                throw IntegrityError("dataset manifest: parameter '" +
                                     ds.param_names.back() + "' carries " +
                                     std::to_string(vals.size()) + " values for " +
                                     std::to_string(n_samples) + " samples");
            if (ds.param_values.empty()) ds.param_values.resize(std::size_t(n_samples));
            for (std::int64_t s = 0; s < n_samples; ++s)
                ds.param_values[std::size_t(s)].push_back(vals[std::size_t(s)]);
        }
        if (ds.param_names.empty()) ds.param_values.resize(std::size_t(n_samples));
    } catch (const json::exception& e) {
        throw FormatError("malformed dataset manifest: " + std::string(e.what()));
    }

    if (n_samples < 0 || n_nodes <= 0 || t_steps <= 0 || ds.n_dim <= 0 ||
        ds.n_inputs < 0 || ds.n_out <= 0)
        throw FormatError("dataset manifest declares non-positive shapes");

    ds.coords = read_f32_file(root / "coords.bin", n_nodes * ds.n_dim);
    ds.times = read_f32_file(root / "times.bin", t_steps);
    const std::vector<float> mask_f = read_f32_file(root / "mask.bin", n_nodes);
    ds.mask.resize(mask_f.size());
    for (std::size_t i = 0; i < mask_f.size(); ++i)
        ds.mask[i] = mask_f[i] != 0.0f ? 1 : 0;

    ds.samples.resize(std::size_t(n_samples));
    for (std::int64_t k = 0; k < n_samples; ++k) {
        ds.samples[std::size_t(k)].inputs =
            read_f32_file(root / sample_blob_name('I', k), t_steps * ds.n_inputs);
        ds.samples[std::size_t(k)].fields =
            read_f32_file(root / sample_blob_name('u', k), t_steps * n_nodes * ds.n_out);
    }

    // Re-establish the written-dataset invariants on the loaded bytes; a
    // blob edited behind the manifest's back must not come back as data.
    try {
        ds.validate();
    } catch (const ContractError& e) {
        throw IntegrityError("dataset failed validation on read: " + std::string(e.what()));
    }
    return ds;
}

TrajectoryDataset make_zero_dataset(std::int64_t n_samples, std::int64_t n_nodes,
                                    std::int64_t t_steps, std::uint64_t seed) {
    if (n_samples < 1 || n_nodes < 1 || t_steps < 1)
        throw ConfigError("zero dataset: n_samples, n_nodes, and t_steps must all be >= 1");
    TrajectoryDataset ds;
    ds.generator = "zero";
    ds.seed = seed;
    ds.n_dim = 1;
    ds.n_inputs = 2;
    ds.n_out = 1;
    ds.input_names = {"drive", "freq"};
    ds.param_names = {"freq"};
    ds.param_ranges = {{0.5, 1.5}};

    ds.coords.resize(std::size_t(n_nodes));
    for (std::int64_t i = 0; i < n_nodes; ++i)
        ds.coords[std::size_t(i)] = n_nodes == 1 ? 0.0f : float(i) / float(n_nodes - 1);
    ds.times.resize(std::size_t(t_steps));
    for (std::int64_t t = 0; t < t_steps; ++t)
        ds.times[std::size_t(t)] = 0.1f * float(t + 1);
    ds.mask.assign(std::size_t(n_nodes), 0);

    const std::vector<double> freqs =
        latin_hypercube(n_samples, {ds.param_ranges[0]}, SplitMix64(seed).derive(1).next_u64());
    for (std::int64_t k = 0; k < n_samples; ++k) {
        SampleRecord rec;
        rec.inputs.resize(std::size_t(t_steps * 2));
        const double f = freqs[std::size_t(k)];
        for (std::int64_t t = 0; t < t_steps; ++t) {
            const double time = double(ds.times[std::size_t(t)]);
            rec.inputs[std::size_t(2 * t)] = float(std::sin(6.283185307179586 * f * time));
            rec.inputs[std::size_t(2 * t + 1)] = float(f);
        }
        rec.fields.assign(std::size_t(t_steps * n_nodes), 0.0f);
        ds.param_values.push_back({f});
        ds.samples.push_back(std::move(rec));
    }
    return ds;
}

}  // namespace lfld

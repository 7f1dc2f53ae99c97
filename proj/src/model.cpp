#include "lfld/model.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "lfld/fourier.hpp"

namespace lfld {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Variants
// ---------------------------------------------------------------------------

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::ldnet: return "ldnet";
        case Variant::lldnet: return "lldnet";
        case Variant::lfldnet: return "lfldnet";
    }
    throw ContractError("variant_name: bad enum value");
}

Variant variant_from_string(const std::string& s) {
    if (s == "ldnet") return Variant::ldnet;
    if (s == "lldnet") return Variant::lldnet;
    if (s == "lfldnet") return Variant::lfldnet;
    throw ConfigError("unknown variant '" + s + "' (expected ldnet, lldnet, or lfldnet)");
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

std::vector<ChannelRange> fit_ranges(const std::vector<float>& buf, std::int64_t n_cols) {
    if (n_cols < 1) throw ContractError("fit_ranges: need at least one column");
    if (buf.empty() || buf.size() % std::size_t(n_cols) != 0)
        throw ContractError("fit_ranges: " + std::to_string(buf.size()) +
                            " values do not fill rows of " + std::to_string(n_cols));
    std::vector<ChannelRange> ranges(static_cast<std::size_t>(n_cols));
    for (auto& r : ranges) {
        r.lo = std::numeric_limits<float>::max();
        r.hi = std::numeric_limits<float>::lowest();
    }
    const std::size_t rows = buf.size() / std::size_t(n_cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < std::size_t(n_cols); ++c) {
            const float v = buf[i * std::size_t(n_cols) + c];
            ranges[c].lo = std::min(ranges[c].lo, v);
            ranges[c].hi = std::max(ranges[c].hi, v);
        }
    return ranges;
}

void normalize_columns(std::vector<float>& buf, const std::vector<ChannelRange>& ranges) {
    const std::size_t n_cols = ranges.size();
    if (n_cols == 0) {
        if (!buf.empty()) throw ContractError("normalize_columns: no ranges for nonempty buffer");
        return;
    }
    if (buf.size() % n_cols != 0)
        throw ContractError("normalize_columns: " + std::to_string(buf.size()) +
                            " values do not fill rows of " + std::to_string(n_cols));
    for (std::size_t i = 0; i < buf.size(); ++i)
        buf[i] = normalize_value(buf[i], ranges[i % n_cols]);
}

void denormalize_columns(std::vector<float>& buf, const std::vector<ChannelRange>& ranges) {
    const std::size_t n_cols = ranges.size();
    if (n_cols == 0) {
        if (!buf.empty())
            throw ContractError("denormalize_columns: no ranges for nonempty buffer");
        return;
    }
    if (buf.size() % n_cols != 0)
        throw ContractError("denormalize_columns: " + std::to_string(buf.size()) +
                            " values do not fill rows of " + std::to_string(n_cols));
    for (std::size_t i = 0; i < buf.size(); ++i)
        buf[i] = denormalize_value(buf[i], ranges[i % n_cols]);
}

// ---------------------------------------------------------------------------
// Model construction
// ---------------------------------------------------------------------------

namespace {

// Independent init streams, derived (not drawn) from the root so that the
// presence or size of one component never shifts another's draws.
constexpr std::uint64_t kStreamWiring = 0x5731;
constexpr std::uint64_t kStreamDynamics = 0xD711;
constexpr std::uint64_t kStreamKernel = 0xF0F0;
constexpr std::uint64_t kStreamRecon = 0x3EC0;

void validate_config(const ModelConfig& cfg) {
    auto positive = [](std::int64_t v, const char* what) {
        if (v < 1)
            throw ConfigError(std::string(what) + " must be >= 1, got " + std::to_string(v));
    };
    positive(cfg.n_inputs, "n_inputs");
    positive(cfg.n_states, "n_states");
    positive(cfg.n_dim, "n_dim");
    positive(cfg.n_out, "n_out");
    positive(cfg.dyn_total, "dyn_total");
    if (cfg.rec_layers < 0)
        throw ConfigError("rec_layers must be >= 0, got " + std::to_string(cfg.rec_layers));
    if (cfg.rec_layers > 0) positive(cfg.rec_width, "rec_width");
    if (cfg.n_freq < 0)
        throw ConfigError("n_freq must be >= 0, got " + std::to_string(cfg.n_freq));
    if (cfg.variant != Variant::lfldnet && cfg.n_freq != 0)
        throw ConfigError("the fourier embedding requires the lfldnet variant; set n_freq = 0 "
                          "for " + variant_name(cfg.variant));
    if (cfg.fourier_scale < 0.0)
        throw ConfigError("fourier_scale must be non-negative, got " +
                          std::to_string(cfg.fourier_scale));
    if (cfg.variant == Variant::ldnet) positive(cfg.ode_substeps, "ode_substeps");
    if (cfg.variant != Variant::ldnet)
        split_neurons(cfg.dyn_total, cfg.n_inputs, cfg.n_states);  // throws if too small
}

ReconstructionConfig recon_config(const ModelConfig& cfg) {
    ReconstructionConfig rc;
    rc.n_state = cfg.n_states;
    rc.n_freq = cfg.n_freq;
    rc.n_dim = cfg.n_dim;
    rc.raw_coords = (cfg.n_freq == 0);
    rc.hidden.assign(std::size_t(cfg.rec_layers), cfg.rec_width);
    rc.n_out = cfg.n_out;
    return rc;
}

}  // namespace

LatentModel LatentModel::build(const ModelConfig& cfg) {
    validate_config(cfg);
    LatentModel m;
    m.config = cfg;
    SplitMix64 root(cfg.init_seed);
    if (cfg.variant == Variant::ldnet) {
        SplitMix64 dyn_rng = root.derive(kStreamDynamics);
        m.ode_rhs = FcnnT<float>::build({cfg.n_states + cfg.n_inputs, cfg.dyn_total, cfg.n_states},
                                        Act::tanh, dyn_rng);
    } else {
        const std::uint64_t wseed = root.derive(kStreamWiring).next_u64();
        m.wiring = build_default_wiring(cfg.dyn_total, cfg.n_inputs, cfg.n_states, wseed);
        SplitMix64 dyn_rng = root.derive(kStreamDynamics);
        CfcOptions opt;
        opt.mixed_memory = cfg.mixed_memory;
        m.liquid = CfcNetT<float>::build(*m.wiring, opt, dyn_rng);
    }
    m.kernel = init_fourier_kernel<float>(cfg.n_freq, cfg.n_dim, cfg.fourier_scale,
                                          root.derive(kStreamKernel).next_u64());
    SplitMix64 rec_rng = root.derive(kStreamRecon);
    m.recon = ReconstructionNetT<float>::build(recon_config(cfg), rec_rng);
    return m;
}

ParamList<float> LatentModel::parameters() const {
    ParamList<float> out;
    if (liquid) liquid->collect(out, "dyn");
    if (ode_rhs) ode_rhs->collect(out, "dyn");
    if (kernel.size() > 0) out.push_back({"fourier.B", kernel, nullptr});
    recon.collect(out, "rec");
    return out;
}

TensorT<float> LatentModel::dynamics_forward(const std::vector<float>& I_norm,
                                             const std::vector<double>& times) const {
    if (liquid) return liquid->sequence_forward(I_norm, times);
    return neural_ode_forward(*ode_rhs, I_norm, config.n_inputs, times, config.ode_substeps);
}

TensorT<float> LatentModel::trajectory(const std::vector<float>& I_series,
                                       const std::vector<double>& times) const {
    if (!stats.ready())
        throw StateError("model has no normalization statistics; train it or load a trained "
                         "checkpoint before inference");
    if (stats.inputs.size() != std::size_t(config.n_inputs))
        throw ContractError("normalization statistics cover " +
                            std::to_string(stats.inputs.size()) + " input channels, model has " +
                            std::to_string(config.n_inputs));
    std::vector<float> I_norm = I_series;
    normalize_columns(I_norm, stats.inputs);
    return dynamics_forward(I_norm, times);
}

ParameterCounts count_model_parameters(const LatentModel& m) {
    ParameterCounts c;
    ParamList<float> dyn;
    if (m.liquid) m.liquid->collect(dyn, "dyn");
    if (m.ode_rhs) m.ode_rhs->collect(dyn, "dyn");
    c.dynamics = count_parameters(dyn);
    c.kernel = std::int64_t(m.kernel.size());
    ParamList<float> rec;
    m.recon.collect(rec, "rec");
    c.reconstruction = count_parameters(rec);
    return c;
}

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

std::vector<float> model_forward(const LatentModel& m, const std::vector<float>& I_series,
                                 const std::vector<double>& times,
                                 const std::vector<float>& coords, std::int64_t chunks) {
    if (chunks < 1)
        throw ContractError("model_forward: chunk count must be >= 1, got " +
                            std::to_string(chunks));
    if (!m.stats.ready())
        throw StateError("model has no normalization statistics; train it or load a trained "
                         "checkpoint before inference");
    const std::size_t n_dim = std::size_t(m.config.n_dim);
    const std::size_t n_out = std::size_t(m.config.n_out);
    if (coords.empty() || coords.size() % n_dim != 0)
        throw ShapeError("model_forward: " + std::to_string(coords.size()) +
                         " coordinate values do not fill rows of " + std::to_string(n_dim));
    const std::size_t n_nodes = coords.size() / n_dim;
    if (!m.boundary.forced.empty() && m.boundary.forced.size() != n_nodes)
        throw ShapeError("model_forward: boundary mask covers " +
                         std::to_string(m.boundary.forced.size()) + " nodes, coordinates have " +
                         std::to_string(n_nodes));
    if (m.stats.coords.size() != n_dim)
        throw ContractError("normalization statistics cover " +
                            std::to_string(m.stats.coords.size()) +
                            " coordinate channels, model has " + std::to_string(n_dim));
    if (m.stats.outputs.size() != n_out)
        throw ContractError("normalization statistics cover " +
                            std::to_string(m.stats.outputs.size()) +
                            " output channels, model has " + std::to_string(n_out));

    // Dynamics once, shared by every chunk.
    auto states = m.trajectory(I_series, times);
    const std::size_t T = times.size();

    std::vector<float> x_norm = coords;
    normalize_columns(x_norm, m.stats.coords);

    std::vector<float> out(T * n_nodes * n_out);
    const std::size_t n_chunks = std::min<std::size_t>(std::size_t(chunks), n_nodes);
    for (std::size_t ci = 0; ci < n_chunks; ++ci) {
        const std::size_t r0 = ci * n_nodes / n_chunks;
        const std::size_t r1 = (ci + 1) * n_nodes / n_chunks;
        if (r0 == r1) continue;
        const std::size_t mc = r1 - r0;
        std::vector<float> slab(x_norm.begin() + std::int64_t(r0 * n_dim),
                                x_norm.begin() + std::int64_t(r1 * n_dim));
        auto xt = TensorT<float>::from_data(std::move(slab),
                                            {std::int64_t(mc), std::int64_t(n_dim)});
        auto feats = point_features(m.recon.config, m.kernel, xt);
        auto pred = m.recon.forward(kron_concat(states, feats));  // [T*mc x n_out]
        for (std::size_t t = 0; t < T; ++t)
            std::memcpy(out.data() + (t * n_nodes + r0) * n_out,
                        pred.data() + (t * mc) * n_out, mc * n_out * sizeof(float));
    }

    denormalize_columns(out, m.stats.outputs);

    if (!m.boundary.forced.empty()) {
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t r = 0; r < n_nodes; ++r)
                if (m.boundary.forced[r]) {
                    float* row = out.data() + (t * n_nodes + r) * n_out;
                    for (std::size_t c = 0; c < n_out; ++c) row[c] = m.boundary.value;
                }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

void append_u16(std::string& out, std::uint16_t v) {
    out.push_back(char(v & 0xFF));
    out.push_back(char((v >> 8) & 0xFF));
}

void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}

void append_f32(std::string& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    append_u32(out, bits);
}

std::uint16_t read_u16(const std::string& b, std::size_t off) {
    return std::uint16_t(std::uint8_t(b[off])) | std::uint16_t(std::uint8_t(b[off + 1])) << 8;
}

std::uint32_t read_u32(const std::string& b, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(b[off + std::size_t(i)])) << (8 * i);
    return v;
}

float read_f32(const std::string& b, std::size_t off) {
    const std::uint32_t bits = read_u32(b, off);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

json ranges_to_json(const std::vector<ChannelRange>& rs) {
    json arr = json::array();
    for (const auto& r : rs) arr.push_back({double(r.lo), double(r.hi)});
    return arr;
}

std::vector<ChannelRange> ranges_from_json(const json& arr) {
    std::vector<ChannelRange> rs;
    for (const auto& pair : arr) {
        ChannelRange r;
        r.lo = float(pair.at(0).get<double>());
        r.hi = float(pair.at(1).get<double>());
        rs.push_back(r);
    }
    return rs;
}

json config_to_json(const ModelConfig& c) {
    return json{{"n_inputs", c.n_inputs},
                {"n_states", c.n_states},
                {"n_dim", c.n_dim},
                {"n_out", c.n_out},
                {"dyn_total", c.dyn_total},
                {"rec_layers", c.rec_layers},
                {"rec_width", c.rec_width},
                {"n_freq", c.n_freq},
                {"fourier_scale", c.fourier_scale},
                {"mixed_memory", c.mixed_memory},
                {"ode_substeps", c.ode_substeps},
                {"init_seed", c.init_seed}};
}

ModelConfig config_from_json(Variant v, const json& j) {
    ModelConfig c;
    c.variant = v;
    c.n_inputs = j.at("n_inputs").get<std::int64_t>();
    c.n_states = j.at("n_states").get<std::int64_t>();
    c.n_dim = j.at("n_dim").get<std::int64_t>();
    c.n_out = j.at("n_out").get<std::int64_t>();
    c.dyn_total = j.at("dyn_total").get<std::int64_t>();
    c.rec_layers = j.at("rec_layers").get<std::int64_t>();
    c.rec_width = j.at("rec_width").get<std::int64_t>();
    c.n_freq = j.at("n_freq").get<std::int64_t>();
    c.fourier_scale = j.at("fourier_scale").get<double>();
    c.mixed_memory = j.at("mixed_memory").get<bool>();
    c.ode_substeps = j.at("ode_substeps").get<std::int64_t>();
    c.init_seed = j.at("init_seed").get<std::uint64_t>();
    return c;
}

json wiring_to_json(const WiringGraph& w) {
    json syn = json::array();
    for (const auto& s : w.synapses)
        syn.push_back({int(s.src_layer), s.src, int(s.dst_layer), s.dst, int(s.polarity)});
    return json{{"split", {w.split.sensory, w.split.inter, w.split.command, w.split.motor}},
                {"fanout",
                 {w.fan.fanout_sensory, w.fan.fanout_inter, w.fan.recurrent_command,
                  w.fan.fanin_motor}},
                {"seed", w.seed},
                {"synapses", syn}};
}

WiringGraph wiring_from_json(const json& j) {
    WiringGraph w;
    const auto& sp = j.at("split");
    w.split.sensory = sp.at(0).get<std::int64_t>();
    w.split.inter = sp.at(1).get<std::int64_t>();
    w.split.command = sp.at(2).get<std::int64_t>();
    w.split.motor = sp.at(3).get<std::int64_t>();
    const auto& fn = j.at("fanout");
    w.fan.fanout_sensory = fn.at(0).get<std::int64_t>();
    w.fan.fanout_inter = fn.at(1).get<std::int64_t>();
    w.fan.recurrent_command = fn.at(2).get<std::int64_t>();
    w.fan.fanin_motor = fn.at(3).get<std::int64_t>();
    w.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("synapses")) {
        Synapse s;
        s.src_layer = Layer(e.at(0).get<int>());
        s.src = e.at(1).get<std::int32_t>();
        s.dst_layer = Layer(e.at(2).get<int>());
        s.dst = e.at(3).get<std::int32_t>();
        s.polarity = std::int8_t(e.at(4).get<int>());
        w.synapses.push_back(s);
    }
    return w;
}

}  // namespace

void save_checkpoint(const LatentModel& m, const std::string& path) {
    json header;
    header["variant"] = variant_name(m.config.variant);
    header["config"] = config_to_json(m.config);
    if (m.stats.ready())
        header["stats"] = json{{"inputs", ranges_to_json(m.stats.inputs)},
                               {"coords", ranges_to_json(m.stats.coords)},
                               {"outputs", ranges_to_json(m.stats.outputs)}};
    else
        header["stats"] = nullptr;
    if (!m.boundary.forced.empty()) {
        json flags = json::array();
        for (auto f : m.boundary.forced) flags.push_back(int(f));
        header["boundary"] = json{{"value", double(m.boundary.value)}, {"forced", flags}};
    } else {
        header["boundary"] = nullptr;
    }
    header["wiring"] = m.wiring ? wiring_to_json(*m.wiring) : json(nullptr);

    auto params = m.parameters();
    json blocks = json::array();
    for (const auto& p : params) {
        json shape = json::array();
        for (auto d : p.tensor.shape()) shape.push_back(d);
        blocks.push_back({{"name", p.name}, {"shape", shape}});
    }
    header["blocks"] = blocks;

    std::string out;
    out.reserve(64 + header.dump().size());
    out += "LFLD";
    append_u16(out, kCheckpointVersion);
    const std::string hdr = header.dump();
    append_u32(out, std::uint32_t(hdr.size()));
    out += hdr;
    for (const auto& p : params)
        for (std::size_t i = 0; i < p.tensor.size(); ++i) append_f32(out, p.tensor.data()[i]);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open '" + path + "' for writing");
    f.write(out.data(), std::streamsize(out.size()));
    if (!f) throw ConfigError("failed writing checkpoint to '" + path + "'");
}

LatentModel load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open checkpoint '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    if (bytes.size() < 4)
        throw IntegrityError("checkpoint '" + path + "' is truncated (" +
                             std::to_string(bytes.size()) + " bytes)");
    if (std::memcmp(bytes.data(), "LFLD", 4) != 0)
        throw FormatError("'" + path + "' is not a checkpoint (bad magic bytes)");
    if (bytes.size() < 10)
        throw IntegrityError("checkpoint '" + path + "' is truncated (" +
                             std::to_string(bytes.size()) + " bytes)");
    const std::uint16_t version = read_u16(bytes, 4);
    if (version != kCheckpointVersion)
        throw VersionError("checkpoint format version " + std::to_string(version) +
                           " is not supported (this build reads version " +
                           std::to_string(kCheckpointVersion) + ")");
    const std::uint32_t hlen = read_u32(bytes, 6);
    if (10 + std::size_t(hlen) > bytes.size())
        throw IntegrityError("checkpoint '" + path + "' header extends past end of file");

    json header;
    try {
        header = json::parse(bytes.substr(10, hlen));
    } catch (const json::exception& e) {
        throw FormatError("unparsable checkpoint header: " + std::string(e.what()));
    }

    LatentModel m;
    try {
        const Variant v = variant_from_string(header.at("variant").get<std::string>());
        m.config = config_from_json(v, header.at("config"));
        validate_config(m.config);

        SplitMix64 scratch(0);  // structural draws only; every value is overwritten below
        if (v == Variant::ldnet) {
            m.ode_rhs = FcnnT<float>::build(
                {m.config.n_states + m.config.n_inputs, m.config.dyn_total, m.config.n_states},
                Act::tanh, scratch);
        } else {
            if (header.at("wiring").is_null())
                throw FormatError("checkpoint is a liquid variant but carries no wiring");
            WiringGraph w = wiring_from_json(header.at("wiring"));
            if (w.split.sensory != m.config.n_inputs || w.split.motor != m.config.n_states ||
                w.split.total() != m.config.dyn_total)
                throw IntegrityError("checkpoint wiring split does not match its own config");
            CfcOptions opt;
            opt.mixed_memory = m.config.mixed_memory;
            m.liquid = CfcNetT<float>::build(w, opt, scratch);
            m.wiring = std::move(w);
        }
        m.kernel = init_fourier_kernel<float>(m.config.n_freq, m.config.n_dim, 0.0,
                                              /*seed=*/0);
        SplitMix64 scratch2(0);
        m.recon = ReconstructionNetT<float>::build(recon_config(m.config), scratch2);

        if (!header.at("stats").is_null()) {
            const auto& st = header.at("stats");
            m.stats.inputs = ranges_from_json(st.at("inputs"));
            m.stats.coords = ranges_from_json(st.at("coords"));
            m.stats.outputs = ranges_from_json(st.at("outputs"));
        }
        if (!header.at("boundary").is_null()) {
            const auto& bd = header.at("boundary");
            m.boundary.value = float(bd.at("value").get<double>());
            for (const auto& flag : bd.at("forced"))
                m.boundary.forced.push_back(std::uint8_t(flag.get<int>() != 0));
        }

        auto params = m.parameters();
        const auto& blocks = header.at("blocks");
        if (blocks.size() != params.size())
            throw IntegrityError("checkpoint lists " + std::to_string(blocks.size()) +
                                 " parameter blocks, this model shape has " +
                                 std::to_string(params.size()));
        std::size_t total_floats = 0;
        for (std::size_t i = 0; i < params.size(); ++i) {
            const auto& blk = blocks.at(i);
            if (blk.at("name").get<std::string>() != params[i].name)
                throw IntegrityError("checkpoint block " + std::to_string(i) + " is named '" +
                                     blk.at("name").get<std::string>() + "', expected '" +
                                     params[i].name + "'");
            Shape shp;
            for (const auto& d : blk.at("shape")) shp.push_back(d.get<std::int64_t>());
            if (shp != params[i].tensor.shape())
                throw IntegrityError("checkpoint block '" + params[i].name + "' has shape " +
                                     shape_str(shp) + ", expected " +
                                     shape_str(params[i].tensor.shape()));
            total_floats += params[i].tensor.size();
        }
        const std::size_t expect = 10 + std::size_t(hlen) + 4 * total_floats;
        if (bytes.size() != expect)
            throw IntegrityError("checkpoint '" + path + "' is " +
                                 std::to_string(bytes.size()) + " bytes, header implies " +
                                 std::to_string(expect));
        std::size_t off = 10 + std::size_t(hlen);
        for (auto& p : params)
            for (std::size_t i = 0; i < p.tensor.size(); ++i, off += 4)
                p.tensor.data()[i] = read_f32(bytes, off);
    } catch (const json::exception& e) {
        throw FormatError("malformed checkpoint header: " + std::string(e.what()));
    } catch (const ConfigError& e) {
        throw FormatError("invalid checkpoint header: " + std::string(e.what()));
    }
    return m;
}

// ---------------------------------------------------------------------------
// State export
// ---------------------------------------------------------------------------

void write_states_csv(const std::string& path, const std::vector<double>& times,
                      const TensorT<float>& states) {
    if (states.ndim() != 2 || std::size_t(states.shape()[0]) != times.size())
        throw ShapeError("write_states_csv: states " + shape_str(states.shape()) +
                         " do not match " + std::to_string(times.size()) + " times");
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw ConfigError("cannot open '" + path + "' for writing");
    const std::int64_t n = states.shape()[1];
    f << "time";
    for (std::int64_t j = 0; j < n; ++j) f << ",s_" << (j + 1);
    f << "\n";
    char buf[32];
    for (std::size_t t = 0; t < times.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%.9g", times[t]);
        f << buf;
        for (std::int64_t j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof buf, "%.9g", double(states.at(std::int64_t(t), j)));
            f << ',' << buf;
        }
        f << "\n";
    }
    if (!f) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace lfld

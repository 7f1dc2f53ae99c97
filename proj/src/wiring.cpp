#include "lfld/wiring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace lfld {

namespace {

std::pair<Layer, Layer> pair_of(const Synapse& s) { return {s.src_layer, s.dst_layer}; }

void check_fanout(const char* name, std::int64_t value, std::int64_t limit) {
    if (value < 1 || value > limit)
        throw ConfigError(std::string("build_wiring: ") + name + "=" + std::to_string(value) +
                          " impossible (must be in [1, " + std::to_string(limit) + "])");
}

}  // namespace

FanoutConfig FanoutConfig::defaults_for(const NeuronSplit& s) {
    FanoutConfig f;
    f.fanout_sensory = std::min<std::int64_t>(f.fanout_sensory, s.inter);
    f.fanout_inter = std::min<std::int64_t>(f.fanout_inter, s.command);
    f.recurrent_command = std::min<std::int64_t>(f.recurrent_command, s.command * s.command);
    f.fanin_motor = std::min<std::int64_t>(f.fanin_motor, s.command);
    return f;
}

std::int64_t WiringGraph::count_pair(Layer src, Layer dst) const {
    std::int64_t c = 0;
    for (const auto& s : synapses)
        if (s.src_layer == src && s.dst_layer == dst) ++c;
    return c;
}

std::int64_t WiringGraph::dense_count() const {
    return split.sensory * split.inter + split.inter * split.command +
           split.command * split.command + split.command * split.motor;
}

NeuronSplit split_neurons(std::int64_t total, std::int64_t n_inputs, std::int64_t n_states) {
    if (n_inputs < 1 || n_states < 1)
        throw ConfigError("split_neurons: need at least one input and one state");
    const std::int64_t minimum = n_inputs + n_states + 2;
    if (total < minimum)
        throw ConfigError("split_neurons: total=" + std::to_string(total) +
                          " too small; minimum is n_inputs + n_states + 2 = " +
                          std::to_string(minimum));
    NeuronSplit s;
    s.sensory = n_inputs;
    s.motor = n_states;
    const std::int64_t r = total - n_inputs - n_states;
    s.command = std::max<std::int64_t>(1, std::lround(0.4 * double(r)));
    s.inter = r - s.command;
    return s;
}

WiringGraph build_wiring(const NeuronSplit& split, const FanoutConfig& fan, std::uint64_t seed) {
    if (split.sensory < 1 || split.inter < 1 || split.command < 1 || split.motor < 1)
        throw ConfigError("build_wiring: every layer needs at least one neuron");
    check_fanout("fanout_sensory", fan.fanout_sensory, split.inter);
    check_fanout("fanout_inter", fan.fanout_inter, split.command);
    check_fanout("recurrent_command", fan.recurrent_command, split.command * split.command);
    check_fanout("fanin_motor", fan.fanin_motor, split.command);

    WiringGraph g;
    g.split = split;
    g.fan = fan;
    g.seed = seed;

    SplitMix64 rng(seed);
    const auto polarity = [&rng]() -> std::int8_t { return rng.below(2) == 0 ? 1 : -1; };

    // Insertion-ordered edge store; a repeated (pair, src, dst) overwrites
    // polarity in place, which can only happen for recurrent draws.
    std::map<std::tuple<Layer, std::int32_t, Layer, std::int32_t>, std::size_t> index;
    auto add = [&](Layer sl, std::int64_t src, Layer dl, std::int64_t dst, std::int8_t pol) {
        const auto key = std::make_tuple(sl, std::int32_t(src), dl, std::int32_t(dst));
        auto it = index.find(key);
        if (it != index.end()) {
            g.synapses[it->second].polarity = pol;
            return;
        }
        index.emplace(key, g.synapses.size());
        g.synapses.push_back({sl, std::int32_t(src), dl, std::int32_t(dst), pol});
    };

    for (std::int64_t s = 0; s < split.sensory; ++s) {
        auto targets = rng.choose_distinct(std::size_t(split.inter), std::size_t(fan.fanout_sensory));
        for (auto t : targets) add(Layer::sensory, s, Layer::inter, std::int64_t(t), polarity());
    }
    for (std::int64_t i = 0; i < split.inter; ++i) {
        auto targets = rng.choose_distinct(std::size_t(split.command), std::size_t(fan.fanout_inter));
        for (auto t : targets) add(Layer::inter, i, Layer::command, std::int64_t(t), polarity());
    }
    for (std::int64_t e = 0; e < fan.recurrent_command; ++e) {
        const auto src = std::int64_t(rng.below(std::uint64_t(split.command)));
        const auto dst = std::int64_t(rng.below(std::uint64_t(split.command)));
        add(Layer::command, src, Layer::command, dst, polarity());
    }
    for (std::int64_t m = 0; m < split.motor; ++m) {
        auto sources = rng.choose_distinct(std::size_t(split.command), std::size_t(fan.fanin_motor));
        for (auto s : sources) add(Layer::command, std::int64_t(s), Layer::motor, m, polarity());
    }

    // Repairs: a destination neuron that no feedforward edge reaches gets one.
    std::vector<char> inter_fed(std::size_t(split.inter), 0);
    std::vector<char> command_fed(std::size_t(split.command), 0);
    for (const auto& s : g.synapses) {
        if (pair_of(s) == std::pair{Layer::sensory, Layer::inter}) inter_fed[std::size_t(s.dst)] = 1;
        if (pair_of(s) == std::pair{Layer::inter, Layer::command}) command_fed[std::size_t(s.dst)] = 1;
    }
    for (std::int64_t i = 0; i < split.inter; ++i)
        if (!inter_fed[std::size_t(i)])
            add(Layer::sensory, std::int64_t(rng.below(std::uint64_t(split.sensory))), Layer::inter,
                i, polarity());
    for (std::int64_t c = 0; c < split.command; ++c)
        if (!command_fed[std::size_t(c)])
            add(Layer::inter, std::int64_t(rng.below(std::uint64_t(split.inter))), Layer::command,
                c, polarity());

    return g;
}

WiringGraph build_default_wiring(std::int64_t total, std::int64_t n_inputs,
                                 std::int64_t n_states, std::uint64_t seed) {
    const auto split = split_neurons(total, n_inputs, n_states);
    return build_wiring(split, FanoutConfig::defaults_for(split), seed);
}

std::int64_t MaskMatrix::nonzeros() const {
    std::int64_t c = 0;
    for (float x : v)
        if (x != 0.0f) ++c;
    return c;
}

AdjacencyMasks adjacency_masks(const WiringGraph& g) {
    auto blank = [](std::int64_t r, std::int64_t c) {
        MaskMatrix m;
        m.rows = r;
        m.cols = c;
        m.v.assign(std::size_t(r * c), 0.0f);
        return m;
    };
    AdjacencyMasks masks;
    masks.sensory_inter = blank(g.split.sensory, g.split.inter);
    masks.inter_command = blank(g.split.inter, g.split.command);
    masks.command_command = blank(g.split.command, g.split.command);
    masks.command_motor = blank(g.split.command, g.split.motor);

    for (const auto& s : g.synapses) {
        MaskMatrix* m = nullptr;
        if (pair_of(s) == std::pair{Layer::sensory, Layer::inter}) m = &masks.sensory_inter;
        else if (pair_of(s) == std::pair{Layer::inter, Layer::command}) m = &masks.inter_command;
        else if (pair_of(s) == std::pair{Layer::command, Layer::command}) m = &masks.command_command;
        else if (pair_of(s) == std::pair{Layer::command, Layer::motor}) m = &masks.command_motor;
        else throw StateError("adjacency_masks: edge outside the four wired layer pairs");
        m->v[std::size_t(s.src) * std::size_t(m->cols) + std::size_t(s.dst)] = float(s.polarity);
    }
    return masks;
}

bool all_motors_reachable(const WiringGraph& g) {
    // BFS over (layer, index) nodes seeded with the whole sensory layer.
    const auto off = [&](Layer l, std::int64_t i) {
        switch (l) {
            case Layer::sensory: return i;
            case Layer::inter: return g.split.sensory + i;
            case Layer::command: return g.split.sensory + g.split.inter + i;
            case Layer::motor: return g.split.sensory + g.split.inter + g.split.command + i;
        }
        return std::int64_t(-1);
    };
    std::vector<std::vector<std::int64_t>> adj(std::size_t(g.split.total()));
    for (const auto& s : g.synapses)
        adj[std::size_t(off(s.src_layer, s.src))].push_back(off(s.dst_layer, s.dst));

    std::vector<char> seen(std::size_t(g.split.total()), 0);
    std::vector<std::int64_t> queue;
    for (std::int64_t s = 0; s < g.split.sensory; ++s) {
        seen[std::size_t(s)] = 1;
        queue.push_back(s);
    }
    for (std::size_t qi = 0; qi < queue.size(); ++qi)
        for (auto nxt : adj[std::size_t(queue[qi])])
            if (!seen[std::size_t(nxt)]) {
                seen[std::size_t(nxt)] = 1;
                queue.push_back(nxt);
            }
    for (std::int64_t m = 0; m < g.split.motor; ++m)
        if (!seen[std::size_t(off(Layer::motor, m))]) return false;
    return true;
}

}  // namespace lfld

#pragma once

#include <cstdint>
#include <vector>

#include "lfld/errors.hpp"
#include "lfld/rng.hpp"

// Sparse four-layer connectivity for the dynamics network: sensory (one
// neuron per input channel) -> inter -> command (with a recurrent core) ->
// motor (one neuron per latent state). The exact distribution of synapses is
// this library's own uniform-fanout rule — a deliberately simple stand-in for
// the biologically-derived wiring in the literature — and is documented below
// edge by edge so that a seed reproduces the same graph everywhere.

namespace lfld {

enum class Layer : std::uint8_t { sensory = 0, inter = 1, command = 2, motor = 3 };

struct NeuronSplit {
    std::int64_t sensory = 0;
    std::int64_t inter = 0;
    std::int64_t command = 0;
    std::int64_t motor = 0;

    std::int64_t total() const { return sensory + inter + command + motor; }
    bool operator==(const NeuronSplit&) const = default;
};

struct Synapse {
    Layer src_layer;
    std::int32_t src;
    Layer dst_layer;
    std::int32_t dst;
    std::int8_t polarity;  // +1 or -1

    bool operator==(const Synapse&) const = default;
};

struct FanoutConfig {
    std::int64_t fanout_sensory = 4;   // inter targets per sensory neuron
    std::int64_t fanout_inter = 4;     // command targets per inter neuron
    std::int64_t recurrent_command = 6;  // total command->command synapses
    std::int64_t fanin_motor = 6;      // command sources per motor neuron

    /// Defaults clipped to what a given split can support.
    static FanoutConfig defaults_for(const NeuronSplit& s);
    bool operator==(const FanoutConfig&) const = default;
};

struct WiringGraph {
    NeuronSplit split;
    FanoutConfig fan;
    std::uint64_t seed = 0;
    std::vector<Synapse> synapses;

    std::int64_t count_pair(Layer src, Layer dst) const;
    /// Dense synapse count over the four wired layer pairs.
    std::int64_t dense_count() const;
};

/// Split a neuron budget into the four layers. Inputs claim the sensory
/// layer, latent states claim the motor layer, and the remainder goes 40/60
/// to command/inter (command rounded half away from zero, at least 1).
NeuronSplit split_neurons(std::int64_t total, std::int64_t n_inputs, std::int64_t n_states);

/// Generate the graph. Deterministic in (counts, fanouts, seed); the draw
/// order is frozen:
///   1. per sensory neuron (ascending): fanout_sensory distinct inter targets,
///      then one polarity per target in drawn order;
///   2. per inter neuron: fanout_inter distinct command targets + polarities;
///   3. recurrent_command times: src = below(n_command), dst = below(n_command),
///      polarity. A repeated (src,dst) pair overwrites the earlier polarity
///      instead of duplicating the edge;
///   4. per motor neuron: fanin_motor distinct command sources + polarities;
///   5. repairs, in layer order: every inter neuron with no sensory in-edge
///      gets one from below(n_sensory); every command neuron with no inter
///      in-edge (recurrence does not count — it carries no outside signal)
///      gets one from below(n_inter); motor neurons are always fed by step 4.
/// Polarity: below(2) == 0 -> +1, else -1.
WiringGraph build_wiring(const NeuronSplit& split, const FanoutConfig& fan, std::uint64_t seed);

/// Convenience: split + clipped default fanouts + wiring in one call.
WiringGraph build_default_wiring(std::int64_t total, std::int64_t n_inputs,
                                 std::int64_t n_states, std::uint64_t seed);

/// Dense 0/±1 matrix, row-major [n_src x n_dst]; entry = polarity where an
/// edge exists.
struct MaskMatrix {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<float> v;

    float at(std::int64_t i, std::int64_t j) const { return v[std::size_t(i * cols + j)]; }
    std::int64_t nonzeros() const;
};

struct AdjacencyMasks {
    MaskMatrix sensory_inter;    // [sensory x inter]
    MaskMatrix inter_command;    // [inter x command]
    MaskMatrix command_command;  // [command x command]
    MaskMatrix command_motor;    // [command x motor]
};

AdjacencyMasks adjacency_masks(const WiringGraph& g);

/// True when every motor neuron is reachable from at least one sensory
/// neuron along directed edges (the graph-search check behind the
/// reachability invariant).
bool all_motors_reachable(const WiringGraph& g);

}  // namespace lfld

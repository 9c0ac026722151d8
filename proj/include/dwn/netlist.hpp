#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dwn/frozen_model.hpp"

namespace dwn {

inline constexpr uint32_t kNoWire = 0xFFFFFFFFu;

enum class NodeKind : uint8_t {
    lut,  // truth-table lookup over `arity` 1-bit pins
    add,  // popcount-tree adder, out = in0 + in1
    reg,  // pipeline register; identity in functional interpretation
    cmp,  // max/argmax step: carries the larger value and its class index
};

// Each node defines `out`; cmp additionally defines `out_idx`. Wires
// 0..input_width-1 are the primary input bits; node outputs are allocated in
// construction order, so "defined before use" is equivalent to in < out.
struct NetlistNode {
    NodeKind kind = NodeKind::lut;
    uint8_t arity = 0;
    std::array<uint64_t, 4> truth{};  // lut: 2^arity bits, entry-indexed
    std::array<uint32_t, 8> inputs{}; // lut pins; add/cmp use [0], [1]; reg uses [0]
    uint32_t idx_a = kNoWire;         // cmp: index wire of side a (kNoWire -> imm_a)
    uint32_t idx_b = kNoWire;
    uint32_t imm_a = 0;
    uint32_t imm_b = 0;
    uint32_t out = 0;
    uint32_t out_idx = kNoWire;       // cmp only
    uint32_t width = 1;               // bit width of `out`

    bool truth_bit(uint32_t entry) const { return (truth[entry >> 6] >> (entry & 63)) & 1u; }
};

struct Netlist {
    uint32_t input_width = 0;
    uint32_t num_wires = 0;  // inputs + defined node outputs
    uint32_t num_classes = 0;
    std::vector<NetlistNode> nodes;            // topological order
    std::vector<uint32_t> score_wires;         // per class, popcount value
    uint32_t label_wire = kNoWire;             // kNoWire: label is constant 0
    uint32_t label_width = 1;
    uint32_t register_stages = 0;

    // Structural checks: wire ids defined before use, truth sizes, ranges.
    void validate() const;
    size_t count(NodeKind kind) const;
};

// One LUT node per model LUT, a balanced binary adder tree per class group,
// and a comparator tree selecting the argmax label (ties -> lowest class).
// pipeline_stages > 0 inserts register banks at stage cut points, favoring
// the output side: after the final LUT layer, after the popcount tree, then
// after earlier LUT layers back to front. Functionally registers are
// identity, so pipelining never changes outputs.
Netlist lower(const FrozenModel& model, uint32_t pipeline_stages);

struct InterpretResult {
    uint32_t label = 0;
    std::vector<uint64_t> scores;  // raw popcounts per class
};

InterpretResult interpret(const Netlist& netlist, std::span<const uint8_t> input_bits);

// Deterministic SystemVerilog text for the netlist; single module with a flat
// input bit bus, per-class score buses, and the argmax label.
std::string emit_verilog(const Netlist& netlist, const std::string& module_name);

// Node counts per kind, as a small text report.
std::string netlist_report(const Netlist& netlist);

}  // namespace dwn

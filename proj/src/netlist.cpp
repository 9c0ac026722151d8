#include "dwn/netlist.hpp"

#include <algorithm>
#include <cctype>

#include "dwn/error.hpp"

namespace dwn {

void Netlist::validate() const {
    if (num_wires < input_width) throw shape_error("netlist: wire count below input width");
    std::vector<uint8_t> defined(num_wires, 0);
    for (uint32_t i = 0; i < input_width; ++i) defined[i] = 1;

    auto check_in = [&](uint32_t wire) {
        if (wire >= num_wires || !defined[wire])
            throw shape_error("netlist: wire " + std::to_string(wire) + " used before definition");
    };
    auto define = [&](uint32_t wire) {
        if (wire >= num_wires || defined[wire])
            throw shape_error("netlist: wire " + std::to_string(wire) + " redefined");
        defined[wire] = 1;
    };

    for (const NetlistNode& n : nodes) {
        switch (n.kind) {
            case NodeKind::lut: {
                if (n.arity == 0 || n.arity > 8) throw shape_error("netlist: lut arity out of 1..8");
                for (uint32_t p = 0; p < n.arity; ++p) check_in(n.inputs[p]);
                break;
            }
            case NodeKind::add:
                check_in(n.inputs[0]);
                check_in(n.inputs[1]);
                break;
            case NodeKind::reg:
                check_in(n.inputs[0]);
                break;
            case NodeKind::cmp:
                check_in(n.inputs[0]);
                check_in(n.inputs[1]);
                if (n.idx_a != kNoWire) check_in(n.idx_a);
                if (n.idx_b != kNoWire) check_in(n.idx_b);
                break;
        }
        define(n.out);
        if (n.kind == NodeKind::cmp) define(n.out_idx);
    }
    for (uint32_t w : score_wires) check_in(w);
    if (label_wire != kNoWire) check_in(label_wire);
    if (score_wires.size() != num_classes) throw shape_error("netlist: score wire count mismatch");
}

size_t Netlist::count(NodeKind kind) const {
    size_t n = 0;
    for (const NetlistNode& node : nodes)
        if (node.kind == kind) ++n;
    return n;
}

namespace {

uint32_t ceil_log2(uint32_t v) {
    uint32_t bits = 0;
    while ((1u << bits) < v) ++bits;
    return bits;
}

struct Builder {
    Netlist net;
    std::vector<uint32_t> wire_width;  // per wire

    explicit Builder(uint32_t input_width) {
        net.input_width = input_width;
        net.num_wires = input_width;
        wire_width.assign(input_width, 1);
    }

    uint32_t new_wire(uint32_t width) {
        wire_width.push_back(width);
        return net.num_wires++;
    }

    uint32_t add_lut(const FrozenLayer& layer, uint32_t lut, std::span<const uint32_t> pin_wires) {
        NetlistNode n;
        n.kind = NodeKind::lut;
        n.arity = uint8_t(layer.arity);
        for (uint32_t u = 0; u < layer.entries_per_lut(); ++u)
            if (layer.lut_bit(lut, u)) n.truth[u >> 6] |= uint64_t(1) << (u & 63);
        for (uint32_t p = 0; p < layer.arity; ++p) n.inputs[p] = pin_wires[p];
        n.width = 1;
        n.out = new_wire(1);
        net.nodes.push_back(n);
        return n.out;
    }

    uint32_t add_add(uint32_t a, uint32_t b) {
        NetlistNode n;
        n.kind = NodeKind::add;
        n.inputs[0] = a;
        n.inputs[1] = b;
        n.width = std::max(wire_width[a], wire_width[b]) + 1;
        n.out = new_wire(n.width);
        net.nodes.push_back(n);
        return n.out;
    }

    uint32_t add_reg(uint32_t in) {
        NetlistNode n;
        n.kind = NodeKind::reg;
        n.inputs[0] = in;
        n.width = wire_width[in];
        n.out = new_wire(n.width);
        net.nodes.push_back(n);
        return n.out;
    }
};

}  // namespace

Netlist lower(const FrozenModel& model, uint32_t pipeline_stages) {
    if (model.layers.empty()) throw shape_error("lower: model has no layers");
    for (const FrozenLayer& l : model.layers)
        if (l.arity > 8) throw shape_error("lower: arity above 8");

    const uint32_t n_layers = uint32_t(model.layers.size());
    const uint32_t n_cuts = n_layers + 1;  // after each LUT layer + after popcount
    const uint32_t stages = std::min(pipeline_stages, n_cuts);

    // Cut ids 0..n_layers-1 sit after that LUT layer; id n_layers after the
    // popcount tree. Fill from the output side first.
    std::vector<uint8_t> cut_active(n_cuts, 0);
    {
        std::vector<uint32_t> priority;
        priority.push_back(n_layers - 1);
        priority.push_back(n_layers);
        for (uint32_t li = n_layers - 1; li-- > 0;) priority.push_back(li);
        for (uint32_t s = 0; s < stages; ++s) cut_active[priority[s]] = 1;
    }

    Builder b(model.input_width());
    b.net.num_classes = model.num_classes;
    b.net.register_stages = stages;

    std::vector<uint32_t> current(model.input_width());
    for (uint32_t i = 0; i < model.input_width(); ++i) current[i] = i;

    std::vector<uint32_t> next;
    std::vector<uint32_t> pins;
    for (uint32_t li = 0; li < n_layers; ++li) {
        const FrozenLayer& layer = model.layers[li];
        next.resize(layer.num_luts);
        for (uint32_t lut = 0; lut < layer.num_luts; ++lut) {
            pins.resize(layer.arity);
            for (uint32_t p = 0; p < layer.arity; ++p)
                pins[p] = current[layer.routing[size_t(lut) * layer.arity + p]];
            next[lut] = b.add_lut(layer, lut, pins);
        }
        current = next;
        if (cut_active[li])
            for (uint32_t& w : current) w = b.add_reg(w);
    }

    // Balanced binary adder tree per class group.
    const uint32_t K = model.num_classes;
    const uint32_t G = model.group_size();
    b.net.score_wires.resize(K);
    for (uint32_t c = 0; c < K; ++c) {
        std::vector<uint32_t> level(current.begin() + size_t(c) * G,
                                    current.begin() + size_t(c + 1) * G);
        while (level.size() > 1) {
            std::vector<uint32_t> up;
            for (size_t i = 0; i + 1 < level.size(); i += 2)
                up.push_back(b.add_add(level[i], level[i + 1]));
            if (level.size() % 2 == 1) up.push_back(level.back());
            level = std::move(up);
        }
        b.net.score_wires[c] = level[0];
    }
    if (cut_active[n_layers])
        for (uint32_t& w : b.net.score_wires) w = b.add_reg(w);

    // Comparator tournament; left operands carry lower class indices so >=
    // resolves ties toward the lowest class.
    b.net.label_width = std::max(1u, ceil_log2(K));
    if (K == 1) {
        b.net.label_wire = kNoWire;
    } else {
        struct Entry {
            uint32_t val;
            uint32_t idx_wire;
            uint32_t imm;
        };
        std::vector<Entry> level;
        for (uint32_t c = 0; c < K; ++c) level.push_back({b.net.score_wires[c], kNoWire, c});
        while (level.size() > 1) {
            std::vector<Entry> up;
            for (size_t i = 0; i + 1 < level.size(); i += 2) {
                NetlistNode n;
                n.kind = NodeKind::cmp;
                n.inputs[0] = level[i].val;
                n.inputs[1] = level[i + 1].val;
                n.idx_a = level[i].idx_wire;
                n.imm_a = level[i].imm;
                n.idx_b = level[i + 1].idx_wire;
                n.imm_b = level[i + 1].imm;
                n.width = std::max(b.wire_width[n.inputs[0]], b.wire_width[n.inputs[1]]);
                n.out = b.new_wire(n.width);
                n.out_idx = b.new_wire(b.net.label_width);
                b.net.nodes.push_back(n);
                up.push_back({n.out, n.out_idx, 0});
            }
            if (level.size() % 2 == 1) up.push_back(level.back());
            level = std::move(up);
        }
        b.net.label_wire = level[0].idx_wire;
    }

    b.net.validate();
    return b.net;
}

InterpretResult interpret(const Netlist& netlist, std::span<const uint8_t> input_bits) {
    if (input_bits.size() != netlist.input_width)
        throw shape_error("interpret: expected " + std::to_string(netlist.input_width) +
                          " input bits, got " + std::to_string(input_bits.size()));

    std::vector<uint64_t> value(netlist.num_wires, 0);
    for (uint32_t i = 0; i < netlist.input_width; ++i) value[i] = input_bits[i] ? 1 : 0;

    for (const NetlistNode& n : netlist.nodes) {
        switch (n.kind) {
            case NodeKind::lut: {
                uint32_t addr = 0;
                for (uint32_t p = 0; p < n.arity; ++p)
                    addr |= uint32_t(value[n.inputs[p]] & 1u) << p;
                value[n.out] = n.truth_bit(addr) ? 1 : 0;
                break;
            }
            case NodeKind::add:
                value[n.out] = value[n.inputs[0]] + value[n.inputs[1]];
                break;
            case NodeKind::reg:
                value[n.out] = value[n.inputs[0]];
                break;
            case NodeKind::cmp: {
                const uint64_t va = value[n.inputs[0]];
                const uint64_t vb = value[n.inputs[1]];
                const uint64_t ia = n.idx_a == kNoWire ? n.imm_a : value[n.idx_a];
                const uint64_t ib = n.idx_b == kNoWire ? n.imm_b : value[n.idx_b];
                value[n.out] = va >= vb ? va : vb;
                value[n.out_idx] = va >= vb ? ia : ib;
                break;
            }
        }
    }

    InterpretResult r;
    r.label = netlist.label_wire == kNoWire ? 0 : uint32_t(value[netlist.label_wire]);
    r.scores.resize(netlist.score_wires.size());
    for (size_t c = 0; c < netlist.score_wires.size(); ++c)
        r.scores[c] = value[netlist.score_wires[c]];
    return r;
}

std::string netlist_report(const Netlist& n) {
    std::string out;
    out += "input_width=" + std::to_string(n.input_width) + "\n";
    out += "classes=" + std::to_string(n.num_classes) + "\n";
    out += "nodes_total=" + std::to_string(n.nodes.size()) + "\n";
    out += "nodes_lut=" + std::to_string(n.count(NodeKind::lut)) + "\n";
    out += "nodes_add=" + std::to_string(n.count(NodeKind::add)) + "\n";
    out += "nodes_reg=" + std::to_string(n.count(NodeKind::reg)) + "\n";
    out += "nodes_cmp=" + std::to_string(n.count(NodeKind::cmp)) + "\n";
    out += "register_stages=" + std::to_string(n.register_stages) + "\n";
    return out;
}

}  // namespace dwn

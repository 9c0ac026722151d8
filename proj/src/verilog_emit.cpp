#include <cctype>
#include <string>

#include "dwn/error.hpp"
#include "dwn/netlist.hpp"

namespace dwn {

namespace {

bool valid_identifier(const std::string& name) {
    if (name.empty()) return false;
    if (!(std::isalpha(uint8_t(name[0])) || name[0] == '_')) return false;
    for (char ch : name)
        if (!(std::isalnum(uint8_t(ch)) || ch == '_')) return false;
    return true;
}

// Wire reference: primary inputs index the flat bus, node outputs are named.
std::string wref(const Netlist& net, uint32_t wire) {
    if (wire < net.input_width) return "in_bits[" + std::to_string(wire) + "]";
    return "w" + std::to_string(wire);
}

std::string truth_literal(const NetlistNode& n) {
    const uint32_t n_entries = 1u << n.arity;
    std::string bits;
    bits.reserve(n_entries);
    for (uint32_t u = n_entries; u-- > 0;) bits += n.truth_bit(u) ? '1' : '0';
    return std::to_string(n_entries) + "'b" + bits;
}

std::string idx_ref(const Netlist& net, uint32_t idx_wire, uint32_t imm) {
    if (idx_wire != kNoWire) return wref(net, idx_wire);
    return std::to_string(net.label_width) + "'d" + std::to_string(imm);
}

}  // namespace

std::string emit_verilog(const Netlist& net, const std::string& module_name) {
    if (!valid_identifier(module_name))
        throw config_error("module name '" + module_name + "' is not a valid identifier");

    const bool has_regs = net.count(NodeKind::reg) > 0;

    std::string out;
    out += "// Generated LUT-network inference module.\n";
    out += "// Inputs are thermometer-encoded bits; scores are raw popcounts.\n";
    out += "module " + module_name + " (\n";
    if (has_regs) out += "    input  logic clk,\n";
    out += "    input  logic [" + std::to_string(net.input_width - 1) + ":0] in_bits,\n";
    for (uint32_t c = 0; c < net.num_classes; ++c) {
        const uint32_t w = net.score_wires[c];
        uint32_t width = 1;
        for (const NetlistNode& n : net.nodes)
            if (n.out == w) width = n.width;
        out += "    output logic [" + std::to_string(width - 1) + ":0] score_" +
               std::to_string(c) + ",\n";
    }
    out += "    output logic [" + std::to_string(net.label_width - 1) + ":0] label\n";
    out += ");\n\n";

    for (const NetlistNode& n : net.nodes) {
        switch (n.kind) {
            case NodeKind::lut: {
                const std::string name = "w" + std::to_string(n.out);
                out += "  localparam [" + std::to_string((1u << n.arity) - 1) + ":0] LUT_" +
                       name + " = " + truth_literal(n) + ";\n";
                out += "  logic " + name + ";\n";
                out += "  assign " + name + " = LUT_" + name + "[{";
                for (uint32_t p = n.arity; p-- > 0;) {
                    out += wref(net, n.inputs[p]);
                    if (p != 0) out += ", ";
                }
                out += "}];\n";
                break;
            }
            case NodeKind::add: {
                const std::string name = "w" + std::to_string(n.out);
                out += "  logic [" + std::to_string(n.width - 1) + ":0] " + name + ";\n";
                out += "  assign " + name + " = " + wref(net, n.inputs[0]) + " + " +
                       wref(net, n.inputs[1]) + ";\n";
                break;
            }
            case NodeKind::reg: {
                const std::string name = "w" + std::to_string(n.out);
                out += "  logic [" + std::to_string(n.width - 1) + ":0] " + name + ";\n";
                out += "  always_ff @(posedge clk) " + name + " <= " + wref(net, n.inputs[0]) +
                       ";\n";
                break;
            }
            case NodeKind::cmp: {
                const std::string val = "w" + std::to_string(n.out);
                const std::string idx = "w" + std::to_string(n.out_idx);
                const std::string cond =
                    "(" + wref(net, n.inputs[0]) + " >= " + wref(net, n.inputs[1]) + ")";
                out += "  logic [" + std::to_string(n.width - 1) + ":0] " + val + ";\n";
                out += "  logic [" + std::to_string(net.label_width - 1) + ":0] " + idx + ";\n";
                out += "  assign " + val + " = " + cond + " ? " + wref(net, n.inputs[0]) +
                       " : " + wref(net, n.inputs[1]) + ";\n";
                out += "  assign " + idx + " = " + cond + " ? " +
                       idx_ref(net, n.idx_a, n.imm_a) + " : " + idx_ref(net, n.idx_b, n.imm_b) +
                       ";\n";
                break;
            }
        }
    }

    out += "\n";
    for (uint32_t c = 0; c < net.num_classes; ++c)
        out += "  assign score_" + std::to_string(c) + " = " + wref(net, net.score_wires[c]) +
               ";\n";
    if (net.label_wire == kNoWire)
        out += "  assign label = " + std::to_string(net.label_width) + "'d0;\n";
    else
        out += "  assign label = " + wref(net, net.label_wire) + ";\n";
    out += "\nendmodule\n";
    return out;
}

}  // namespace dwn

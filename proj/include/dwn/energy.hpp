#pragma once

#include <cstdint>

namespace dwn {

// Per-operation FP32 energy costs measured on the reference FPGA target; a
// FLOP is costed as the average of one multiply and one add.
struct EnergyModel {
    double mul_nj = 0.928;
    double add_nj = 0.594;

    double flop_nj() const { return (mul_nj + add_nj) / 2.0; }
};

// flops * flop_nj, reported in millijoules.
double estimate_energy_mj(uint64_t flops, const EnergyModel& model = {});

}  // namespace dwn

#include "dwn/energy.hpp"

namespace dwn {

double estimate_energy_mj(uint64_t flops, const EnergyModel& model) {
    // nJ -> mJ is a factor of 1e-6.
    return double(flops) * model.flop_nj() * 1e-6;
}

}  // namespace dwn

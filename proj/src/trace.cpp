#include "projlab/trace.hpp"

#include "projlab/json_io.hpp"

namespace projlab {

bool OrbitTrace::norms_nonincreasing() const {
    for (std::size_t i = 1; i < checkpoints.size(); ++i)
        if (checkpoints[i].norm > checkpoints[i - 1].norm) return false;
    return true;
}

bool OrbitTrace::positions_increasing() const {
    for (std::size_t i = 1; i < checkpoints.size(); ++i)
        if (!(checkpoints[i - 1].position < checkpoints[i].position)) return false;
    return true;
}

std::string OrbitTrace::to_csv() const {
    std::size_t probes = checkpoints.empty() ? 0 : checkpoints.front().probes.size();
    std::string out = "position,block,norm,dist_to_target";
    for (std::size_t j = 1; j <= probes; ++j) out += ",probe_e" + std::to_string(j);
    out += '\n';
    for (const auto& c : checkpoints) {
        out += c.position.to_string();
        out += ',' + std::to_string(c.block);
        out += ',' + format_double(c.norm);
        out += ',' + format_double(c.dist_to_target);
        for (double p : c.probes) out += ',' + format_double(p);
        out += '\n';
    }
    return out;
}

}  // namespace projlab

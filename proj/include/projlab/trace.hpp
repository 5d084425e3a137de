#pragma once

#include "projlab/bignat.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace projlab {

struct Checkpoint {
    BigNat position;  // projections applied so far
    int block = 0;
    int run = 0;             // run index inside the block, 0 when not per-run
    bool block_end = false;
    Eigen::VectorXd vector;
    double norm = 0;
    double dist_to_target = 0;  // ||z - e_{block+1}||
    std::vector<double> probes;
};

struct OrbitTrace {
    std::vector<Checkpoint> checkpoints;

    bool norms_nonincreasing() const;
    bool positions_increasing() const;
    // position,block,norm,dist_to_target,probe_e1,...,probe_e<n>
    std::string to_csv() const;
};

}  // namespace projlab

#pragma once

#include "fkmix/lattice.hpp"
#include "fkmix/rng.hpp"

#include <algorithm>
#include <cstdlib>

namespace fkmix::testing {

inline EdgeConfig random_config(const BoxLattice& lat, double p, Stream& rng) {
    EdgeConfig c(lat, false);
    for (auto& b : c.bits)
        b = rng.uniform() < p;
    return c;
}

// Edges with an end at |v|_inf < split open with probability p_in, the rest with p_out.
inline EdgeConfig random_two_phase(const BoxLattice& lat, int split, double p_in, double p_out, Stream& rng) {
    EdgeConfig c(lat, false);
    for (int e = 0; e < lat.num_edges(); ++e) {
        auto [u, v] = lat.ends(EdgeId{e});
        int n = std::min(std::max(std::abs(u.x), std::abs(u.y)), std::max(std::abs(v.x), std::abs(v.y)));
        c.bits[e] = rng.uniform() < (n < split ? p_in : p_out);
    }
    return c;
}

// The square circuit |v|_inf = rho, all other edges closed.
inline EdgeConfig ring(const BoxLattice& lat, int rho) {
    EdgeConfig c(lat, false);
    for (int e = 0; e < lat.num_edges(); ++e) {
        auto [u, v] = lat.ends(EdgeId{e});
        if (std::max(std::abs(u.x), std::abs(u.y)) == rho && std::max(std::abs(v.x), std::abs(v.y)) == rho)
            c.bits[e] = 1;
    }
    return c;
}

// Every edge with both ends in [-rho,rho]^2 open.
inline EdgeConfig disc(const BoxLattice& lat, int rho) {
    EdgeConfig c(lat, false);
    for (int e = 0; e < lat.num_edges(); ++e) {
        auto [u, v] = lat.ends(EdgeId{e});
        if (std::max(std::abs(u.x), std::abs(u.y)) <= rho && std::max(std::abs(v.x), std::abs(v.y)) <= rho)
            c.bits[e] = 1;
    }
    return c;
}

} // namespace fkmix::testing

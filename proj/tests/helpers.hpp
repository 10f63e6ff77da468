#pragma once

#include <random>

#include "patchbeam/hetero_field.hpp"
#include "patchbeam/micro_beam.hpp"

namespace testing_helpers {

using patchbeam::Array2D;

inline void fill_uniform(Array2D& a, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    for (double& x : a.flat()) x = d(rng);
}

/// Random displacements and velocities on every column, edges included.
inline patchbeam::BeamState random_state(const patchbeam::StaggeredGrid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    patchbeam::BeamState s = patchbeam::BeamState::zeros(g);
    for (Array2D* a : {&s.u, &s.v, &s.du, &s.dv}) fill_uniform(*a, rng, -1.0, 1.0);
    return s;
}

/// Field with independent random Lame parameters at every point (no
/// periodicity beyond the full width).
inline patchbeam::ElasticityField random_lame_field(int cols, int ny, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Array2D ln(cols, ny + 1), mn(cols, ny + 1), ls(cols, ny), ms(cols, ny);
    for (Array2D* a : {&ln, &mn, &ls, &ms}) fill_uniform(*a, rng, 0.2, 3.0);
    return patchbeam::ElasticityField::from_lame(ln, mn, ls, ms, cols, 1.0, 0.3);
}

/// Recipe field of the given size, period 4, nondimensionalised.
inline patchbeam::ElasticityField recipe_field(int nx, int ny, std::uint64_t seed, int period = 4) {
    patchbeam::HeterogeneityParams hp;
    hp.seed = seed;
    hp.nx = nx;
    hp.ny = ny;
    hp.period_x = period;
    return patchbeam::make_field(hp);
}

}  // namespace testing_helpers

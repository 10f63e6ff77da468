#include "patchbeam/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "patchbeam/error.hpp"

namespace patchbeam {

void IntegratorConfig::validate() const {
    PATCHBEAM_REQUIRE(!dt || *dt > 0.0, parameter, "time step must be positive");
    PATCHBEAM_REQUIRE(cfl_safety > 0.0 && cfl_safety < 1.0, parameter,
                      "cfl_safety must lie in (0, 1)");
    PATCHBEAM_REQUIRE(t_end >= 0.0, parameter, "t_end must be non-negative");
    PATCHBEAM_REQUIRE(frame_stride >= 0, parameter, "frame_stride must be non-negative");
}

double stable_dt(const StaggeredGrid& grid, const ElasticityField& field, double cfl_safety) {
    const double c_max = std::sqrt(field.max_p_modulus());
    PATCHBEAM_REQUIRE(c_max > 0.0, parameter, "field has no positive modulus");
    return cfl_safety * std::min(grid.dx, grid.dy) / c_max;
}

IntegrationResult integrate(const RhsFn& rhs, std::span<const double> x0, double dt, double t_end,
                            int frame_stride, const FrameSink& sink) {
    PATCHBEAM_REQUIRE(dt > 0.0, parameter, "time step must be positive");
    PATCHBEAM_REQUIRE(t_end >= 0.0, parameter, "t_end must be non-negative");
    const std::size_t n = x0.size();
    const int steps = t_end == 0.0 ? 0 : static_cast<int>(std::ceil(t_end / dt - 1e-9));
    const double h = steps == 0 ? dt : t_end / steps;

    IntegrationResult res{std::vector<double>(x0.begin(), x0.end()), 0.0, h, steps};
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    std::vector<double>& x = res.x;

    if (sink) sink(0, 0.0, x);
    for (int step = 1; step <= steps; ++step) {
        rhs(x, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
        rhs(tmp, k4);
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            finite = finite && std::isfinite(x[i]);
        }
        PATCHBEAM_REQUIRE(finite, divergence,
                          "non-finite state encountered at step " + std::to_string(step));
        res.t = step * h;
        const bool emit = step == steps || (frame_stride > 0 && step % frame_stride == 0);
        if (sink && emit) sink(step, res.t, x);
    }
    return res;
}

}  // namespace patchbeam

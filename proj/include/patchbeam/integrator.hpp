#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "patchbeam/hetero_field.hpp"
#include "patchbeam/micro_beam.hpp"
#include "patchbeam/system.hpp"

namespace patchbeam {

struct IntegratorConfig {
    std::optional<double> dt;  ///< unset: use stable_dt
    double t_end = 1.0;
    double cfl_safety = 0.2;
    int frame_stride = 0;  ///< 0: first and last frame only

    void validate() const;
};

/// cfl_safety * min(dx, dy) / c_max with c_max = sqrt(max(lambda + 2 mu))
/// at unit density.
[[nodiscard]] double stable_dt(const StaggeredGrid& grid, const ElasticityField& field,
                               double cfl_safety);

/// Called with the step index, time and state of every emitted frame.
using FrameSink = std::function<void(int step, double t, std::span<const double> x)>;

struct IntegrationResult {
    std::vector<double> x;
    double t = 0.0;
    double dt = 0.0;  ///< step actually used (t_end / steps)
    int steps = 0;
};

/// Classic four-stage fourth-order Runge-Kutta with a fixed step that
/// divides t_end exactly. Throws a divergence error naming the first step
/// that produced a non-finite value.
[[nodiscard]] IntegrationResult integrate(const RhsFn& rhs, std::span<const double> x0, double dt,
                                          double t_end, int frame_stride = 0,
                                          const FrameSink& sink = {});

}  // namespace patchbeam

#pragma once

#include <functional>
#include <span>

namespace patchbeam {

/// Autonomous right-hand side dx/dt = f(x) over a flat state vector.
using RhsFn = std::function<void(std::span<const double> x, std::span<double> dxdt)>;

}  // namespace patchbeam

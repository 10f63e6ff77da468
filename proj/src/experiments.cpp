#include "patchbeam/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "patchbeam/error.hpp"

namespace patchbeam {

namespace {

Eigen::MatrixXd patch_jacobian(const PatchSet& set, double kappa) {
    return assemble_jacobian(make_patched_rhs(set, kappa), set.dof());
}

void require_dense_size(int dof) {
    PATCHBEAM_REQUIRE(dof <= kDenseEigenCap, parameter,
                      "system has " + std::to_string(dof) +
                          " unknowns, above the dense eigensolver cap of " +
                          std::to_string(kDenseEigenCap));
}

std::vector<cplx> macro_values(const std::vector<cplx>& eigs, const Classification& cls) {
    std::vector<cplx> out;
    out.reserve(cls.macro.size());
    for (int i : cls.macro) out.push_back(eigs[static_cast<std::size_t>(i)]);
    return out;
}

// Slowest positive-frequency member of each branch: bending first.
std::pair<cplx, cplx> branch_heads(std::vector<cplx> slow) {
    std::erase_if(slow, [](const cplx& z) { return z.imag() <= 0.0; });
    PATCHBEAM_REQUIRE(slow.size() >= 2, numerical_breakdown,
                      "fundamental wavenumber lacks two oscillatory branches");
    std::sort(slow.begin(), slow.end(),
              [](const cplx& a, const cplx& b) { return a.imag() < b.imag(); });
    return {slow[0], slow[1]};
}

double nearest_distance(const std::vector<cplx>& set, const cplx& z) {
    double best = std::numeric_limits<double>::infinity();
    for (const cplx& w : set) best = std::min(best, std::abs(w - z));
    return best;
}

}  // namespace

ElasticityField obtain_field(const SimConfig& cfg) {
    if (!cfg.field_file) return make_field(cfg.heterogeneity);
    ElasticityField field = read_field(*cfg.field_file);
    PATCHBEAM_REQUIRE(field.cols() == cfg.nx() && field.ny() == cfg.patch.ny, config,
                      "field file " + cfg.field_file->string() + " is " +
                          std::to_string(field.cols()) + "x" + std::to_string(field.ny()) +
                          " but the configuration needs " + std::to_string(cfg.nx()) + "x" +
                          std::to_string(cfg.patch.ny));
    PATCHBEAM_REQUIRE(field.period_x() == cfg.heterogeneity.period_x, config,
                      "field file period does not match heterogeneity.period_x");
    return field;
}

BeamState initial_state(const StaggeredGrid& grid, const InitialCondition& ic, double length) {
    BeamState s = BeamState::zeros(grid);
    const double k = 2.0 * std::numbers::pi / length;
    for (int c = grid.first_evolved(); c < grid.end_evolved(); ++c) {
        for (int r = 0; r < grid.u_rows(); ++r) s.u(c, r) = ic.compression * std::sin(k * grid.u_x(c));
        for (int r = 0; r < grid.v_rows(); ++r) s.v(c, r) = ic.bending * std::sin(k * grid.v_x(c));
    }
    return s;
}

SpectrumRun run_spectrum(const SimConfig& cfg, const ElasticityField& field) {
    SpectrumRun run;
    Eigen::MatrixXd jac;
    Eigen::MatrixXd basis;
    const int n_patches = cfg.patch.n_patches;
    if (cfg.mode == RunMode::full) {
        const StaggeredGrid grid = cfg.full_grid();
        require_dense_size(grid.dof());
        jac = assemble_jacobian(make_full_rhs(grid, field, cfg.kappa), grid.dof());
        basis = rigid_translation_basis(grid);
    } else {
        const PatchSet set(cfg.patch, field, cfg.dx(), cfg.dy());
        require_dense_size(set.dof());
        jac = patch_jacobian(set, cfg.kappa);
        basis = rigid_translation_basis(set.grid(), n_patches);
        run.dof_ratio = set.dof_ratio();
    }
    run.dof = static_cast<int>(jac.rows());
    const DeflationResult d = eigen_spectrum_deflated(jac, basis);
    run.eigenvalues = d.eigenvalues;
    run.invariance_residual = d.invariance_residual;
    const int macro = std::min<int>(4 * n_patches, static_cast<int>(run.eigenvalues.size()));
    run.classification = classify_spectrum(run.eigenvalues, macro);
    for (const cplx& z : run.eigenvalues) {
        if (std::abs(z) < 1e-6) ++run.zero_count;
        run.max_abs_re = std::max(run.max_abs_re, std::abs(z.real()));
    }
    return run;
}

MacroReference full_reference(const SimConfig& cfg, const ElasticityField& field) {
    const StaggeredGrid grid = cfg.full_grid();
    require_dense_size(grid.dof());
    const Eigen::MatrixXd jac = assemble_jacobian(make_full_rhs(grid, field, cfg.kappa), grid.dof());
    MacroReference ref = full_macro_reference(jac, grid, field.period_x(), cfg.patch.n_patches);
    const auto wanted = static_cast<std::size_t>(4 * cfg.patch.n_patches);
    if (ref.eigenvalues.size() > wanted) {
        // Keep the slowest: ties with faster modes at the same wavenumber are
        // possible when the slow band is generous.
        std::vector<std::size_t> order(ref.eigenvalues.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(ref.eigenvalues[a]) < std::abs(ref.eigenvalues[b]);
        });
        order.resize(wanted);
        std::sort(order.begin(), order.end());
        std::vector<cplx> vals;
        std::vector<double> fracs;
        for (std::size_t i : order) {
            vals.push_back(ref.eigenvalues[i]);
            fracs.push_back(ref.fractions[i]);
        }
        ref.eigenvalues = std::move(vals);
        ref.fractions = std::move(fracs);
    }
    return ref;
}

CompareRow compare_ratio(const SimConfig& cfg, const ElasticityField& field,
                         const MacroReference& reference, double r) {
    SimConfig local = cfg;
    set_ratio(local.patch, r);
    const PatchSet set(local.patch, field, local.dx(), local.dy());
    require_dense_size(set.dof());
    const Eigen::MatrixXd jac = patch_jacobian(set, local.kappa);
    const DeflationResult d =
        eigen_spectrum_deflated(jac, rigid_translation_basis(set.grid(), set.size()));
    const Classification cls = classify_spectrum(d.eigenvalues, 4 * set.size());
    CompareRow row;
    row.r = r;
    row.n_sub = local.patch.n_sub;
    row.dof = set.dof();
    row.gap_ratio = cls.gap_ratio;
    row.comparison = compare_macro_eigenvalues(macro_values(d.eigenvalues, cls), reference.eigenvalues);
    return row;
}

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    PATCHBEAM_REQUIRE(x.size() == y.size() && x.size() >= 2, parameter,
                      "line fit needs at least two points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    PATCHBEAM_REQUIRE(sxx > 0.0, parameter, "line fit needs distinct abscissae");
    const double slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (my + slope * (x[i] - mx));
        ss += e * e;
    }
    return {slope, std::sqrt(ss / n)};
}

ConvergenceResult run_convergence(const SimConfig& cfg) {
    const ConvergenceConfig& cc = cfg.convergence;
    PATCHBEAM_REQUIRE(!cc.n_list.empty(), config, "convergence needs at least one patch count");
    const int period = cfg.heterogeneity.period_x;
    HeterogeneityParams hp = cfg.heterogeneity;
    hp.nx = cc.nx;
    hp.ny = cfg.patch.ny;
    const ElasticityField field = make_field(hp);
    const double dx = cfg.geometry.length / cc.nx;
    const double dy = cfg.geometry.width / cfg.patch.ny;

    const BlochSymbol bloch(cfg.patch.ny, dx, dy, field.window(0, period), cfg.kappa);
    const auto [bend_ref, comp_ref] = branch_heads(bloch.slowest(1, cc.nx / period, 4));

    ConvergenceResult res;
    for (int n : cc.n_list) {
        PATCHBEAM_REQUIRE(cc.nx % n == 0, config,
                          "convergence.nx=" + std::to_string(cc.nx) + " is not divisible by N=" +
                              std::to_string(n));
        PatchConfig pc = cfg.patch;
        pc.n_patches = n;
        pc.spacing_cells = cc.nx / n;
        pc.n_sub = cc.n_sub;
        try {
            pc.validate(period);
        } catch (const Error& e) {
            throw Error(ErrorKind::config, "convergence layout N=" + std::to_string(n) + ": " + e.what());
        }
        const PatchSet set(pc, field, dx, dy);
        const Eigen::MatrixXd jac = patch_jacobian(set, cfg.kappa);
        std::vector<cplx> slow = block_circulant_eigenvalues(jac, n, 1);
        std::stable_sort(slow.begin(), slow.end(),
                         [](const cplx& a, const cplx& b) { return std::abs(a) < std::abs(b); });
        slow.resize(std::min<std::size_t>(slow.size(), 4));

        ConvergenceRow row;
        row.n_patches = n;
        row.spacing = set.spacing();
        row.ratio = pc.ratio();
        row.err_compression = nearest_distance(slow, comp_ref);
        row.err_bending = nearest_distance(slow, bend_ref);
        res.rows.push_back(row);
    }

    res.at_floor = std::all_of(res.rows.begin(), res.rows.end(), [](const ConvergenceRow& r) {
        return std::max(r.err_compression, r.err_bending) <= kRoundOffFloor;
    });
    const bool positive = std::all_of(res.rows.begin(), res.rows.end(),
                                      [](const ConvergenceRow& r) { return r.err_compression > 0.0; });
    if (res.rows.size() >= 2 && positive) {
        std::vector<double> lx, ly;
        for (const ConvergenceRow& r : res.rows) {
            lx.push_back(std::log(r.spacing));
            ly.push_back(std::log(r.err_compression));
        }
        std::tie(res.slope, res.residual) = fit_line(lx, ly);
    } else {
        res.slope = std::numeric_limits<double>::quiet_NaN();
        res.residual = std::numeric_limits<double>::quiet_NaN();
    }
    return res;
}

SimulationResult run_simulation(const SimConfig& cfg, const ElasticityField& field,
                                const FrameWriter& writer) {
    const StaggeredGrid full = cfg.full_grid();
    check_field_matches(full, field);
    const double dt = cfg.integrator.dt.value_or(stable_dt(full, field, cfg.integrator.cfl_safety));
    const BeamState start = initial_state(full, cfg.initial, cfg.geometry.length);

    SimulationResult res;
    int frame = 0;
    if (cfg.mode == RunMode::full) {
        BeamState state = start;
        const std::vector<double> x0 = pack(full, start);
        auto sink = [&](int step, double t, std::span<const double> x) {
            unpack_into(full, x, state);
            state.t = t;
            const Energy e = energy(full, state, field);
            res.energy.push_back({step, t, e.kinetic, e.strain});
            if (writer) writer(frame, step, t, full_segments(full, state));
            ++frame;
        };
        res.integration = integrate(make_full_rhs(full, field, cfg.kappa), x0, dt,
                                    cfg.integrator.t_end, cfg.integrator.frame_stride, sink);
        return res;
    }

    PatchSet set(cfg.patch, field, cfg.dx(), cfg.dy());
    set.restrict_from(full, start);
    std::vector<double> x0(static_cast<std::size_t>(set.dof()));
    set.pack_into(x0);
    const RhsFn rhs = make_patched_rhs(set, cfg.kappa);
    auto sink = [&](int step, double t, std::span<const double> x) {
        set.unpack_from(x);
        set.fill_edges();
        EnergySample s{step, t, 0.0, 0.0};
        for (int k = 0; k < set.size(); ++k) {
            set.state(k).t = t;
            const Energy e = energy(set.grid(), set.state(k), set.field(k));
            s.kinetic += e.kinetic;
            s.strain += e.strain;
        }
        res.energy.push_back(s);
        if (writer) writer(frame, step, t, patch_segments(set));
        ++frame;
    };
    res.integration =
        integrate(rhs, x0, dt, cfg.integrator.t_end, cfg.integrator.frame_stride, sink);
    return res;
}

}  // namespace patchbeam

// Command-line driver: field generation, simulation, spectra, full-vs-patch
// comparison and convergence studies.

#include <CLI11.hpp>

#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "patchbeam/config.hpp"
#include "patchbeam/error.hpp"
#include "patchbeam/experiments.hpp"
#include "patchbeam/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace patchbeam;

namespace {

constexpr const char* kVersion = "patchbeam 1.0.0";

struct Overrides {
    std::string config;
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> kappa;
    std::optional<std::string> coupling;
    std::optional<int> degree;
    std::optional<double> r;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config, "TOML or JSON configuration file");
    app->add_option("--mode", o.mode, "full or patch");
    app->add_option("--seed", o.seed, "heterogeneity seed");
    app->add_option("--out", o.out, "output directory");
    app->add_option("--kappa", o.kappa, "velocity damping coefficient");
    app->add_option("--coupling", o.coupling, "spectral, polynomial or periodic_wrap");
    app->add_option("--degree", o.degree, "polynomial coupling degree (even)");
    app->add_option("--r", o.r, "patch size ratio n_sub / spacing");
}

SimConfig resolve(const Overrides& o) {
    SimConfig cfg = o.config.empty() ? SimConfig{} : load_config(o.config);
    if (o.mode) cfg.mode = parse_mode(*o.mode);
    if (o.seed) cfg.heterogeneity.seed = *o.seed;
    if (o.out) cfg.output = *o.out;
    if (o.kappa) cfg.kappa = *o.kappa;
    if (o.coupling || o.degree) {
        const int degree = o.degree.value_or(cfg.patch.coupling.degree);
        std::string kind = o.coupling.value_or(
            cfg.patch.coupling.kind == CouplingKind::polynomial ? "polynomial" : "spectral");
        cfg.patch.coupling = parse_coupling(kind, degree);
        if (cfg.patch.coupling.kind == CouplingKind::periodic_wrap) use_periodic_wrap(cfg.patch);
    }
    if (o.r) set_ratio(cfg.patch, *o.r);
    cfg.sync();
    cfg.validate();
    return cfg;
}

json versions() {
    return {{"program", kVersion},
            {"compiler", __VERSION__},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                          "." + std::to_string(EIGEN_MINOR_VERSION)}};
}

json complex_list(const std::vector<cplx>& zs) {
    json a = json::array();
    for (const cplx& z : zs) a.push_back({z.real(), z.imag()});
    return a;
}

std::vector<cplx> complex_from(const json& a) {
    std::vector<cplx> out;
    for (const auto& z : a) out.emplace_back(z.at(0).get<double>(), z.at(1).get<double>());
    return out;
}

void print_field_summary(const ElasticityField& f) {
    auto range = [](const Array2D& a) {
        double lo = a.flat()[0], hi = lo;
        for (double v : a.flat()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return std::pair{lo, hi};
    };
    double elo = 1e300, ehi = 0.0;
    for (const Array2D* a : {&f.raw().e_normal, &f.raw().e_shear}) {
        auto [lo, hi] = range(*a);
        elo = std::min(elo, lo);
        ehi = std::max(ehi, hi);
    }
    const auto [ln_lo, ln_hi] = range(f.lambda_n());
    const auto [mn_lo, mn_hi] = range(f.mu_n());
    const auto [ls_lo, ls_hi] = range(f.lambda_s());
    const auto [ms_lo, ms_hi] = range(f.mu_s());
    std::printf("field %dx%d, period %d, hash %s\n", f.cols(), f.ny(), f.period_x(),
                hex64(field_hash(f)).c_str());
    std::printf("lambda: [%.6g, %.6g]  mu: [%.6g, %.6g]  max(E)/min(E) = %.4g\n",
                std::min(ln_lo, ls_lo), std::max(ln_hi, ls_hi), std::min(mn_lo, ms_lo),
                std::max(mn_hi, ms_hi), ehi / elo);
}

int cmd_gen_field(const SimConfig& cfg) {
    const ElasticityField field = make_field(cfg.heterogeneity);
    const fs::path header = cfg.output / "field.json";
    write_field(header, field, cfg.heterogeneity, cfg.field_binary);
    print_field_summary(field);
    std::printf("wrote %s\n", header.string().c_str());
    return 0;
}

int cmd_simulate(const SimConfig& cfg) {
    const ElasticityField field = obtain_field(cfg);
    const fs::path frames = cfg.output / "frames";
    std::vector<json> frame_index;
    auto writer = [&](int frame, int step, double t, const std::vector<SnapshotSegment>& segs) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%05d.csv", frame);
        write_snapshot(frames / name, segs, cfg.nx(), cfg.full_grid(), t, cfg.kappa);
        frame_index.push_back({{"frame", frame}, {"step", step}, {"t", t}, {"file", std::string("frames/") + name}});
    };
    if (cfg.mode == RunMode::patch) {
        const PatchSet set(cfg.patch, field, cfg.dx(), cfg.dy());
        write_json(cfg.output / "layout.json", patch_layout_json(set));
    }
    const SimulationResult res = run_simulation(cfg, field, writer);

    {
        std::ofstream out = open_output(cfg.output / "energy.csv");
        out << "step,t,kinetic,strain,total\n";
        char line[160];
        for (const EnergySample& e : res.energy) {
            std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g\n", e.step, e.t, e.kinetic,
                          e.strain, e.total());
            out << line;
        }
    }
    const double e0 = res.energy.front().total();
    const double e1 = res.energy.back().total();
    const double drift = e0 != 0.0 ? std::abs(e1 - e0) / e0 : 0.0;

    json manifest;
    manifest["config"] = config_to_json(cfg);
    manifest["field_hash"] = hex64(field_hash(field));
    manifest["dt"] = res.integration.dt;
    manifest["steps"] = res.integration.steps;
    manifest["t_end"] = res.integration.t;
    manifest["energy_csv"] = "energy.csv";
    manifest["energy_drift"] = drift;
    manifest["frames"] = frame_index;
    manifest["versions"] = versions();
    write_json(cfg.output / "manifest.json", manifest);
    std::printf("%s run: %d steps of %.6g to t=%.6g, %zu frames, energy drift %.3e\n",
                mode_name(cfg.mode).c_str(), res.integration.steps, res.integration.dt,
                res.integration.t, frame_index.size(), drift);
    return 0;
}

int cmd_spectrum(const SimConfig& cfg) {
    const ElasticityField field = obtain_field(cfg);
    const SpectrumRun run = run_spectrum(cfg, field);
    const Classification& c = run.classification;
    write_spectrum_csv(cfg.output / "spectrum.csv", run.eigenvalues, c);
    json s;
    s["mode"] = mode_name(cfg.mode);
    s["kappa"] = cfg.kappa;
    s["dof"] = run.dof;
    s["dof_ratio"] = run.dof_ratio;
    s["eigenvalues"] = run.eigenvalues.size();
    s["macro_count"] = c.macro.size();
    s["micro_count"] = c.micro.size();
    s["gap_ratio"] = std::isfinite(c.gap_ratio) ? json(c.gap_ratio) : json("inf");
    s["gap"] = {{"max_re_micro", c.micro.empty() ? json(nullptr) : json(c.micro_max_re)},
                {"min_re_macro", c.macro_min_re}};
    s["classified_by_imaginary_part"] = c.by_imaginary;
    s["ambiguous_gap"] = c.ambiguous;
    s["zero_count"] = run.zero_count;
    s["max_abs_re"] = run.max_abs_re;
    s["rigid_invariance_residual"] = run.invariance_residual;
    write_json(cfg.output / "spectrum_summary.json", s);
    std::printf("%s spectrum: %d eigenvalues, %zu macro, gap ratio %.4g, max|Re| %.3e, %d zero\n",
                mode_name(cfg.mode).c_str(), run.dof, c.macro.size(), c.gap_ratio, run.max_abs_re,
                run.zero_count);
    if (c.ambiguous)
        std::fprintf(stderr, "warning: ambiguous spectral gap (ratio %.3g below 5)\n", c.gap_ratio);
    return 0;
}

MacroReference cached_reference(const SimConfig& cfg, const ElasticityField& field) {
    const fs::path cache = cfg.output / "full_reference.json";
    const json key = {{"field_hash", hex64(field_hash(field))}, {"kappa", cfg.kappa},
                      {"nx", cfg.nx()},  {"ny", cfg.patch.ny},
                      {"dx", cfg.dx()},  {"dy", cfg.dy()},
                      {"n_patches", cfg.patch.n_patches}};
    if (fs::exists(cache)) {
        const json j = read_json(cache);
        if (j.value("key", json()) == key) {
            MacroReference ref;
            ref.eigenvalues = complex_from(j.at("eigenvalues"));
            ref.fractions = j.at("fractions").get<std::vector<double>>();
            ref.candidates = j.at("candidates").get<int>();
            return ref;
        }
    }
    MacroReference ref = full_reference(cfg, field);
    write_json(cache, {{"key", key},
                       {"eigenvalues", complex_list(ref.eigenvalues)},
                       {"fractions", ref.fractions},
                       {"candidates", ref.candidates}});
    return ref;
}

int cmd_compare(const SimConfig& cfg) {
    std::printf("%-8s %-6s %-8s %-12s %-10s\n", "r", "n_sub", "dof", "max_error", "gap_ratio");
    json rows = json::array();
    if (!cfg.compare.ratios.empty()) {
        const ElasticityField field = obtain_field(cfg);
        const MacroReference ref = cached_reference(cfg, field);
        for (double r : cfg.compare.ratios) {
            const CompareRow row = compare_ratio(cfg, field, ref, r);
            char name[64];
            std::snprintf(name, sizeof name, "comparison_r%.6g.csv", r);
            write_comparison_csv(cfg.output / name, row.comparison);
            std::printf("%-8.4g %-6d %-8d %-12.3e %-10.4g\n", r, row.n_sub, row.dof,
                        row.comparison.max_error, row.gap_ratio);
            rows.push_back({{"r", r},
                            {"n_sub", row.n_sub},
                            {"dof", row.dof},
                            {"max_error", row.comparison.max_error},
                            {"pairs", row.comparison.pairs.size()},
                            {"gap_ratio", row.gap_ratio},
                            {"file", name}});
        }
    }
    write_json(cfg.output / "compare_summary.json",
               {{"coupling", cfg.patch.coupling.name()}, {"kappa", cfg.kappa}, {"rows", rows}});
    return 0;
}

int cmd_convergence(const SimConfig& cfg) {
    const ConvergenceResult res = run_convergence(cfg);
    {
        std::ofstream out = open_output(cfg.output / "convergence.csv");
        out << "N,H,r,err_compression,err_bending\n";
        char line[160];
        for (const ConvergenceRow& r : res.rows) {
            std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g\n", r.n_patches, r.spacing,
                          r.ratio, r.err_compression, r.err_bending);
            out << line;
        }
    }
    std::printf("%-4s %-10s %-10s %-14s %-14s\n", "N", "H", "r", "err_compress", "err_bending");
    for (const ConvergenceRow& r : res.rows)
        std::printf("%-4d %-10.5g %-10.5g %-14.4e %-14.4e\n", r.n_patches, r.spacing, r.ratio,
                    r.err_compression, r.err_bending);
    json s = {{"coupling", cfg.patch.coupling.name()},
              {"at_floor", res.at_floor},
              {"slope", std::isfinite(res.slope) ? json(res.slope) : json(nullptr)},
              {"residual", std::isfinite(res.residual) ? json(res.residual) : json(nullptr)}};
    write_json(cfg.output / "convergence_summary.json", s);
    if (res.at_floor)
        std::fprintf(stderr, "warning: errors at the round-off floor; fitted slope is meaningless\n");
    else
        std::printf("fitted order %.3f (rms residual %.3g)\n", res.slope, res.residual);
    return 0;
}

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::config:
        case ErrorKind::parameter:
        case ErrorKind::dimension:
        case ErrorKind::geometry:
        case ErrorKind::periodicity:
        case ErrorKind::stencil:
        case ErrorKind::coupling_contract: return 2;
        case ErrorKind::divergence: return 3;
        case ErrorKind::pairing_failure: return 4;
        default: return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Patch scheme for a heterogeneous elastic beam"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Overrides o;
    std::vector<double> ratios;
    std::vector<int> n_list;
    auto* gen = app.add_subcommand("gen-field", "generate and export the heterogeneous field");
    auto* sim = app.add_subcommand("simulate", "integrate the full or patched beam and dump frames");
    auto* spec = app.add_subcommand("spectrum", "Jacobian spectrum with macro/micro classification");
    auto* cmp = app.add_subcommand("compare", "patch macro eigenvalues against the full domain");
    auto* conv = app.add_subcommand("convergence", "macroscale error against patch spacing H");
    for (auto* sub : {gen, sim, spec, cmp, conv}) add_common(sub, o);
    cmp->add_option("--ratios", ratios, "patch ratios to compare (overrides the config)");
    auto* empty_ratios = cmp->add_flag("--no-ratios", "compare an empty ratio list");
    conv->add_option("--n-list", n_list, "odd patch counts (overrides the config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        SimConfig cfg = resolve(o);
        if (!ratios.empty()) cfg.compare.ratios = ratios;
        if (*empty_ratios) cfg.compare.ratios.clear();
        if (!n_list.empty()) cfg.convergence.n_list = n_list;
        cfg.validate();
        if (gen->parsed()) return cmd_gen_field(cfg);
        if (sim->parsed()) return cmd_simulate(cfg);
        if (spec->parsed()) return cmd_spectrum(cfg);
        if (cmp->parsed()) return cmd_compare(cfg);
        return cmd_convergence(cfg);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

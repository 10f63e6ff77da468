#include "patchbeam/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_ENABLE_FORMATTERS 1
#include <toml.hpp>

#include "patchbeam/error.hpp"

namespace patchbeam {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
    PATCHBEAM_REQUIRE(obj.is_object(), config, where + " must be a table");
    for (const auto& [key, _] : obj.items())
        PATCHBEAM_REQUIRE(known.contains(key), config, "unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::config, where + "." + key + ": " + e.what());
    }
}

}  // namespace

void use_periodic_wrap(PatchConfig& patch) {
    if (patch.n_patches == 1 && patch.n_sub == patch.spacing_cells + 1) {
        patch.coupling = Coupling::periodic_wrap();
        return;
    }
    const int nx = patch.full_nx();
    patch.n_patches = 1;
    patch.spacing_cells = nx;
    patch.n_sub = nx + 1;
    patch.coupling = Coupling::periodic_wrap();
}

void set_ratio(PatchConfig& patch, double r) {
    PATCHBEAM_REQUIRE(r > 0.0 && r < 1.0, config, "patch ratio r must lie in (0, 1)");
    const double cells = r * patch.spacing_cells;
    const double rounded = std::round(cells);
    PATCHBEAM_REQUIRE(std::abs(cells - rounded) < 1e-9, config,
                      "r=" + std::to_string(r) + " is not a whole number of cells at spacing " +
                          std::to_string(patch.spacing_cells));
    patch.n_sub = static_cast<int>(rounded);
}

RunMode parse_mode(const std::string& s) {
    if (s == "full") return RunMode::full;
    if (s == "patch") return RunMode::patch;
    throw Error(ErrorKind::config, "mode must be 'full' or 'patch', got '" + s + "'");
}

std::string mode_name(RunMode m) { return m == RunMode::full ? "full" : "patch"; }

Coupling parse_coupling(const std::string& s, int degree) {
    if (s == "spectral") return Coupling::spectral();
    if (s == "polynomial") return Coupling::polynomial(degree);
    if (s == "periodic_wrap") return Coupling::periodic_wrap();
    throw Error(ErrorKind::config,
                "coupling must be spectral, polynomial or periodic_wrap, got '" + s + "'");
}

void SimConfig::sync() {
    heterogeneity.nx = nx();
    heterogeneity.ny = patch.ny;
}

void SimConfig::validate() const {
    auto wrap = [](const Error& e, const std::string& where) {
        return Error(ErrorKind::config, where + ": " + e.what());
    };
    PATCHBEAM_REQUIRE(geometry.length > 0.0 && geometry.width > 0.0, config,
                      "geometry lengths must be positive");
    PATCHBEAM_REQUIRE(kappa >= 0.0, config, "kappa must be non-negative");
    PATCHBEAM_REQUIRE(heterogeneity.nx == nx() && heterogeneity.ny == patch.ny, config,
                      "heterogeneity grid is out of sync with the patch layout");
    try {
        heterogeneity.validate();
    } catch (const Error& e) {
        throw wrap(e, "heterogeneity");
    }
    try {
        patch.validate(heterogeneity.period_x);
    } catch (const Error& e) {
        throw wrap(e, "patch");
    }
    try {
        integrator.validate();
    } catch (const Error& e) {
        throw wrap(e, "integrator");
    }
    PATCHBEAM_REQUIRE(patch.ny >= 3, config,
                      "patch.ny must be at least 3 so the section has an interior shear row");
    for (double r : compare.ratios)
        PATCHBEAM_REQUIRE(r > 0.0 && r < 1.0, config, "compare ratios must lie in (0, 1)");
    PATCHBEAM_REQUIRE(convergence.nx > 0 && convergence.n_sub > 0, config,
                      "convergence nx and n_sub must be positive");
    for (int n : convergence.n_list)
        PATCHBEAM_REQUIRE(n >= 3 && n % 2 == 1, config, "convergence patch counts must be odd and >= 3");
}

SimConfig config_from_json(const json& j) {
    reject_unknown(j,
                   {"mode", "kappa", "output", "field_file", "field_format", "geometry",
                    "heterogeneity", "patch", "integrator", "initial", "compare", "convergence"},
                   "config");
    SimConfig c;
    std::string mode = mode_name(c.mode);
    read(j, "mode", mode, "config");
    c.mode = parse_mode(mode);
    read(j, "kappa", c.kappa, "config");
    std::string output = c.output.string();
    read(j, "output", output, "config");
    c.output = output;
    if (j.contains("field_file")) {
        std::string f;
        read(j, "field_file", f, "config");
        c.field_file = f;
    }
    std::string format = "csv";
    read(j, "field_format", format, "config");
    PATCHBEAM_REQUIRE(format == "csv" || format == "binary", config,
                      "field_format must be csv or binary");
    c.field_binary = format == "binary";

    if (j.contains("geometry")) {
        const json& g = j["geometry"];
        reject_unknown(g, {"length", "width"}, "geometry");
        read(g, "length", c.geometry.length, "geometry");
        read(g, "width", c.geometry.width, "geometry");
    }
    if (j.contains("heterogeneity")) {
        const json& h = j["heterogeneity"];
        reject_unknown(h, {"seed", "spread_factor", "nu_min", "nu_max", "period_x", "e_median", "sigma_log"},
                       "heterogeneity");
        auto& p = c.heterogeneity;
        read(h, "seed", p.seed, "heterogeneity");
        read(h, "spread_factor", p.spread_factor, "heterogeneity");
        read(h, "nu_min", p.nu_min, "heterogeneity");
        read(h, "nu_max", p.nu_max, "heterogeneity");
        read(h, "period_x", p.period_x, "heterogeneity");
        read(h, "e_median", p.e_median, "heterogeneity");
        if (h.contains("sigma_log")) {
            double s = 0.0;
            read(h, "sigma_log", s, "heterogeneity");
            p.sigma_log = s;
        }
    }
    if (j.contains("patch")) {
        const json& p = j["patch"];
        reject_unknown(p, {"n_patches", "spacing_cells", "n_sub", "ny", "coupling", "degree", "nyquist_cosine", "r"},
                       "patch");
        read(p, "n_patches", c.patch.n_patches, "patch");
        read(p, "spacing_cells", c.patch.spacing_cells, "patch");
        read(p, "n_sub", c.patch.n_sub, "patch");
        read(p, "ny", c.patch.ny, "patch");
        int degree = c.patch.coupling.degree;
        read(p, "degree", degree, "patch");
        std::string coupling = "spectral";
        read(p, "coupling", coupling, "patch");
        c.patch.coupling = parse_coupling(coupling, degree);
        read(p, "nyquist_cosine", c.patch.coupling.nyquist_cosine, "patch");
        if (p.contains("r")) {
            double r = 0.0;
            read(p, "r", r, "patch");
            set_ratio(c.patch, r);
        }
        if (c.patch.coupling.kind == CouplingKind::periodic_wrap) use_periodic_wrap(c.patch);
    }
    if (j.contains("integrator")) {
        const json& s = j["integrator"];
        reject_unknown(s, {"dt", "t_end", "cfl_safety", "frame_stride"}, "integrator");
        if (s.contains("dt")) {
            double dt = 0.0;
            read(s, "dt", dt, "integrator");
            c.integrator.dt = dt;
        }
        read(s, "t_end", c.integrator.t_end, "integrator");
        read(s, "cfl_safety", c.integrator.cfl_safety, "integrator");
        read(s, "frame_stride", c.integrator.frame_stride, "integrator");
    }
    if (j.contains("initial")) {
        const json& s = j["initial"];
        reject_unknown(s, {"compression", "bending"}, "initial");
        read(s, "compression", c.initial.compression, "initial");
        read(s, "bending", c.initial.bending, "initial");
    }
    if (j.contains("compare")) {
        const json& s = j["compare"];
        reject_unknown(s, {"ratios"}, "compare");
        read(s, "ratios", c.compare.ratios, "compare");
    }
    if (j.contains("convergence")) {
        const json& s = j["convergence"];
        reject_unknown(s, {"n_list", "nx", "n_sub"}, "convergence");
        read(s, "n_list", c.convergence.n_list, "convergence");
        read(s, "nx", c.convergence.nx, "convergence");
        read(s, "n_sub", c.convergence.n_sub, "convergence");
    }
    c.sync();
    return c;
}

json config_to_json(const SimConfig& c) {
    json j;
    j["mode"] = mode_name(c.mode);
    j["kappa"] = c.kappa;
    j["output"] = c.output.string();
    if (c.field_file) j["field_file"] = c.field_file->string();
    j["field_format"] = c.field_binary ? "binary" : "csv";
    j["geometry"] = {{"length", c.geometry.length}, {"width", c.geometry.width}};
    const auto& h = c.heterogeneity;
    j["heterogeneity"] = {{"seed", h.seed},         {"spread_factor", h.spread_factor},
                          {"nu_min", h.nu_min},     {"nu_max", h.nu_max},
                          {"period_x", h.period_x}, {"e_median", h.e_median}};
    if (h.sigma_log) j["heterogeneity"]["sigma_log"] = *h.sigma_log;
    std::string coupling = "spectral";
    if (c.patch.coupling.kind == CouplingKind::polynomial) coupling = "polynomial";
    if (c.patch.coupling.kind == CouplingKind::periodic_wrap) coupling = "periodic_wrap";
    j["patch"] = {{"n_patches", c.patch.n_patches}, {"spacing_cells", c.patch.spacing_cells},
                  {"n_sub", c.patch.n_sub},         {"ny", c.patch.ny},
                  {"coupling", coupling},           {"degree", c.patch.coupling.degree},
                  {"nyquist_cosine", c.patch.coupling.nyquist_cosine}};
    j["integrator"] = {{"t_end", c.integrator.t_end},
                       {"cfl_safety", c.integrator.cfl_safety},
                       {"frame_stride", c.integrator.frame_stride}};
    if (c.integrator.dt) j["integrator"]["dt"] = *c.integrator.dt;
    j["initial"] = {{"compression", c.initial.compression}, {"bending", c.initial.bending}};
    j["compare"] = {{"ratios", c.compare.ratios}};
    j["convergence"] = {{"n_list", c.convergence.n_list},
                        {"nx", c.convergence.nx},
                        {"n_sub", c.convergence.n_sub}};
    return j;
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    PATCHBEAM_REQUIRE(in.good(), config, "cannot open config file " + path.string());
    std::stringstream text;
    text << in.rdbuf();
    json j;
    if (path.extension() == ".toml") {
        try {
            const toml::table table = toml::parse(text.str(), path.string());
            std::stringstream as_json;
            as_json << toml::json_formatter{table};
            j = json::parse(as_json.str());
        } catch (const toml::parse_error& e) {
            std::ostringstream msg;
            msg << "TOML parse error in " << path.string() << ": " << e.description() << " at "
                << e.source().begin;
            throw Error(ErrorKind::config, msg.str());
        }
    } else {
        try {
            j = json::parse(text.str());
        } catch (const json::exception& e) {
            throw Error(ErrorKind::config, "JSON parse error in " + path.string() + ": " + e.what());
        }
    }
    return config_from_json(j);
}

}  // namespace patchbeam

#include "patchbeam/io.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <iomanip>
#include <sstream>

#include "patchbeam/error.hpp"

namespace patchbeam {

namespace {

using nlohmann::json;

constexpr std::array<const char*, 4> kFamilies{"lambda_n", "mu_n", "lambda_s", "mu_s"};

std::array<const Array2D*, 4> lame_arrays(const ElasticityField& f) {
    return {&f.lambda_n(), &f.mu_n(), &f.lambda_s(), &f.mu_s()};
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::ofstream open_output(const std::filesystem::path& path, bool binary) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    PATCHBEAM_REQUIRE(out.good(), io, "cannot open " + path.string() + " for writing");
    return out;
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out = open_output(path);
    out << j.dump(2) << '\n';
    PATCHBEAM_REQUIRE(out.good(), io, "failed writing " + path.string());
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    PATCHBEAM_REQUIRE(in.good(), io, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::io, "malformed JSON in " + path.string() + ": " + e.what());
    }
}

std::uint64_t field_hash(const ElasticityField& field) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Array2D* a : lame_arrays(field)) {
        for (double v : a->flat()) {
            const auto bits = std::bit_cast<std::uint64_t>(v);
            for (int b = 0; b < 8; ++b) {
                h ^= (bits >> (8 * b)) & 0xffU;
                h *= 0x100000001b3ULL;
            }
        }
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

void write_field(const std::filesystem::path& header, const ElasticityField& field,
                 const HeterogeneityParams& params, bool binary) {
    std::filesystem::path data = header;
    data.replace_extension(binary ? ".bin" : ".csv");

    json j;
    j["params"] = {{"seed", params.seed},         {"spread_factor", params.spread_factor},
                   {"nu_min", params.nu_min},     {"nu_max", params.nu_max},
                   {"period_x", params.period_x}, {"e_median", params.e_median},
                   {"sigma_log", params.log_sigma()}};
    j["nx"] = field.cols();
    j["ny"] = field.ny();
    j["period_x"] = field.period_x();
    j["e_median"] = field.e_median();
    j["nu_mean"] = field.nu_mean();
    j["families"] = {{{"name", "lambda_n"}, {"rows", field.ny() + 1}},
                     {{"name", "mu_n"}, {"rows", field.ny() + 1}},
                     {{"name", "lambda_s"}, {"rows", field.ny()}},
                     {{"name", "mu_s"}, {"rows", field.ny()}}};
    j["order"] = "family-major; within a family row-major with j outer, i inner";
    j["format"] = binary ? "binary-f64le" : "csv";
    j["data"] = data.filename().string();
    j["hash"] = hex64(field_hash(field));
    write_json(header, j);

    const auto arrays = lame_arrays(field);
    if (binary) {
        static_assert(std::endian::native == std::endian::little, "binary field files are little-endian");
        std::ofstream out = open_output(data, true);
        for (const Array2D* a : arrays) {
            const auto flat = a->flat();
            out.write(reinterpret_cast<const char*>(flat.data()),
                      static_cast<std::streamsize>(flat.size() * sizeof(double)));
        }
        PATCHBEAM_REQUIRE(out.good(), io, "failed writing " + data.string());
        return;
    }
    std::ofstream out = open_output(data);
    out << "family,i,j,value\n";
    for (std::size_t f = 0; f < arrays.size(); ++f) {
        const Array2D& a = *arrays[f];
        for (int r = 0; r < a.rows(); ++r)
            for (int c = 0; c < a.cols(); ++c)
                out << kFamilies[f] << ',' << c << ',' << r << ',' << fmt_double(a(c, r)) << '\n';
    }
    PATCHBEAM_REQUIRE(out.good(), io, "failed writing " + data.string());
}

ElasticityField read_field(const std::filesystem::path& header) {
    const json j = read_json(header);
    int nx = 0, ny = 0, period = 0;
    double e_median = 0.0, nu_mean = 0.0;
    std::string format, data_name;
    try {
        nx = j.at("nx").get<int>();
        ny = j.at("ny").get<int>();
        period = j.at("period_x").get<int>();
        e_median = j.at("e_median").get<double>();
        nu_mean = j.at("nu_mean").get<double>();
        format = j.at("format").get<std::string>();
        data_name = j.at("data").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::io, "field header " + header.string() + ": " + e.what());
    }
    PATCHBEAM_REQUIRE(nx >= 1 && ny >= 2, io, "field header has invalid dimensions");
    std::array<Array2D, 4> arrays{Array2D(nx, ny + 1), Array2D(nx, ny + 1), Array2D(nx, ny),
                                  Array2D(nx, ny)};
    const std::filesystem::path data = header.parent_path() / data_name;

    if (format == "binary-f64le") {
        std::ifstream in(data, std::ios::binary);
        PATCHBEAM_REQUIRE(in.good(), io, "cannot open " + data.string());
        for (Array2D& a : arrays) {
            auto flat = a.flat();
            in.read(reinterpret_cast<char*>(flat.data()),
                    static_cast<std::streamsize>(flat.size() * sizeof(double)));
            PATCHBEAM_REQUIRE(in.good(), io, "truncated field data in " + data.string());
        }
    } else if (format == "csv") {
        std::ifstream in(data);
        PATCHBEAM_REQUIRE(in.good(), io, "cannot open " + data.string());
        std::string line;
        std::getline(in, line);
        PATCHBEAM_REQUIRE(line == "family,i,j,value", io, "unexpected field CSV header in " + data.string());
        std::size_t expected = 0, seen = 0;
        for (const Array2D& a : arrays) expected += a.flat().size();
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream row(line);
            std::string fam, cs, rs, vs;
            std::getline(row, fam, ',');
            std::getline(row, cs, ',');
            std::getline(row, rs, ',');
            std::getline(row, vs, ',');
            int f = -1;
            for (int k = 0; k < 4; ++k)
                if (fam == kFamilies[k]) f = k;
            PATCHBEAM_REQUIRE(f >= 0, io, "unknown family '" + fam + "' in " + data.string());
            int c = 0, r = 0;
            double v = 0.0;
            try {
                c = std::stoi(cs);
                r = std::stoi(rs);
                v = std::stod(vs);
            } catch (const std::exception&) {
                throw Error(ErrorKind::io, "malformed field CSV line '" + line + "'");
            }
            Array2D& a = arrays[f];
            PATCHBEAM_REQUIRE(c >= 0 && c < a.cols() && r >= 0 && r < a.rows(), io,
                              "field CSV index out of range in line '" + line + "'");
            a(c, r) = v;
            ++seen;
        }
        PATCHBEAM_REQUIRE(seen == expected, io, "field CSV " + data.string() + " has " +
                                                    std::to_string(seen) + " values, expected " +
                                                    std::to_string(expected));
    } else {
        throw Error(ErrorKind::io, "unknown field data format '" + format + "'");
    }
    ElasticityField field = ElasticityField::from_lame(std::move(arrays[0]), std::move(arrays[1]),
                                                       std::move(arrays[2]), std::move(arrays[3]),
                                                       period, e_median, nu_mean);
    if (j.contains("hash"))
        PATCHBEAM_REQUIRE(j["hash"].get<std::string>() == hex64(field_hash(field)), io,
                          "field data in " + data.string() + " does not match its header hash");
    return field;
}

std::vector<SnapshotSegment> full_segments(const StaggeredGrid& grid, const BeamState& state) {
    return {SnapshotSegment{&grid, &state, grid.first_evolved(), grid.end_evolved(), 0}};
}

std::vector<SnapshotSegment> patch_segments(const PatchSet& set) {
    std::vector<SnapshotSegment> out;
    for (int k = 0; k < set.size(); ++k)
        out.push_back({&set.grid(), &set.state(k), set.grid().first_evolved(),
                       set.grid().end_evolved(), set.first_column(k)});
    return out;
}

void write_snapshot(const std::filesystem::path& csv, std::span<const SnapshotSegment> segments,
                    int wrap_nx, const StaggeredGrid& full_grid, double t, double kappa) {
    std::ofstream out = open_output(csv);
    out << "family,i,j,x,y,value\n";
    struct Family {
        const char* name;
        Array2D BeamState::*member;
        bool is_u;
    };
    constexpr Family families[] = {{"u", &BeamState::u, true},
                                   {"v", &BeamState::v, false},
                                   {"du", &BeamState::du, true},
                                   {"dv", &BeamState::dv, false}};
    for (const Family& fam : families) {
        for (const SnapshotSegment& seg : segments) {
            const Array2D& a = seg.state->*fam.member;
            for (int r = 0; r < a.rows(); ++r) {
                for (int c = seg.first; c < seg.end; ++c) {
                    const int i = ((seg.column_offset + c) % wrap_nx + wrap_nx) % wrap_nx;
                    const double x = fam.is_u ? full_grid.u_x(i) : full_grid.v_x(i);
                    const double y = fam.is_u ? full_grid.u_y(r) : full_grid.v_y(r);
                    out << fam.name << ',' << i << ',' << r << ',' << fmt_double(x) << ','
                        << fmt_double(y) << ',' << fmt_double(a(c, r)) << '\n';
                }
            }
        }
    }
    PATCHBEAM_REQUIRE(out.good(), io, "failed writing " + csv.string());

    json side;
    side["t"] = t;
    side["nx"] = full_grid.nx;
    side["ny"] = full_grid.ny;
    side["dx"] = full_grid.dx;
    side["dy"] = full_grid.dy;
    side["kappa"] = kappa;
    side["segments"] = static_cast<int>(segments.size());
    write_json(std::filesystem::path(csv.string() + ".json"), side);
}

json patch_layout_json(const PatchSet& set) {
    const PatchConfig& c = set.config();
    json j;
    j["N"] = c.n_patches;
    j["H"] = set.spacing();
    j["spacing_cells"] = c.spacing_cells;
    j["n_sub"] = c.n_sub;
    j["n_y"] = c.ny;
    j["r"] = c.ratio();
    j["coupling"] = c.coupling.name();
    j["dof"] = set.dof();
    j["full_dof"] = set.full_dof();
    j["dof_ratio"] = set.dof_ratio();
    json patches = json::array();
    for (int k = 0; k < set.size(); ++k)
        patches.push_back({{"index", k},
                           {"centre_x", set.centre_x(k)},
                           {"first_column", set.first_column(k)}});
    j["patches"] = patches;
    return j;
}

void write_spectrum_csv(const std::filesystem::path& csv, std::span<const cplx> eigs,
                        const Classification& cls) {
    std::vector<bool> macro(eigs.size(), false);
    for (int i : cls.macro) macro[static_cast<std::size_t>(i)] = true;
    std::ofstream out = open_output(csv);
    out << "Re,Im,class\n";
    for (std::size_t i = 0; i < eigs.size(); ++i)
        out << fmt_double(eigs[i].real()) << ',' << fmt_double(eigs[i].imag()) << ','
            << (macro[i] ? "macro" : "micro") << '\n';
    PATCHBEAM_REQUIRE(out.good(), io, "failed writing " + csv.string());
}

void write_comparison_csv(const std::filesystem::path& csv, const Comparison& cmp) {
    std::ofstream out = open_output(csv);
    out << "Re_full,Im_full,Re_patch,Im_patch,abs_error\n";
    for (const EigenPair& p : cmp.pairs)
        out << fmt_double(p.full.real()) << ',' << fmt_double(p.full.imag()) << ','
            << fmt_double(p.patch.real()) << ',' << fmt_double(p.patch.imag()) << ','
            << fmt_double(p.error) << '\n';
    PATCHBEAM_REQUIRE(out.good(), io, "failed writing " + csv.string());
}

}  // namespace patchbeam

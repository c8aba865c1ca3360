#include "hsv/io.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace hsv {

namespace fs = std::filesystem;
using nlohmann::json;

void write_file_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("rename failed: " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt17(double v) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<size_t>(n));
}

std::string git_blob_hash(std::string_view content) {
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
        EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
        throw std::runtime_error("sha1 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned char c : std::span<const unsigned char>(md, len)) {
        out += hex[c >> 4];
        out += hex[c & 15];
    }
    return out;
}

fs::path sidecar_path(const fs::path& csv_path) {
    fs::path p = csv_path;
    p.replace_extension(".json");
    return p;
}

namespace {

json params_json(const PhysParams& p) {
    return json{{"nu", p.nu}, {"mu0", p.mu0}, {"gamma", p.gamma},
                {"eps0", p.eps0}, {"a", p.a}, {"theta0", p.theta0}};
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw std::runtime_error("field dump: bad number '" + std::string(s) + "'");
    return v;
}

int parse_int(std::string_view s) {
    int v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw std::runtime_error("field dump: bad integer '" + std::string(s) + "'");
    return v;
}

}  // namespace

void write_field_dump(const fs::path& csv_path, const SpectralField& f, const PhysParams& params, double t) {
    const Grid& g = f.grid();
    std::string csv = "xi1,xi2,component,z_index,re,im\n";
    csv.reserve(static_cast<size_t>(g.n_modes() * f.ncomp() * g.Nz()) * 64);
    for (int m = 0; m < g.n_modes(); ++m) {
        const Mode xi = g.mode(m);
        for (int c = 0; c < f.ncomp(); ++c) {
            const auto p = f.profile(m, c);
            for (int j = 0; j < g.Nz(); ++j) {
                const cplx v = p[static_cast<size_t>(j)];
                csv += std::to_string(xi.xi1) + ',' + std::to_string(xi.xi2) + ',' + std::to_string(c + 1) + ',' +
                       std::to_string(j) + ',' + fmt17(v.real()) + ',' + fmt17(v.imag()) + '\n';
            }
        }
    }
    std::vector<std::string> z;
    for (double v : g.z()) z.push_back(fmt17(v));
    json side{{"grid",
               {{"K", g.K()},
                {"Nz", g.Nz()},
                {"Z_max", g.Z_max()},
                {"nu_min", g.nu_min()},
                {"mu0", g.mu0()},
                {"c_grade", g.c_grade()},
                {"beta", g.beta()},
                {"z_nodes", z}}},
              {"ncomp", f.ncomp()},
              {"t", t},
              {"params", params_json(params)}};
    write_file_atomic(csv_path, csv);
    write_file_atomic(sidecar_path(csv_path), side.dump(2) + "\n");
}

FieldDump read_field_dump(const fs::path& csv_path) {
    json side;
    try {
        side = json::parse(read_file(sidecar_path(csv_path)));
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("field dump sidecar: ") + e.what());
    }
    FieldDump out;
    try {
        const auto& gj = side.at("grid");
        auto grid = make_grid(gj.at("K").get<int>(), gj.at("Nz").get<int>(), gj.at("Z_max").get<double>(),
                              gj.at("nu_min").get<double>(), gj.at("mu0").get<double>(),
                              gj.at("c_grade").get<double>());
        const auto z = gj.at("z_nodes").get<std::vector<std::string>>();
        if (static_cast<int>(z.size()) != grid->Nz()) throw std::runtime_error("field dump: z_nodes size mismatch");
        for (int j = 0; j < grid->Nz(); ++j) {
            if (parse_double(z[static_cast<size_t>(j)]) != grid->z(j))
                throw std::runtime_error("field dump: stored mesh differs from rebuilt mesh");
        }
        const auto& pj = side.at("params");
        out.params.nu = pj.at("nu").get<double>();
        out.params.mu0 = pj.at("mu0").get<double>();
        out.params.gamma = pj.at("gamma").get<double>();
        out.params.eps0 = pj.at("eps0").get<double>();
        out.params.a = pj.at("a").get<double>();
        out.params.theta0 = pj.at("theta0").get<double>();
        out.t = side.at("t").get<double>();
        out.field = SpectralField(grid, side.at("ncomp").get<int>());
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("field dump sidecar: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("field dump sidecar: ") + e.what());
    }

    const Grid& g = out.field.grid();
    const std::string csv = read_file(csv_path);
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != "xi1,xi2,component,z_index,re,im")
        throw std::runtime_error("field dump: bad header");
    size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::string_view sv(line);
        std::array<std::string_view, 6> col;
        for (int k = 0; k < 6; ++k) {
            const auto pos = sv.find(',');
            if ((k < 5) == (pos == std::string_view::npos)) throw std::runtime_error("field dump: bad row: " + line);
            col[static_cast<size_t>(k)] = sv.substr(0, pos);
            if (k < 5) sv.remove_prefix(pos + 1);
        }
        const int m = g.index(parse_int(col[0]), parse_int(col[1]));
        const int c = parse_int(col[2]) - 1;
        const int j = parse_int(col[3]);
        if (m < 0 || c < 0 || c >= out.field.ncomp() || j < 0 || j >= g.Nz())
            throw std::runtime_error("field dump: index out of range: " + line);
        out.field.at(m, c, j) = cplx(parse_double(col[4]), parse_double(col[5]));
        ++rows;
    }
    if (rows != static_cast<size_t>(g.n_modes() * out.field.ncomp() * g.Nz()))
        throw std::runtime_error("field dump: row count mismatch");
    return out;
}

}  // namespace hsv

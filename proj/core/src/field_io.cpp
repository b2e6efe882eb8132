#include "chemolab/field_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "chemolab/errors.hpp"

namespace chemolab {

namespace {

constexpr const char* kMagic = "CPLF1";

std::string exact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const ScalarField& field) {
    const Grid& g = field.grid();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open snapshot for writing: " + path.string());
    out << kMagic << ' ' << g.nx << ' ' << g.ny << ' ' << exact(g.lx) << ' ' << exact(g.ly) << '\n';
    std::array<char, 8> bytes{};
    for (double v : field.values()) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        for (std::size_t b = 0; b < 8; ++b) {
            bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
        }
        out.write(bytes.data(), 8);
    }
    if (!out) throw ValidationError("failed writing snapshot: " + path.string());
}

ScalarField read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open snapshot: " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw ValidationError("snapshot has no header: " + path.string());
    std::istringstream hs(header);
    std::string magic;
    int nx = 0;
    int ny = 0;
    double lx = 0.0;
    double ly = 0.0;
    if (!(hs >> magic >> nx >> ny >> lx >> ly) || magic != kMagic) {
        throw ValidationError("malformed CPLF1 header in " + path.string());
    }
    const Grid g = build_grid(nx, ny, lx, ly);
    std::vector<double> values(g.cells());
    std::array<unsigned char, 8> bytes{};
    for (double& v : values) {
        if (!in.read(reinterpret_cast<char*>(bytes.data()), 8)) {
            throw ValidationError("snapshot payload truncated: " + path.string());
        }
        std::uint64_t bits = 0;
        for (std::size_t b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
        v = std::bit_cast<double>(bits);
    }
    return ScalarField(g, std::move(values));
}

}  // namespace chemolab

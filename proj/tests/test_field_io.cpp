#include <doctest.h>

#include <fstream>
#include <sstream>

#include "chemolab/errors.hpp"
#include "chemolab/field_io.hpp"
#include "test_support.hpp"

using namespace chemolab;

TEST_CASE("snapshot round trip is bitwise exact") {
    const auto dir = test::scratch_dir("field_io");
    const Grid g = build_grid(7, 5, 1.0 / 3.0, 2.0);
    const ScalarField f = test::random_field(g, 3, -1e3, 1e3);
    write_snapshot(dir / "f.cplf", f);
    const ScalarField back = read_snapshot(dir / "f.cplf");
    CHECK(back.grid() == g);
    CHECK(back == f);
}

TEST_CASE("snapshot header and payload layout") {
    const auto dir = test::scratch_dir("field_io_layout");
    const Grid g = build_grid(3, 4, 1.0, 2.0);
    ScalarField f(g);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = static_cast<double>(k);
    write_snapshot(dir / "f.cplf", f);
    std::ifstream in(dir / "f.cplf", std::ios::binary);
    std::string header;
    std::getline(in, header);
    CHECK(header == "CPLF1 3 4 1 2");
    std::ostringstream rest;
    rest << in.rdbuf();
    const std::string payload = rest.str();
    REQUIRE(payload.size() == 12 * 8);
    // element 1 == 1.0 == 0x3FF0000000000000, little endian
    CHECK(static_cast<unsigned char>(payload[8 + 7]) == 0x3F);
    CHECK(static_cast<unsigned char>(payload[8 + 6]) == 0xF0);
}

TEST_CASE("malformed snapshots are rejected") {
    const auto dir = test::scratch_dir("field_io_bad");
    {
        std::ofstream out(dir / "magic.cplf", std::ios::binary);
        out << "CPLF2 3 3 1 1\n";
    }
    CHECK_THROWS_AS(read_snapshot(dir / "magic.cplf"), ValidationError);
    const Grid g = build_grid(3, 3, 1.0, 1.0);
    write_snapshot(dir / "short.cplf", ScalarField(g, 1.0));
    std::filesystem::resize_file(dir / "short.cplf", std::filesystem::file_size(dir / "short.cplf") - 3);
    CHECK_THROWS_AS(read_snapshot(dir / "short.cplf"), ValidationError);
    CHECK_THROWS_AS(read_snapshot(dir / "missing.cplf"), ValidationError);
}

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "mhc/error.hpp"
#include "mhc/field_io.hpp"

using namespace mhc;

namespace {

Problem benchmark()
{
    mhc::testing::Linquad o;
    o.n = 1;
    o.gamma = 0.0;
    o.sigma = 0.3;
    o.sigma_z = 0.2;
    o.eta = 1.5;
    o.phi2 = 2.0;
    return mhc::testing::linquad_problem(o);
}

const Grid kGrid({{0.0, 1.0, 5}}, {{0.0, 0.15, 5}}, 8, 1.0);

std::string temp_path(const char* name)
{
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("solution CSV layout")
{
    const auto p = benchmark();
    const auto sol = backward_solve(p, kGrid);
    std::ostringstream os;
    write_solution_csv(os, sol);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t[time],w_1[utility],z_1[state],F[payoff],y_1[utility_per_output],c_1[payoff_rate],"
                  "a_1[action],multiple[flag],H[payoff_rate]");
    std::size_t rows = 0;
    std::string last;
    while (std::getline(in, line)) ++rows, last = line;
    CHECK(rows == 9 * 25);
    CHECK(last.find(",nan,nan,nan,0,nan") != std::string::npos);
}

TEST_CASE("binary cache round trip and resume")
{
    const auto p = benchmark();
    const auto full = backward_solve(p, kGrid);
    const auto path = temp_path("mhc_cache_test.bin");
    Solution partial;
    SolveOptions opts;
    opts.on_slice = [&](std::size_t k, const Solution& s) {
        if (k == 4) save_solution(path, s);
    };
    backward_solve(p, kGrid, {}, opts);
    auto loaded = load_solution(path);
    CHECK(loaded.value.first_computed == 4);
    CHECK(loaded.value.slices[5] == full.value.slices[5]);
    const auto resumed = backward_solve(p, kGrid, {}, {}, &loaded);
    CHECK(resumed.value.slices == full.value.slices);
    CHECK(resumed.policy.slices[0].a == full.policy.slices[0].a);
    CHECK(resumed.policy.slices[0].multiple == full.policy.slices[0].multiple);

    save_solution(path, full);
    const auto again = load_solution(path);
    CHECK(again.value.slices == full.value.slices);
    CHECK(again.policy.slices[3].y == full.policy.slices[3].y);
    std::remove(path.c_str());
}

TEST_CASE("cache rejects foreign or mismatched files")
{
    const auto path = temp_path("mhc_cache_bad.bin");
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOPE0000";
    }
    CHECK_THROWS_AS(load_solution(path), Error);
    {
        std::ofstream out(path, std::ios::binary);
        out.write("MHCF", 4);
        const std::uint32_t version = kCacheVersion + 1;
        out.write(reinterpret_cast<const char*>(&version), sizeof version);
    }
    try {
        load_solution(path);
        FAIL("expected a version error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::io);
        CHECK(std::string(e.what()).find("version") != std::string::npos);
    }
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_solution(path), Error);

    const auto p = benchmark();
    auto sol = backward_solve(p, kGrid);
    const Grid other({{0.0, 1.0, 7}}, {{0.0, 0.15, 5}}, 8, 1.0);
    CHECK_THROWS_AS(backward_solve(p, other, {}, {}, &sol), Error);
}

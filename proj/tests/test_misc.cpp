#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "dwn/energy.hpp"
#include "dwn/error.hpp"
#include "dwn/report.hpp"
#include "support.hpp"

using namespace dwn;
using namespace dwn::testing;

TEST_SUITE("misc") {

TEST_CASE("flop cost is the average of multiply and add") {
    const EnergyModel e;
    CHECK(std::abs(e.flop_nj() - (e.mul_nj + e.add_nj) / 2.0) < 1e-12);
    CHECK(e.flop_nj() == doctest::Approx(0.761).epsilon(1e-12));
}

TEST_CASE("energy estimates for the reference FLOP counts") {
    CHECK(estimate_energy_mj(35000000) == doctest::Approx(26.635).epsilon(1e-9));
    CHECK(estimate_energy_mj(11000000) == doctest::Approx(8.371).epsilon(1e-9));
    CHECK(estimate_energy_mj(44000000) == doctest::Approx(33.484).epsilon(1e-9));
    CHECK(estimate_energy_mj(69000000) == doctest::Approx(52.509).epsilon(1e-9));
    CHECK(estimate_energy_mj(0) == 0.0);

    // Rounded to the nearest mJ, each lands within 1 of the published figure.
    CHECK(std::abs(std::round(estimate_energy_mj(35000000)) - 26.0) <= 1.0);
    CHECK(std::abs(std::round(estimate_energy_mj(11000000)) - 8.0) <= 1.0);
    CHECK(std::abs(std::round(estimate_energy_mj(44000000)) - 33.0) <= 1.0);
    CHECK(std::abs(std::round(estimate_energy_mj(69000000)) - 52.0) <= 1.0);
}

TEST_CASE("builtin baselines render with energy column") {
    const std::vector<ComparisonRow> rows = builtin_baselines();
    REQUIRE(rows.size() == 4);
    const std::string table = render_comparison(rows);
    CHECK(table.find("HARMamba") != std::string::npos);
    CHECK(table.find("8.4") != std::string::npos);    // 11M flops
    CHECK(table.find("52.5") != std::string::npos);   // 69M flops
    CHECK(table.find("preprocessing") != std::string::npos);
}

TEST_CASE("manifest parsing") {
    namespace fs = std::filesystem;
    const fs::path path =
        fs::temp_directory_path() / ("dwn_manifest_" + std::to_string(std::random_device{}()));
    {
        std::ofstream out(path);
        out << "# name acc f1 size_kib flops\n";
        out << "ModelA 96.06 - - 69000000\n";
        out << "ModelB 97.35 97.12 1600 44000000\n";
    }
    const std::vector<ComparisonRow> rows = parse_manifest(path.string());
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].name == "ModelA");
    CHECK(rows[0].accuracy == doctest::Approx(0.9606));
    CHECK(rows[0].f1 == -1.0);
    CHECK(rows[1].flops == 44000000);
    fs::remove(path);

    CHECK_THROWS_AS((void)parse_manifest("/nonexistent/manifest.txt"), Error);
}

TEST_CASE("local model rows report measured size and zero flops") {
    std::mt19937_64 rng(3);
    const DwnModel m = make_random_model(rng, 16, 10, 4, 8, 2);
    const FrozenModel f = freeze(m);
    const ComparisonRow row = row_from_model("local", f, 0.91);
    CHECK(row.local);
    CHECK(row.flops == 0);
    CHECK(row.size_kib == doctest::Approx(double(model_size_bytes(f)) / 1024.0));

    const std::string summary = render_model_summary({{"local", &f}});
    CHECK(summary.find("local") != std::string::npos);
    CHECK(summary.find(std::to_string(model_size_bytes(f))) != std::string::npos);
}

}  // TEST_SUITE

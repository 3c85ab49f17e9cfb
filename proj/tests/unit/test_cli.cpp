#include "isoyamabe/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using isoyamabe::cli::kExitConfig;
using isoyamabe::cli::kExitNumerical;
using isoyamabe::cli::kExitOk;
using json = nlohmann::json;

namespace {

struct Run {
    int rc;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "isoyamabe");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc = isoyamabe::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {rc, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells(1);
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char ch = line[i];
            if (quoted) {
                if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    cells.back() += '"';
                    ++i;
                } else if (ch == '"') {
                    quoted = false;
                } else {
                    cells.back() += ch;
                }
            } else if (ch == '"') {
                quoted = true;
            } else if (ch == ',') {
                cells.emplace_back();
            } else {
                cells.back() += ch;
            }
        }
        rows.push_back(cells);
    }
    return rows;
}

std::string summary_value(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    const std::string prefix = "# " + key + "=";
    for (std::string line; std::getline(in, line);) {
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    }
    return {};
}

const std::string kS2xS2 = "product:sphere-x1-2+s2,v12.566370614359172,d2";

}  // namespace

TEST_CASE("catalog") {
    const Run r = run({"catalog"});
    REQUIRE(r.rc == kExitOk);
    const auto rows = csv_rows(r.out);
    CHECK(rows[0] == std::vector<std::string>{"name", "dim", "kf", "proper", "t_min", "t_max"});
    bool found = false;
    for (const auto& row : rows) {
        if (row[0] == "sphere-x1-3") {
            found = true;
            CHECK(row[1] == "3");
            CHECK(row[2] == "0");
        }
    }
    CHECK(found);

    const Run j = run({"catalog", "--format", "json"});
    REQUIRE(j.rc == kExitOk);
    const json arr = json::parse(j.out);
    CHECK(arr.size() == rows.size() - 1);
    CHECK(arr[0].contains("interval"));
}

TEST_CASE("validate") {
    CHECK(run({"validate", "--system", "sphere-x1-4"}).rc == kExitOk);
    const Run j = run({"validate", "--system", "sphere-quad-1-1", "--format", "json"});
    CHECK(j.rc == kExitOk);
    CHECK(json::parse(j.out)["proper"] == false);
    CHECK(run({"validate", "--system", "nowhere"}).rc == kExitConfig);

    const std::string path = "cli_bad_sign.sys";
    std::ofstream(path) << "name = bad\ndim = 3\ninterval = -1 1\nb = 1 - t^2\na = -3*t\ns = 6\n"
                           "volfactor = 12.566370614359172 * (1 - t^2)\nkf = 0\nfocal_codim = 3 3\n";
    const Run bad = run({"validate", "--system", path});
    CHECK(bad.rc == kExitConfig);
    CHECK(bad.out.find("divergence_identity,false") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("system files from the repository") {
    const std::string dir = ISOYAMABE_SOURCE_DIR "/systems/";
    for (const char* f : {"sphere_x1_3.sys", "sphere_quad_2_2.sys", "s2_times_s2.sys", "s2_times_s2_tau0.3.sys"}) {
        CAPTURE(f);
        CHECK(run({"validate", "--system", dir + f}).rc == kExitOk);
    }
    const Run r = run({"spectrum", "--system", dir + "sphere_x1_3.sys", "--k", "1", "--grid", "200"});
    CHECK(r.rc == kExitOk);
}

TEST_CASE("spectrum") {
    const Run r = run({"spectrum", "--system", "sphere-x1-3", "--k", "3", "--grid", "2000"});
    REQUIRE(r.rc == kExitOk);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 4);
    const double want[] = {6, 30, 70};
    for (int k = 0; k < 3; ++k) CHECK(std::fabs(std::stod(rows[k + 1][1]) - want[k]) <= 5e-4 * want[k]);

    const Run j = run({"spectrum", "--system", kS2xS2, "--k", "2", "--grid", "500", "--format", "json"});
    REQUIRE(j.rc == kExitOk);
    const json doc = json::parse(j.out);
    CHECK(doc["eigenvalues"].size() == 2);
    CHECK(doc["yamabe_k_values"][0].get<double>() == doctest::Approx(16 * M_PI).epsilon(1e-8));
}

TEST_CASE("configuration errors exit with 2") {
    CHECK(run({"spectrum", "--system", "sphere-x1-3", "--grid", "15"}).rc == kExitConfig);
    CHECK(run({"spectrum", "--system", "sphere-x1-3", "--format", "xml"}).rc == kExitConfig);
    CHECK(run({"spectrum", "--system", "sphere-x1-2"}).rc == kExitConfig);
    CHECK(run({"spectrum"}).rc == kExitConfig);
    CHECK(run({"frobnicate"}).rc == kExitConfig);
    CHECK(run({"csc", "--system", "sphere-quad-2-2", "--exponent", "6.5", "--grid", "100"}).rc == kExitConfig);
    CHECK(run({"nodal", "--system", "sphere-x1-3", "--grid", "100"}).rc == kExitConfig);
    CHECK(run({"nodal", "--system", kS2xS2, "--tol", "2"}).rc == kExitConfig);
    CHECK(run({"count", "--n", "2", "--m", "2", "--t", "1"}).rc == kExitConfig);
    CHECK(run({"count", "--n", "4", "--m", "2"}).rc == kExitConfig);
    CHECK(run({"count", "--n", "4", "--m", "2", "--sweep", "1:2"}).rc == kExitConfig);
    CHECK(run({"--help"}).rc == kExitOk);
}

TEST_CASE("default grid from the environment") {
    setenv("ISOYAMABE_DEFAULT_GRID", "64", 1);
    const Run j = run({"spectrum", "--system", "sphere-x1-3", "--k", "1", "--format", "json"});
    unsetenv("ISOYAMABE_DEFAULT_GRID");
    REQUIRE(j.rc == kExitOk);
    CHECK(json::parse(j.out)["grid"] == 64);
}

TEST_CASE("nodal") {
    const Run r = run({"nodal", "--system", kS2xS2, "--grid", "2000"});
    REQUIRE(r.rc == kExitOk);
    CHECK(summary_value(r.out, "sign_changes") == "1");
    CHECK(std::stod(summary_value(r.out, "residual")) < 1e-6);
    CHECK(summary_value(r.out, "endpoints_nonzero") == "true");
    const auto rows = csv_rows(r.out);
    CHECK(rows[0] == std::vector<std::string>{"r", "t", "u"});
    CHECK(rows.size() == 2001);

    const Run j = run({"nodal", "--system", kS2xS2, "--grid", "300", "--format", "json"});
    REQUIRE(j.rc == kExitOk);
    const json doc = json::parse(j.out);
    CHECK(doc["sign_changes"] == 1);
    CHECK(doc["profile"]["u"].size() == 300);
}

TEST_CASE("nodal failure dumps the last iterate and exits with 3") {
    const Run r = run({"nodal", "--system", kS2xS2, "--grid", "200", "--max-iterations", "2"});
    CHECK(r.rc == kExitNumerical);
    CHECK(r.err.find("NoConvergence") != std::string::npos);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 201);
    CHECK(rows[0] == std::vector<std::string>{"r", "t", "u"});
}

TEST_CASE("nodal sweep") {
    const Run r =
        run({"nodal", "--system", "round-product:sphere-x1-2,m2,tau{t}", "--sweep", "0.3:1:3", "--grid", "300"});
    REQUIRE(r.rc == kExitOk);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0][0] == "t");
    for (int i = 1; i <= 3; ++i) {
        CHECK(rows[i][4] == "1");
        CHECK(rows[i].back() == "ok");
    }
    CHECK(run({"nodal", "--system", kS2xS2, "--sweep", "0.3:1:3"}).rc == kExitConfig);
}

TEST_CASE("csc") {
    const Run one = run({"csc", "--system", "round-product:sphere-x1-2,m2,tau1", "--grid", "1000", "--tol", "1e-10",
                         "--format", "json"});
    REQUIRE(one.rc == kExitOk);
    const json a = json::parse(one.out);
    CHECK(a["constant"] == true);
    CHECK(std::fabs(a["c"].get<double>() / (16 * M_PI) - 1.0) < 1e-6);

    const Run quarter = run({"csc", "--system", "round-product:sphere-x1-2,m2,tau0.25", "--grid", "1000"});
    REQUIRE(quarter.rc == kExitOk);
    const auto rows = csv_rows(quarter.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][0] == "round-product:sphere-x1-2,m2,tau0.25");
    CHECK(rows[1][5] == "false");
    CHECK(std::stod(rows[1][3]) < std::stod(rows[1][4]));

    const Run sweep =
        run({"csc", "--system", "round-product:sphere-x1-2,m2,tau{t}", "--sweep", "0.25:1:4", "--grid", "400"});
    REQUIRE(sweep.rc == kExitOk);
    CHECK(csv_rows(sweep.out).size() == 5);
}

TEST_CASE("count") {
    const Run r = run({"count", "--n", "4", "--m", "2", "--t", "0.05"});
    REQUIRE(r.rc == kExitOk);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1] == std::vector<std::string>{"0.05", "10.4", "2", "3"});

    const Run sweep = run({"count", "--n", "4", "--m", "2", "--sweep", "0.01:1:100"});
    REQUIRE(sweep.rc == kExitOk);
    const auto srows = csv_rows(sweep.out);
    REQUIRE(srows.size() == 101);
    for (std::size_t i = 2; i < srows.size(); ++i) CHECK(std::stoi(srows[i][3]) <= std::stoi(srows[i - 1][3]));

    const Run th = run({"count", "--n", "4", "--m", "2", "--t", "1", "--thresholds"});
    REQUIRE(th.rc == kExitOk);
    const auto trows = csv_rows(th.out);
    CHECK(trows[0] == std::vector<std::string>{"index", "threshold"});
    for (std::size_t i = 2; i < trows.size(); ++i) CHECK(std::stod(trows[i][1]) < std::stod(trows[i - 1][1]));

    const Run j = run({"count", "--n", "4", "--m", "2", "--t", "0.2", "--format", "json"});
    REQUIRE(j.rc == kExitOk);
    CHECK(json::parse(j.out).dump().find("\"count\":1") != std::string::npos);
}

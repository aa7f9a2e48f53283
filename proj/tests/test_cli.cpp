#include "pathosim/cli.hpp"
#include "pathosim/report.hpp"
#include "support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pathosim;
namespace fs = std::filesystem;

namespace {

nlohmann::json last_line_json(const std::string& text) {
    const auto end = text.find_last_not_of('\n');
    const auto start = text.rfind('\n', end);
    return nlohmann::json::parse(text.substr(start == std::string::npos ? 0 : start + 1));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("pathosim-cli-" + name);
    fs::remove_all(dir);
    return dir;
}

fs::path write_text(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

}  // namespace

TEST_CASE("run writes outputs and reruns are byte-identical") {
    const auto a = scratch("run-a");
    const auto b = scratch("run-b");
    std::ostringstream out, err;
    CHECK(cli::cmd_run({testing::scenario_path("ward.json"), 86400.0, std::nullopt, a, true}, out, err) ==
          cli::kExitOk);
    CHECK(cli::cmd_run({testing::scenario_path("ward.json"), 86400.0, std::nullopt, b, true}, out, err) ==
          cli::kExitOk);
    for (const char* f : {"samples.csv", "report.json", "report.txt", "trace.tsv"}) {
        CAPTURE(f);
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }

    const auto csv = slurp(a / "samples.csv");
    CHECK(csv.rfind(report::kSamplesHeader, 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 49);

    const auto j = nlohmann::json::parse(slurp(a / "report.json"));
    CHECK(j["seed"] == 13);
    CHECK(j["samples_total"] == 48);
    CHECK(j["unreachable"].empty());
    CHECK(j["quantization"][0]["effective_s"] == 1792.0);
}

TEST_CASE("run seed override changes samples") {
    const auto a = scratch("seed-a");
    const auto b = scratch("seed-b");
    std::ostringstream out, err;
    cli::cmd_run({testing::scenario_path("ward.json"), 7200.0, std::nullopt, a, false}, out, err);
    cli::cmd_run({testing::scenario_path("ward.json"), 7200.0, 99, b, false}, out, err);
    CHECK_FALSE(fs::exists(a / "trace.tsv"));
    CHECK(slurp(a / "samples.csv") != slurp(b / "samples.csv"));
    CHECK(nlohmann::json::parse(slurp(b / "report.json"))["seed"] == 99);
}

TEST_CASE("run reports unreachable nodes") {
    const auto dir = scratch("norouter");
    std::ostringstream out, err;
    CHECK(cli::cmd_run({testing::scenario_path("ward-no-router.json"), 86400.0, std::nullopt, dir, false}, out,
                       err) == cli::kExitOk);
    CHECK(out.str().find("node 2 unreachable") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(j["samples_total"] == 0);
    CHECK(j["unreachable"] == nlohmann::json::array({2}));
    CHECK(j["drops_by_reason"]["NoRoute"] == 48);
}

TEST_CASE("bad scenarios exit 2") {
    const auto dir = scratch("bad");
    std::ostringstream out, err;
    CHECK(cli::cmd_run({dir / "missing.json", 10.0, std::nullopt, dir / "o", false}, out, err) == cli::kExitScenario);
    const auto broken = write_text(dir / "broken.json", "{ \"nodes\": [");
    CHECK(cli::cmd_run({broken, 10.0, std::nullopt, dir / "o", false}, out, err) == cli::kExitScenario);
    const auto no_coord = write_text(dir / "nocoord.json", R"({"nodes":[{"id":1,"role":"Router","position":{"x":0,"y":0,"floor":1}}]})");
    CHECK(cli::cmd_run({no_coord, 10.0, std::nullopt, dir / "o", false}, out, err) == cli::kExitScenario);
    CHECK(err.str().find("error:") != std::string::npos);
}

TEST_CASE("linkbudget through two brick walls") {
    std::ostringstream out, err;
    CHECK(cli::cmd_linkbudget({testing::scenario_path("ward.json"), 0, 1}, out, err) == cli::kExitOk);
    const auto text = out.str();
    CHECK(text.find("received power    -29.53 dBm") != std::string::npos);
    const auto j = last_line_json(text);
    CHECK(j["received_power_dbm"].get<double>() == doctest::Approx(-29.53).epsilon(1e-4));
    CHECK(j["obstacle_losses"].size() == 2);
    CHECK(j["connected"] == true);

    std::ostringstream far;
    cli::cmd_linkbudget({testing::scenario_path("ward.json"), 0, 2}, far, err);
    const auto jf = last_line_json(far.str());
    CHECK(jf["received_power_dbm"].get<double>() == doctest::Approx(-42.71).epsilon(1e-3));
    CHECK(jf["connected"] == false);
}

TEST_CASE("linkbudget argument errors") {
    std::ostringstream out, err;
    CHECK(cli::cmd_linkbudget({testing::scenario_path("ward.json"), 1, 1}, out, err) == cli::kExitScenario);
    CHECK(cli::cmd_linkbudget({testing::scenario_path("ward.json"), 0, 9}, out, err) == cli::kExitScenario);
}

TEST_CASE("linkbudget at half a metre is the tx power") {
    const auto dir = scratch("close");
    const auto p = write_text(dir / "close.json", R"({
  "defaults": {"radio": {"tx_power_dbm": 3, "sensitivity_dbm": -40}},
  "nodes": [
    {"id": 0, "role": "Coordinator", "position": {"x": 0, "y": 0, "floor": 1}},
    {"id": 1, "role": "Router", "position": {"x": 0.5, "y": 0, "floor": 1}}
  ]
})");
    std::ostringstream out, err;
    REQUIRE(cli::cmd_linkbudget({p, 0, 1}, out, err) == cli::kExitOk);
    const auto j = last_line_json(out.str());
    CHECK(j["received_power_dbm"].get<double>() == doctest::Approx(3.0));
}

TEST_CASE("lifetime closed form") {
    std::ostringstream out, err;
    CHECK(cli::cmd_lifetime({testing::scenario_path("ward.json"), 2, 5.0, std::nullopt, std::nullopt}, out, err) ==
          cli::kExitOk);
    CHECK(out.str().find("average current   21.3464 mA") != std::string::npos);
    CHECK(out.str().find("lifetime          51.53 h") != std::string::npos);
    CHECK(out.str().find("sleep-only bound  52.13 h") != std::string::npos);

    std::ostringstream router;
    CHECK(cli::cmd_lifetime({testing::scenario_path("ward.json"), 1, 5.0, std::nullopt, std::nullopt}, router, err) ==
          cli::kExitScenario);
}

TEST_CASE("lifetime adds the simulated figure from a report") {
    const auto dir = scratch("lifetime");
    std::ostringstream out, err;
    cli::cmd_run({testing::scenario_path("ward.json"), 86400.0, std::nullopt, dir, false}, out, err);
    std::ostringstream life;
    CHECK(cli::cmd_lifetime({testing::scenario_path("ward.json"), 2, 5.0, std::nullopt, dir / "report.json"}, life,
                            err) == cli::kExitOk);
    CHECK(life.str().find("simulated average") != std::string::npos);
    CHECK(life.str().find("simulated lifetime") != std::string::npos);
}

TEST_CASE("repl session") {
    std::istringstream in(
        "status\n"
        "set-period 2 3600\n"
        "set-period 1 3600\n"
        "step\n"
        "status\n"
        "run-until 100\n"
        "run-until 50\n"
        "bogus\n"
        "quit\n"
        "status\n");
    std::ostringstream out, err;
    CHECK(cli::repl_loop({testing::scenario_path("ward.json"), std::nullopt, std::nullopt, false}, in, out, err) ==
          cli::kExitOk);
    const auto text = out.str();
    CHECK(text.find("t = 0 s, 0 samples") != std::string::npos);
    CHECK(text.find("queued SET_PERIOD 3600 s for node 2") != std::string::npos);
    CHECK(text.find("error: node 1 is not an EndDevice") != std::string::npos);
    CHECK(text.find("pending 3600 s (not yet delivered)") != std::string::npos);
    CHECK(text.find("t = 100 s, 0 samples") != std::string::npos);
    CHECK(text.find("error: 50 s is in the past") != std::string::npos);
    CHECK(text.find("error: unknown command: bogus") != std::string::npos);
}

TEST_CASE("repl run-until matches a batch run") {
    const auto batch = scratch("batch");
    const auto inter = scratch("inter");
    std::ostringstream out, err;
    cli::cmd_run({testing::scenario_path("ward.json"), 86400.0, std::nullopt, batch, true}, out, err);

    std::istringstream in("run-until 40000\nrun-until 86400\ndump-samples " + (inter / "dump.csv").string() +
                          "\nquit\n");
    fs::create_directories(inter);
    CHECK(cli::repl_loop({testing::scenario_path("ward.json"), std::nullopt, inter, true}, in, out, err) ==
          cli::kExitOk);
    CHECK(slurp(inter / "samples.csv") == slurp(batch / "samples.csv"));
    CHECK(slurp(inter / "dump.csv") == slurp(batch / "samples.csv"));
    CHECK(slurp(inter / "trace.tsv") == slurp(batch / "trace.tsv"));
    CHECK(slurp(inter / "report.json") == slurp(batch / "report.json"));
}

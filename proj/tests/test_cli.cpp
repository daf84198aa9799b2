#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vibron/cli.hpp"

using namespace vibron;
using doctest::Approx;
using nlohmann::json;

namespace {

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("vibron_cli_test_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }

  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Runs the tool in-process with stdout/stderr captured so error-path tests
// stay quiet.
int run_cli(const std::vector<std::string>& args, std::string* captured = nullptr) {
  std::vector<const char*> argv;
  argv.push_back("vibron");
  for (const std::string& arg : args) argv.push_back(arg.c_str());

  std::ostringstream sink;
  std::streambuf* old_out = std::cout.rdbuf(sink.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(sink.rdbuf());
  const int code = cli_main(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  if (captured) *captured = sink.str();
  return code;
}

const char* reference_estimate_config = R"({
  "layout": {"modes": ["x"], "dims": [32]},
  "observable": {"name": "n"},
  "state": {"kind": "coherent", "alphas": [[1.0, 0.0]]},
  "protocol": {"gamma": 1e4, "t": 1e-6, "alpha_max": 20.0},
  "output": {"format": "json"}
})";

std::vector<std::string> csv_data_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

TEST_CASE("estimate reports the reference-regime record") {
  TempDir dir;
  write_file(dir.file("run.json"), reference_estimate_config);
  const std::string out = dir.file("out.json");

  CHECK(run_cli({"estimate", "--config", dir.file("run.json"), "--output", out}) ==
        exit_ok);

  const json doc = json::parse(read_file(out));
  REQUIRE(doc["rows"].size() == 1);
  const json& row = doc["rows"][0];
  CHECK(row["estimate"].get<double>() == Approx(0.999666735988865).epsilon(1e-10));
  CHECK(row["pulse_area"].get<double>() == Approx(0.4).epsilon(1e-15));
  CHECK(row["true_mean"].get<double>() == Approx(1.0).epsilon(1e-12));
  CHECK(row["bias"].get<double>() <= row["bias_bound"].get<double>());
  CHECK(row["unsafe"].get<bool>() == false);
  CHECK(row["shots"].get<int>() == 0);

  const json& metadata = doc["metadata"];
  CHECK(metadata["command"].get<std::string>() == "estimate");
  CHECK(metadata.contains("revision"));
  CHECK(metadata.contains("config_hash"));
  CHECK(metadata.contains("seed"));
}

TEST_CASE("noiseless runs are byte-identical across invocations") {
  TempDir dir;
  write_file(dir.file("run.json"), reference_estimate_config);
  const std::string first = dir.file("a.json");
  const std::string second = dir.file("b.json");

  CHECK(run_cli({"estimate", "--config", dir.file("run.json"), "--output", first}) ==
        exit_ok);
  CHECK(run_cli({"estimate", "--config", dir.file("run.json"), "--output", second}) ==
        exit_ok);
  CHECK(read_file(first) == read_file(second));
}

TEST_CASE("csv output carries metadata and full precision") {
  TempDir dir;
  write_file(dir.file("run.json"), reference_estimate_config);
  const std::string out = dir.file("out.csv");

  CHECK(run_cli({"estimate", "--config", dir.file("run.json"), "--output", out,
                 "--format", "csv"}) == exit_ok);

  const std::string text = read_file(out);
  CHECK(text.find("# command=estimate") != std::string::npos);
  CHECK(text.find("# revision=") != std::string::npos);
  CHECK(text.find("# config_hash=") != std::string::npos);
  CHECK(text.find("# seed=0") != std::string::npos);

  const std::vector<std::string> lines = csv_data_lines(text);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] ==
        "estimate,true_mean,bias,sigma_z_mean,standard_error,bias_bound,pulse_area,"
        "shots,shots_plus,shots_minus,unsafe");

  const std::vector<std::string> cells = split_csv(lines[1]);
  REQUIRE(cells.size() == 11);
  CHECK(std::stod(cells[0]) == Approx(0.999666735988865).epsilon(1e-12));
  // %.15g keeps well past the twelve required significant digits.
  CHECK(cells[0].size() >= 14);
  CHECK(cells[10] == "false");
}

TEST_CASE("broken configurations exit with the config error code") {
  TempDir dir;

  write_file(dir.file("no_state.json"),
             R"({"layout": {"modes": ["x"], "dims": [8]}, "observable": {"name": "n"}})");
  CHECK(run_cli({"estimate", "--config", dir.file("no_state.json")}) ==
        exit_config_error);

  write_file(dir.file("unknown_key.json"), R"({
    "layout": {"modes": ["x"], "dims": [8]},
    "observable": {"name": "n"},
    "state": {"kind": "fock", "occupations": [1]},
    "extra": 1
  })");
  CHECK(run_cli({"estimate", "--config", dir.file("unknown_key.json")}) ==
        exit_config_error);

  write_file(dir.file("unknown_protocol_key.json"), R"({
    "layout": {"modes": ["x"], "dims": [8]},
    "observable": {"name": "n"},
    "state": {"kind": "fock", "occupations": [1]},
    "protocol": {"gama": 1e4}
  })");
  CHECK(run_cli({"estimate", "--config", dir.file("unknown_protocol_key.json")}) ==
        exit_config_error);

  write_file(dir.file("bad_observable.json"), R"({
    "layout": {"modes": ["x"], "dims": [8]},
    "observable": {"name": "px"},
    "state": {"kind": "fock", "occupations": [1]}
  })");
  CHECK(run_cli({"estimate", "--config", dir.file("bad_observable.json")}) ==
        exit_config_error);

  write_file(dir.file("ragged_layout.json"), R"({
    "layout": {"modes": ["x", "y"], "dims": [8]},
    "observable": {"name": "n"},
    "state": {"kind": "fock", "occupations": [1, 0]}
  })");
  CHECK(run_cli({"estimate", "--config", dir.file("ragged_layout.json")}) ==
        exit_config_error);

  write_file(dir.file("not_json.json"), "not json at all {");
  CHECK(run_cli({"estimate", "--config", dir.file("not_json.json")}) ==
        exit_config_error);

  CHECK(run_cli({"estimate", "--config", dir.file("missing.json")}) ==
        exit_config_error);
  CHECK(run_cli({"estimate"}) == exit_config_error);
  CHECK(run_cli({"frobnicate"}) == exit_config_error);
}

TEST_CASE("stochastic runs demand an explicit seed") {
  TempDir dir;
  write_file(dir.file("run.json"), R"({
    "layout": {"modes": ["x"], "dims": [16]},
    "observable": {"name": "n"},
    "state": {"kind": "coherent", "alphas": [0.8]},
    "protocol": {"gamma": 1e4, "t": 1e-6, "shots": 1000}
  })");

  CHECK(run_cli({"estimate", "--config", dir.file("run.json")}) == exit_config_error);

  const std::string out = dir.file("out.json");
  CHECK(run_cli({"estimate", "--config", dir.file("run.json"), "--seed", "42",
                 "--output", out}) == exit_ok);
  const json doc = json::parse(read_file(out));
  const json& row = doc["rows"][0];
  CHECK(row["shots_plus"].get<int>() + row["shots_minus"].get<int>() == 1000);
  CHECK(row["standard_error"].get<double>() > 0.0);
  CHECK(doc["metadata"]["seed"].get<std::string>() == "42");

  // Same seed, same draw.
  const std::string replay = dir.file("replay.json");
  CHECK(run_cli({"estimate", "--config", dir.file("run.json"), "--seed", "42",
                 "--output", replay}) == exit_ok);
  CHECK(read_file(out) == read_file(replay));

  // A seed inside the config file works without flags.
  write_file(dir.file("seeded.json"), R"({
    "layout": {"modes": ["x"], "dims": [16]},
    "observable": {"name": "n"},
    "state": {"kind": "coherent", "alphas": [0.8]},
    "protocol": {"gamma": 1e4, "t": 1e-6, "shots": 1000, "seed": 42}
  })");
  const std::string from_config = dir.file("from_config.json");
  CHECK(run_cli({"estimate", "--config", dir.file("seeded.json"), "--output",
                 from_config}) == exit_ok);
  const json seeded = json::parse(read_file(from_config));
  CHECK(seeded["rows"][0]["shots_plus"] == row["shots_plus"]);
}

TEST_CASE("zone violations exit distinctly unless forced") {
  TempDir dir;
  write_file(dir.file("run.json"), R"({
    "layout": {"modes": ["x"], "dims": [32]},
    "observable": {"name": "n"},
    "state": {"kind": "coherent", "alphas": [1.0]},
    "protocol": {"gamma": 1e4, "t": 1e-6, "alpha_max": 25.0}
  })");
  const std::string out = dir.file("out.json");

  CHECK(run_cli({"estimate", "--config", dir.file("run.json"), "--output", out}) ==
        exit_zone_violation);
  CHECK(!std::filesystem::exists(out));

  CHECK(run_cli({"estimate", "--config", dir.file("run.json"), "--output", out,
                 "--unsafe"}) == exit_ok);
  const json doc = json::parse(read_file(out));
  CHECK(doc["rows"][0]["unsafe"].get<bool>() == true);
  CHECK(doc["rows"][0]["pulse_area"].get<double>() == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("custom matrix observables load from disk") {
  TempDir dir;
  write_file(dir.file("flip.mat"), "2\n0 0  1 0\n1 0  0 0\n");
  write_file(dir.file("run.json"), R"({
    "layout": {"modes": ["x"], "dims": [2]},
    "observable": {"name": "custom", "matrix_file": ")" +
                                    dir.file("flip.mat") + R"("},
    "state": {"kind": "fock", "occupations": [0]},
    "protocol": {"gamma": 1e4, "t": 1e-6}
  })");
  const std::string out = dir.file("out.json");

  CHECK(run_cli({"estimate", "--config", dir.file("run.json"), "--output", out}) ==
        exit_ok);
  const json doc = json::parse(read_file(out));
  CHECK(std::abs(doc["rows"][0]["estimate"].get<double>()) <= 1e-12);
  CHECK(doc["rows"][0]["true_mean"].get<double>() == 0.0);

  write_file(dir.file("skew.mat"), "2\n0 0  1 0\n0 0  0 0\n");
  write_file(dir.file("bad.json"), R"({
    "layout": {"modes": ["x"], "dims": [2]},
    "observable": {"name": "custom", "matrix_file": ")" +
                                   dir.file("skew.mat") + R"("},
    "state": {"kind": "fock", "occupations": [0]}
  })");
  CHECK(run_cli({"estimate", "--config", dir.file("bad.json")}) == exit_config_error);

  write_file(dir.file("short.mat"), "2\n0 0  1 0\n");
  write_file(dir.file("short.json"), R"({
    "layout": {"modes": ["x"], "dims": [2]},
    "observable": {"name": "custom", "matrix_file": ")" +
                                     dir.file("short.mat") + R"("},
    "state": {"kind": "fock", "occupations": [0]}
  })");
  CHECK(run_cli({"estimate", "--config", dir.file("short.json")}) == exit_config_error);

  write_file(dir.file("mismatched.mat"), "3\n" + std::string(9, ' ') + "\n");
  write_file(dir.file("mismatched.json"), R"({
    "layout": {"modes": ["x"], "dims": [2]},
    "observable": {"name": "custom", "matrix_file": ")" +
                                          dir.file("mismatched.mat") + R"("},
    "state": {"kind": "fock", "occupations": [0]}
  })");
  CHECK(run_cli({"estimate", "--config", dir.file("mismatched.json")}) ==
        exit_config_error);
}

TEST_CASE("sweep emits the documented table") {
  TempDir dir;
  write_file(dir.file("run.json"), R"({
    "layout": {"modes": ["x"], "dims": [16]},
    "observable": {"name": "n"},
    "state": {"kind": "coherent", "alphas": [0.8]},
    "protocol": {"gamma": 2500.0, "t": 1e-6},
    "sweep": {"axis": "t", "grid": [1e-6, 2e-6]}
  })");
  const std::string out = dir.file("out.csv");

  CHECK(run_cli({"sweep", "--config", dir.file("run.json"), "--output", out,
                 "--format", "csv"}) == exit_ok);
  const std::string text = read_file(out);
  CHECK(text.find("# axis=t") != std::string::npos);

  const std::vector<std::string> lines = csv_data_lines(text);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "axis_value,estimate,true_mean,bias,bias_bound,standard_error");
  CHECK(std::stod(split_csv(lines[1])[0]) == Approx(1e-6).epsilon(1e-15));
  CHECK(std::stod(split_csv(lines[2])[0]) == Approx(2e-6).epsilon(1e-15));
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::vector<std::string> cells = split_csv(lines[r]);
    CHECK(std::stod(cells[3]) <= std::stod(cells[4]));
  }

  // A shots-axis grid with real draws is stochastic and needs the seed.
  write_file(dir.file("shots.json"), R"({
    "layout": {"modes": ["x"], "dims": [16]},
    "observable": {"name": "n"},
    "state": {"kind": "coherent", "alphas": [0.8]},
    "protocol": {"gamma": 1e4, "t": 1e-6},
    "sweep": {"axis": "shots", "grid": [400, 40000]}
  })");
  CHECK(run_cli({"sweep", "--config", dir.file("shots.json")}) == exit_config_error);

  const std::string shots_out = dir.file("shots.json.out");
  CHECK(run_cli({"sweep", "--config", dir.file("shots.json"), "--seed", "9",
                 "--output", shots_out}) == exit_ok);
  const json doc = json::parse(read_file(shots_out));
  REQUIRE(doc["rows"].size() == 2);
  const double ratio = doc["rows"][0]["standard_error"].get<double>() /
                       doc["rows"][1]["standard_error"].get<double>();
  CHECK(ratio == Approx(10.0).epsilon(0.1));
}

TEST_CASE("rabi scan emits the flip-probability column") {
  TempDir dir;
  write_file(dir.file("flat.json"), R"({
    "layout": {"modes": ["x"], "dims": [8]},
    "observable": {"name": "n"},
    "state": {"kind": "fock", "occupations": [0]},
    "rabi": {"gamma": 1.0, "t_grid": [0.1, 0.5, 1.0, 2.0]}
  })");
  const std::string out = dir.file("out.csv");

  CHECK(run_cli({"rabi", "--config", dir.file("flat.json"), "--output", out,
                 "--format", "csv"}) == exit_ok);
  const std::vector<std::string> lines = csv_data_lines(read_file(out));
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "t,p_plus");
  for (std::size_t r = 1; r < lines.size(); ++r)
    CHECK(std::stod(split_csv(lines[r])[1]) == 0.0);

  write_file(dir.file("one.json"), R"({
    "layout": {"modes": ["x"], "dims": [8]},
    "observable": {"name": "n"},
    "state": {"kind": "fock", "occupations": [1]},
    "rabi": {"gamma": 1.0, "t_grid": [1.5707963267948966]}
  })");
  const std::string one_out = dir.file("one.json.out");
  CHECK(run_cli({"rabi", "--config", dir.file("one.json"), "--output", one_out}) ==
        exit_ok);
  const json doc = json::parse(read_file(one_out));
  CHECK(doc["rows"][0]["p_plus"].get<double>() == Approx(1.0).epsilon(1e-12));

  write_file(dir.file("mixed.json"), R"({
    "layout": {"modes": ["x"], "dims": [8]},
    "observable": {"name": "n"},
    "state": {"kind": "superposition",
              "terms": [{"weight": 1.0, "occupations": [0]},
                        {"weight": 1.0, "occupations": [1]}]},
    "rabi": {"gamma": 1.0, "t_grid": [0.1]}
  })");
  CHECK(run_cli({"rabi", "--config", dir.file("mixed.json")}) == exit_config_error);
}

TEST_CASE("parity reports the sign verdict") {
  TempDir dir;
  write_file(dir.file("run.json"), R"({
    "parity": {"n0": 2, "scan_steps": 5, "scan_stop": 3.141592653589793},
    "protocol": {"alpha_max": 4.0}
  })");
  const std::string out = dir.file("out.json");

  CHECK(run_cli({"parity", "--config", dir.file("run.json"), "--output", out}) ==
        exit_ok);
  const json doc = json::parse(read_file(out));
  CHECK(doc["summary"]["n0"].get<int>() == 2);
  CHECK(doc["summary"]["extreme_value"].get<double>() == Approx(-2.0).epsilon(1e-9));
  CHECK(doc["summary"]["parity_sign"].get<int>() == -1);
  CHECK(doc["summary"]["sign_matches_parity"].get<bool>());
  REQUIRE(doc["rows"].size() == 5);
  CHECK(doc["rows"][0]["direct_cxy"].get<double>() == Approx(2.0).epsilon(1e-12));

  const std::string csv_out = dir.file("out.csv");
  CHECK(run_cli({"parity", "--config", dir.file("run.json"), "--output", csv_out,
                 "--format", "csv"}) == exit_ok);
  const std::string text = read_file(csv_out);
  CHECK(text.find("# n0=2") != std::string::npos);
  CHECK(text.find("# parity_sign=-1") != std::string::npos);
  CHECK(text.find("# sign_matches_parity=true") != std::string::npos);
  CHECK(csv_data_lines(text)[0] ==
        "time,direct_cxy,cxy_squared,branch_population,branch_cxy,indirect_estimate,"
        "indirect_stderr,excitation_drift");
}

TEST_CASE("validate passes end to end") {
  std::string output;
  CHECK(run_cli({"validate"}, &output) == exit_ok);

  std::size_t passes = 0;
  std::size_t cursor = 0;
  while ((cursor = output.find("PASS", cursor)) != std::string::npos) {
    ++passes;
    cursor += 4;
  }
  CHECK(passes == 8);
  CHECK(output.find("FAIL") == std::string::npos);
}

TEST_CASE("help requests succeed") {
  std::string output;
  CHECK(run_cli({"--help"}, &output) == exit_ok);
  CHECK(output.find("estimate") != std::string::npos);
  CHECK(output.find("validate") != std::string::npos);
}

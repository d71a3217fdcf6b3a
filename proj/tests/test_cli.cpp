#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "bellaudit/io.hpp"

namespace fs = std::filesystem;
using bellaudit::ordered_json;
using bellaudit::read_text_file;
using bellaudit::write_text_file;

namespace {

const std::string kCli = BELLAUDIT_CLI;
const fs::path kDataDir = BELLAUDIT_DATA_DIR;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("bellaudit_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run(const std::string& args, const fs::path& capture) {
  const std::string cmd =
      kCli + " " + args + " > " + capture.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("audit in symmetric mode honors both bounds") {
  TempDir tmp;
  const fs::path log = tmp.path / "out.txt";
  const int rc = run("audit --mode symmetric --assert-bounds --out " +
                         tmp.path.string(),
                     log);
  CHECK(rc == 0);

  const ordered_json summary = ordered_json::parse(
      read_text_file((tmp.path / "audit_symmetric_pp_summary.json").string()));
  CHECK(summary.at("max").at("objective").get<double>() ==
        Catch::Approx(0.0).margin(1e-9));
  CHECK(summary.at("min").at("objective").get<double>() ==
        Catch::Approx(-1.0).margin(1e-9));
  CHECK(summary.at("bounds").at("within").get<bool>());

  // emitted certificates re-verify through the certify subcommand
  for (const char* which : {"max", "min"}) {
    const fs::path cert =
        tmp.path / (std::string("audit_symmetric_pp_") + which + ".json");
    REQUIRE(fs::exists(cert));
    CHECK(run("certify --certificate " + cert.string(),
              tmp.path / "certify.txt") == 0);
  }
}

TEST_CASE("audit in unconstrained mode exposes the broken upper bound") {
  TempDir tmp;
  const fs::path log = tmp.path / "out.txt";
  const int rc = run("audit --mode unconstrained --assert-bounds --out " +
                         tmp.path.string(),
                     log);
  CHECK(rc == 3);

  const ordered_json summary = ordered_json::parse(read_text_file(
      (tmp.path / "audit_unconstrained_pp_summary.json").string()));
  CHECK(summary.at("max").at("objective").get<double>() ==
        Catch::Approx(2.0).margin(1e-9));
  CHECK_FALSE(summary.at("bounds").at("within").get<bool>());

  const std::string output = read_text_file(log.string());
  CHECK(output.find("witness ensemble") != std::string::npos);
  CHECK(output.find("\"members\"") != std::string::npos);
}

TEST_CASE("audit rejects unknown modes") {
  TempDir tmp;
  CHECK(run("audit --mode bogus", tmp.path / "out.txt") == 2);
}

TEST_CASE("qscan summarizes the violation region") {
  TempDir tmp;
  const fs::path csv = tmp.path / "scan.csv";
  const fs::path summary_path = tmp.path / "scan_summary.json";
  const int rc = run("qscan --steps 1000 --out " + csv.string() +
                         " --summary " + summary_path.string(),
                     tmp.path / "out.txt");
  CHECK(rc == 0);

  const ordered_json summary =
      ordered_json::parse(read_text_file(summary_path.string()));
  CHECK(summary.at("margin").at("phi_hi").get<double>() ==
        Catch::Approx(1.19606).margin(1e-4));
  CHECK(summary.at("margin").at("g_star").get<double>() ==
        Catch::Approx(0.82843).margin(1e-4));
  CHECK(summary.at("sprime").at("violated").get<bool>());

  std::size_t lines = 0;
  for (char c : read_text_file(csv.string())) {
    if (c == '\n') ++lines;
  }
  CHECK(lines == 1001);  // header + 1000 grid points
}

TEST_CASE("qscan needs at least two grid points") {
  TempDir tmp;
  CHECK(run("qscan --steps 1 --out " + (tmp.path / "s.csv").string(),
            tmp.path / "out.txt") == 2);
}

TEST_CASE("qscan with zero correlation reports no model violation") {
  TempDir tmp;
  const fs::path summary_path = tmp.path / "scan_summary.json";
  const int rc = run("qscan --F 0 --steps 200 --out " +
                         (tmp.path / "s.csv").string() + " --summary " +
                         summary_path.string(),
                     tmp.path / "out.txt");
  CHECK(rc == 0);
  const ordered_json summary =
      ordered_json::parse(read_text_file(summary_path.string()));
  CHECK_FALSE(summary.at("sprime").at("violated").get<bool>());
  CHECK_FALSE(summary.at("sprime").contains("phi_first"));
  // the margin curve itself is efficiency-free and still has its window
  CHECK(summary.at("margin").at("g_star").get<double>() > 0.8);
}

TEST_CASE("simulate reproduces the committed golden report byte for byte") {
  TempDir tmp;
  const fs::path report = tmp.path / "report.json";
  const fs::path counts = tmp.path / "counts.csv";
  const std::string config = (kDataDir / "simulate_example.json").string();
  const int rc = run("simulate --config " + config + " --out " +
                         report.string() + " --counts " + counts.string(),
                     tmp.path / "out.txt");
  CHECK(rc == 0);

  const std::string golden = read_text_file(
      (kDataDir / "golden" / "simulate_example_report.json").string());
  CHECK(read_text_file(report.string()) == golden);

  const std::string golden_counts = read_text_file(
      (kDataDir / "golden" / "simulate_example_counts.csv").string());
  CHECK(read_text_file(counts.string()) == golden_counts);

  // rerunning produces identical bytes
  const fs::path again = tmp.path / "report2.json";
  CHECK(run("simulate --config " + config + " --out " + again.string(),
            tmp.path / "out.txt") == 0);
  CHECK(read_text_file(again.string()) == golden);
}

TEST_CASE("simulate rejects bad configs") {
  TempDir tmp;
  CHECK(run("simulate --config " + (tmp.path / "missing.json").string(),
            tmp.path / "out.txt") == 2);

  const fs::path zero_events = tmp.path / "zero.json";
  write_text_file(zero_events.string(), R"({
    "detector": {"eta1": 1.0, "eta2": 1.0, "f": 1.0, "F": 1.0},
    "angles": {"phi": 0.5},
    "events_per_pair": 0,
    "seed": 1
  })");
  CHECK(run("simulate --config " + zero_events.string() + " --out " +
                (tmp.path / "r.json").string(),
            tmp.path / "out.txt") == 2);

  const fs::path unknown_field = tmp.path / "unknown.json";
  write_text_file(unknown_field.string(), R"({
    "detector": {"eta1": 1.0, "eta2": 1.0, "f": 1.0, "F": 1.0},
    "angles": {"phi": 0.5},
    "events_per_pair": 10,
    "seed": 1,
    "wat": true
  })");
  CHECK(run("simulate --config " + unknown_field.string() + " --out " +
                (tmp.path / "r.json").string(),
            tmp.path / "out.txt") == 2);
}

TEST_CASE("audit and qscan reruns write identical bytes") {
  TempDir tmp;
  const fs::path first = tmp.path / "run1";
  const fs::path second = tmp.path / "run2";
  for (const fs::path& dir : {first, second}) {
    REQUIRE(run("audit --mode unconstrained --out " + dir.string(),
                tmp.path / "out.txt") == 0);
    REQUIRE(run("qscan --steps 100 --eta1 0.8 --out " +
                    (dir / "scan.csv").string(),
                tmp.path / "out.txt") == 0);
  }
  for (const char* name :
       {"audit_unconstrained_pp_max.json", "audit_unconstrained_pp_min.json",
        "audit_unconstrained_pp_summary.json", "scan.csv",
        "scan_summary.json"}) {
    CHECK(read_text_file((first / name).string()) ==
          read_text_file((second / name).string()));
  }
}

TEST_CASE("certify flags tampered and truncated certificates") {
  TempDir tmp;
  REQUIRE(run("audit --mode symmetric --out " + tmp.path.string(),
              tmp.path / "out.txt") == 0);
  const fs::path cert_path = tmp.path / "audit_symmetric_pp_max.json";

  ordered_json cert =
      ordered_json::parse(read_text_file(cert_path.string()));
  REQUIRE(cert.at("weights").size() > 0);
  cert["weights"][0][1] = cert["weights"][0][1].get<double>() + 1e-3;
  const fs::path tampered = tmp.path / "tampered.json";
  write_text_file(tampered.string(), cert.dump(2));
  CHECK(run("certify --certificate " + tampered.string(),
            tmp.path / "out.txt") == 3);

  const std::string full = read_text_file(cert_path.string());
  const fs::path truncated = tmp.path / "truncated.json";
  write_text_file(truncated.string(), full.substr(0, full.size() / 2));
  CHECK(run("certify --certificate " + truncated.string(),
            tmp.path / "out.txt") == 2);
}

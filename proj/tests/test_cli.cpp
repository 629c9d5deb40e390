#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qrsim/cli/commands.hpp"
#include "qrsim/cli/csv.hpp"

using namespace qrsim::cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "qrsim");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

// Data rows (header block and column line removed).
std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  bool header_seen = false;
  for (const auto& l : lines(csv)) {
    if (l.rfind("#", 0) == 0) continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream is(l);
    for (std::string c; std::getline(is, c, ',');) cells.push_back(c);
    if (!l.empty() && l.back() == ',') cells.push_back("");
    out.push_back(cells);
  }
  return out;
}

std::string column_line(const std::string& csv) {
  for (const auto& l : lines(csv))
    if (l.rfind("#", 0) != 0) return l;
  return {};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("theory: single point") {
    const auto r = run({"theory", "--paradigm", "ion", "--distances", "50", "--repeaters", "1"});
    CHECK(r.code == kExitOk);
    const auto rs = rows(r.out);
    REQUIRE(rs.size() == 1);
    CHECK(std::stod(rs[0][7]) > 0.0);
  }

  TEST_CASE("theory: stable header block and columns") {
    const auto r = run({"theory", "--seed", "7", "--distances", "50", "--repeaters", "2"});
    const auto ls = lines(r.out);
    REQUIRE(ls.size() >= 6);
    CHECK(ls[0] == std::string("# tool: qrsim ") + kToolVersion);
    CHECK(ls[1] == "# schema: theory_ion/1");
    CHECK(ls[2] == "# seed: 7");
    CHECK(ls[3].rfind("# manifest_hash: ", 0) == 0);
    CHECK(ls[4].rfind("# manifest: {", 0) == 0);
    CHECK(column_line(r.out) ==
          "distance_km,n,protocol,mu,p_bsm,p_suc,t_exp_s,egr_hz,fidelity,"
          "fidelity_schedule_model");
    const auto m = nlohmann::json::parse(ls[4].substr(12));
    CHECK(m["seed"] == 7);
    CHECK(m["command"] == "theory");
  }

  TEST_CASE("theory: sweep row count") {
    const auto r = run({"theory", "--distances", "10,50,100", "--repeaters", "1..10"});
    CHECK(rows(r.out).size() == 30);
  }

  TEST_CASE("theory: APE photon counts") {
    const auto r = run({"theory", "--paradigm", "ape", "--distances", "50", "--repeaters", "4",
                        "--rgs", "1,25,1;5,4,2;6,6,3;7,8,4;8,11,4"});
    CHECK(r.code == kExitOk);
    CHECK(column_line(r.out) ==
          "distance_km,n,m,b0,b1,photons,mu,p_rgs,t_rgs_s,mq_e,egr_hz,fidelity");
    std::vector<std::string> photons;
    for (const auto& row : rows(r.out)) photons.push_back(row[5]);
    CHECK(photons == std::vector<std::string>{"102", "130", "300", "574", "896"});
  }

  TEST_CASE("simulate: identical seeds give identical bytes") {
    const std::vector<std::string> args{"simulate", "--seed", "99", "--distances", "50",
                                        "--repeaters", "1,2", "--iterations", "100"};
    const auto a = run(args), b = run(args);
    CHECK(a.code == kExitOk);
    CHECK(a.out == b.out);
    const auto c = run({"simulate", "--seed", "100", "--distances", "50", "--repeaters", "1,2",
                        "--iterations", "100"});
    CHECK(c.out != a.out);
  }

  TEST_CASE("simulate: adding points keeps existing rows") {
    const auto a = run({"simulate", "--distances", "50", "--repeaters", "1,2", "--iterations",
                        "80", "--workers", "2"});
    const auto b = run({"simulate", "--distances", "50", "--repeaters", "1,2,3", "--iterations",
                        "80"});
    const auto ra = rows(a.out), rb = rows(b.out);
    REQUIRE(rb.size() == 3);
    CHECK(ra[0] == rb[0]);
    CHECK(ra[1] == rb[1]);
  }

  TEST_CASE("simulate: ion defaults to 1500 iterations") {
    const auto r = run({"simulate", "--distances", "20", "--repeaters", "1"});
    CHECK(rows(r.out)[0][6] == "1500");
  }

  TEST_CASE("simulate: censored APE runs exit with 3") {
    const auto r = run({"simulate", "--paradigm", "ape", "--distances", "50", "--repeaters",
                        "5", "--rgs", "1,25,1", "--iterations", "500"});
    CHECK(r.code == kExitCensoredOnly);
    const auto rs = rows(r.out);
    REQUIRE(rs.size() == 1);
    CHECK(rs[0][10] == "1");
  }

  TEST_CASE("simulate: trial log") {
    const std::string path = "trial_log_test_tmp.jsonl";
    const auto r = run({"simulate", "--distances", "50", "--repeaters", "1", "--iterations",
                        "20", "--trial-log", path});
    CHECK(r.code == kExitOk);
    std::ifstream f(path);
    std::vector<nlohmann::json> recs;
    for (std::string l; std::getline(f, l);) recs.push_back(nlohmann::json::parse(l));
    REQUIRE(recs.size() == 22);
    CHECK(recs[0].contains("header"));
    CHECK(recs[1]["point"] == 0);
    CHECK(recs[2]["iteration"] == 0);
    std::remove(path.c_str());
  }

  TEST_CASE("validate: perfect hardware matches exactly") {
    const auto r = run({"validate", "--distances", "20", "--repeaters", "2", "--iterations",
                        "200", "--set", "trapped_ion.f_1q=1", "--set", "trapped_ion.f_2q=1",
                        "--set", "trapped_ion.f_em_trap=1", "--set",
                        "trapped_ion.tau_coherence_s=1e30"});
    CHECK(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    const auto& fid = j["points"][0]["metrics"][1];
    CHECK(fid["name"] == "fidelity");
    CHECK(fid["z"] == 0.0);
    CHECK(fid["pass"] == true);
  }

  TEST_CASE("validate: mismatched attempt window fails") {
    const auto r = run({"validate", "--distances", "50", "--repeaters", "2", "--iterations",
                        "1500", "--sim-set", "trapped_ion.t_attempt_s=0.0006"});
    CHECK(r.code == kExitValidationFailure);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["result"] == "FAIL");
  }

  TEST_CASE("optimize") {
    const auto r = run({"optimize", "--distances", "50", "--repeaters", "8", "--budget", "300"});
    CHECK(r.code == kExitOk);
    CHECK(column_line(r.out) == "distance_km,n,m,b0,b1,photons,egr,baseline_egr");
    const auto rs = rows(r.out);
    REQUIRE(rs.size() == 1);
    CHECK(rs[0][2] == "6");
    CHECK(rs[0][3] == "6");
    CHECK(rs[0][4] == "3");
    const auto small = rows(run({"optimize", "--repeaters", "3", "--budget", "6"}).out);
    CHECK(small[0][5] == "6");
    CHECK(run({"optimize", "--budget", "5"}).code == kExitConfigError);
  }

  TEST_CASE("config errors exit with 1 and name the key") {
    const auto r = run({"theory", "--set", "ape.t_cz=1e-7"});
    CHECK(r.code == kExitConfigError);
    CHECK(r.err.find("/ape/t_cz") != std::string::npos);
    const auto bad = run({"theory", "--set", "trapped_ion.eta_det=2"});
    CHECK(bad.code == kExitConfigError);
    CHECK(bad.err.find("/trapped_ion/eta_det") != std::string::npos);
    CHECK(run({"theory", "--config", "missing_file.json"}).code == kExitConfigError);
    CHECK(run({"theory", "--paradigm", "laser"}).code == kExitConfigError);
    CHECK(run({"theory", "--repeaters", "a..b"}).code == kExitConfigError);
    CHECK(run({}).code == kExitConfigError);
  }

  TEST_CASE("list parsing") {
    CHECK(parse_int_list("1..3,8") == std::vector<int>{1, 2, 3, 8});
    CHECK(parse_double_list("10,50.5") == std::vector<double>{10.0, 50.5});
    const auto r = parse_rgs_list("6,6,3;8,11,4");
    REQUIRE(r.size() == 2);
    CHECK(r[1] == qrsim::RgsParams{8, 11, 4});
    CHECK_THROWS(parse_rgs_list("6,6"));
  }

  TEST_CASE("manifest hash ignores worker count") {
    RunManifest a, b;
    a.command = b.command = "theory";
    b.workers = 4;
    CHECK(a.hash() == b.hash());
    b.seed = 2;
    CHECK(a.hash() != b.hash());
  }
}

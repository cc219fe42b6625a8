#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "casim/cli.hpp"

namespace {

// cli commands write results to std::cout / std::cerr; keep doctest output clean
struct Capture {
  std::ostringstream out, err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  ~Capture() {
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
  }
};

int run_quiet(const std::vector<std::string>& args, std::string* out = nullptr) {
  Capture c;
  int rc = casim::cli::run(args);
  if (out) *out = c.out.str();
  return rc;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
  CHECK(run_quiet({}) == 2);
  CHECK(run_quiet({"bench", "--smr", "bogus"}) == 2);
  CHECK(run_quiet({"bench", "--updates", "150"}) == 2);
  CHECK(run_quiet({"no_such_command"}) == 2);
  CHECK(run_quiet({"--help"}) == 0);
}

TEST_CASE("bench emits the frozen CSV schema") {
  const char* path = "/tmp/casim_test_bench.csv";
  int rc = run_quiet({"bench", "--ds", "list", "--threads", "2", "--ops", "40", "--seed", "3",
                      "--out", path});
  CHECK(rc == 0);
  std::string csv = slurp(path);
  CHECK(csv.rfind("# scheme=", 0) == 0);
  CHECK(csv.find(" structure=list ") != std::string::npos);
  CHECK(csv.find(" seed=3 ") != std::string::npos);
  CHECK(csv.find("scheme,structure,threads,updates,sample_ops,live_now,ops_done,failed_cread,"
                 "failed_cwrite,invalidations,l1_miss,cycles_proxy\n") != std::string::npos);
  // at least the final sample row made it out
  CHECK(csv.find(",list,2,") != std::string::npos);
  std::remove(path);
}

TEST_CASE("CASIM_SEED seeds runs unless --seed overrides it") {
  const char* path = "/tmp/casim_test_envseed.csv";
  setenv("CASIM_SEED", "7", 1);
  CHECK(run_quiet({"bench", "--ds", "list", "--threads", "2", "--ops", "20", "--out", path}) == 0);
  CHECK(slurp(path).find(" seed=7 ") != std::string::npos);
  CHECK(run_quiet({"bench", "--ds", "list", "--threads", "2", "--ops", "20", "--seed", "9",
                   "--out", path}) == 0);
  CHECK(slurp(path).find(" seed=9 ") != std::string::npos);
  unsetenv("CASIM_SEED");
  std::remove(path);
}

TEST_CASE("an unsafe baseline sweep reports use-after-free and exits 1") {
  std::string out;
  int rc = run_quiet({"safety", "--ds", "stack", "--baseline", "--smr", "unsafe", "--seeds", "30",
                      "--seed", "1"},
                     &out);
  CHECK(rc == 1);
  CHECK(out.find("variant=base smr=unsafe") != std::string::npos);
  CHECK(out.find("first_bad_seed=") != std::string::npos);
}

TEST_CASE("the conditional-access sweep over the same seeds is clean") {
  std::string out;
  int rc = run_quiet({"safety", "--ds", "stack", "--smr", "ca", "--seeds", "30", "--seed", "1"},
                     &out);
  CHECK(rc == 0);
  CHECK(out.find("fatal=0 plain_uaf=0 other=0") != std::string::npos);
}

TEST_CASE("replay produces byte-identical logs for equal arguments") {
  const char *p1 = "/tmp/casim_test_replay1.log", *p2 = "/tmp/casim_test_replay2.log";
  std::vector<std::string> args{"replay", "--ds", "list", "--smr", "ca", "--seed", "5", "--out"};
  auto a1 = args, a2 = args;
  a1.push_back(p1);
  a2.push_back(p2);
  int rc1 = run_quiet(a1);
  int rc2 = run_quiet(a2);
  CHECK(rc1 == rc2);
  std::string l1 = slurp(p1), l2 = slurp(p2);
  CHECK(l1 == l2);
  CHECK(!l1.empty());
  CHECK(l1.find("# violations=") != std::string::npos);
  std::remove(p1);
  std::remove(p2);
}

TEST_CASE("explore checks every interleaving of the built-in race") {
  std::string out;
  CHECK(run_quiet({"explore"}, &out) == 0);
  CHECK(out == "interleavings=36113 checked=36113 bad=0\n");
  CHECK(run_quiet({"explore", "--cap", "100"}) == 2);
}

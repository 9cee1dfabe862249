#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "kh/systemio.hpp"

namespace {

std::string tool_path() {
  const char* p = std::getenv("KHTOOL");
  REQUIRE(p != nullptr);
  return p;
}

std::string gensys_path() {
  const char* p = std::getenv("KHGENSYS");
  REQUIRE(p != nullptr);
  return p;
}

std::string data_dir() {
  const char* p = std::getenv("KHDATA");
  REQUIRE(p != nullptr);
  return p;
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& command) {
  RunResult r;
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = "/tmp/khcli_" + name;
  std::ofstream out(path, std::ios::binary);
  out << body;
  return path;
}

const std::vector<std::string> kShipped = {"skew6.json", "four_two.json", "identity4.json"};

}  // namespace

TEST_CASE("shipped example files validate") {
  for (const auto& file : kShipped) {
    const auto r = run(tool_path() + " validate " + data_dir() + "/" + file);
    CAPTURE(file);
    CAPTURE(r.output);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("\"valid\": true") != std::string::npos);
  }
  const auto skew = run(tool_path() + " validate " + data_dir() + "/skew6.json");
  CHECK(skew.output.find("\"top_atoms\": 36") != std::string::npos);
}

TEST_CASE("every command runs on every shipped file and is byte stable") {
  const std::vector<std::string> commands = {"validate", "kronecker", "tower",    "spectral",
                                             "wm-test",  "joining",   "folner"};
  for (const auto& file : kShipped) {
    for (const auto& cmd : commands) {
      const std::string line =
          tool_path() + " " + cmd + " " + data_dir() + "/" + file + " --folner-N 16";
      const auto first = run(cmd == "folner" ? line : tool_path() + " " + cmd + " " +
                                                          data_dir() + "/" + file);
      const auto second = run(cmd == "folner" ? line : tool_path() + " " + cmd + " " +
                                                           data_dir() + "/" + file);
      CAPTURE(file);
      CAPTURE(cmd);
      CAPTURE(first.output);
      CHECK(first.exit_code == 0);
      CHECK(second.exit_code == 0);
      CHECK(first.output == second.output);
    }
  }
}

TEST_CASE("reports carry the expected structure outcomes") {
  const auto kron = run(tool_path() + " kronecker " + data_dir() + "/skew6.json");
  CHECK(kron.exit_code == 0);
  CHECK(kron.output.find("\"is_full\": true") != std::string::npos);
  CHECK(kron.output.find("\"rank_one_generators\": 6") != std::string::npos);

  const auto wm_id = run(tool_path() + " wm-test " + data_dir() + "/identity4.json");
  CHECK(wm_id.output.find("\"weakly_mixing\": true") != std::string::npos);
  const auto wm_skew = run(tool_path() + " wm-test " + data_dir() + "/skew6.json");
  CHECK(wm_skew.output.find("\"weakly_mixing\": false") != std::string::npos);

  const auto tower = run(tool_path() + " tower " + data_dir() + "/four_two.json");
  CHECK(tower.output.find("\"stabilized_at\": 1") != std::string::npos);
  CHECK(tower.output.find("\"is_full\": true") != std::string::npos);
}

TEST_CASE("the shift command reports the exact window decay") {
  const auto r = run(tool_path() + " shift --alphabet 2 --cylinder \"0@0\" --N 64");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"mean_f\": \"1/2\"") != std::string::npos);
  CHECK(r.output.find("\"1/4\"") != std::string::npos);
  CHECK(r.output.find("\"1/256\"") != std::string::npos);

  const auto centered =
      run(tool_path() + " shift --alphabet 2 --cylinder \"0@0;-1/2*@0\" --N 8");
  CHECK(centered.exit_code == 0);
  CHECK(centered.output.find("\"mean_f\": \"0\"") != std::string::npos);
  CHECK(centered.output.find("\"cesaro\"") != std::string::npos);
}

TEST_CASE("validation failures name the violated invariant and exit with two") {
  const std::string bad_mass = write_temp("bad_mass.json", R"({
    "space": {"atoms": [{"id": "a", "mass": 0.45}, {"id": "b", "mass": 0.45}]},
    "bottom_space": {"atoms": [{"id": "y", "mass": 1.0}]},
    "factor": {"map": {"a": "y", "b": "y"}},
    "dynamics": {"generators": [{"name": "t", "top_perm": {"a": "b", "b": "a"},
                                 "bottom_perm": {"y": "y"}}]},
    "group": "Z"})");
  const auto mass = run(tool_path() + " validate " + bad_mass);
  CHECK(mass.exit_code == 2);
  CHECK(mass.output.find("mass sum") != std::string::npos);

  const std::string bad_equi = write_temp("bad_equi.json", R"({
    "space": {"atoms": [{"id": "a", "mass": 0.25}, {"id": "b", "mass": 0.25},
                        {"id": "c", "mass": 0.25}, {"id": "d", "mass": 0.25}]},
    "bottom_space": {"atoms": [{"id": "y0", "mass": 0.5}, {"id": "y1", "mass": 0.5}]},
    "factor": {"map": {"a": "y0", "b": "y0", "c": "y1", "d": "y1"}},
    "dynamics": {"generators": [{"name": "t",
                                 "top_perm": {"a": "c", "b": "b", "c": "a", "d": "d"},
                                 "bottom_perm": {"y0": "y0", "y1": "y1"}}]},
    "group": "Z"})");
  const auto equi = run(tool_path() + " validate " + bad_equi);
  CHECK(equi.exit_code == 2);
  CHECK(equi.output.find("equivariance") != std::string::npos);

  const std::string garbage = write_temp("garbage.json", "definitely not json");
  const auto parse = run(tool_path() + " validate " + garbage);
  CHECK(parse.exit_code == 2);

  const std::string bad_perm = write_temp("bad_perm.json", R"({
    "space": {"atoms": [{"id": "a", "mass": 0.5}, {"id": "b", "mass": 0.5}]},
    "bottom_space": {"atoms": [{"id": "y", "mass": 1.0}]},
    "factor": {"map": {"a": "y", "b": "y"}},
    "dynamics": {"generators": [{"name": "t", "top_perm": {"a": "a", "b": "a"},
                                 "bottom_perm": {"y": "y"}}]},
    "group": "Z"})");
  const auto perm = run(tool_path() + " validate " + bad_perm);
  CHECK(perm.exit_code == 2);
  CHECK(perm.output.find("not a permutation") != std::string::npos);
}

TEST_CASE("serialization round trips through the loader") {
  const kh::FiniteExtension ext = kh::load_system(data_dir() + "/skew6.json");
  const kh::Json doc = kh::serialize_system(ext);
  const kh::FiniteExtension back = kh::parse_system(doc);
  CHECK(back.top().space() == ext.top().space());
  CHECK(back.bottom().space() == ext.bottom().space());
  CHECK(back.factor() == ext.factor());
  for (std::size_t g = 0; g < ext.top().generator_count(); ++g) {
    CHECK(back.top().name(g) == ext.top().name(g));
    CHECK(back.top().perm(g) == ext.top().perm(g));
    CHECK(back.bottom().perm(g) == ext.bottom().perm(g));
  }
  CHECK(kh::render_report(kh::serialize_system(back)) == kh::render_report(doc));
}

TEST_CASE("the generator is deterministic for a fixed seed") {
  const auto a = run(gensys_path() + " random --seed 7");
  const auto b = run(gensys_path() + " random --seed 7");
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
  CHECK(a.output.find("\"group\"") != std::string::npos);

  const std::string path = write_temp("random7.json", a.output);
  const auto check = run(tool_path() + " validate " + path);
  CAPTURE(check.output);
  CHECK(check.exit_code == 0);

  const auto other = run(gensys_path() + " random --seed 8");
  CHECK(other.exit_code == 0);
  CHECK(a.output != other.output);
}

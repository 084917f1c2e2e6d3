#include <catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "uhat/frontend.hpp"

using namespace uhat;

namespace {

int cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "uhatgen");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream o, e;
  int rc = cliMain(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return rc;
}

}  // namespace

TEST_CASE("spec files print and parse back", "[frontend]") {
  for (const char* f : {"specs/stack.uhat", "specs/kv.uhat", "specs/set.uhat"}) {
    SpecFile s = loadSpec(f);
    std::string once = printSpec(s);
    CHECK(printSpec(parseSpec(once)) == once);
    CHECK(parseSpec(once).propertyOrder == s.propertyOrder);
  }
}

TEST_CASE("an empty spec has nothing in it", "[frontend]") {
  SpecFile s = parseSpec("");
  CHECK(s.delta.ops.empty());
  CHECK(s.properties.empty());
  CHECK(parseSpec("# only a comment\n").properties.empty());
}

TEST_CASE("spec errors carry positions", "[frontend]") {
  const char* text = "op push(x:int) -> unit = [any*] unit [<push x>]\nproperty p = <peek>\n";
  try {
    parseSpec(text);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("2:") != std::string::npos);
  }
  CHECK_THROWS(parseSpec("op f() -> unit = [any*] int [<f>]\n"));
  CHECK_THROWS(lookupProperty(loadSpec("specs/stack.uhat"), "missing"));
}

TEST_CASE("configuration keys", "[frontend]") {
  Config c;
  applyConfig(c, "domain", "0..4");
  applyConfig(c, "unroll-bound", "3");
  applyConfig(c, "seed", "9");
  CHECK(c.domain.lo == 0);
  CHECK(c.domain.hi == 4);
  CHECK(c.unrollBound == 3);
  CHECK(c.seed == 9);
  CHECK_THROWS(applyConfig(c, "colour", "red"));
  CHECK_THROWS(applyConfig(c, "domain", "4..0"));
}

TEST_CASE("trace checking against properties", "[frontend]") {
  SpecFile s = loadSpec("specs/stack.uhat");
  Trace pushPop = parseTrace("op=push args=[1] ret=() ghost=0\nop=pop args=[] ret=1 ghost=0\n");
  CHECK(traceSatisfies(pushPop, lookupProperty(s, "pop_any")));
  CHECK_FALSE(traceSatisfies({pushPop[0]}, lookupProperty(s, "pop_any")));
  SpecFile kv = loadSpec("specs/kv.uhat");
  Trace bad = parseTrace(
      "op=write args=[3] ret=() ghost=0\nop=readReq args=[] ret=1 ghost=0\n"
      "op=write args=[4] ret=() ghost=0\nop=readRsp args=[1] ret=4 ghost=0\n");
  CHECK_FALSE(traceSatisfies(bad, lookupProperty(kv, "interleaved")));
  bad.back().ret = Value::integer(3);
  CHECK(traceSatisfies(bad, lookupProperty(kv, "interleaved")));
}

TEST_CASE("command line", "[frontend]") {
  std::string out, err;
  CHECK(cli({"--version"}, &out) == 0);
  CHECK(out == std::string(UHAT_VERSION) + "\n");
  CHECK(cli({"synth"}, &out, &err) == 2);
  CHECK(cli({"synth", "--spec", "nope.uhat", "--property", "p", "--out", "x"}, &out, &err) == 1);

  auto dir = std::filesystem::temp_directory_path() / "uhat-frontend-test";
  std::filesystem::remove_all(dir);
  REQUIRE(cli({"synth", "--spec", "specs/stack.uhat", "--property", "pop_any", "--out", dir.string()}, &out) == 0);
  CHECK(std::filesystem::exists(dir / "pop_any.gen"));
  CHECK(std::filesystem::exists(dir / "pop_any.1.type"));

  REQUIRE(cli({"run", "--gen", (dir / "pop_any.1.gen").string(), "--handler", "stack_ok", "--spec",
               "specs/stack.uhat", "--trace-out", (dir / "t.trace").string()},
              &out) == 0);
  CHECK(out.find("outcome: Completed") != std::string::npos);
  CHECK(cli({"check", "--trace", (dir / "t.trace").string(), "--property", "pop_any", "--spec",
             "specs/stack.uhat"},
            &out) == 0);
  CHECK(out == "accepted\n");
  std::filesystem::remove_all(dir);
}

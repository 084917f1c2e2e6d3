#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uhat/derive.hpp"
#include "uhat/frontend.hpp"
#include "uhat/harness.hpp"

namespace py = pybind11;
using namespace uhat;

namespace {

Config configFor(const SpecFile& spec, const std::map<std::string, std::string>& overrides) {
  Config cfg;
  for (auto& [k, v] : spec.config) applyConfig(cfg, k, v);
  for (auto& [k, v] : overrides) applyConfig(cfg, k, v);
  return cfg;
}

py::dict synthesizeText(const std::string& specText, const std::string& property,
                        const std::map<std::string, std::string>& config) {
  SpecFile spec = parseSpec(specText);
  Config cfg = configFor(spec, config);
  const PropertyDecl& p = lookupProperty(spec, property);
  SynthResult r;
  {
    py::gil_scoped_release release;
    r = synthesize(spec.delta, propertyVars(p), p.sre, cfg);
  }
  py::list programs;
  for (auto& g : r.programs) programs.append(printExpr(g.expr));
  py::dict out;
  out["combined"] = printExpr(r.combined.expr);
  out["programs"] = programs;
  out["candidates"] = r.finished.size();
  out["steps"] = r.stats.steps;
  return out;
}

py::dict runText(const std::string& program, const std::string& handler, uint64_t seed,
                 const std::string& specText) {
  OpTable ops = specText.empty() ? familyOps(lookupHandler(handler).family) : parseSpec(specText).delta.ops;
  Expr g = parseExpr(program, ops);
  typecheckBasic(g, ops);
  const HandlerSpec& hs = lookupHandler(handler);
  auto sut = hs.make();
  auto ref = makeHandler(hs.reference);
  RunOutcome o = run(g, ops, *sut, seed);
  py::dict out;
  out["outcome"] = std::string(outcomeName(o.kind));
  out["violation"] = isViolation(o, *ref, familyMonitor(hs.family));
  out["trace"] = formatTrace(o.trace);
  out["message"] = o.message;
  return out;
}

bool checkText(const std::string& traceText, const std::string& specText, const std::string& property) {
  SpecFile spec = parseSpec(specText);
  Trace t = parseTrace(traceText);
  checkWellFormed(eraseGhost(t), spec.delta.ops);
  return traceSatisfies(t, lookupProperty(spec, property), configFor(spec, {}));
}

py::list benchText(const std::string& specText, const std::string& property, const std::string& handler, int runs,
                   const std::string& baseline, int jobs, int maxLen,
                   const std::map<std::string, std::string>& config) {
  SpecFile spec = parseSpec(specText);
  Config cfg = configFor(spec, config);
  const PropertyDecl& p = lookupProperty(spec, property);
  std::vector<CampaignReport> reports;
  {
    py::gil_scoped_release release;
    SynthResult r = synthesize(spec.delta, propertyVars(p), p.sre, cfg);
    CampaignOptions opt;
    opt.runs = runs;
    opt.seed = cfg.seed;
    opt.jobs = jobs;
    reports.push_back(runCampaign(Strategy{"synth", r.combined.expr}, handler, spec.delta.ops, opt, cfg));
    if (baseline == "random")
      reports.push_back(runCampaign(Strategy{"random", randomBaseline(spec.delta.ops, maxLen)}, handler,
                                    spec.delta.ops, opt, cfg));
    else if (baseline != "none")
      throw SemanticError("unknown baseline " + baseline);
  }
  py::list rows;
  for (auto& rep : reports) {
    py::dict d;
    d["handler"] = rep.handler;
    d["strategy"] = rep.strategy;
    d["median"] = rep.median();
    d["mean"] = rep.mean();
    d["runs"] = rep.runs;
    d["violations"] = rep.violations;
    rows.append(d);
  }
  return rows;
}

std::vector<std::string> handlerNames() {
  std::vector<std::string> names;
  for (auto& h : handlerRegistry()) names.push_back(h.name);
  return names;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Synthesis of effectful test generators from trace properties";
  m.attr("__version__") = UHAT_VERSION;

  py::register_exception<Error>(m, "UhatError");

  m.def("normalize_spec", [](const std::string& text) { return printSpec(parseSpec(text)); }, py::arg("text"),
        "Parse a spec and print it back in canonical form.");
  m.def("properties", [](const std::string& text) { return parseSpec(text).propertyOrder; }, py::arg("text"));
  m.def("handlers", &handlerNames);
  m.def("synthesize", &synthesizeText, py::arg("spec"), py::arg("property"),
        py::arg("config") = std::map<std::string, std::string>{},
        "Synthesize generators; returns the combined program and one program per candidate.");
  m.def("run", &runText, py::arg("program"), py::arg("handler"), py::arg("seed") = 0, py::arg("spec") = "",
        "Execute a generator once against a built-in handler.");
  m.def("check", &checkText, py::arg("trace"), py::arg("spec"), py::arg("property"));
  m.def("bench", &benchText, py::arg("spec"), py::arg("property"), py::arg("handler"), py::arg("runs") = 1000,
        py::arg("baseline") = "random", py::arg("jobs") = 1, py::arg("max_len") = 10,
        py::arg("config") = std::map<std::string, std::string>{});
}

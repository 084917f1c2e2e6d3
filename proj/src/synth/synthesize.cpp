#include "uhat/derive.hpp"

namespace uhat {

SynthResult synthesize(const OperatorContext& delta, const VarSorts& vars, Regex A, const Config& cfg) {
  SynthResult r;
  std::vector<Candidate> initial = initialCandidates(delta, vars, A, cfg);
  if (initial.empty()) throw SynthesisFailed("the property denotes no feasible abstract trace");
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(cfg.timeoutSec));
  FreshNames names;
  r.finished = searchCandidates(delta, std::move(initial), names, cfg, static_cast<size_t>(cfg.maxCandidates),
                                cfg.maxRefineSteps, &r.stats, deadline);
  if (r.finished.empty()) {
    std::string why = r.stats.timedOut ? "timed out" : "no candidate resolved";
    why += " after " + std::to_string(r.stats.steps) + " refinement steps";
    if (!r.stats.lastFailure.empty()) why += "; last failure: " + r.stats.lastFailure;
    throw SynthesisFailed(why);
  }
  for (auto& c : r.finished) r.programs.push_back(termDerive(delta, {c}, cfg));
  r.combined = termDerive(delta, r.finished, cfg);
  return r;
}

}  // namespace uhat

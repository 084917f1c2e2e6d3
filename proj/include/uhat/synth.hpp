#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uhat/dsl.hpp"
#include "uhat/sre.hpp"
#include "uhat/types.hpp"

namespace uhat {

// One event of an abstract trace with its resolution tag.
struct ATEvent {
  SymEvent ev;
  bool resolved = false;
  std::optional<Instantiation> inst;
};

// Either a single tagged event or a starred alternation of events.
struct ASeg {
  bool star = false;
  std::vector<ATEvent> alts;
};

using AbstractTrace = std::vector<ASeg>;

struct Candidate {
  TypeContext gamma;
  AbstractTrace pi;
  std::string origin;
  int depth = 0;
  uint64_t serial = 0;
};

std::string printAbstractTrace(const AbstractTrace& pi, const std::set<std::string>& scope = {});
std::string printCandidate(const Candidate& c);
Lin toLin(const AbstractTrace& pi);
Regex traceRegex(const AbstractTrace& pi);
size_t unresolvedCount(const AbstractTrace& pi);
size_t concreteLength(const AbstractTrace& pi);
std::optional<size_t> leftmostUnresolved(const AbstractTrace& pi);

// Abstract traces whose denotations union to A's, stars expanded up to cfg.starBound.
std::vector<AbstractTrace> normPlan(Regex A, const OpTable& ops, const Config& cfg = {});

// Source name plus a counter, skipping names already taken.
class FreshNames {
 public:
  std::string fresh(const std::string& base, const std::set<std::string>& taken);

 private:
  std::map<std::string, int> next_;
};

// Resolves the event at pi[target] against every component of its operator's signature.
std::vector<Candidate> refine(const OperatorContext& delta, const Candidate& c, size_t target, FreshNames& names,
                              const Config& cfg = {});

// Every resolved concrete event passes realizableEvent against its surroundings.
bool candidateRealizable(const OperatorContext& delta, const Candidate& c, const Config& cfg = {});

struct SearchStats {
  int steps = 0;
  int expanded = 0;
  int discarded = 0;
  bool timedOut = false;
  std::string lastFailure;
};

// Best-first refinement until maxFinished candidates have no unresolved events.
std::vector<Candidate> searchCandidates(const OperatorContext& delta, std::vector<Candidate> initial,
                                        FreshNames& names, const Config& cfg, size_t maxFinished,
                                        int stepBudget, SearchStats* stats = nullptr,
                                        std::optional<std::chrono::steady_clock::time_point> deadline = {});

// Properties speak about ghost-erased traces: a ghost-only star follows every visible event.
Regex padGhosts(Regex A, const OpTable& ops);

// Abstract traces of the padded property, each under a context binding the property's variables.
std::vector<Candidate> initialCandidates(const OperatorContext& delta, const VarSorts& vars, Regex A,
                                         const Config& cfg);

// An emitted generator with the uHAT it claims and where it came from.
struct GeneratorProgram {
  Expr expr;
  TypePtr claimed;
  TypeContext gamma;
  std::vector<Formula> facts;  // constraints over gamma the claim is relative to
  AbstractTrace source;
  std::string origin;
  bool recursive = false;
};

struct SynthResult {
  std::vector<Candidate> finished;
  std::vector<GeneratorProgram> programs;  // one per finished candidate
  GeneratorProgram combined;               // all candidates joined by choice
  SearchStats stats;
};

// Throws SynthesisFailed when no candidate resolves within the budgets.
SynthResult synthesize(const OperatorContext& delta, const VarSorts& vars, Regex A, const Config& cfg = {});

}  // namespace uhat

#pragma once

#include <optional>
#include <vector>

#include "uhat/dsl.hpp"
#include "uhat/synth.hpp"

namespace uhat {

// Hole assignment for the loop template
//   let f = fix f(u). () (+) (e1; f(); e2) in (e3; f(); e4)
// over segment ranges e3=[0,a) e1=[a,s) e2=[s+1,b) e4=[b,n); pi[s] is the starred recursion point.
struct Matching {
  size_t a = 0, s = 0, b = 0;
};

// Straightline program for a resolved abstract trace.
Expr deriveTrace(const TypeContext& gamma, const AbstractTrace& pi);

// The trace that i-fold unrolling of a matching must re-refine, with qualifiers erased.
AbstractTrace unrolledTrace(const AbstractTrace& pi, const Matching& m, int folds);
// Every unrolling up to the bound re-refines; bound 0 accepts vacuously.
bool matchingSurvives(const OperatorContext& delta, const AbstractTrace& pi, const Matching& m, int unrollBound,
                      const Config& cfg = {});
Expr instantiateTemplate(const TypeContext& gamma, const AbstractTrace& pi, const Matching& m);
std::vector<Matching> enumerateMatchings(const AbstractTrace& pi);
// First surviving matching instantiated, or nullopt when none survives.
std::optional<Expr> synRecursion(const OperatorContext& delta, const TypeContext& gamma, const AbstractTrace& pi,
                                 int unrollBound, const Config& cfg = {});

// Erased concrete events of a trace as the future regex it claims.
Regex claimedFuture(const AbstractTrace& pi);
std::vector<Formula> traceFacts(const TypeContext& gamma, const AbstractTrace& pi);

GeneratorProgram termDerive(const OperatorContext& delta, const std::vector<Candidate>& candidates,
                            const Config& cfg = {});

}  // namespace uhat

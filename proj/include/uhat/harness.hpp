#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "uhat/dsl.hpp"
#include "uhat/synth.hpp"

namespace uhat {

// Trace-level check a strategy's runs must also satisfy; returns false on violation.
using TraceMonitor = std::function<bool(const Trace&)>;

struct HandlerSpec {
  std::string name;
  std::string family;     // "stack", "set" or "kv"
  std::string reference;  // conforming handler of the same family
  std::function<std::unique_ptr<Handler>()> make;
};

// Built-ins: stack_ok, stack_buggy, stack_buggy_overwrite, set_ok, set_buggy, kv_ra_ok, kv_ra_buggy.
const std::vector<HandlerSpec>& handlerRegistry();
const HandlerSpec& lookupHandler(const std::string& name);
std::unique_ptr<Handler> makeHandler(const std::string& name);
// Basic operator table the family's handlers implement.
OpTable familyOps(const std::string& family);
// Read atomicity for kv; no monitor for other families.
TraceMonitor familyMonitor(const std::string& family);
bool readAtomic(const Trace& t);

// Uniform op sequences of length 0..maxLen over delta's effect operators with uniform arguments.
Expr randomBaseline(const OpTable& ops, int maxLen);

struct Strategy {
  std::string name;  // "synth" or "random"
  Expr program;
};

struct CampaignReport {
  std::string handler;
  std::string strategy;
  int runs = 0;
  int violations = 0;
  int completed = 0;
  int asserts = 0;
  int faults = 0;
  int diverged = 0;
  int assumeRetried = 0;     // executions repeated with a fresh seed after AssumeExhausted
  int assumeAbandoned = 0;   // executions still exhausted after every retry
  std::vector<int> gaps;     // executions up to and including each violation
  double median() const;     // +inf without violations
  double mean() const;
};

struct CampaignOptions {
  int runs = 10000;
  uint64_t seed = 0;
  int jobs = 1;
  int assumeRetries = 10;
};

// Assert failure or a fault the reference handler does not raise on the same calls; monitors apply otherwise.
bool isViolation(const RunOutcome& o, Handler& reference, const TraceMonitor& monitor);

// Executions-to-violation statistics over opt.runs seeded executions, classified by isViolation.
CampaignReport runCampaign(const Strategy& s, const std::string& handler, const OpTable& ops,
                           const CampaignOptions& opt, const Config& cfg = {});

std::string formatNumber(double v);
std::string benchHeader();
std::string benchRow(const CampaignReport& r);

// Per-run seed derived from a campaign seed.
uint64_t runSeed(uint64_t campaignSeed, uint64_t index, uint64_t attempt = 0);

}  // namespace uhat

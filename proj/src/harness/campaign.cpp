#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "uhat/harness.hpp"

namespace uhat {

namespace {

Expr balancedChoice(const std::vector<Expr>& xs, size_t lo, size_t hi) {
  if (hi - lo == 1) return xs[lo];
  size_t mid = lo + (hi - lo) / 2;
  return eChoice(balancedChoice(xs, lo, mid), balancedChoice(xs, mid, hi));
}

Expr randomCall(const OpInfo& op, int pos) {
  std::vector<std::pair<std::string, Sort>> binders;
  std::vector<Expr> args;
  for (size_t k = 0; k < op.params.size(); ++k) {
    std::string a = "a" + std::to_string(pos) + "_" + std::to_string(k);
    binders.emplace_back(a, op.params[k]);
    args.push_back(eVar(a));
  }
  Expr call = eEffOp(op.name, std::move(args));
  if (op.ret != Sort::unit()) call = eLet("r" + std::to_string(pos), call, eUnit());
  return binders.empty() ? call : eAssume(std::move(binders), mkTrue(), call);
}

struct Execution {
  Outcome kind = Outcome::Completed;
  bool violation = false;
  int retried = 0;
};

bool referenceFaults(Handler& ref, const RunOutcome& o) {
  ref.reset();
  Trace prefix;
  try {
    for (auto& e : o.trace) {
      if (e.ghost) continue;
      ref.handle(prefix, e.op, e.args);
      prefix.push_back(e);
    }
    if (o.faultCall) ref.handle(prefix, o.faultCall->op, o.faultCall->args);
  } catch (const SUTFault&) {
    return true;
  }
  return false;
}

}  // namespace

bool isViolation(const RunOutcome& o, Handler& reference, const TraceMonitor& monitor) {
  switch (o.kind) {
    case Outcome::AssertViolated: return true;
    case Outcome::SUTFault: return !referenceFaults(reference, o);
    case Outcome::Completed:
    case Outcome::Diverged: return monitor && !monitor(eraseGhost(o.trace));
    case Outcome::AssumeExhausted: return false;
  }
  return false;
}

Expr randomBaseline(const OpTable& ops, int maxLen) {
  std::vector<const OpInfo*> effects;
  for (auto& [name, info] : ops)
    if (info.kind == OpKind::Effect) effects.push_back(&info);
  if (effects.empty()) throw SemanticError("no effect operators to sample");
  std::vector<Expr> lengths;
  int pos = 0;
  for (int len = 0; len <= maxLen; ++len) {
    std::vector<Expr> steps;
    for (int i = 0; i < len; ++i) {
      std::vector<Expr> calls;
      for (auto* op : effects) calls.push_back(randomCall(*op, pos));
      ++pos;
      steps.push_back(balancedChoice(calls, 0, calls.size()));
    }
    Expr body = eUnit();
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) body = eSeq(*it, body);
    lengths.push_back(body);
  }
  return balancedChoice(lengths, 0, lengths.size());
}

uint64_t runSeed(uint64_t campaignSeed, uint64_t index, uint64_t attempt) {
  uint64_t z = campaignSeed ^ (index * 0x9E3779B97F4A7C15ULL) ^ (attempt * 0xD1B54A32D192ED03ULL);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CampaignReport::median() const {
  if (gaps.empty()) return std::numeric_limits<double>::infinity();
  std::vector<int> g = gaps;
  std::sort(g.begin(), g.end());
  size_t n = g.size();
  return n % 2 ? g[n / 2] : (g[n / 2 - 1] + g[n / 2]) / 2.0;
}

double CampaignReport::mean() const {
  if (gaps.empty()) return std::numeric_limits<double>::infinity();
  double s = 0;
  for (int g : gaps) s += g;
  return s / static_cast<double>(gaps.size());
}

CampaignReport runCampaign(const Strategy& s, const std::string& handler, const OpTable& ops,
                           const CampaignOptions& opt, const Config& cfg) {
  const HandlerSpec& spec = lookupHandler(handler);
  TraceMonitor monitor = familyMonitor(spec.family);
  std::vector<Execution> results(static_cast<size_t>(std::max(opt.runs, 0)));

  auto work = [&](size_t lo, size_t hi) {
    std::unique_ptr<Handler> sut = spec.make();
    std::unique_ptr<Handler> ref = makeHandler(spec.reference);
    for (size_t i = lo; i < hi; ++i) {
      Execution& ex = results[i];
      RunOutcome o;
      for (int a = 0;; ++a) {
        o = run(s.program, ops, *sut, runSeed(opt.seed, i, static_cast<uint64_t>(a)), cfg);
        if (o.kind != Outcome::AssumeExhausted || a >= opt.assumeRetries) break;
        ++ex.retried;
      }
      ex.kind = o.kind;
      ex.violation = isViolation(o, *ref, monitor);
    }
  };

  size_t n = results.size();
  size_t jobs = static_cast<size_t>(std::clamp(opt.jobs, 1, 256));
  if (jobs == 1 || n < 2) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    size_t chunk = (n + jobs - 1) / jobs;
    for (size_t lo = 0; lo < n; lo += chunk) pool.emplace_back(work, lo, std::min(n, lo + chunk));
    for (auto& t : pool) t.join();
  }

  CampaignReport r;
  r.handler = handler;
  r.strategy = s.name;
  r.runs = opt.runs;
  int since = 0;
  for (auto& ex : results) {
    ++since;
    r.assumeRetried += ex.retried;
    switch (ex.kind) {
      case Outcome::Completed: ++r.completed; break;
      case Outcome::AssertViolated: ++r.asserts; break;
      case Outcome::SUTFault: ++r.faults; break;
      case Outcome::Diverged: ++r.diverged; break;
      case Outcome::AssumeExhausted: ++r.assumeAbandoned; break;
    }
    if (ex.violation) {
      ++r.violations;
      r.gaps.push_back(since);
      since = 0;
    }
  }
  return r;
}

std::string formatNumber(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

std::string benchHeader() { return "handler\tstrategy\tmedian-executions\tmean-executions\truns"; }

std::string benchRow(const CampaignReport& r) {
  return r.handler + "\t" + r.strategy + "\t" + formatNumber(r.median()) + "\t" + formatNumber(r.mean()) + "\t" +
         std::to_string(r.runs);
}

}  // namespace uhat

#include <map>
#include <set>

#include "uhat/harness.hpp"

namespace uhat {

namespace {

class StackHandler : public Handler {
 public:
  // capacity 0 means unbounded.
  StackHandler(size_t capacity, bool overwrite) : capacity_(capacity), overwrite_(overwrite) {}
  void reset() override { items_.clear(); }
  Value handle(const Trace&, const std::string& op, const std::vector<Value>& args) override {
    if (op == "push") {
      if (capacity_ == 0 || items_.size() < capacity_)
        items_.push_back(args.at(0));
      else if (overwrite_)
        items_.back() = args.at(0);
      return Value::unit();
    }
    if (op == "pop") {
      if (items_.empty()) throw SUTFault("stack is empty");
      Value v = items_.back();
      items_.pop_back();
      return v;
    }
    throw UnknownOp(op);
  }

 private:
  size_t capacity_;
  bool overwrite_;
  std::vector<Value> items_;
};

class SetHandler : public Handler {
 public:
  explicit SetHandler(size_t capacity) : capacity_(capacity) {}
  void reset() override { items_.clear(); }
  Value handle(const Trace&, const std::string& op, const std::vector<Value>& args) override {
    if (op == "insert") {
      if (capacity_ == 0 || items_.size() < capacity_) items_.insert(args.at(0).i);
      return Value::unit();
    }
    if (op == "mem") return Value::boolean(items_.count(args.at(0).i) > 0);
    throw UnknownOp(op);
  }

 private:
  size_t capacity_;
  std::set<int64_t> items_;
};

class KvHandler : public Handler {
 public:
  explicit KvHandler(bool snapshot) : snapshot_(snapshot) {}
  void reset() override {
    value_ = 0;
    nextTag_ = 1;
    pending_.clear();
  }
  Value handle(const Trace&, const std::string& op, const std::vector<Value>& args) override {
    if (op == "write") {
      value_ = args.at(0).i;
      return Value::unit();
    }
    if (op == "readReq") {
      int64_t tag = nextTag_++;
      pending_[tag] = value_;
      return Value::integer(tag);
    }
    if (op == "readRsp") {
      auto it = pending_.find(args.at(0).i);
      if (it == pending_.end()) throw SUTFault("unknown request tag " + args.at(0).str());
      return Value::integer(snapshot_ ? it->second : value_);
    }
    throw UnknownOp(op);
  }

 private:
  bool snapshot_;
  int64_t value_ = 0;
  int64_t nextTag_ = 1;
  std::map<int64_t, int64_t> pending_;
};

OpInfo effect(const std::string& name, std::vector<std::string> pn, std::vector<Sort> ps, Sort ret) {
  return OpInfo{name, OpKind::Effect, std::move(pn), std::move(ps), std::move(ret)};
}

}  // namespace

const std::vector<HandlerSpec>& handlerRegistry() {
  static const std::vector<HandlerSpec> reg = {
      {"stack_ok", "stack", "stack_ok", [] { return std::make_unique<StackHandler>(0, false); }},
      {"stack_buggy", "stack", "stack_ok", [] { return std::make_unique<StackHandler>(2, false); }},
      {"stack_buggy_overwrite", "stack", "stack_ok", [] { return std::make_unique<StackHandler>(2, true); }},
      {"set_ok", "set", "set_ok", [] { return std::make_unique<SetHandler>(0); }},
      {"set_buggy", "set", "set_ok", [] { return std::make_unique<SetHandler>(2); }},
      {"kv_ra_ok", "kv", "kv_ra_ok", [] { return std::make_unique<KvHandler>(true); }},
      {"kv_ra_buggy", "kv", "kv_ra_ok", [] { return std::make_unique<KvHandler>(false); }},
  };
  return reg;
}

const HandlerSpec& lookupHandler(const std::string& name) {
  for (auto& h : handlerRegistry())
    if (h.name == name) return h;
  throw SemanticError("unknown handler " + name);
}

std::unique_ptr<Handler> makeHandler(const std::string& name) { return lookupHandler(name).make(); }

OpTable familyOps(const std::string& family) {
  const Sort I = Sort::integer(), U = Sort::unit();
  OpTable t;
  auto add = [&](OpInfo o) { t[o.name] = std::move(o); };
  if (family == "stack") {
    add(effect("push", {"x"}, {I}, U));
    add(effect("pop", {}, {}, I));
  } else if (family == "set") {
    add(effect("insert", {"x"}, {I}, U));
    add(effect("mem", {"x"}, {I}, Sort::boolean()));
  } else if (family == "kv") {
    add(effect("write", {"x"}, {I}, U));
    add(effect("readReq", {}, {}, I));
    add(effect("readRsp", {"i"}, {I}, I));
  } else {
    throw SemanticError("unknown handler family " + family);
  }
  return t;
}

bool readAtomic(const Trace& t) {
  int64_t value = 0;
  std::map<int64_t, int64_t> seen;
  for (auto& e : t) {
    if (e.ghost) continue;
    if (e.op == "write") {
      value = e.args.at(0).i;
    } else if (e.op == "readReq") {
      seen[e.ret.i] = value;
    } else if (e.op == "readRsp") {
      auto it = seen.find(e.args.at(0).i);
      if (it != seen.end() && it->second != e.ret.i) return false;
    }
  }
  return true;
}

TraceMonitor familyMonitor(const std::string& family) {
  if (family == "kv") return readAtomic;
  return {};
}

}  // namespace uhat

#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "uhat/config.hpp"
#include "uhat/types.hpp"

namespace uhat {

struct PropertyDecl {
  std::string name;
  std::vector<std::pair<std::string, Sort>> params;
  Regex sre;
};

struct SpecFile {
  OperatorContext delta;
  std::vector<std::string> opOrder;  // declaration order
  std::vector<std::string> sorts;
  std::map<std::string, PropertyDecl> properties;
  std::vector<std::string> propertyOrder;
  std::vector<std::pair<std::string, std::string>> config;
};

// Declarations:
//   sort NAME
//   [ghost | pure] op NAME(x:T, ...) -> SORT [= SIG (/\ SIG)*]
//   property NAME[(x:SORT, ...)] = SRE
//   config KEY = VALUE
// where SIG is `g:SORT ~> ... [SRE] RET [SRE]`. Parameter refinements in the header
// may mention each component's ghost variables.
SpecFile parseSpec(const std::string& text);
SpecFile loadSpec(const std::string& path);
std::string printSpec(const SpecFile& spec);

VarSorts propertyVars(const PropertyDecl& p);
const PropertyDecl& lookupProperty(const SpecFile& spec, const std::string& name);

// Keys: unroll-bound max-candidates max-refine-steps timeout star-bound domain (LO..HI) seed
// max-branches witness-pool step-budget assume-retries.
void applyConfig(Config& cfg, const std::string& key, const std::string& value);
// One `key = value` per line; `#` starts a comment.
void applyConfigFile(Config& cfg, const std::string& path);

// Membership of the ghost-erased trace for some assignment of the property's parameters.
bool traceSatisfies(const Trace& t, const PropertyDecl& p, const Config& cfg = {});

std::string readFile(const std::string& path);
void writeFile(const std::string& path, const std::string& text);

// Exit status: 0 success, 1 failure, 2 usage error.
int cliMain(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace uhat

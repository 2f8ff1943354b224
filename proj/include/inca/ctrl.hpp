#pragma once

#include <variant>

#include "inca/pipeline.hpp"

namespace inca {

struct SyntaxError : std::runtime_error {
  explicit SyntaxError(const std::string& w) : std::runtime_error(w) {}
};
struct UnknownChain : std::runtime_error {
  explicit UnknownChain(const std::string& name)
      : std::runtime_error("unknown chain '" + name + "'") {}
};

/// Rule as written in the grammar: the chain is still a name, resolved
/// against the chain registry at apply time.
struct RuleSpec {
  uint32_t rule_id = 0;
  int32_t priority = 0;
  RuleMatch match;
  std::string chain_name;

  bool operator==(const RuleSpec&) const = default;
};

struct CmdAddRule { RuleSpec spec; bool operator==(const CmdAddRule&) const = default; };
struct CmdDelRule { uint32_t rule_id; bool operator==(const CmdDelRule&) const = default; };
struct CmdAddChain {
  std::string name;
  std::vector<Ipv6Addr> sids;
  bool operator==(const CmdAddChain&) const = default;
};
struct CmdSliceMap { uint32_t teid; uint16_t slice; bool operator==(const CmdSliceMap&) const = default; };
struct CmdListRules { bool operator==(const CmdListRules&) const = default; };
struct CmdStats { bool operator==(const CmdStats&) const = default; };
struct CmdPing { bool operator==(const CmdPing&) const = default; };
/// Run-control: release n scenario steps (only meaningful on a live run).
struct CmdStep { uint32_t count; bool operator==(const CmdStep&) const = default; };

using ControlCommand =
    std::variant<CmdAddRule, CmdDelRule, CmdAddChain, CmdSliceMap, CmdListRules,
                 CmdStats, CmdPing, CmdStep>;

struct ControlResponse {
  bool ok = true;
  std::vector<std::string> body;   // ERR: exactly one reason line

  static ControlResponse err(const std::string& reason) { return {false, {reason}}; }
};

ControlCommand parse_command(const std::string& line);
std::string serialize_command(const ControlCommand& cmd);

/// Applies one command transactionally: on ERR the state is untouched.
ControlResponse apply(const ControlCommand& cmd, PipelineState& state);

/// One rule re-serialized in the rules-file grammar (LIST-RULES output).
std::string serialize_rule(const Rule& rule);

struct RulesConfig {
  std::map<std::string, ChainPolicy> chains;
  std::vector<RuleSpec> rules;           // declaration order
  std::map<uint32_t, uint16_t> slice_maps;
};

/// Loads the line-oriented rules file. Chains may be declared after the
/// rules that reference them; references are checked after the full
/// file is read.
RulesConfig load_rules_file(const std::string& text);

/// Installs a loaded config into a pipeline state (fresh table).
void install_rules(const RulesConfig& cfg, PipelineState& state);

}  // namespace inca

#include "inca/ctrl.hpp"

#include <charconv>
#include <sstream>

namespace inca {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

uint64_t parse_uint(const std::string& text, uint64_t max, const std::string& what) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size() || v > max)
    throw SyntaxError("bad " + what + " '" + text + "'");
  return v;
}

int64_t parse_int(const std::string& text, const std::string& what) {
  int64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size())
    throw SyntaxError("bad " + what + " '" + text + "'");
  return v;
}

std::pair<std::string, std::string> split_kv(const std::string& tok) {
  auto eq = tok.find('=');
  if (eq == std::string::npos || eq == 0)
    throw SyntaxError("expected key=value, got '" + tok + "'");
  return {tok.substr(0, eq), tok.substr(eq + 1)};
}

AddrMatch parse_addr_match(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos) return AddrMatch::exact(Ipv6Addr::parse(text));
  auto len = parse_uint(text.substr(slash + 1), 128, "prefix length");
  return AddrMatch::prefix(Ipv6Addr::parse(text.substr(0, slash)),
                           static_cast<uint8_t>(len));
}

std::vector<Ipv6Addr> parse_sid_list(const std::string& text) {
  std::vector<Ipv6Addr> sids;
  size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    std::string part = text.substr(pos, comma == std::string::npos
                                            ? std::string::npos
                                            : comma - pos);
    if (part.empty()) throw SyntaxError("empty SID in chain list");
    try {
      sids.push_back(Ipv6Addr::parse(part));
    } catch (const std::invalid_argument& e) {
      throw SyntaxError(e.what());
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return sids;
}

void validate_chain(const std::vector<Ipv6Addr>& sids) {
  if (sids.empty()) throw SyntaxError("chain needs at least one SID");
  for (size_t i = 1; i < sids.size(); ++i)
    if (sids[i] == sids[i - 1])
      throw SyntaxError("chain repeats consecutive SID " + sids[i].str());
}

// Shared field grammar for `rule ...` lines and ADD-RULE commands.
RuleSpec parse_rule_fields(const std::vector<std::string>& kvs) {
  RuleSpec spec;
  bool have_id = false, have_prio = false;
  for (const auto& tok : kvs) {
    auto [key, val] = split_kv(tok);
    try {
      if (key == "id") {
        spec.rule_id = static_cast<uint32_t>(parse_uint(val, 0xFFFFFFFF, "rule id"));
        if (spec.rule_id == 0) throw SyntaxError("rule id must be positive");
        have_id = true;
      } else if (key == "prio") {
        spec.priority = static_cast<int32_t>(parse_int(val, "priority"));
        have_prio = true;
      } else if (key == "teid") {
        spec.match.teid = ValueMatch::exact(
            static_cast<uint32_t>(parse_uint(val, 0xFFFFFFFF, "teid")));
      } else if (key == "qfi") {
        spec.match.qfi = ValueMatch::exact(
            static_cast<uint32_t>(parse_uint(val, 63, "qfi")));
      } else if (key == "slice") {
        spec.match.slice = ValueMatch::exact(
            static_cast<uint32_t>(parse_uint(val, 0xFFFF, "slice")));
      } else if (key == "src") {
        spec.match.src = parse_addr_match(val);
      } else if (key == "dst") {
        spec.match.dst = parse_addr_match(val);
      } else if (key == "proto") {
        spec.match.proto = ValueMatch::exact(
            static_cast<uint32_t>(parse_uint(val, 0xFF, "proto")));
      } else if (key == "sport") {
        spec.match.sport = ValueMatch::exact(
            static_cast<uint32_t>(parse_uint(val, 0xFFFF, "sport")));
      } else if (key == "dport") {
        spec.match.dport = ValueMatch::exact(
            static_cast<uint32_t>(parse_uint(val, 0xFFFF, "dport")));
      } else if (key == "chain") {
        spec.chain_name = val;
      } else {
        throw SyntaxError("unknown rule field '" + key + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw SyntaxError(e.what());
    }
  }
  if (!have_id) throw SyntaxError("rule is missing id");
  if (!have_prio) throw SyntaxError("rule is missing prio");
  if (spec.chain_name.empty()) throw SyntaxError("rule is missing chain");
  return spec;
}

CmdAddChain parse_chain_decl(const std::vector<std::string>& toks, size_t at) {
  // <name> = <sid1>,<sid2>[,...] ; tolerate the '=' glued to either side.
  std::string rest;
  for (size_t i = at; i < toks.size(); ++i) rest += (i > at ? " " : "") + toks[i];
  auto eq = rest.find('=');
  if (eq == std::string::npos) throw SyntaxError("chain declaration needs '='");
  auto trim = [](std::string s) {
    size_t b = s.find_first_not_of(' ');
    size_t e = s.find_last_not_of(' ');
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  CmdAddChain cmd;
  cmd.name = trim(rest.substr(0, eq));
  if (cmd.name.empty()) throw SyntaxError("chain declaration needs a name");
  std::string sids = trim(rest.substr(eq + 1));
  // SID lists may contain spaces after commas; strip them.
  std::string compact;
  for (char c : sids)
    if (c != ' ') compact.push_back(c);
  cmd.sids = parse_sid_list(compact);
  validate_chain(cmd.sids);
  return cmd;
}

CmdSliceMap parse_slice_map(const std::vector<std::string>& kvs) {
  std::optional<uint32_t> teid;
  std::optional<uint16_t> slice;
  for (const auto& tok : kvs) {
    auto [key, val] = split_kv(tok);
    if (key == "teid")
      teid = static_cast<uint32_t>(parse_uint(val, 0xFFFFFFFF, "teid"));
    else if (key == "slice")
      slice = static_cast<uint16_t>(parse_uint(val, 0xFFFF, "slice"));
    else
      throw SyntaxError("unknown slice-map field '" + key + "'");
  }
  if (!teid || !slice) throw SyntaxError("slice-map needs teid= and slice=");
  return CmdSliceMap{*teid, *slice};
}

}  // namespace

ControlCommand parse_command(const std::string& line) {
  auto toks = tokenize(line);
  if (toks.empty()) throw SyntaxError("empty command");
  const std::string& verb = toks[0];
  std::vector<std::string> args(toks.begin() + 1, toks.end());

  if (verb == "ADD-RULE") return CmdAddRule{parse_rule_fields(args)};
  if (verb == "DEL-RULE") {
    if (args.size() != 1) throw SyntaxError("DEL-RULE takes exactly id=<n>");
    auto [key, val] = split_kv(args[0]);
    if (key != "id") throw SyntaxError("DEL-RULE takes id=<n>");
    return CmdDelRule{static_cast<uint32_t>(parse_uint(val, 0xFFFFFFFF, "rule id"))};
  }
  if (verb == "ADD-CHAIN") return parse_chain_decl(toks, 1);
  if (verb == "SLICE-MAP") return parse_slice_map(args);
  if (verb == "LIST-RULES") return CmdListRules{};
  if (verb == "STATS") return CmdStats{};
  if (verb == "PING") return CmdPing{};
  if (verb == "STEP") {
    if (args.size() != 1) throw SyntaxError("STEP takes a count");
    return CmdStep{static_cast<uint32_t>(parse_uint(args[0], 0xFFFFFFFF, "count"))};
  }
  throw SyntaxError("unknown command '" + verb + "'");
}

namespace {

std::string rule_fields_text(const RuleSpec& spec) {
  std::ostringstream os;
  os << "id=" << spec.rule_id << " prio=" << spec.priority;
  const RuleMatch& m = spec.match;
  if (!m.teid.any) os << " teid=" << m.teid.value;
  if (!m.qfi.any) os << " qfi=" << m.qfi.value;
  if (!m.slice.any) os << " slice=" << m.slice.value;
  auto addr = [&](const char* name, const AddrMatch& a) {
    if (a.any) return;
    os << " " << name << "=" << a.value.str();
    if (a.prefix_len != 128) os << "/" << static_cast<int>(a.prefix_len);
  };
  addr("src", m.src);
  addr("dst", m.dst);
  if (!m.proto.any) os << " proto=" << m.proto.value;
  if (!m.sport.any) os << " sport=" << m.sport.value;
  if (!m.dport.any) os << " dport=" << m.dport.value;
  os << " chain=" << spec.chain_name;
  return os.str();
}

}  // namespace

std::string serialize_command(const ControlCommand& cmd) {
  return std::visit(
      [](const auto& c) -> std::string {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, CmdAddRule>) {
          return "ADD-RULE " + rule_fields_text(c.spec);
        } else if constexpr (std::is_same_v<T, CmdDelRule>) {
          return "DEL-RULE id=" + std::to_string(c.rule_id);
        } else if constexpr (std::is_same_v<T, CmdAddChain>) {
          std::string sids;
          for (size_t i = 0; i < c.sids.size(); ++i)
            sids += (i ? "," : "") + c.sids[i].str();
          return "ADD-CHAIN " + c.name + " = " + sids;
        } else if constexpr (std::is_same_v<T, CmdSliceMap>) {
          return "SLICE-MAP teid=" + std::to_string(c.teid) +
                 " slice=" + std::to_string(c.slice);
        } else if constexpr (std::is_same_v<T, CmdListRules>) {
          return "LIST-RULES";
        } else if constexpr (std::is_same_v<T, CmdStats>) {
          return "STATS";
        } else if constexpr (std::is_same_v<T, CmdPing>) {
          return "PING";
        } else {
          return "STEP " + std::to_string(c.count);
        }
      },
      cmd);
}

std::string serialize_rule(const Rule& rule) {
  RuleSpec spec{rule.rule_id, rule.priority, rule.match, rule.action.chain_name};
  return "rule " + std::to_string(rule.rule_id) +
         rule_fields_text(spec).substr(std::string("id=" + std::to_string(rule.rule_id)).size()) ;
}

ControlResponse apply(const ControlCommand& cmd, PipelineState& state) {
  return std::visit(
      [&](const auto& c) -> ControlResponse {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, CmdAddRule>) {
          auto it = state.chains.find(c.spec.chain_name);
          if (it == state.chains.end())
            return ControlResponse::err("UnknownChain " + c.spec.chain_name);
          if (state.table.has_rule(c.spec.rule_id))
            return ControlResponse::err("DuplicateRuleId " +
                                        std::to_string(c.spec.rule_id));
          Rule rule{c.spec.rule_id, c.spec.priority, c.spec.match, it->second};
          state.table.add_rule(rule);
          return {};
        } else if constexpr (std::is_same_v<T, CmdDelRule>) {
          if (!state.table.has_rule(c.rule_id))
            return ControlResponse::err("UnknownRuleId " + std::to_string(c.rule_id));
          state.table.remove_rule(c.rule_id);
          return {};
        } else if constexpr (std::is_same_v<T, CmdAddChain>) {
          state.chains[c.name] = ChainPolicy{c.name, c.sids};
          return {};
        } else if constexpr (std::is_same_v<T, CmdSliceMap>) {
          state.table.teid_to_slice()[c.teid] = c.slice;
          return {};
        } else if constexpr (std::is_same_v<T, CmdListRules>) {
          ControlResponse resp;
          for (const Rule& r : state.table.rules())
            resp.body.push_back(serialize_rule(r));
          return resp;
        } else if constexpr (std::is_same_v<T, CmdStats>) {
          ControlResponse resp;
          for (const auto& [name, value] : state.counters.values)
            resp.body.push_back(name + "=" + std::to_string(value));
          return resp;
        } else if constexpr (std::is_same_v<T, CmdPing>) {
          return {};
        } else {
          return ControlResponse::err("STEP is only valid on a live run");
        }
      },
      cmd);
}

RulesConfig load_rules_file(const std::string& text) {
  RulesConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    try {
      if (toks[0] == "rule") {
        if (toks.size() < 2) throw SyntaxError("rule needs an id");
        std::vector<std::string> kvs(toks.begin() + 2, toks.end());
        kvs.push_back("id=" + toks[1]);
        cfg.rules.push_back(parse_rule_fields(kvs));
      } else if (toks[0] == "chain") {
        CmdAddChain c = parse_chain_decl(toks, 1);
        cfg.chains[c.name] = ChainPolicy{c.name, c.sids};
      } else if (toks[0] == "slice-map") {
        CmdSliceMap c =
            parse_slice_map(std::vector<std::string>(toks.begin() + 1, toks.end()));
        cfg.slice_maps[c.teid] = c.slice;
      } else {
        throw SyntaxError("unknown directive '" + toks[0] + "'");
      }
    } catch (const SyntaxError& e) {
      throw SyntaxError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  // Chains may be declared anywhere in the file; resolve references now.
  for (const RuleSpec& spec : cfg.rules)
    if (!cfg.chains.contains(spec.chain_name)) throw UnknownChain(spec.chain_name);
  return cfg;
}

void install_rules(const RulesConfig& cfg, PipelineState& state) {
  state.table = RuleTable{};
  state.chains = cfg.chains;
  for (const RuleSpec& spec : cfg.rules) {
    const ChainPolicy& policy = cfg.chains.at(spec.chain_name);
    state.table.add_rule(Rule{spec.rule_id, spec.priority, spec.match, policy});
  }
  state.table.teid_to_slice() = cfg.slice_maps;
}

}  // namespace inca

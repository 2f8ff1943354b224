#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "inca/ctrl_server.hpp"
#include "inca/netsim.hpp"

namespace fs = std::filesystem;
using namespace inca;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void print_frame(std::ostream& os, size_t index, const CaptureRecord& rec) {
  char ts[32];
  std::snprintf(ts, sizeof(ts), "%u.%06u", rec.ts_sec, rec.ts_usec);
  os << "frame " << index << " t=" << ts << " len=" << rec.frame.size() << "\n";
  ParsedPacket pkt;
  try {
    pkt = parse_frame(rec.frame);
  } catch (const std::exception& e) {
    os << "  malformed: " << e.what() << "\n";
    return;
  }
  os << "  eth " << pkt.eth.src_mac.str() << " > " << pkt.eth.dst_mac.str();
  char et[8];
  std::snprintf(et, sizeof(et), "0x%04x", pkt.eth.ethertype);
  os << " type=" << et << "\n";
  auto show_ipv6 = [&](const char* tag, const Ipv6Header& h) {
    os << "  " << tag << " " << h.src.str() << " > " << h.dst.str()
       << " nh=" << static_cast<int>(h.next_header)
       << " hlim=" << static_cast<int>(h.hop_limit)
       << " plen=" << h.payload_length << "\n";
  };
  if (pkt.outer_ipv6) show_ipv6("ipv6", *pkt.outer_ipv6);
  if (pkt.srh) {
    os << "  srh sl=" << static_cast<int>(pkt.srh->segments_left) << " segs=[";
    for (size_t i = 0; i < pkt.srh->segment_list.size(); ++i)
      os << (i ? "," : "") << pkt.srh->segment_list[i].str();
    os << "]\n";
  }
  if (pkt.tunnel_ipv6) show_ipv6("ipv6", *pkt.tunnel_ipv6);
  if (pkt.transport)
    os << "  udp " << pkt.transport->src_port << " > " << pkt.transport->dst_port
       << " len=" << pkt.transport->length << "\n";
  if (pkt.gtpu) {
    char mt[8];
    std::snprintf(mt, sizeof(mt), "0x%02x", pkt.gtpu->message_type);
    os << "  gtpu teid=" << pkt.gtpu->teid << " msg=" << mt
       << " len=" << pkt.gtpu->length << "\n";
  }
  if (pkt.pdu_container)
    os << "  pdu-container qfi=" << static_cast<int>(pkt.pdu_container->qfi)
       << " pdu-type=" << static_cast<int>(pkt.pdu_container->pdu_type) << "\n";
  if (pkt.inner) {
    const InnerPacket& in = *pkt.inner;
    os << "  inner-ipv6 " << in.ipv6.src.str() << " > " << in.ipv6.dst.str()
       << " proto=" << static_cast<int>(in.l4_proto) << "\n";
    if (const auto* u = std::get_if<UdpHeader>(&in.l4))
      os << "  inner-udp " << u->src_port << " > " << u->dst_port << "\n";
    else if (const auto* t = std::get_if<TcpSummary>(&in.l4))
      os << "  inner-tcp " << t->src_port << " > " << t->dst_port << "\n";
    else if (const auto* ic = std::get_if<Icmpv6Summary>(&in.l4))
      os << "  inner-icmpv6 type=" << static_cast<int>(ic->type)
         << " code=" << static_cast<int>(ic->code) << "\n";
  }
}

int cmd_decode(const std::string& path) {
  auto records = read_pcap_file(path);
  for (size_t i = 0; i < records.size(); ++i) print_frame(std::cout, i, records[i]);
  return 0;
}

void write_outputs(const ScenarioReport& report, const std::string& capture_dir,
                   const std::string& report_path) {
  if (!capture_dir.empty()) {
    fs::create_directories(capture_dir);
    for (const auto& [name, records] : report.captures)
      write_pcap_file((fs::path(capture_dir) / (name + ".pcap")).string(), records);
  }
  std::string text = report_to_json(report);
  if (report_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(report_path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + report_path + " for writing");
    f << text;
  }
}

int cmd_run(const std::string& topo_path, const std::string& rules_path,
            const std::string& scenario_path, const std::string& capture_dir,
            const std::string& ctl_addr, const std::string& report_path) {
  Topology topo = load_topology(slurp(topo_path));
  RulesConfig rules = load_rules_file(slurp(rules_path));
  std::vector<Injection> injections = load_scenario(slurp(scenario_path));

  Simulator sim(topo, rules);
  if (ctl_addr.empty()) {
    for (const auto& inj : injections) sim.inject(inj);
    sim.run_until_idle();
  } else {
    // Step-gated run: injections are released only by STEP commands, so
    // rules may change between steps.
    size_t next = 0;
    CtlServer server(ctl_addr);
    server.serve([&](const std::string& line)
                     -> std::pair<ControlResponse, bool> {
      ControlCommand cmd;
      try {
        cmd = parse_command(line);
      } catch (const SyntaxError& e) {
        return {ControlResponse::err(std::string("SyntaxError ") + e.what()), false};
      }
      if (const auto* step = std::get_if<CmdStep>(&cmd)) {
        uint32_t released = 0;
        for (; released < step->count && next < injections.size(); ++released)
          sim.inject(injections[next++]);
        sim.run_until_idle();
        ControlResponse resp;
        resp.body.push_back("stepped " + std::to_string(released) + " of " +
                            std::to_string(step->count));
        return {resp, next >= injections.size()};
      }
      return {inca::apply(cmd, sim.inca_state()), false};
    });
  }
  write_outputs(sim.report(), capture_dir, report_path);
  return 0;
}

int cmd_ctl(const std::string& addr, const std::vector<std::string>& words) {
  std::string line;
  for (size_t i = 0; i < words.size(); ++i) line += (i ? " " : "") + words[i];
  std::pair<bool, std::vector<std::string>> resp;
  try {
    resp = ctl_request(addr, line);
  } catch (const std::exception& e) {
    std::cerr << "control channel error: " << e.what() << "\n";
    return 2;
  }
  for (const auto& l : resp.second) std::cout << l << "\n";
  return resp.first ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"INCA dataplane: GTP-U traffic identification and SRv6 chaining"};
  app.require_subcommand(1);

  std::string pcap_path;
  auto* decode = app.add_subcommand("decode", "print the layer stack of each frame in a pcap");
  decode->add_option("pcap", pcap_path, "capture file")->required();

  std::string topo_path, rules_path, scenario_path, capture_dir, ctl_addr, report_path;
  auto* run = app.add_subcommand("run", "run a simulated scenario");
  run->add_option("--topology", topo_path, "topology JSON")->required();
  run->add_option("--rules", rules_path, "rules file")->required();
  run->add_option("--scenario", scenario_path, "scenario JSON")->required();
  run->add_option("--capture-dir", capture_dir, "directory for per-link pcaps");
  run->add_option("--ctl", ctl_addr, "serve the control channel; steps wait on STEP");
  run->add_option("--report", report_path, "report JSON path (default stdout)");

  std::string ctl_target;
  std::vector<std::string> ctl_words;
  auto* ctl = app.add_subcommand("ctl", "send one control command to a live run");
  ctl->add_option("--ctl", ctl_target, "control channel address")->required();
  ctl->add_option("command", ctl_words, "command words")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*decode) return cmd_decode(pcap_path);
    if (*run)
      return cmd_run(topo_path, rules_path, scenario_path, capture_dir, ctl_addr,
                     report_path);
    if (*ctl) return cmd_ctl(ctl_target, ctl_words);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

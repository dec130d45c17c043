#include "rapidlearn/controller.hpp"

#include <algorithm>

#include "rapidlearn/error.hpp"

namespace rapidlearn {

std::string_view block_scope_name(BlockScope scope) {
  return scope == BlockScope::AllSwitches ? "all_switches" : "reporting_switches";
}

std::optional<BlockScope> parse_block_scope(std::string_view s) {
  if (s == "all_switches") return BlockScope::AllSwitches;
  if (s == "reporting_switches") return BlockScope::ReportingSwitches;
  return std::nullopt;
}

std::uint32_t default_quorum(std::size_t monitors) {
  return static_cast<std::uint32_t>(std::max<std::size_t>(1, (monitors + 1) / 2));
}

std::size_t VoteLedger::record(const FlowKey& flow, NodeId monitor, NodeId reporting_switch, double now) {
  auto& voters = votes_[flow];
  auto [it, fresh] = voters.try_emplace(monitor, Vote{now, now, reporting_switch});
  if (!fresh) {
    it->second.last_report = now;
    it->second.reporting_switch = reporting_switch;
  }
  return voters.size();
}

std::size_t VoteLedger::expire(double now, double window) {
  std::size_t removed = 0;
  double cutoff = now - window;
  for (auto it = votes_.begin(); it != votes_.end();) {
    auto& voters = it->second;
    for (auto v = voters.begin(); v != voters.end();) {
      if (v->second.last_report < cutoff) {
        v = voters.erase(v);
        ++removed;
      } else {
        ++v;
      }
    }
    it = voters.empty() ? votes_.erase(it) : std::next(it);
  }
  return removed;
}

std::size_t VoteLedger::voter_count(const FlowKey& flow) const {
  auto it = votes_.find(flow);
  return it == votes_.end() ? 0 : it->second.size();
}

const std::map<NodeId, VoteLedger::Vote>* VoteLedger::voters(const FlowKey& flow) const {
  auto it = votes_.find(flow);
  return it == votes_.end() ? nullptr : &it->second;
}

void VoteLedger::mark_decided(const FlowKey& flow) {
  decided_.insert(flow);
  votes_.erase(flow);
}

Controller::Controller(NodeId id, std::vector<NodeId> switches, std::vector<NodeId> monitors, ControllerConfig config)
    : id_(id), switches_(std::move(switches)), monitors_(std::move(monitors)), config_(config) {
  std::sort(switches_.begin(), switches_.end());
  std::sort(monitors_.begin(), monitors_.end());
}

std::vector<Outgoing> Controller::handle_of_packet(const OfPacket& pkt) const {
  if (!std::binary_search(switches_.begin(), switches_.end(), pkt.switch_id))
    throw Error(ErrorCode::UnknownSwitch, "switch " + std::to_string(pkt.switch_id.value) + " is not in the domain of " +
                                              std::to_string(id_.value));
  return {
      Outgoing{pkt.switch_id, FlowMod{pkt.src, pkt.in_port}},
      Outgoing{pkt.switch_id, Broadcast{pkt.in_port, pkt.src, pkt.dst, pkt.buffer_id}},
  };
}

std::optional<BlockDecision> Controller::handle_ddos_report(const DdosYes& report, double now) {
  if (!std::binary_search(monitors_.begin(), monitors_.end(), report.monitor))
    throw Error(ErrorCode::ForeignMonitor, "monitor " + std::to_string(report.monitor.value) +
                                               " does not report to controller " + std::to_string(id_.value));
  expire_votes(now);
  FlowKey flow{report.src, report.dst};
  if (ledger_.decided(flow)) return std::nullopt;
  std::size_t count = ledger_.record(flow, report.monitor, report.switch_id, now);
  if (count < config_.quorum) return std::nullopt;

  BlockDecision decision;
  decision.time = now;
  decision.flow = flow;
  std::set<NodeId> reporting;
  for (const auto& [monitor, vote] : *ledger_.voters(flow)) {
    decision.voters.push_back(monitor);
    reporting.insert(vote.reporting_switch);
  }
  if (config_.block_scope == BlockScope::AllSwitches) decision.targets = switches_;
  else decision.targets.assign(reporting.begin(), reporting.end());
  ledger_.mark_decided(flow);
  decisions_.push_back(decision);
  return decision;
}

std::size_t Controller::expire_votes(double now) { return ledger_.expire(now, config_.vote_window); }

}  // namespace rapidlearn

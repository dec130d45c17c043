#pragma once

// Per-domain controller: reverse-path flow installation, broadcast of
// unmatched packets, and quorum voting over monitor reports.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "rapidlearn/net_model.hpp"

namespace rapidlearn {

enum class BlockScope : std::uint8_t { ReportingSwitches, AllSwitches };

std::string_view block_scope_name(BlockScope scope);
std::optional<BlockScope> parse_block_scope(std::string_view s);

struct ControllerConfig {
  std::uint32_t quorum = 1;
  double vote_window = 10.0;
  BlockScope block_scope = BlockScope::AllSwitches;
};

// Majority of the domain's monitors.
std::uint32_t default_quorum(std::size_t monitors);

struct Outgoing {
  NodeId to;
  Message message;
};

struct BlockDecision {
  double time = 0.0;
  FlowKey flow;
  std::vector<NodeId> targets;
  std::vector<NodeId> voters;
};

class VoteLedger {
 public:
  struct Vote {
    double first_report = 0.0;
    double last_report = 0.0;
    NodeId reporting_switch;
  };

  // Records (or refreshes) a monitor's vote; returns the number of distinct
  // voters now on record for the flow.
  std::size_t record(const FlowKey& flow, NodeId monitor, NodeId reporting_switch, double now);
  std::size_t expire(double now, double window);
  std::size_t voter_count(const FlowKey& flow) const;
  const std::map<NodeId, Vote>* voters(const FlowKey& flow) const;

  bool decided(const FlowKey& flow) const { return decided_.count(flow) != 0; }
  void mark_decided(const FlowKey& flow);
  const std::set<FlowKey>& decided_flows() const { return decided_; }

 private:
  std::map<FlowKey, std::map<NodeId, Vote>> votes_;
  std::set<FlowKey> decided_;
};

class Controller {
 public:
  Controller(NodeId id, std::vector<NodeId> switches, std::vector<NodeId> monitors, ControllerConfig config);

  NodeId id() const { return id_; }
  const ControllerConfig& config() const { return config_; }
  const VoteLedger& ledger() const { return ledger_; }
  const std::vector<BlockDecision>& decisions() const { return decisions_; }

  // FlowMod (learn where the source lives) then Broadcast, both to the
  // punting switch.
  std::vector<Outgoing> handle_of_packet(const OfPacket& pkt) const;

  // Tallies a report. On reaching quorum for an undecided flow, returns the
  // decision; the caller sends Block{src,dst} to every target.
  std::optional<BlockDecision> handle_ddos_report(const DdosYes& report, double now);

  std::size_t expire_votes(double now);

 private:
  NodeId id_;
  std::vector<NodeId> switches_;
  std::vector<NodeId> monitors_;
  ControllerConfig config_;
  VoteLedger ledger_;
  std::vector<BlockDecision> decisions_;
};

}  // namespace rapidlearn

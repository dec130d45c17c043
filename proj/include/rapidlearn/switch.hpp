#pragma once

// MAC-learning SDN switch. Pure state transitions; the simulation layer
// turns the returned actions into messages.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rapidlearn/net_model.hpp"

namespace rapidlearn {

struct FlowEntry {
  EndpointAddr dst;
  PortId out_port;
  std::uint32_t priority = 1;
  bool operator==(const FlowEntry&) const = default;
};

// Priority-ordered destination -> port table. New entries always get
// max_priority + 1, so priorities are exactly 1..max_priority.
class FlowTable {
 public:
  // Returns false when (dst, out_port) is already the winning entry for dst.
  bool install(EndpointAddr dst, PortId out_port);
  std::optional<FlowEntry> match(EndpointAddr dst) const;

  // Descending priority.
  const std::vector<FlowEntry>& entries() const { return entries_; }
  std::uint32_t max_priority() const { return entries_.empty() ? 0 : entries_.front().priority; }
  std::size_t size() const { return entries_.size(); }

  // "priority,dst,out_port" rows, highest priority first, with header.
  std::string to_csv() const;

  bool operator==(const FlowTable&) const = default;

 private:
  std::vector<FlowEntry> entries_;
};

enum class DropReason : std::uint8_t { Blocked, Hairpin, RateLimited };

std::string_view drop_reason_name(DropReason reason);

struct Forward {
  PortId out_port;
  bool operator==(const Forward&) const = default;
};
struct PuntToController {
  bool operator==(const PuntToController&) const = default;
};
struct Flood {
  PortId except;
  bool operator==(const Flood&) const = default;
};
struct Drop {
  DropReason reason = DropReason::Blocked;
  bool operator==(const Drop&) const = default;
};

using SwitchAction = std::variant<Forward, PuntToController, Flood, Drop>;

struct SwitchResult {
  SwitchAction action;
  std::optional<MonPacket> mirror;  // always set when a monitor is attached
};

// What a switch knows about one of its ports: the address of the host on
// the other end, when the port is a host-facing access port.
struct PortInfo {
  std::optional<EndpointAddr> host;
};

class SwitchState {
 public:
  SwitchState(NodeId id, NodeId controller, std::optional<NodeId> monitor, std::vector<PortInfo> ports);

  NodeId id() const { return id_; }
  std::size_t port_count() const { return ports_.size(); }

  SwitchResult handle_packet(const PacketView& packet, PortId in_port);
  void install_flow(EndpointAddr dst, PortId out_port);
  std::vector<PortId> broadcast_ports(PortId in_port) const;
  // One copy per port except the ingress and blocked ports; nothing for a
  // blocked flow.
  template <typename P>
  std::vector<std::pair<PortId, P>> handle_broadcast(PortId in_port, const P& packet) const {
    std::vector<std::pair<PortId, P>> out;
    auto ports = broadcast_ports(in_port);
    if (is_blocked(FlowKey{packet.src, packet.dst})) return out;
    for (PortId p : ports) out.emplace_back(p, packet);
    return out;
  }
  void apply_block(EndpointAddr src, EndpointAddr dst);

  bool is_blocked(const FlowKey& flow) const { return blocked_.count(flow) != 0; }

  const FlowTable& flow_table() const { return table_; }
  std::uint32_t max_priority() const { return table_.max_priority(); }
  const std::set<FlowKey>& blocked() const { return blocked_; }
  const std::set<PortId>& blocked_ports() const { return blocked_ports_; }
  const std::vector<PortInfo>& ports() const { return ports_; }

 private:
  void check_port(PortId port) const;

  NodeId id_;
  NodeId controller_;
  std::optional<NodeId> monitor_;
  std::vector<PortInfo> ports_;
  FlowTable table_;
  std::set<FlowKey> blocked_;
  std::set<PortId> blocked_ports_;
  std::map<EndpointAddr, PortId> learned_ingress_;
};

}  // namespace rapidlearn

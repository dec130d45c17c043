#pragma once

// Vocabulary shared by every node type: identifiers, packets, topology and
// the closed set of messages nodes exchange.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rapidlearn/error.hpp"

namespace rapidlearn {

enum class NodeKind : std::uint8_t { Host, Switch, Monitor, Controller };

std::string_view node_kind_name(NodeKind kind);

struct NodeId {
  std::uint32_t value = 0;
  auto operator<=>(const NodeId&) const = default;
};

// One address space for hosts; stands in for both MAC and IP addresses.
struct EndpointAddr {
  std::uint32_t value = 0;
  auto operator<=>(const EndpointAddr&) const = default;
};

struct PortId {
  std::uint16_t value = 0;
  auto operator<=>(const PortId&) const = default;
};

// Directed (src, dst) pair; one monitored session.
struct FlowKey {
  EndpointAddr src;
  EndpointAddr dst;
  auto operator<=>(const FlowKey&) const = default;
};

enum class TrafficLabel : std::uint8_t { Legit, Attack };

std::string_view label_name(TrafficLabel label);
std::optional<TrafficLabel> parse_label(std::string_view s);

// What switch, monitor and controller logic is allowed to see of a packet.
// Deliberately has no ground-truth label.
struct PacketView {
  EndpointAddr src;
  EndpointAddr dst;
  std::uint32_t size_bytes = 1;
};

struct Packet {
  std::uint64_t id = 0;
  EndpointAddr src;
  EndpointAddr dst;
  std::uint32_t size_bytes = 1;
  double created_at = 0.0;
  std::optional<TrafficLabel> label;  // simulator metadata, write-once

  PacketView view() const { return {src, dst, size_bytes}; }
  FlowKey flow() const { return {src, dst}; }
  bool operator==(const Packet&) const = default;
};

struct Node {
  NodeId id;
  NodeKind kind = NodeKind::Host;
  std::string name;
  std::optional<EndpointAddr> addr;  // hosts only
};

struct Link {
  NodeId a;
  NodeId b;
  PortId port_at_a;
  PortId port_at_b;
  double latency = 0.0;
};

struct TopologySpec {
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::vector<std::pair<NodeId, NodeId>> ofconn;   // switch -> controller
  std::vector<std::pair<NodeId, NodeId>> monconn;  // switch -> monitor
  std::vector<std::pair<NodeId, NodeId>> peer_monitors;  // unordered pairs
  double controller_latency = 0.002;
  double monitor_latency = 0.0001;
  double peer_latency = 0.001;
};

class Topology {
 public:
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const Node& node(NodeId id) const;
  bool contains(NodeId id) const;
  std::optional<NodeId> find(std::string_view name) const;
  std::optional<NodeId> host_by_addr(EndpointAddr addr) const;

  PortId resolve_port(NodeId node, NodeId neighbor) const;
  std::size_t port_count(NodeId node) const;
  // Neighbor and latency of the link at (node, port).
  std::optional<std::pair<NodeId, double>> neighbor_at(NodeId node, PortId port) const;

  NodeId controller_of(NodeId sw) const;
  std::optional<NodeId> monitor_of(NodeId sw) const;
  std::optional<NodeId> switch_of_monitor(NodeId monitor) const;
  std::vector<NodeId> switches_of(NodeId controller) const;
  std::vector<NodeId> monitors_of(NodeId controller) const;
  const std::vector<NodeId>& peers_of(NodeId monitor) const;
  std::optional<NodeId> controller_of_monitor(NodeId monitor) const;

  // One-way latency of the channel between two nodes, if any exists.
  std::optional<double> channel_latency(NodeId from, NodeId to) const;

  std::vector<NodeId> nodes_of_kind(NodeKind kind) const;

 private:
  friend Topology build_topology(const TopologySpec& spec);

  struct PortSlot {
    NodeId neighbor;
    double latency = 0.0;
  };

  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::map<NodeId, std::size_t> index_;
  std::map<NodeId, std::vector<PortSlot>> ports_;
  std::map<NodeId, NodeId> ofconn_;
  std::map<NodeId, NodeId> monconn_;
  std::map<NodeId, NodeId> monitor_switch_;
  std::map<NodeId, std::vector<NodeId>> peers_;
  double controller_latency_ = 0.0;
  double monitor_latency_ = 0.0;
  double peer_latency_ = 0.0;
};

Topology build_topology(const TopologySpec& spec);

// ---------------------------------------------------------------------------
// Messages. Each variant corresponds to one tuple of the original rule
// program; see docs/rule-traceability.md.

struct PacketMsg {
  Packet packet;
  NodeId from;
  bool operator==(const PacketMsg&) const = default;
};

struct OfPacket {
  NodeId switch_id;
  PortId in_port;
  EndpointAddr src;
  EndpointAddr dst;
  std::uint64_t buffer_id = 0;
  bool operator==(const OfPacket&) const = default;
};

struct FlowMod {
  EndpointAddr dst_addr;
  PortId out_port;
  bool operator==(const FlowMod&) const = default;
};

struct Broadcast {
  PortId in_port;
  EndpointAddr src;
  EndpointAddr dst;
  std::uint64_t buffer_id = 0;
  bool operator==(const Broadcast&) const = default;
};

struct MonPacket {
  NodeId controller;
  NodeId switch_id;
  EndpointAddr src;
  EndpointAddr dst;
  std::uint32_t size_bytes = 1;
  bool operator==(const MonPacket&) const = default;
};

struct BeliefMsg {
  FlowKey flow;
  double score = 0.0;
  std::uint64_t window_index = 0;
  NodeId origin_monitor;
  bool operator==(const BeliefMsg&) const = default;
};

struct DdosYes {
  NodeId switch_id;
  EndpointAddr src;
  EndpointAddr dst;
  NodeId monitor;
  bool operator==(const DdosYes&) const = default;
};

struct Block {
  EndpointAddr src;
  EndpointAddr dst;
  bool operator==(const Block&) const = default;
};

using Message = std::variant<PacketMsg, OfPacket, FlowMod, Broadcast, MonPacket, BeliefMsg, DdosYes, Block>;

std::string_view message_tag(const Message& msg);
bool is_control_message(const Message& msg);

// "Tag key=value ..." single-line form used by the event trace.
std::string format_message(const Message& msg);
Message parse_message(std::string_view line);

}  // namespace rapidlearn

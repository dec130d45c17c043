#include "rapidlearn/net_model.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "rapidlearn/error.hpp"
#include "rapidlearn/text.hpp"

namespace rapidlearn {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicatePort: return "DuplicatePort";
    case ErrorCode::InvalidPort: return "InvalidPort";
    case ErrorCode::MissingController: return "MissingController";
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::DisconnectedHost: return "DisconnectedHost";
    case ErrorCode::InvalidTopology: return "InvalidTopology";
    case ErrorCode::NoSuchLink: return "NoSuchLink";
    case ErrorCode::MalformedMessage: return "MalformedMessage";
    case ErrorCode::NegativeDelay: return "NegativeDelay";
    case ErrorCode::NoRoute: return "NoRoute";
    case ErrorCode::SimulationError: return "SimulationError";
    case ErrorCode::UnknownSwitch: return "UnknownSwitch";
    case ErrorCode::ForeignMonitor: return "ForeignMonitor";
    case ErrorCode::ModelMissing: return "ModelMissing";
    case ErrorCode::UnknownPeer: return "UnknownPeer";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateDataset: return "DegenerateDataset";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::MalformedModelFile: return "MalformedModelFile";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::UnsortedTrace: return "UnsortedTrace";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidSplit: return "InvalidSplit";
    case ErrorCode::Usage: return "Usage";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicatePort:
    case ErrorCode::InvalidPort:
    case ErrorCode::MissingController:
    case ErrorCode::DuplicateNode:
    case ErrorCode::UnknownNode:
    case ErrorCode::DisconnectedHost:
    case ErrorCode::InvalidTopology:
    case ErrorCode::InvalidSpec:
    case ErrorCode::MalformedRow:
    case ErrorCode::UnsortedTrace:
    case ErrorCode::UnknownLabel:
    case ErrorCode::MissingLabel:
    case ErrorCode::MalformedModelFile:
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidSplit:
    case ErrorCode::Usage:
    case ErrorCode::Io:
      return true;
    default:
      return false;
  }
}

std::string_view node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::Host: return "host";
    case NodeKind::Switch: return "switch";
    case NodeKind::Monitor: return "monitor";
    case NodeKind::Controller: return "controller";
  }
  return "?";
}

std::string_view label_name(TrafficLabel label) {
  return label == TrafficLabel::Attack ? "attack" : "legit";
}

std::optional<TrafficLabel> parse_label(std::string_view s) {
  if (s == "attack") return TrafficLabel::Attack;
  if (s == "legit") return TrafficLabel::Legit;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Topology

const Node& Topology::node(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id.value));
  return nodes_[it->second];
}

bool Topology::contains(NodeId id) const { return index_.count(id) != 0; }

std::optional<NodeId> Topology::find(std::string_view name) const {
  for (const auto& n : nodes_)
    if (n.name == name) return n.id;
  return std::nullopt;
}

std::optional<NodeId> Topology::host_by_addr(EndpointAddr addr) const {
  for (const auto& n : nodes_)
    if (n.kind == NodeKind::Host && n.addr == addr) return n.id;
  return std::nullopt;
}

PortId Topology::resolve_port(NodeId node, NodeId neighbor) const {
  auto it = ports_.find(node);
  if (it != ports_.end()) {
    const auto& slots = it->second;
    for (std::size_t p = 0; p < slots.size(); ++p)
      if (slots[p].neighbor == neighbor) return PortId{static_cast<std::uint16_t>(p)};
  }
  throw Error(ErrorCode::NoSuchLink,
              "no link between " + std::to_string(node.value) + " and " + std::to_string(neighbor.value));
}

std::size_t Topology::port_count(NodeId node) const {
  auto it = ports_.find(node);
  return it == ports_.end() ? 0 : it->second.size();
}

std::optional<std::pair<NodeId, double>> Topology::neighbor_at(NodeId node, PortId port) const {
  auto it = ports_.find(node);
  if (it == ports_.end() || port.value >= it->second.size()) return std::nullopt;
  const auto& slot = it->second[port.value];
  return std::make_pair(slot.neighbor, slot.latency);
}

NodeId Topology::controller_of(NodeId sw) const {
  auto it = ofconn_.find(sw);
  if (it == ofconn_.end()) throw Error(ErrorCode::MissingController, "switch " + std::to_string(sw.value));
  return it->second;
}

std::optional<NodeId> Topology::monitor_of(NodeId sw) const {
  auto it = monconn_.find(sw);
  if (it == monconn_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeId> Topology::switch_of_monitor(NodeId monitor) const {
  auto it = monitor_switch_.find(monitor);
  if (it == monitor_switch_.end()) return std::nullopt;
  return it->second;
}

std::vector<NodeId> Topology::switches_of(NodeId controller) const {
  std::vector<NodeId> out;
  for (const auto& [sw, ctrl] : ofconn_)
    if (ctrl == controller) out.push_back(sw);
  return out;
}

std::vector<NodeId> Topology::monitors_of(NodeId controller) const {
  std::vector<NodeId> out;
  for (const auto& [sw, mon] : monconn_)
    if (ofconn_.at(sw) == controller) out.push_back(mon);
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<NodeId>& Topology::peers_of(NodeId monitor) const {
  static const std::vector<NodeId> none;
  auto it = peers_.find(monitor);
  return it == peers_.end() ? none : it->second;
}

std::optional<NodeId> Topology::controller_of_monitor(NodeId monitor) const {
  auto sw = switch_of_monitor(monitor);
  if (!sw) return std::nullopt;
  return ofconn_.at(*sw);
}

std::optional<double> Topology::channel_latency(NodeId from, NodeId to) const {
  if (from == to) return 0.0;
  if (auto it = ports_.find(from); it != ports_.end())
    for (const auto& slot : it->second)
      if (slot.neighbor == to) return slot.latency;
  auto ofc = [&](NodeId sw, NodeId ctrl) {
    auto it = ofconn_.find(sw);
    return it != ofconn_.end() && it->second == ctrl;
  };
  if (ofc(from, to) || ofc(to, from)) return controller_latency_;
  auto mon = [&](NodeId sw, NodeId m) {
    auto it = monconn_.find(sw);
    return it != monconn_.end() && it->second == m;
  };
  if (mon(from, to) || mon(to, from)) return monitor_latency_;
  // A monitor reports to its domain controller.
  if (auto ctrl = controller_of_monitor(from); ctrl && *ctrl == to) return controller_latency_;
  if (auto ctrl = controller_of_monitor(to); ctrl && *ctrl == from) return controller_latency_;
  const auto& peers = peers_of(from);
  if (std::find(peers.begin(), peers.end(), to) != peers.end()) return peer_latency_;
  return std::nullopt;
}

std::vector<NodeId> Topology::nodes_of_kind(NodeKind kind) const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_)
    if (n.kind == kind) out.push_back(n.id);
  return out;
}

namespace {

std::string describe(const Topology& topo, NodeId id) {
  const auto& n = topo.node(id);
  return n.name.empty() ? std::to_string(id.value) : n.name;
}

}  // namespace

Topology build_topology(const TopologySpec& spec) {
  Topology topo;
  std::set<EndpointAddr> addrs;
  for (const auto& n : spec.nodes) {
    if (topo.index_.count(n.id))
      throw Error(ErrorCode::DuplicateNode, "node id " + std::to_string(n.id.value) + " declared twice");
    if (n.kind == NodeKind::Host) {
      if (!n.addr) throw Error(ErrorCode::InvalidTopology, "host " + n.name + " has no address");
      if (!addrs.insert(*n.addr).second)
        throw Error(ErrorCode::InvalidTopology, "address " + std::to_string(n.addr->value) + " used by two hosts");
    }
    topo.index_[n.id] = topo.nodes_.size();
    topo.nodes_.push_back(n);
  }

  auto kind_of = [&](NodeId id) {
    if (!topo.contains(id)) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id.value));
    return topo.node(id).kind;
  };

  // (node, port) -> slot, collected before checking contiguity.
  std::map<NodeId, std::map<std::uint16_t, Topology::PortSlot>> slots;
  double min_trunk_latency = -1.0;
  for (const auto& l : spec.links) {
    NodeKind ka = kind_of(l.a), kb = kind_of(l.b);
    if (l.a == l.b) throw Error(ErrorCode::InvalidTopology, "self-link on " + describe(topo, l.a));
    auto data_plane = [](NodeKind k) { return k == NodeKind::Host || k == NodeKind::Switch; };
    if (!data_plane(ka) || !data_plane(kb))
      throw Error(ErrorCode::InvalidTopology, "links join hosts and switches only (" + describe(topo, l.a) + "-" +
                                                  describe(topo, l.b) + ")");
    if (ka == NodeKind::Host && kb == NodeKind::Host)
      throw Error(ErrorCode::InvalidTopology, "host-host link " + describe(topo, l.a) + "-" + describe(topo, l.b));
    if (l.latency < 0.0) throw Error(ErrorCode::InvalidTopology, "negative link latency");
    if (!slots[l.a].emplace(l.port_at_a.value, Topology::PortSlot{l.b, l.latency}).second)
      throw Error(ErrorCode::DuplicatePort,
                  describe(topo, l.a) + " port " + std::to_string(l.port_at_a.value) + " used by two links");
    if (!slots[l.b].emplace(l.port_at_b.value, Topology::PortSlot{l.a, l.latency}).second)
      throw Error(ErrorCode::DuplicatePort,
                  describe(topo, l.b) + " port " + std::to_string(l.port_at_b.value) + " used by two links");
    if (ka == NodeKind::Switch && kb == NodeKind::Switch)
      min_trunk_latency = min_trunk_latency < 0 ? l.latency : std::min(min_trunk_latency, l.latency);
    topo.links_.push_back(l);
  }
  for (auto& [node, by_port] : slots) {
    auto& vec = topo.ports_[node];
    for (auto& [port, slot] : by_port) {
      if (port != vec.size())
        throw Error(ErrorCode::InvalidPort, describe(topo, node) + " ports must be numbered 0.." +
                                                std::to_string(by_port.size() - 1));
      vec.push_back(slot);
    }
  }

  for (const auto& [sw, ctrl] : spec.ofconn) {
    if (kind_of(sw) != NodeKind::Switch || kind_of(ctrl) != NodeKind::Controller)
      throw Error(ErrorCode::InvalidTopology, "ofconn must map a switch to a controller");
    if (!topo.ofconn_.emplace(sw, ctrl).second)
      throw Error(ErrorCode::InvalidTopology, "switch " + describe(topo, sw) + " has two controllers");
  }
  for (const auto& [sw, mon] : spec.monconn) {
    if (kind_of(sw) != NodeKind::Switch || kind_of(mon) != NodeKind::Monitor)
      throw Error(ErrorCode::InvalidTopology, "monconn must map a switch to a monitor");
    if (!topo.monconn_.emplace(sw, mon).second)
      throw Error(ErrorCode::InvalidTopology, "switch " + describe(topo, sw) + " has two monitors");
    if (!topo.monitor_switch_.emplace(mon, sw).second)
      throw Error(ErrorCode::InvalidTopology, "monitor " + describe(topo, mon) + " attached to two switches");
  }
  for (const auto& n : topo.nodes_) {
    if (n.kind == NodeKind::Switch && !topo.ofconn_.count(n.id))
      throw Error(ErrorCode::MissingController, "switch " + describe(topo, n.id) + " has no controller");
    if (n.kind == NodeKind::Host) {
      const auto& ports = topo.ports_[n.id];
      if (ports.size() != 1)
        throw Error(ErrorCode::DisconnectedHost, "host " + describe(topo, n.id) + " must have exactly one link");
    }
  }
  for (const auto& [a, b] : spec.peer_monitors) {
    if (kind_of(a) != NodeKind::Monitor || kind_of(b) != NodeKind::Monitor || a == b)
      throw Error(ErrorCode::InvalidTopology, "peer_monitors must pair two distinct monitors");
    auto add = [&](NodeId x, NodeId y) {
      auto& v = topo.peers_[x];
      if (std::find(v.begin(), v.end(), y) == v.end()) v.push_back(y);
    };
    add(a, b);
    add(b, a);
  }
  for (auto& [m, v] : topo.peers_) std::sort(v.begin(), v.end());

  // Hosts and switches must form one connected graph.
  std::vector<NodeId> data_nodes;
  for (const auto& n : topo.nodes_)
    if (n.kind == NodeKind::Host || n.kind == NodeKind::Switch) data_nodes.push_back(n.id);
  if (!data_nodes.empty()) {
    std::set<NodeId> seen{data_nodes.front()};
    std::deque<NodeId> queue{data_nodes.front()};
    while (!queue.empty()) {
      NodeId cur = queue.front();
      queue.pop_front();
      for (const auto& slot : topo.ports_[cur])
        if (seen.insert(slot.neighbor).second) queue.push_back(slot.neighbor);
    }
    for (NodeId id : data_nodes)
      if (!seen.count(id))
        throw Error(ErrorCode::DisconnectedHost, describe(topo, id) + " is not connected to the network");
  }

  if (spec.controller_latency < 0 || spec.monitor_latency < 0 || spec.peer_latency < 0)
    throw Error(ErrorCode::InvalidTopology, "negative channel latency");
  if (!spec.monconn.empty() && min_trunk_latency >= 0 && spec.monitor_latency > min_trunk_latency)
    throw Error(ErrorCode::InvalidTopology, "monitor latency exceeds a switch-switch link latency");
  topo.controller_latency_ = spec.controller_latency;
  topo.monitor_latency_ = spec.monitor_latency;
  topo.peer_latency_ = spec.peer_latency;
  return topo;
}

// ---------------------------------------------------------------------------
// Message text form

std::string_view message_tag(const Message& msg) {
  struct Visitor {
    std::string_view operator()(const PacketMsg&) const { return "PacketMsg"; }
    std::string_view operator()(const OfPacket&) const { return "OfPacket"; }
    std::string_view operator()(const FlowMod&) const { return "FlowMod"; }
    std::string_view operator()(const Broadcast&) const { return "Broadcast"; }
    std::string_view operator()(const MonPacket&) const { return "MonPacket"; }
    std::string_view operator()(const BeliefMsg&) const { return "BeliefMsg"; }
    std::string_view operator()(const DdosYes&) const { return "DdosYes"; }
    std::string_view operator()(const Block&) const { return "Block"; }
  };
  return std::visit(Visitor{}, msg);
}

bool is_control_message(const Message& msg) {
  return std::holds_alternative<FlowMod>(msg) || std::holds_alternative<Broadcast>(msg) ||
         std::holds_alternative<Block>(msg);
}

namespace {

class Writer {
 public:
  explicit Writer(std::string_view tag) : out_(tag) {}
  Writer& kv(std::string_view key, std::uint64_t v) { return raw(key, std::to_string(v)); }
  Writer& kv(std::string_view key, std::uint32_t v) { return kv(key, std::uint64_t{v}); }
  Writer& kv(std::string_view key, std::uint16_t v) { return kv(key, std::uint64_t{v}); }
  Writer& kv(std::string_view key, double v) { return raw(key, text::format_double(v)); }
  Writer& raw(std::string_view key, std::string_view v) {
    out_ += ' ';
    out_ += key;
    out_ += '=';
    out_ += v;
    return *this;
  }
  std::string str() const { return out_; }

 private:
  std::string out_;
};

class Fields {
 public:
  explicit Fields(std::string_view line) {
    auto tokens = text::split(text::trim(line), ' ');
    tag_ = tokens.front();
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      if (tokens[i].empty()) continue;
      auto eq = tokens[i].find('=');
      if (eq == std::string_view::npos) fail("token without '=': " + std::string(tokens[i]));
      if (!values_.emplace(tokens[i].substr(0, eq), tokens[i].substr(eq + 1)).second)
        fail("repeated key " + std::string(tokens[i].substr(0, eq)));
    }
  }

  std::string_view tag() const { return tag_; }

  std::string_view raw(std::string_view key) {
    auto it = values_.find(key);
    if (it == values_.end()) fail("missing key " + std::string(key));
    used_.insert(key);
    return it->second;
  }
  std::uint64_t u64(std::string_view key) {
    auto v = text::parse_uint(raw(key));
    if (!v) fail("bad integer for " + std::string(key));
    return *v;
  }
  std::uint32_t u32(std::string_view key) {
    auto v = u64(key);
    if (v > 0xffffffffULL) fail("out of range " + std::string(key));
    return static_cast<std::uint32_t>(v);
  }
  PortId port(std::string_view key) {
    auto v = u64(key);
    if (v > 0xffffULL) fail("port out of range");
    return PortId{static_cast<std::uint16_t>(v)};
  }
  NodeId node(std::string_view key) { return NodeId{u32(key)}; }
  EndpointAddr addr(std::string_view key) { return EndpointAddr{u32(key)}; }
  double real(std::string_view key) {
    auto v = text::parse_double(raw(key));
    if (!v) fail("bad number for " + std::string(key));
    return *v;
  }
  void finish() const {
    if (used_.size() != values_.size()) fail("unexpected extra keys");
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::MalformedMessage, std::string(tag_) + ": " + why);
  }

 private:
  std::string_view tag_;
  std::map<std::string_view, std::string_view> values_;
  std::set<std::string_view> used_;
};

}  // namespace

std::string format_message(const Message& msg) {
  struct Visitor {
    std::string operator()(const PacketMsg& m) const {
      return Writer("PacketMsg")
          .kv("id", m.packet.id)
          .kv("src", m.packet.src.value)
          .kv("dst", m.packet.dst.value)
          .kv("size", m.packet.size_bytes)
          .kv("created", m.packet.created_at)
          .raw("label", m.packet.label ? label_name(*m.packet.label) : "none")
          .kv("from", m.from.value)
          .str();
    }
    std::string operator()(const OfPacket& m) const {
      return Writer("OfPacket")
          .kv("switch", m.switch_id.value)
          .kv("in_port", m.in_port.value)
          .kv("src", m.src.value)
          .kv("dst", m.dst.value)
          .kv("buffer", m.buffer_id)
          .str();
    }
    std::string operator()(const FlowMod& m) const {
      return Writer("FlowMod").kv("dst", m.dst_addr.value).kv("out_port", m.out_port.value).str();
    }
    std::string operator()(const Broadcast& m) const {
      return Writer("Broadcast")
          .kv("in_port", m.in_port.value)
          .kv("src", m.src.value)
          .kv("dst", m.dst.value)
          .kv("buffer", m.buffer_id)
          .str();
    }
    std::string operator()(const MonPacket& m) const {
      return Writer("MonPacket")
          .kv("controller", m.controller.value)
          .kv("switch", m.switch_id.value)
          .kv("src", m.src.value)
          .kv("dst", m.dst.value)
          .kv("size", m.size_bytes)
          .str();
    }
    std::string operator()(const BeliefMsg& m) const {
      return Writer("BeliefMsg")
          .kv("src", m.flow.src.value)
          .kv("dst", m.flow.dst.value)
          .kv("score", m.score)
          .kv("window", m.window_index)
          .kv("origin", m.origin_monitor.value)
          .str();
    }
    std::string operator()(const DdosYes& m) const {
      return Writer("DdosYes")
          .kv("switch", m.switch_id.value)
          .kv("src", m.src.value)
          .kv("dst", m.dst.value)
          .kv("monitor", m.monitor.value)
          .str();
    }
    std::string operator()(const Block& m) const {
      return Writer("Block").kv("src", m.src.value).kv("dst", m.dst.value).str();
    }
  };
  return std::visit(Visitor{}, msg);
}

Message parse_message(std::string_view line) {
  if (text::trim(line).empty()) throw Error(ErrorCode::MalformedMessage, "empty message");
  Fields f(line);
  Message out;
  std::string_view tag = f.tag();
  if (tag == "PacketMsg") {
    PacketMsg m;
    m.packet.id = f.u64("id");
    m.packet.src = f.addr("src");
    m.packet.dst = f.addr("dst");
    m.packet.size_bytes = f.u32("size");
    m.packet.created_at = f.real("created");
    auto label = f.raw("label");
    if (label != "none") {
      m.packet.label = parse_label(label);
      if (!m.packet.label) f.fail("unknown label");
    }
    m.from = f.node("from");
    out = m;
  } else if (tag == "OfPacket") {
    out = OfPacket{f.node("switch"), f.port("in_port"), f.addr("src"), f.addr("dst"), f.u64("buffer")};
  } else if (tag == "FlowMod") {
    out = FlowMod{f.addr("dst"), f.port("out_port")};
  } else if (tag == "Broadcast") {
    out = Broadcast{f.port("in_port"), f.addr("src"), f.addr("dst"), f.u64("buffer")};
  } else if (tag == "MonPacket") {
    out = MonPacket{f.node("controller"), f.node("switch"), f.addr("src"), f.addr("dst"), f.u32("size")};
  } else if (tag == "BeliefMsg") {
    BeliefMsg m;
    m.flow = FlowKey{f.addr("src"), f.addr("dst")};
    m.score = f.real("score");
    m.window_index = f.u64("window");
    m.origin_monitor = f.node("origin");
    out = m;
  } else if (tag == "DdosYes") {
    out = DdosYes{f.node("switch"), f.addr("src"), f.addr("dst"), f.node("monitor")};
  } else if (tag == "Block") {
    out = Block{f.addr("src"), f.addr("dst")};
  } else {
    f.fail("unknown message tag");
  }
  f.finish();
  return out;
}

}  // namespace rapidlearn

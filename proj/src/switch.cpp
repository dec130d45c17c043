#include "rapidlearn/switch.hpp"

#include "rapidlearn/error.hpp"

namespace rapidlearn {

std::string_view drop_reason_name(DropReason reason) {
  switch (reason) {
    case DropReason::Blocked: return "blocked";
    case DropReason::Hairpin: return "hairpin";
    case DropReason::RateLimited: return "rate_limited";
  }
  return "?";
}

bool FlowTable::install(EndpointAddr dst, PortId out_port) {
  if (auto current = match(dst); current && current->out_port == out_port) return false;
  entries_.insert(entries_.begin(), FlowEntry{dst, out_port, max_priority() + 1});
  return true;
}

std::optional<FlowEntry> FlowTable::match(EndpointAddr dst) const {
  for (const auto& e : entries_)
    if (e.dst == dst) return e;
  return std::nullopt;
}

std::string FlowTable::to_csv() const {
  std::string out = "priority,dst,out_port\n";
  for (const auto& e : entries_) {
    out += std::to_string(e.priority) + ',' + std::to_string(e.dst.value) + ',' + std::to_string(e.out_port.value);
    out += '\n';
  }
  return out;
}

SwitchState::SwitchState(NodeId id, NodeId controller, std::optional<NodeId> monitor, std::vector<PortInfo> ports)
    : id_(id), controller_(controller), monitor_(monitor), ports_(std::move(ports)) {}

void SwitchState::check_port(PortId port) const {
  if (port.value >= ports_.size())
    throw Error(ErrorCode::InvalidPort,
                "switch " + std::to_string(id_.value) + " has no port " + std::to_string(port.value));
}

SwitchResult SwitchState::handle_packet(const PacketView& packet, PortId in_port) {
  check_port(in_port);
  SwitchResult result{Drop{DropReason::Blocked}, std::nullopt};
  if (monitor_) result.mirror = MonPacket{controller_, id_, packet.src, packet.dst, packet.size_bytes};
  learned_ingress_[packet.src] = in_port;

  if (blocked_.count(FlowKey{packet.src, packet.dst}) || blocked_ports_.count(in_port)) return result;

  if (auto hit = table_.match(packet.dst)) {
    if (hit->out_port == in_port) result.action = Drop{DropReason::Hairpin};
    else result.action = Forward{hit->out_port};
  } else {
    result.action = PuntToController{};
  }
  return result;
}

void SwitchState::install_flow(EndpointAddr dst, PortId out_port) {
  check_port(out_port);
  table_.install(dst, out_port);
}

std::vector<PortId> SwitchState::broadcast_ports(PortId in_port) const {
  check_port(in_port);
  std::vector<PortId> out;
  for (std::size_t p = 0; p < ports_.size(); ++p) {
    PortId port{static_cast<std::uint16_t>(p)};
    if (port != in_port && !blocked_ports_.count(port)) out.push_back(port);
  }
  return out;
}

void SwitchState::apply_block(EndpointAddr src, EndpointAddr dst) {
  blocked_.insert(FlowKey{src, dst});
  auto it = learned_ingress_.find(src);
  if (it == learned_ingress_.end()) return;
  // Only an access port whose host is the blocked source; never a trunk.
  const auto& info = ports_[it->second.value];
  if (info.host && *info.host == src) blocked_ports_.insert(it->second);
}

}  // namespace rapidlearn

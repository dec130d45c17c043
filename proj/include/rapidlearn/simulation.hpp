#pragma once

// Wires a scenario into an engine: one behavior object per node, message
// dispatch, and ground-truth metrics collection.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rapidlearn/controller.hpp"
#include "rapidlearn/monitor.hpp"
#include "rapidlearn/scenario.hpp"
#include "rapidlearn/sim_engine.hpp"
#include "rapidlearn/switch.hpp"
#include "rapidlearn/traffic.hpp"

namespace rapidlearn {

struct FlowMetrics {
  FlowKey flow;
  TrafficLabel kind = TrafficLabel::Legit;
  double start = 0.0;
  std::optional<double> block_time;  // first time a Block was enforced at a switch
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t delivered_post_block = 0;  // injected at or after block_time

  std::optional<double> detection_latency() const {
    if (!block_time) return std::nullopt;
    return *block_time - start;
  }
};

struct DecisionRecord {
  double time = 0.0;
  NodeId controller;
  FlowKey flow;
  std::vector<NodeId> voters;
  std::vector<NodeId> targets;
};

struct MetricsReport {
  std::vector<FlowMetrics> flows;
  std::uint64_t attacker_pkts_delivered_total = 0;
  std::uint64_t attacker_pkts_delivered_post_block = 0;
  std::uint64_t legit_sent = 0;
  std::uint64_t legit_delivered = 0;
  std::optional<double> legit_delivery_ratio;
  std::uint64_t false_blocks = 0;
  std::map<NodeId, std::uint64_t> monitor_reports;
  std::vector<DecisionRecord> decisions;
  std::uint64_t events = 0;
};

// JSON document for metrics files; node ids are rendered by name.
std::string metrics_to_json(const MetricsReport& report, const Topology& topology, const ScenarioConfig& config);

struct SimulationOptions {
  bool record_trace = false;
  std::function<void(NodeId monitor, const WindowRecord&)> window_log;
};

class Simulation {
 public:
  Simulation(const ScenarioConfig& config, std::shared_ptr<const SvcModel> model, SimulationOptions options = {});

  // Runs to t_end + drain. Hosts stop injecting at t_end.
  void run();

  const Topology& topology() const { return topology_; }
  const EventTrace& trace() const { return trace_; }
  MetricsReport metrics() const;

  const SwitchState& switch_state(NodeId id) const { return switches_.at(id).state; }
  const Controller& controller(NodeId id) const { return controllers_.at(id); }
  const Monitor& monitor(NodeId id) const { return monitors_.at(id); }
  const Host& host(NodeId id) const { return hosts_.at(id); }
  NodeId node(std::string_view name) const;

 private:
  struct SwitchNode {
    SwitchState state;
    std::map<NodeId, PortId> port_of;  // neighbor -> local port
    std::map<std::uint64_t, std::pair<Packet, PortId>> buffered;
    std::uint64_t next_buffer = 1;
  };

  void dispatch(const Event& ev);
  void on_host(Host& host, const Message& msg);
  void on_switch(SwitchNode& sw, const Message& msg);
  void on_controller(Controller& ctrl, const Message& msg);
  void on_monitor(Monitor& mon, const Message& msg);
  void emit(NodeId from, std::vector<Outgoing> out);
  void output(SwitchNode& sw, PortId port, const Packet& packet);
  void schedule_injection(Host& host);

  ScenarioConfig config_;
  Topology topology_;
  SimulationOptions options_;
  Engine engine_;
  std::map<NodeId, Host> hosts_;
  std::map<NodeId, SwitchNode> switches_;
  std::map<NodeId, Controller> controllers_;
  std::map<NodeId, Monitor> monitors_;
  EventTrace trace_;

  std::map<FlowKey, FlowMetrics> flow_metrics_;
  std::vector<DecisionRecord> decisions_;
  std::uint64_t events_ = 0;
};

}  // namespace rapidlearn

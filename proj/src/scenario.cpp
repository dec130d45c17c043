#include "rapidlearn/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "rapidlearn/error.hpp"

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

namespace rapidlearn {

ControllerConfig ControllerSettings::for_domain(std::size_t monitors) const {
  ControllerConfig cfg;
  cfg.quorum = quorum.value_or(default_quorum(monitors));
  cfg.vote_window = vote_window;
  cfg.block_scope = block_scope;
  return cfg;
}

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::InvalidConfig, path + ": " + why);
}

// Typed, path-aware view of one TOML table. Every key read is remembered so
// that leftovers can be reported as unknown.
class Section {
 public:
  Section(const toml::table& table, std::string path) : table_(table), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  std::string at(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

  bool has(std::string_view key) {
    seen_.insert(std::string(key));
    return table_.contains(key);
  }

  std::optional<double> opt_number(std::string_view key) {
    if (!has(key)) return std::nullopt;
    const auto* node = table_.get(key);
    if (auto v = node->value_exact<double>()) return *v;
    if (auto v = node->value_exact<std::int64_t>()) return static_cast<double>(*v);
    invalid(at(key), "expected a number");
  }
  double number(std::string_view key, double fallback) { return opt_number(key).value_or(fallback); }
  double required_number(std::string_view key) {
    auto v = opt_number(key);
    if (!v) invalid(at(key), "required");
    return *v;
  }

  std::optional<std::int64_t> opt_integer(std::string_view key) {
    if (!has(key)) return std::nullopt;
    if (auto v = table_.get(key)->value_exact<std::int64_t>()) return *v;
    invalid(at(key), "expected an integer");
  }
  std::uint64_t unsigned_integer(std::string_view key, std::uint64_t fallback) {
    auto v = opt_integer(key);
    if (!v) return fallback;
    if (*v < 0) invalid(at(key), "must be non-negative");
    return static_cast<std::uint64_t>(*v);
  }

  std::optional<std::string> opt_string(std::string_view key) {
    if (!has(key)) return std::nullopt;
    if (auto v = table_.get(key)->value_exact<std::string>()) return *v;
    invalid(at(key), "expected a string");
  }
  std::string required_string(std::string_view key) {
    auto v = opt_string(key);
    if (!v) invalid(at(key), "required");
    return *v;
  }

  const toml::node* raw(std::string_view key) {
    if (!has(key)) return nullptr;
    return table_.get(key);
  }

  std::optional<Section> sub(std::string_view key) {
    if (!has(key)) return std::nullopt;
    const auto* t = table_.get(key)->as_table();
    if (!t) invalid(at(key), "expected a table");
    return Section(*t, at(key));
  }

  std::vector<Section> table_array(std::string_view key) {
    std::vector<Section> out;
    if (!has(key)) return out;
    const auto* arr = table_.get(key)->as_array();
    if (!arr) invalid(at(key), "expected an array of tables");
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const auto* t = arr->get(i)->as_table();
      if (!t) invalid(at(key) + "[" + std::to_string(i) + "]", "expected a table");
      out.emplace_back(*t, at(key) + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, node] : table_) {
      std::string k(key.str());
      if (!seen_.count(k)) invalid(at(k), "unknown key");
    }
  }

 private:
  const toml::table& table_;
  std::string path_;
  std::set<std::string> seen_;
};

toml::table parse_toml(std::string_view text, const std::string& source) {
  try {
    return toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    throw Error(ErrorCode::InvalidConfig, msg.str());
  }
}

double non_negative(Section& s, std::string_view key, double fallback) {
  double v = s.number(key, fallback);
  if (!(v >= 0.0) || !std::isfinite(v)) invalid(s.at(key), "must be a finite non-negative number");
  return v;
}

using EndpointResolver = std::function<EndpointAddr(const toml::node&, const std::string& path)>;

FlowSpec parse_flow(Section& s, const EndpointResolver& resolve) {
  FlowSpec flow;
  const auto* src = s.raw("src");
  const auto* dst = s.raw("dst");
  if (!src) invalid(s.at("src"), "required");
  if (!dst) invalid(s.at("dst"), "required");
  flow.src = resolve(*src, s.at("src"));
  flow.dst = resolve(*dst, s.at("dst"));

  auto kind = s.required_string("kind");
  auto label = parse_label(kind);
  if (!label) invalid(s.at("kind"), "must be 'legit' or 'attack'");
  flow.kind = *label;

  auto arrival = s.opt_string("arrival").value_or("poisson");
  auto process = parse_arrival(arrival);
  if (!process) invalid(s.at("arrival"), "must be 'poisson' or 'uniform'");
  flow.arrival = *process;

  if (const auto* size = s.raw("size")) {
    if (auto fixed = size->value_exact<std::int64_t>()) {
      if (*fixed < 1 || *fixed > 0xffffffffLL) invalid(s.at("size"), "must be >= 1");
      flow.size = SizeDist::fixed(static_cast<std::uint32_t>(*fixed));
    } else if (const auto* range = size->as_array(); range && range->size() == 2) {
      auto lo = range->get(0)->value_exact<std::int64_t>();
      auto hi = range->get(1)->value_exact<std::int64_t>();
      if (!lo || !hi || *lo < 1 || *hi < *lo || *hi > 0xffffffffLL)
        invalid(s.at("size"), "range must be [lo, hi] with 1 <= lo <= hi");
      flow.size = SizeDist::uniform(static_cast<std::uint32_t>(*lo), static_cast<std::uint32_t>(*hi));
    } else {
      invalid(s.at("size"), "expected bytes or [lo, hi]");
    }
  } else {
    flow.size = flow.kind == TrafficLabel::Attack ? SizeDist::fixed(100) : SizeDist::uniform(400, 1200);
  }

  auto segments = s.table_array("segments");
  bool simple = s.has("start") || s.has("stop") || s.has("rate");
  if (!segments.empty() && simple) invalid(s.path(), "use either start/stop/rate or segments, not both");
  if (segments.empty()) {
    RateSegment seg;
    seg.start = s.required_number("start");
    seg.stop = s.required_number("stop");
    seg.rate = s.required_number("rate");
    flow.segments.push_back(seg);
  }
  for (auto& seg_section : segments) {
    RateSegment seg;
    seg.start = seg_section.required_number("start");
    seg.stop = seg_section.required_number("stop");
    seg.rate = seg_section.required_number("rate");
    seg_section.reject_unknown();
    flow.segments.push_back(seg);
  }
  s.reject_unknown();
  return flow;
}

TrafficSpec parse_traffic(Section& traffic, const EndpointResolver& resolve) {
  TrafficSpec spec;
  for (auto& f : traffic.table_array("flows")) spec.flows.push_back(parse_flow(f, resolve));
  traffic.reject_unknown();
  spec.validate();
  return spec;
}

EndpointAddr numeric_endpoint(const toml::node& node, const std::string& path) {
  if (auto text = node.value_exact<std::string>()) {
    auto addr = parse_endpoint(*text);
    if (!addr) invalid(path, "expected an address, got '" + *text + "'");
    return *addr;
  }
  auto v = node.value_exact<std::int64_t>();
  if (!v || *v < 0 || *v > 0xffffffffLL) invalid(path, "expected a numeric endpoint address");
  return EndpointAddr{static_cast<std::uint32_t>(*v)};
}

}  // namespace

void validate_scenario(const ScenarioConfig& config) {
  if (config.latencies.monitor_link > config.latencies.switch_link)
    invalid("sim.latency.monitor_link", "must not exceed switch_link");
  Topology topo = [&] {
    try {
      return build_topology(config.topology);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidConfig, std::string("topology: ") + e.what());
    }
  }();
  config.monitor.validate();
  if (!(config.t_end > 0.0)) invalid("sim.t_end", "must be positive");
  if (!(config.drain >= 0.0)) invalid("sim.drain", "must be non-negative");
  if (!(config.duplicate_control_prob >= 0.0 && config.duplicate_control_prob <= 1.0))
    invalid("sim.duplicate_control_prob", "must be in [0, 1]");
  if (!(config.controller.vote_window > 0.0)) invalid("controller.vote_window", "must be positive");
  for (NodeId ctrl : topo.nodes_of_kind(NodeKind::Controller)) {
    std::size_t monitors = topo.monitors_of(ctrl).size();
    if (config.controller.quorum) {
      if (*config.controller.quorum < 1) invalid("controller.quorum", "must be at least 1");
      if (monitors > 0 && *config.controller.quorum > monitors)
        invalid("controller.quorum", "quorum " + std::to_string(*config.controller.quorum) + " exceeds the " +
                                         std::to_string(monitors) + " monitor(s) of domain " + topo.node(ctrl).name);
    }
  }
  for (std::size_t i = 0; i < config.traffic.flows.size(); ++i) {
    const auto& f = config.traffic.flows[i];
    std::string path = "traffic.flows[" + std::to_string(i) + "]";
    if (!topo.host_by_addr(f.src)) invalid(path + ".src", "no host has address " + std::to_string(f.src.value));
    if (!topo.host_by_addr(f.dst)) invalid(path + ".dst", "no host has address " + std::to_string(f.dst.value));
  }
}

ScenarioConfig parse_scenario(std::string_view toml_text, const std::filesystem::path& base_dir,
                              const std::string& source) {
  toml::table doc = parse_toml(toml_text, source);
  Section root(doc, "");
  ScenarioConfig cfg;

  // [sim]
  if (auto sim = root.sub("sim")) {
    cfg.seed = sim->unsigned_integer("seed", cfg.seed);
    cfg.t_end = sim->number("t_end", cfg.t_end);
    cfg.drain = non_negative(*sim, "drain", cfg.drain);
    cfg.duplicate_control_prob = sim->number("duplicate_control_prob", 0.0);
    if (auto model = sim->opt_string("model_path")) cfg.model_path = *model;
    if (auto lat = sim->sub("latency")) {
      cfg.latencies.host_link = non_negative(*lat, "host_link", cfg.latencies.host_link);
      cfg.latencies.switch_link = non_negative(*lat, "switch_link", cfg.latencies.switch_link);
      cfg.latencies.monitor_link = non_negative(*lat, "monitor_link", cfg.latencies.monitor_link);
      cfg.latencies.controller_link = non_negative(*lat, "controller_link", cfg.latencies.controller_link);
      lat->reject_unknown();
    }
    sim->reject_unknown();
  }
  if (!cfg.model_path.empty() && cfg.model_path.is_relative()) cfg.model_path = base_dir / cfg.model_path;

  // [topology]
  auto topo_section = root.sub("topology");
  if (!topo_section) invalid("topology", "required");
  auto& topo = cfg.topology;
  topo.controller_latency = cfg.latencies.controller_link;
  topo.monitor_latency = cfg.latencies.monitor_link;
  topo.peer_latency = cfg.latencies.switch_link;

  std::map<std::string, NodeId> names;
  auto add_node = [&](const std::string& name, NodeKind kind, const std::string& path,
                      std::optional<EndpointAddr> addr = std::nullopt) {
    if (name.empty()) invalid(path, "name must not be empty");
    NodeId id{static_cast<std::uint32_t>(topo.nodes.size())};
    if (!names.emplace(name, id).second) invalid(path, "duplicate node name '" + name + "'");
    topo.nodes.push_back(Node{id, kind, name, addr});
    return id;
  };
  auto lookup = [&](const std::string& name, NodeKind kind, const std::string& path) {
    auto it = names.find(name);
    if (it == names.end()) invalid(path, "unknown node '" + name + "'");
    if (topo.nodes[it->second.value].kind != kind)
      invalid(path, "'" + name + "' is not a " + std::string(node_kind_name(kind)));
    return it->second;
  };

  if (const auto* ctrls = topo_section->raw("controllers")) {
    const auto* arr = ctrls->as_array();
    if (!arr) invalid("topology.controllers", "expected an array of names");
    for (std::size_t i = 0; i < arr->size(); ++i) {
      auto name = arr->get(i)->value_exact<std::string>();
      std::string path = "topology.controllers[" + std::to_string(i) + "]";
      if (!name) invalid(path, "expected a string");
      add_node(*name, NodeKind::Controller, path);
    }
  }

  struct PendingSwitch {
    NodeId id;
    std::optional<std::string> monitor;
    std::string path;
  };
  std::vector<PendingSwitch> switches;
  for (auto& s : topo_section->table_array("switches")) {
    NodeId id = add_node(s.required_string("name"), NodeKind::Switch, s.at("name"));
    NodeId ctrl = lookup(s.required_string("controller"), NodeKind::Controller, s.at("controller"));
    topo.ofconn.emplace_back(id, ctrl);
    switches.push_back({id, s.opt_string("monitor"), s.at("monitor")});
    s.reject_unknown();
  }
  for (const auto& sw : switches) {
    if (!sw.monitor) continue;
    NodeId mon = add_node(*sw.monitor, NodeKind::Monitor, sw.path);
    topo.monconn.emplace_back(sw.id, mon);
  }

  struct PendingHost {
    NodeId id;
    NodeId sw;
  };
  std::vector<PendingHost> hosts;
  for (auto& h : topo_section->table_array("hosts")) {
    auto addr = h.opt_integer("addr");
    if (!addr || *addr < 0 || *addr > 0xffffffffLL) invalid(h.at("addr"), "required non-negative integer");
    NodeId id = add_node(h.required_string("name"), NodeKind::Host, h.at("name"),
                         EndpointAddr{static_cast<std::uint32_t>(*addr)});
    NodeId sw = lookup(h.required_string("switch"), NodeKind::Switch, h.at("switch"));
    hosts.push_back({id, sw});
    h.reject_unknown();
  }

  // Ports are numbered per node in link order: trunks first, then hosts.
  std::map<NodeId, std::uint16_t> next_port;
  auto connect = [&](NodeId a, NodeId b, double latency) {
    topo.links.push_back(Link{a, b, PortId{next_port[a]++}, PortId{next_port[b]++}, latency});
  };
  for (auto& l : topo_section->table_array("links")) {
    NodeId a = lookup(l.required_string("a"), NodeKind::Switch, l.at("a"));
    NodeId b = lookup(l.required_string("b"), NodeKind::Switch, l.at("b"));
    connect(a, b, non_negative(l, "latency", cfg.latencies.switch_link));
    l.reject_unknown();
  }
  for (const auto& h : hosts) connect(h.sw, h.id, cfg.latencies.host_link);

  if (const auto* peers = topo_section->raw("peer_monitors")) {
    const auto* arr = peers->as_array();
    if (!arr) invalid("topology.peer_monitors", "expected an array of [a, b] pairs");
    for (std::size_t i = 0; i < arr->size(); ++i) {
      std::string path = "topology.peer_monitors[" + std::to_string(i) + "]";
      const auto* pair = arr->get(i)->as_array();
      if (!pair || pair->size() != 2) invalid(path, "expected [a, b]");
      auto a = pair->get(0)->value_exact<std::string>();
      auto b = pair->get(1)->value_exact<std::string>();
      if (!a || !b) invalid(path, "expected monitor names");
      topo.peer_monitors.emplace_back(lookup(*a, NodeKind::Monitor, path), lookup(*b, NodeKind::Monitor, path));
    }
  } else {
    // Default: monitors of one domain all peer with each other.
    std::map<NodeId, std::vector<NodeId>> by_domain;
    std::map<NodeId, NodeId> ctrl_of;
    for (const auto& [sw, ctrl] : topo.ofconn) ctrl_of[sw] = ctrl;
    for (const auto& [sw, mon] : topo.monconn) by_domain[ctrl_of[sw]].push_back(mon);
    for (const auto& [ctrl, mons] : by_domain)
      for (std::size_t i = 0; i < mons.size(); ++i)
        for (std::size_t j = i + 1; j < mons.size(); ++j) topo.peer_monitors.emplace_back(mons[i], mons[j]);
  }
  topo_section->reject_unknown();

  // [traffic]
  EndpointResolver by_name = [&](const toml::node& node, const std::string& path) -> EndpointAddr {
    if (auto name = node.value_exact<std::string>()) {
      NodeId id = lookup(*name, NodeKind::Host, path);
      return *topo.nodes[id.value].addr;
    }
    return numeric_endpoint(node, path);
  };
  if (auto traffic = root.sub("traffic")) cfg.traffic = parse_traffic(*traffic, by_name);

  // [monitor]
  if (auto mon = root.sub("monitor")) {
    auto& m = cfg.monitor;
    m.window_len = mon->number("window", m.window_len);
    m.ewma_alpha = mon->number("ewma_alpha", m.ewma_alpha);
    m.report_threshold = mon->number("report_threshold", m.report_threshold);
    m.assist_threshold = mon->number("assist_threshold", m.assist_threshold);
    auto k = mon->unsigned_integer("peer_confirmations", m.peer_confirmations);
    if (k > 0xffffffffULL) invalid(mon->at("peer_confirmations"), "too large");
    m.peer_confirmations = static_cast<std::uint32_t>(k);
    if (auto mode = mon->opt_string("mode")) {
      auto parsed = parse_monitor_mode(*mode);
      if (!parsed) invalid(mon->at("mode"), "must be 'direct' or 'gossip'");
      m.mode = *parsed;
    }
    m.rate_limit = mon->opt_number("rate_limit");
    mon->reject_unknown();
  }

  // [controller]
  if (auto ctrl = root.sub("controller")) {
    auto& c = cfg.controller;
    if (auto q = ctrl->opt_integer("quorum")) {
      if (*q < 1 || *q > 0xffffffffLL) invalid(ctrl->at("quorum"), "must be at least 1");
      c.quorum = static_cast<std::uint32_t>(*q);
    }
    c.vote_window = ctrl->number("vote_window", c.vote_window);
    if (auto scope = ctrl->opt_string("block_scope")) {
      auto parsed = parse_block_scope(*scope);
      if (!parsed) invalid(ctrl->at("block_scope"), "must be 'all_switches' or 'reporting_switches'");
      c.block_scope = *parsed;
    }
    ctrl->reject_unknown();
  }
  cfg.monitor.vote_window = cfg.controller.vote_window;

  root.reject_unknown();
  validate_scenario(cfg);
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open scenario " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path(), path.string());
}

TrafficSpec parse_traffic_spec(std::string_view toml_text, const std::string& source) {
  toml::table doc = parse_toml(toml_text, source);
  Section root(doc, "");
  auto traffic = root.sub("traffic");
  if (!traffic) invalid("traffic", "required");
  TrafficSpec spec = parse_traffic(*traffic, numeric_endpoint);
  root.reject_unknown();
  return spec;
}

}  // namespace rapidlearn

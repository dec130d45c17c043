// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rapidlearn/cli.hpp"
#include "rapidlearn/controller.hpp"
#include "rapidlearn/monitor.hpp"
#include "rapidlearn/sim_engine.hpp"
#include "rapidlearn/simulation.hpp"
#include "rapidlearn/svc.hpp"
#include "rapidlearn/switch.hpp"
#include "rapidlearn/traffic.hpp"

using namespace rapidlearn;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

int failures = 0;

void criterion(const char* id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0.0 && secs >= limit_s) o.require(false, "runtime " + std::to_string(secs) + " s");
  std::ostringstream line;
  line.precision(3);
  line << std::fixed << (o.ok ? "[PASS] " : "[FAIL] ") << id << " " << title << " (" << secs << " s)";
  if (!o.detail.empty()) line << ": " << o.detail;
  std::cout << line.str() << std::endl;
  failures += !o.ok;
}

std::string cli(std::vector<std::string> args, int& code) {
  args.insert(args.begin(), "rapidlearn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return code == 0 ? out.str() : err.str();
}

ScenarioConfig two_domain() { return load_scenario(fixtures::source_dir() / "presets" / "two-domain.toml"); }

bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) || a == b;
}

// ---- criteria ------------------------------------------------------------

Outcome detection_quality() {
  Outcome o;
  fixtures::TempDir dir("acceptance-ac1");
  const std::string trace = (dir / "trace.csv").string(), model = (dir / "m.model").string();
  int code = 0;
  std::string msg = cli({"gen-trace", "--preset", "default-ddos", "--seed", "42", "--out", trace}, code);
  o.require(code == 0, "gen-trace: " + msg);
  if (!o.ok) return o;
  msg = cli({"train", "--trace", trace, "--out", model, "--seed", "42", "--split", "0.7", "--c", "10", "--gamma", "0.5"},
            code);
  o.require(code == 0, "train: " + msg);
  if (!o.ok) return o;
  auto doc = json::parse(msg);

  Dataset all = windowize(load_trace_csv(trace), 1.0);
  std::size_t attack = 0;
  for (const auto& s : all.rows) attack += s.y > 0;
  const double share = static_cast<double>(attack) / static_cast<double>(all.size());
  const double p = doc["eval"]["precision"].is_null() ? 0.0 : doc["eval"]["precision"].get<double>();
  const double r = doc["eval"]["recall"].is_null() ? 0.0 : doc["eval"]["recall"].get<double>();
  o.detail = "windows=" + std::to_string(all.size()) + " attack_share=" + std::to_string(share) +
             " precision=" + std::to_string(p) + " recall=" + std::to_string(r);
  o.require(doc["windows"].get<std::size_t>() == all.size(), "window count mismatch");
  o.require(all.size() >= 2000, "fewer than 2000 windows");
  o.require(share >= 0.4 && share <= 0.6, "classes not balanced");
  o.require(p >= 0.95, "precision below 0.95");
  o.require(r >= 0.95, "recall below 0.95");
  return o;
}

Outcome smo_oracle() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Dataset d = fixtures::small_dataset(seed);
    FitOptions opts;
    opts.seed = seed;
    opts.tol = 1e-6;
    SvcModel m = fit(d, opts);
    double sum = 0.0;
    for (double c : m.coeffs) {
      o.require(std::abs(c) <= m.C, "alpha above C, seed " + std::to_string(seed));
      sum += c;
    }
    o.require(std::abs(sum) <= 1e-6, "sum alpha*y off, seed " + std::to_string(seed));
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    for (const auto& s : d.rows) {
      xs.push_back(s.x);
      ys.push_back(s.y);
    }
    auto ref = oracle::solve_dual(xs, ys, opts.C, opts.gamma);
    for (double a : ref.alpha) o.require(a >= 0.0 && a <= opts.C, "oracle alpha out of box");
    for (const auto& s : d.rows) worst = std::max(worst, std::abs(decision_value(m, s.x) - ref.decision(s.x)));
  }
  o.require(worst <= 1e-4, "max decision diff " + std::to_string(worst));
  if (o.ok) o.detail = "max decision diff " + std::to_string(worst);
  return o;
}

Outcome switch_semantics() {
  Outcome o;
  constexpr NodeId sw_id{10}, ctrl_id{1}, mon_id{20};
  constexpr EndpointAddr a{1}, b{2};
  std::vector<PortInfo> info(4);
  info[1].host = a;
  info[2].host = b;

  // (a) unknown destination punts and mirrors
  SwitchState sw(sw_id, ctrl_id, mon_id, info);
  auto first = sw.handle_packet({a, b, 100}, PortId{1});
  o.require(std::holds_alternative<PuntToController>(first.action), "(a) first packet did not punt");
  o.require(first.mirror.has_value(), "(a) first packet not mirrored");

  // (b) controller learns the source; the reply forwards without punting
  Controller c(ctrl_id, {sw_id}, {mon_id}, ControllerConfig{});
  auto out = c.handle_of_packet(OfPacket{sw_id, PortId{1}, a, b, 7});
  bool installed = false;
  for (const auto& m : out)
    if (const auto* fm = std::get_if<FlowMod>(&m.message)) {
      sw.install_flow(fm->dst_addr, fm->out_port);
      installed = true;
    }
  o.require(installed, "(b) no FlowMod");
  auto reply = sw.handle_packet({b, a, 100}, PortId{2});
  o.require(std::holds_alternative<Forward>(reply.action) && std::get<Forward>(reply.action).out_port == PortId{1},
            "(b) reply did not forward to the learned port");

  // (c) broadcast never echoes on the ingress port
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    SwitchState s(sw_id, ctrl_id, mon_id, std::vector<PortInfo>(1 + rng() % 8));
    PortId in{static_cast<std::uint16_t>(rng() % s.port_count())};
    for (auto& [p, _] : s.handle_broadcast(in, PacketView{a, b, 64})) o.require(p != in, "(c) broadcast echoed");
  }

  // (d) scan matching equals the countdown recursion
  for (int trial = 0; trial < 1000; ++trial) {
    FlowTable t;
    const std::size_t target = rng() % 65;
    while (t.size() < target)
      t.install(EndpointAddr{static_cast<std::uint32_t>(rng() % 16)}, PortId{static_cast<std::uint16_t>(rng() % 8)});
    for (std::uint32_t d = 0; d < 18; ++d)
      o.require(t.match(EndpointAddr{d}) == oracle::countdown_match(t.entries(), EndpointAddr{d}),
                "(d) scan differs from countdown, trial " + std::to_string(trial));
  }

  // (e) nothing leaves for a blocked flow
  std::size_t leaks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t ports = 2 + rng() % 6;
    std::vector<PortInfo> pi(ports);
    pi[rng() % ports].host = a;
    SwitchState s(sw_id, ctrl_id, mon_id, pi);
    for (int k = 0; k < 5; ++k)
      s.install_flow(EndpointAddr{static_cast<std::uint32_t>(rng() % 4)},
                     PortId{static_cast<std::uint16_t>(rng() % ports)});
    s.handle_packet({a, b, 100}, PortId{static_cast<std::uint16_t>(rng() % ports)});
    s.apply_block(a, b);
    for (std::uint16_t in = 0; in < ports; ++in) {
      auto r = s.handle_packet({a, b, 100}, PortId{in});
      leaks += std::holds_alternative<Forward>(r.action) || std::holds_alternative<Flood>(r.action);
      leaks += s.handle_broadcast(PortId{in}, PacketView{a, b, 100}).size();
    }
  }
  o.require(leaks == 0, "(e) " + std::to_string(leaks) + " forwards for a blocked flow");
  return o;
}

Outcome quorum_exactness() {
  Outcome o;
  std::mt19937_64 rng(2718);
  const NodeId ctrl{0};
  const std::vector<NodeId> monitors{NodeId{11}, NodeId{12}, NodeId{13}, NodeId{14}};
  for (int trial = 0; trial < 500; ++trial) {
    const std::uint32_t quorum = 1 + rng() % monitors.size();
    const double window = 0.5 + static_cast<double>(rng() % 8) * 0.5;
    Controller c(ctrl, {NodeId{1}}, monitors, ControllerConfig{quorum, window, BlockScope::AllSwitches});

    Engine engine;
    const int reports = 5 + static_cast<int>(rng() % 40);
    for (int i = 0; i < reports; ++i) {
      const double t = static_cast<double>(rng() % 40) * 0.25;
      const EndpointAddr src{1 + static_cast<std::uint32_t>(rng() % 3)};
      engine.schedule_at(t, ctrl, DdosYes{NodeId{1}, src, EndpointAddr{50}, monitors[rng() % monitors.size()]});
    }
    std::vector<std::pair<double, FlowKey>> decided;
    EventTrace trace = engine.run_until(100.0, [&](const Event& ev) {
      const auto& r = std::get<DdosYes>(ev.message);
      if (auto d = c.handle_ddos_report(r, ev.fire_at)) decided.emplace_back(ev.fire_at, d->flow);
    });

    // Brute-force tally over the recorded trace.
    std::map<FlowKey, std::vector<oracle::Report>> by_flow;
    std::vector<std::pair<double, FlowKey>> expected;
    for (const auto& ev : trace) {
      const auto& r = std::get<DdosYes>(ev.message);
      FlowKey f{r.src, r.dst};
      auto& list = by_flow[f];
      list.push_back({ev.fire_at, r.monitor.value});
      bool already = false;
      for (const auto& e : expected) already = already || e.second == f;
      if (!already && oracle::voters_at(list, list.size() - 1, window) >= quorum) expected.emplace_back(ev.fire_at, f);
    }
    o.require(decided == expected, "decisions differ from tally, trial " + std::to_string(trial));
    o.require(c.decisions().size() == expected.size(), "decision count, trial " + std::to_string(trial));
    std::set<FlowKey> unique;
    for (const auto& d : c.decisions()) o.require(unique.insert(d.flow).second, "flow decided twice");
  }
  return o;
}

Outcome end_to_end() {
  Outcome o;
  auto cfg = two_domain();
  Simulation sim(cfg, std::make_shared<const SvcModel>(load_model(cfg.model_path)));
  sim.run();
  auto m = sim.metrics();
  int attackers = 0;
  double worst = 0.0;
  for (const auto& f : m.flows) {
    if (f.kind != TrafficLabel::Attack) continue;
    ++attackers;
    o.require(f.block_time.has_value(), "attacker flow not blocked");
    if (!f.block_time) continue;
    worst = std::max(worst, *f.detection_latency());
    o.require(f.delivered_post_block == 0, "attacker packets delivered after block");
  }
  o.require(attackers == 3, "expected 3 attacker flows");
  o.require(worst <= 5.0, "detection latency " + std::to_string(worst));
  o.require(m.attacker_pkts_delivered_post_block == 0, "post-block deliveries");
  o.require(m.false_blocks == 0, "false blocks");
  const double ratio = m.legit_delivery_ratio.value_or(0.0);
  o.require(ratio >= 0.99, "legit delivery ratio " + std::to_string(ratio));
  if (o.ok)
    o.detail = "max detection latency " + std::to_string(worst) + " s, legit ratio " + std::to_string(ratio);
  return o;
}

Outcome determinism() {
  Outcome o;
  auto cfg = two_domain();
  auto model = std::make_shared<const SvcModel>(load_model(cfg.model_path));
  SimulationOptions opts;
  opts.record_trace = true;
  auto once = [&](const ScenarioConfig& c, std::string& metrics, std::string& trace) {
    auto sim = std::make_unique<Simulation>(c, model, opts);
    sim->run();
    metrics = metrics_to_json(sim->metrics(), sim->topology(), c);
    std::ostringstream t;
    write_trace(t, sim->trace());
    trace = t.str();
    return sim;
  };
  std::string m1, t1, m2, t2, m3, t3;
  auto clean = once(cfg, m1, t1);
  once(cfg, m2, t2);
  o.require(m1 == m2, "metrics differ between runs");
  o.require(t1 == t2, "event traces differ between runs");

  auto noisy_cfg = cfg;
  noisy_cfg.duplicate_control_prob = 0.3;
  auto noisy = once(noisy_cfg, m3, t3);
  std::size_t control_clean = 0, control_noisy = 0;
  for (const auto& ev : clean->trace()) control_clean += is_control_message(ev.message);
  for (const auto& ev : noisy->trace()) control_noisy += is_control_message(ev.message);
  o.require(control_noisy > control_clean, "duplication did not fire");
  for (NodeId sw : clean->topology().nodes_of_kind(NodeKind::Switch)) {
    o.require(clean->switch_state(sw).flow_table() == noisy->switch_state(sw).flow_table(), "flow tables differ");
    o.require(clean->switch_state(sw).blocked() == noisy->switch_state(sw).blocked(), "block sets differ");
  }
  if (o.ok)
    o.detail = std::to_string(control_noisy - control_clean) + " duplicated control messages";
  return o;
}

Outcome feature_identities() {
  Outcome o;
  std::mt19937_64 rng(1234);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const FlowKey main{EndpointAddr{1}, EndpointAddr{2}}, side{EndpointAddr{3}, EndpointAddr{2}};
  auto null_model = std::make_shared<SvcModel>();
  null_model->bias = -1.0;
  null_model->scaler = Scaler({0, 0, 0, 0}, {1, 1, 1, 1});
  std::size_t windows = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double W = 0.1 + 3.0 * unit();
    std::vector<TraceRow> rows, mine;
    double t = 20.0 * unit();
    const int n = 1 + static_cast<int>(rng() % 400);
    for (int i = 0; i < n; ++i) {
      t += unit() * unit() * unit() * 2.0 * W;
      const FlowKey f = rng() % 4 == 0 ? side : main;
      TraceRow r{t, f.src, f.dst, static_cast<std::uint32_t>(40 + rng() % 1460), TrafficLabel::Legit};
      rows.push_back(r);
      if (f == main) mine.push_back(r);
    }

    MonitorConfig cfg;
    cfg.mode = MonitorMode::Direct;
    cfg.window_len = W;
    Monitor mon(NodeId{20}, NodeId{0}, NodeId{1}, {}, cfg, null_model);
    std::vector<FeatureVector> seen;
    mon.set_window_log([&](const WindowRecord& r) {
      if (r.flow == main) seen.push_back(r.features);
    });
    for (const auto& r : rows) mon.ingest(MonPacket{NodeId{0}, NodeId{1}, r.src, r.dst, r.size_bytes}, r.timestamp);
    mon.flush(t + W);

    // Direct recomputation: group by floor((t - t0) / W).
    std::vector<std::vector<const TraceRow*>> groups;
    std::int64_t current = -1;
    for (const auto& r : mine) {
      auto k = static_cast<std::int64_t>(std::floor((r.timestamp - mine.front().timestamp) / W));
      if (k != current) groups.emplace_back();
      current = k;
      groups.back().push_back(&r);
    }
    o.require(groups.size() == seen.size(), "window count differs, trial " + std::to_string(trial));
    if (groups.size() != seen.size()) continue;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const auto& g = groups[i];
      double bytes = 0.0, gaps = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        bytes += g[j]->size_bytes;
        if (j > 0) gaps += g[j]->timestamp - g[j - 1]->timestamp;
      }
      const double cnt = static_cast<double>(g.size());
      const FeatureVector& f = seen[i];
      o.require(close_rel(f.pps, cnt / W, 1e-12), "pps");
      o.require(close_rel(f.mean_iat, g.size() > 1 ? gaps / (cnt - 1.0) : W, 1e-12), "mean_iat");
      o.require(close_rel(f.mean_size, bytes / cnt, 1e-12), "mean_size");
      o.require(close_rel(f.bps, bytes / W, 1e-12), "bps");
    }

    Dataset offline = windowize(mine, W);
    o.require(offline.size() == seen.size(), "windowize count differs");
    for (std::size_t i = 0; i < std::min(offline.size(), seen.size()); ++i)
      o.require(offline.rows[i].x == seen[i].to_vector(), "windowize differs from ingest");
    windows += seen.size();
  }
  if (o.ok) o.detail = std::to_string(windows) + " windows compared";
  return o;
}

}  // namespace

int main() {
  criterion("AC1", "detection quality on the default-ddos preset", 30.0, detection_quality);
  criterion("AC2", "SMO matches the dual oracle on 100 datasets", 60.0, smo_oracle);
  criterion("AC3", "switch semantics", 10.0, switch_semantics);
  criterion("AC4", "quorum exactness over 500 report sequences", 10.0, quorum_exactness);
  criterion("AC5", "two-domain end-to-end mitigation", 60.0, end_to_end);
  criterion("AC6", "determinism and idempotence under duplication", 0.0, determinism);
  criterion("AC7", "feature identities over 200 schedules", 0.0, feature_identities);
  return failures == 0 ? 0 : 1;
}

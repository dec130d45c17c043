#pragma once

// Top-of-rack monitor: per-flow tumbling windows over the mirrored packet
// stream, SVC classification, EWMA beliefs, peer gossip and reporting.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "rapidlearn/controller.hpp"
#include "rapidlearn/net_model.hpp"
#include "rapidlearn/svc.hpp"

namespace rapidlearn {

struct WindowStats {
  FlowKey flow;
  std::uint64_t window_index = 0;
  double start = 0.0;
  std::uint64_t pkt_count = 0;
  std::uint64_t byte_sum = 0;
  double sum_iat = 0.0;
  double last_arrival = 0.0;
};

struct FeatureVector {
  double pps = 0.0;
  double mean_iat = 0.0;
  double mean_size = 0.0;
  double bps = 0.0;

  static constexpr std::size_t kDims = 4;
  std::vector<double> to_vector() const { return {pps, mean_iat, mean_size, bps}; }
  bool operator==(const FeatureVector&) const = default;
};

// A one-packet window has no observable gap; its mean_iat is W.
FeatureVector compute_features(const WindowStats& stats, double window_len);

// Tumbling windows of width W anchored at each flow's first packet. Window
// k of a flow covers [t0 + kW, t0 + (k+1)W). Empty windows are never
// produced. Shared by the monitor and by offline trace windowing.
class FlowWindower {
 public:
  explicit FlowWindower(double window_len);

  double window_len() const { return window_len_; }

  // Adds a packet; returns the flow's previous window if this packet
  // starts a new one.
  std::optional<WindowStats> add(const FlowKey& flow, double time, std::uint32_t size_bytes);

  // Closes every open window, in flow-key order.
  std::vector<WindowStats> flush();

  const WindowStats* open_window(const FlowKey& flow) const;

 private:
  struct FlowState {
    double anchor = 0.0;
    WindowStats open;
  };

  double window_len_;
  std::map<FlowKey, FlowState> flows_;
};

enum class MonitorMode : std::uint8_t { Direct, Gossip };

std::string_view monitor_mode_name(MonitorMode mode);
std::optional<MonitorMode> parse_monitor_mode(std::string_view s);

struct MonitorConfig {
  double window_len = 1.0;
  double ewma_alpha = 0.5;
  double report_threshold = 0.5;
  double assist_threshold = 0.25;
  std::uint32_t peer_confirmations = 1;
  MonitorMode mode = MonitorMode::Gossip;
  std::optional<double> rate_limit;  // packets per second
  double vote_window = 10.0;         // freshness of peer flags and re-report spacing

  void validate() const;
};

// Capacity `rate` tokens, refilled at `rate` tokens per second, starts full.
class TokenBucket {
 public:
  TokenBucket(double rate, double now);
  bool admit(double now);
  double rate() const { return rate_; }

 private:
  double rate_;
  double tokens_;
  double last_;
};

struct WindowRecord {
  double time = 0.0;
  FlowKey flow;
  FeatureVector features;
  bool flag = false;
  double score = 0.0;
};

class Monitor {
 public:
  Monitor(NodeId id, NodeId controller, NodeId attached_switch, std::vector<NodeId> peers, MonitorConfig config,
          std::shared_ptr<const SvcModel> model);

  NodeId id() const { return id_; }
  const MonitorConfig& config() const { return config_; }

  std::vector<Outgoing> ingest(const MonPacket& mp, double now);
  std::vector<Outgoing> close_window(const WindowStats& stats, double now);
  std::optional<DdosYes> local_decision(const FlowKey& flow, double now);
  std::optional<DdosYes> receive_belief(const BeliefMsg& belief, double now);

  // Closes all open windows (end of a trace).
  std::vector<Outgoing> flush(double now);

  // Rate limiter hook for the co-located switch. Always admits flows whose
  // limiter is not engaged.
  bool admit(const FlowKey& flow, double now);
  bool limiter_engaged(const FlowKey& flow) const { return limiters_.count(flow) != 0; }
  void disengage(const FlowKey& flow) { limiters_.erase(flow); }

  double score(const FlowKey& flow) const;
  std::uint64_t reports_sent() const { return reports_sent_; }

  void set_window_log(std::function<void(const WindowRecord&)> sink) { window_log_ = std::move(sink); }

 private:
  struct PeerFlag {
    double score = 0.0;
    double time = 0.0;
  };
  struct Belief {
    double local_score = 0.0;
    std::map<NodeId, PeerFlag> peer_flags;
    std::optional<double> reported_at;
  };

  std::size_t fresh_peer_flags(const Belief& belief, double now) const;

  NodeId id_;
  NodeId controller_;
  NodeId switch_;
  std::vector<NodeId> peers_;
  MonitorConfig config_;
  std::shared_ptr<const SvcModel> model_;
  FlowWindower windows_;
  std::map<FlowKey, Belief> beliefs_;
  std::map<FlowKey, TokenBucket> limiters_;
  std::uint64_t reports_sent_ = 0;
  std::function<void(const WindowRecord&)> window_log_;
};

}  // namespace rapidlearn

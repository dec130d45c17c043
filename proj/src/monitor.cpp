#include "rapidlearn/monitor.hpp"

#include <algorithm>
#include <cmath>

#include "rapidlearn/error.hpp"

namespace rapidlearn {

FeatureVector compute_features(const WindowStats& stats, double window_len) {
  FeatureVector f;
  const double count = static_cast<double>(stats.pkt_count);
  const double bytes = static_cast<double>(stats.byte_sum);
  f.pps = count / window_len;
  f.mean_iat = stats.pkt_count > 1 ? stats.sum_iat / (count - 1.0) : window_len;
  f.mean_size = bytes / count;
  f.bps = bytes / window_len;
  return f;
}

FlowWindower::FlowWindower(double window_len) : window_len_(window_len) {
  if (!(window_len > 0.0)) throw Error(ErrorCode::InvalidConfig, "window length must be positive");
}

std::optional<WindowStats> FlowWindower::add(const FlowKey& flow, double time, std::uint32_t size_bytes) {
  auto it = flows_.find(flow);
  if (it == flows_.end()) {
    FlowState st;
    st.anchor = time;
    st.open = WindowStats{flow, 0, time, 1, size_bytes, 0.0, time};
    flows_.emplace(flow, st);
    return std::nullopt;
  }
  auto& st = it->second;
  double offset = std::floor((time - st.anchor) / window_len_);
  auto index = offset > 0.0 ? static_cast<std::uint64_t>(offset) : 0;
  if (index > st.open.window_index) {
    WindowStats closed = st.open;
    st.open = WindowStats{flow, index, st.anchor + static_cast<double>(index) * window_len_, 1, size_bytes, 0.0, time};
    return closed;
  }
  st.open.pkt_count += 1;
  st.open.byte_sum += size_bytes;
  st.open.sum_iat += time - st.open.last_arrival;
  st.open.last_arrival = time;
  return std::nullopt;
}

std::vector<WindowStats> FlowWindower::flush() {
  std::vector<WindowStats> out;
  out.reserve(flows_.size());
  for (auto& [flow, st] : flows_) out.push_back(st.open);
  flows_.clear();
  return out;
}

const WindowStats* FlowWindower::open_window(const FlowKey& flow) const {
  auto it = flows_.find(flow);
  return it == flows_.end() ? nullptr : &it->second.open;
}

std::string_view monitor_mode_name(MonitorMode mode) { return mode == MonitorMode::Direct ? "direct" : "gossip"; }

std::optional<MonitorMode> parse_monitor_mode(std::string_view s) {
  if (s == "direct") return MonitorMode::Direct;
  if (s == "gossip") return MonitorMode::Gossip;
  return std::nullopt;
}

void MonitorConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, "monitor." + what); };
  if (!(window_len > 0.0)) bad("window: must be positive");
  if (!(ewma_alpha > 0.0 && ewma_alpha <= 1.0)) bad("ewma_alpha: must be in (0, 1]");
  if (!(report_threshold > 0.0 && report_threshold <= 1.0)) bad("report_threshold: must be in (0, 1]");
  if (!(assist_threshold >= 0.0 && assist_threshold <= report_threshold))
    bad("assist_threshold: must be in [0, report_threshold]");
  if (rate_limit && !(*rate_limit > 0.0)) bad("rate_limit: must be positive");
  if (!(vote_window > 0.0)) bad("vote_window: must be positive");
}

TokenBucket::TokenBucket(double rate, double now) : rate_(rate), tokens_(rate), last_(now) {}

bool TokenBucket::admit(double now) {
  if (now > last_) {
    tokens_ = std::min(rate_, tokens_ + (now - last_) * rate_);
    last_ = now;
  }
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return true;
  }
  return false;
}

Monitor::Monitor(NodeId id, NodeId controller, NodeId attached_switch, std::vector<NodeId> peers, MonitorConfig config,
                 std::shared_ptr<const SvcModel> model)
    : id_(id),
      controller_(controller),
      switch_(attached_switch),
      peers_(std::move(peers)),
      config_(config),
      model_(std::move(model)),
      windows_(config.window_len) {
  config_.validate();
  std::sort(peers_.begin(), peers_.end());
}

std::vector<Outgoing> Monitor::ingest(const MonPacket& mp, double now) {
  auto closed = windows_.add(FlowKey{mp.src, mp.dst}, now, mp.size_bytes);
  if (!closed) return {};
  return close_window(*closed, now);
}

std::vector<Outgoing> Monitor::close_window(const WindowStats& stats, double now) {
  if (!model_) throw Error(ErrorCode::ModelMissing, "monitor " + std::to_string(id_.value) + " has no model");
  FeatureVector features = compute_features(stats, config_.window_len);
  bool flag = predict_attack(*model_, features.to_vector());

  auto& belief = beliefs_[stats.flow];
  const double a = config_.ewma_alpha;
  belief.local_score = std::clamp(a * (flag ? 1.0 : 0.0) + (1.0 - a) * belief.local_score, 0.0, 1.0);

  if (window_log_) window_log_(WindowRecord{now, stats.flow, features, flag, belief.local_score});

  std::vector<Outgoing> out;
  if (config_.mode == MonitorMode::Gossip && flag)
    for (NodeId peer : peers_) out.push_back({peer, BeliefMsg{stats.flow, belief.local_score, stats.window_index, id_}});
  if (auto report = local_decision(stats.flow, now)) out.push_back({controller_, *report});
  return out;
}

std::size_t Monitor::fresh_peer_flags(const Belief& belief, double now) const {
  const double cutoff = now - config_.vote_window;
  return static_cast<std::size_t>(std::count_if(belief.peer_flags.begin(), belief.peer_flags.end(),
                                                [&](const auto& kv) { return kv.second.time >= cutoff; }));
}

std::optional<DdosYes> Monitor::local_decision(const FlowKey& flow, double now) {
  auto& belief = beliefs_[flow];
  if (config_.rate_limit && belief.local_score >= config_.assist_threshold && !limiters_.count(flow))
    limiters_.emplace(flow, TokenBucket(*config_.rate_limit, now));

  if (belief.reported_at && now < *belief.reported_at + config_.vote_window) return std::nullopt;

  bool report = belief.local_score >= config_.report_threshold;
  if (!report && config_.mode == MonitorMode::Gossip && belief.local_score >= config_.assist_threshold)
    report = fresh_peer_flags(belief, now) >= config_.peer_confirmations;
  if (!report) return std::nullopt;

  belief.reported_at = now;
  ++reports_sent_;
  return DdosYes{switch_, flow.src, flow.dst, id_};
}

std::optional<DdosYes> Monitor::receive_belief(const BeliefMsg& belief, double now) {
  if (!std::binary_search(peers_.begin(), peers_.end(), belief.origin_monitor))
    throw Error(ErrorCode::UnknownPeer, "monitor " + std::to_string(belief.origin_monitor.value) +
                                            " is not a peer of " + std::to_string(id_.value));
  beliefs_[belief.flow].peer_flags[belief.origin_monitor] = PeerFlag{belief.score, now};
  return local_decision(belief.flow, now);
}

std::vector<Outgoing> Monitor::flush(double now) {
  std::vector<Outgoing> out;
  for (const auto& stats : windows_.flush()) {
    auto emitted = close_window(stats, now);
    out.insert(out.end(), emitted.begin(), emitted.end());
  }
  return out;
}

bool Monitor::admit(const FlowKey& flow, double now) {
  auto it = limiters_.find(flow);
  return it == limiters_.end() || it->second.admit(now);
}

double Monitor::score(const FlowKey& flow) const {
  auto it = beliefs_.find(flow);
  return it == beliefs_.end() ? 0.0 : it->second.local_score;
}

}  // namespace rapidlearn

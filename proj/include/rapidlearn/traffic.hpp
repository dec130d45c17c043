#pragma once

// Workload side: synthetic flow generation, CSV packet traces, conversion of
// labeled traces into classifier windows, and end-host behavior.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rapidlearn/monitor.hpp"
#include "rapidlearn/net_model.hpp"
#include "rapidlearn/svc.hpp"

namespace rapidlearn {

enum class ArrivalProcess : std::uint8_t { Poisson, Uniform };

std::optional<ArrivalProcess> parse_arrival(std::string_view s);

struct SizeDist {
  std::uint32_t lo = 100;  // fixed size when lo == hi
  std::uint32_t hi = 100;

  static SizeDist fixed(std::uint32_t bytes) { return {bytes, bytes}; }
  static SizeDist uniform(std::uint32_t lo, std::uint32_t hi) { return {lo, hi}; }
};

// One constant-rate phase of a flow, active over [start, stop).
struct RateSegment {
  double start = 0.0;
  double stop = 0.0;
  double rate = 0.0;
};

struct FlowSpec {
  EndpointAddr src;
  EndpointAddr dst;
  TrafficLabel kind = TrafficLabel::Legit;
  std::vector<RateSegment> segments;
  SizeDist size;
  ArrivalProcess arrival = ArrivalProcess::Poisson;

  double start() const;
};

struct TrafficSpec {
  std::vector<FlowSpec> flows;

  void validate() const;
};

struct TraceRow {
  double timestamp = 0.0;
  EndpointAddr src;
  EndpointAddr dst;
  std::uint32_t size_bytes = 1;
  std::optional<TrafficLabel> label;
  bool operator==(const TraceRow&) const = default;
};

// Rows sorted by timestamp; ties keep flow declaration order.
std::vector<TraceRow> generate_packets(const TrafficSpec& spec, std::uint64_t seed);

// Header is exactly "timestamp,src,dst,size_bytes" or
// "timestamp,src,dst,size_bytes,label". Addresses are unsigned integers or
// dotted IPv4 quads.
std::vector<TraceRow> read_trace_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<TraceRow> load_trace_csv(const std::filesystem::path& path);
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);
void save_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows);

std::optional<EndpointAddr> parse_endpoint(std::string_view s);

// Windows the trace with the monitor's windowing and feature rules; a
// window is labeled attack (+1) if any of its packets is.
Dataset windowize(const std::vector<TraceRow>& rows, double window_len);

// End host: injects its scheduled packets and counts the ones addressed to
// it.
class Host {
 public:
  Host(NodeId id, EndpointAddr addr, NodeId attached_switch);

  NodeId id() const { return id_; }
  EndpointAddr addr() const { return addr_; }
  NodeId attached_switch() const { return switch_; }

  void enqueue(Packet packet) { outbox_.push_back(std::move(packet)); }
  bool has_next() const { return next_ < outbox_.size(); }
  const Packet& peek() const { return outbox_[next_]; }
  Packet take_next() { return outbox_[next_++]; }

  // Returns true when the packet is addressed to this host and counted.
  bool receive(const Packet& packet);

  std::uint64_t received() const { return received_; }
  std::uint64_t sent() const { return next_; }

 private:
  NodeId id_;
  EndpointAddr addr_;
  NodeId switch_;
  std::vector<Packet> outbox_;
  std::size_t next_ = 0;
  std::uint64_t received_ = 0;
};

}  // namespace rapidlearn

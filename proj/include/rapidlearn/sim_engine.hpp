#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <queue>
#include <random>
#include <unordered_set>
#include <string>
#include <vector>

#include "rapidlearn/error.hpp"
#include "rapidlearn/net_model.hpp"

namespace rapidlearn {

struct Event {
  double fire_at = 0.0;
  std::uint64_t seq = 0;
  NodeId target;
  Message message;
};

struct EventHandle {
  std::uint64_t seq = 0;
};

using EventTrace = std::vector<Event>;

// One line per event: "<time> <seq> <target> <Tag> key=value ...".
std::string format_event(const Event& ev);
Event parse_event(std::string_view line);
void write_trace(std::ostream& out, const EventTrace& trace);

class SimulationError : public Error {
 public:
  SimulationError(const Event& ev, const std::string& what)
      : Error(ErrorCode::SimulationError, "while delivering [" + format_event(ev) + "]: " + what), event_(ev) {}
  const Event& event() const { return event_; }

 private:
  Event event_;
};

// Deterministic discrete-event core. Events fire in (fire_at, seq) order;
// seq is assigned at scheduling time, so equal-time events are FIFO.
class Engine {
 public:
  using Handler = std::function<void(const Event&)>;

  Engine() = default;

  double now() const { return now_; }
  std::size_t pending() const { return live_.size(); }

  EventHandle schedule(double delay, NodeId target, Message message);
  // Absolute-time variant; `time` must not be in the past.
  EventHandle schedule_at(double time, NodeId target, Message message);
  bool cancel(EventHandle handle);

  // Delivers once (absent fault injection) after the channel latency between
  // `from` and `to`. Throws NoRoute when the nodes share no channel.
  void send(const Topology& topology, NodeId from, NodeId to, Message message);

  // Control-plane fault injection: FlowMod, Broadcast and Block messages are
  // delivered twice with probability `p`. Uses its own RNG stream.
  void set_duplication(double p, std::uint64_t seed);

  void set_recording(bool on) { recording_ = on; }

  EventTrace run_until(double t_end, const Handler& handler);

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.seq > b.seq;
    }
  };

  double now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::unordered_set<std::uint64_t> live_;
  bool recording_ = true;
  double dup_prob_ = 0.0;
  std::mt19937_64 dup_rng_;
};

}  // namespace rapidlearn

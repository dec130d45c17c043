#include "rapidlearn/sim_engine.hpp"

#include <ostream>

#include "rapidlearn/text.hpp"

namespace rapidlearn {

std::string format_event(const Event& ev) {
  std::string out = text::format_double(ev.fire_at);
  out += ' ';
  out += std::to_string(ev.seq);
  out += ' ';
  out += std::to_string(ev.target.value);
  out += ' ';
  out += format_message(ev.message);
  return out;
}

Event parse_event(std::string_view line) {
  auto fail = [&] { throw Error(ErrorCode::MalformedMessage, "bad event line: " + std::string(line)); };
  line = text::trim(line);
  Event ev;
  for (int field = 0; field < 3; ++field) {
    auto sp = line.find(' ');
    if (sp == std::string_view::npos) fail();
    auto tok = line.substr(0, sp);
    line.remove_prefix(sp + 1);
    if (field == 0) {
      auto t = text::parse_double(tok);
      if (!t) fail();
      ev.fire_at = *t;
    } else {
      auto v = text::parse_uint(tok);
      if (!v) fail();
      if (field == 1) ev.seq = *v;
      else ev.target = NodeId{static_cast<std::uint32_t>(*v)};
    }
  }
  ev.message = parse_message(line);
  return ev;
}

void write_trace(std::ostream& out, const EventTrace& trace) {
  for (const auto& ev : trace) out << format_event(ev) << '\n';
}

EventHandle Engine::schedule(double delay, NodeId target, Message message) {
  if (!(delay >= 0.0)) throw Error(ErrorCode::NegativeDelay, "delay " + text::format_double(delay));
  Event ev{now_ + delay, next_seq_++, target, std::move(message)};
  live_.insert(ev.seq);
  EventHandle handle{ev.seq};
  queue_.push(std::move(ev));
  return handle;
}

EventHandle Engine::schedule_at(double time, NodeId target, Message message) {
  if (!(time >= now_))
    throw Error(ErrorCode::NegativeDelay, "time " + text::format_double(time) + " is before now " + text::format_double(now_));
  Event ev{time, next_seq_++, target, std::move(message)};
  live_.insert(ev.seq);
  EventHandle handle{ev.seq};
  queue_.push(std::move(ev));
  return handle;
}

bool Engine::cancel(EventHandle handle) { return live_.erase(handle.seq) != 0; }

void Engine::send(const Topology& topology, NodeId from, NodeId to, Message message) {
  auto latency = topology.channel_latency(from, to);
  if (!latency)
    throw Error(ErrorCode::NoRoute, "no channel from " + std::to_string(from.value) + " to " + std::to_string(to.value));
  bool duplicate = false;
  if (dup_prob_ > 0.0 && is_control_message(message)) {
    double u = static_cast<double>(dup_rng_() >> 11) * 0x1.0p-53;
    duplicate = u < dup_prob_;
  }
  if (duplicate) schedule(*latency, to, message);
  schedule(*latency, to, std::move(message));
}

void Engine::set_duplication(double p, std::uint64_t seed) {
  dup_prob_ = p;
  dup_rng_.seed(seed);
}

EventTrace Engine::run_until(double t_end, const Handler& handler) {
  EventTrace trace;
  while (!queue_.empty() && queue_.top().fire_at <= t_end) {
    Event ev = queue_.top();
    queue_.pop();
    if (live_.erase(ev.seq) == 0) continue;  // cancelled
    now_ = ev.fire_at;
    try {
      handler(ev);
    } catch (const SimulationError&) {
      throw;
    } catch (const std::exception& e) {
      throw SimulationError(ev, e.what());
    }
    if (recording_) trace.push_back(std::move(ev));
  }
  if (t_end > now_) now_ = t_end;
  return trace;
}

}  // namespace rapidlearn

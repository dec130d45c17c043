#include "rapidlearn/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "rapidlearn/error.hpp"
#include "rapidlearn/rng.hpp"
#include "rapidlearn/text.hpp"

namespace rapidlearn {

std::optional<ArrivalProcess> parse_arrival(std::string_view s) {
  if (s == "poisson") return ArrivalProcess::Poisson;
  if (s == "uniform") return ArrivalProcess::Uniform;
  return std::nullopt;
}

double FlowSpec::start() const {
  double t = segments.empty() ? 0.0 : segments.front().start;
  for (const auto& seg : segments) t = std::min(t, seg.start);
  return t;
}

void TrafficSpec::validate() const {
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto& f = flows[i];
    auto bad = [&](const std::string& why) {
      throw Error(ErrorCode::InvalidSpec, "traffic.flows[" + std::to_string(i) + "]: " + why);
    };
    if (f.segments.empty()) bad("no active segment");
    for (const auto& seg : f.segments) {
      if (!std::isfinite(seg.start) || !std::isfinite(seg.stop) || !(seg.start < seg.stop))
        bad("start must be before stop");
      if (seg.start < 0.0) bad("start must be non-negative");
      if (!(seg.rate > 0.0) || !std::isfinite(seg.rate)) bad("rate must be positive");
    }
    if (f.size.lo < 1 || f.size.lo > f.size.hi) bad("size range must satisfy 1 <= lo <= hi");
    if (f.src == f.dst) bad("src and dst must differ");
  }
}

std::vector<TraceRow> generate_packets(const TrafficSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<TraceRow> rows;
  for (std::size_t idx = 0; idx < spec.flows.size(); ++idx) {
    const auto& flow = spec.flows[idx];
    Rng rng = Rng::derived(seed, idx);
    auto emit = [&](double t) {
      std::uint32_t size = flow.size.lo == flow.size.hi
                               ? flow.size.lo
                               : static_cast<std::uint32_t>(rng.uniform_int(flow.size.lo, flow.size.hi));
      rows.push_back(TraceRow{t, flow.src, flow.dst, size, flow.kind});
    };
    for (const auto& seg : flow.segments) {
      if (flow.arrival == ArrivalProcess::Uniform) {
        for (std::uint64_t i = 0;; ++i) {
          double t = seg.start + static_cast<double>(i) / seg.rate;
          if (t >= seg.stop) break;
          emit(t);
        }
      } else {
        for (double t = seg.start + rng.exponential(seg.rate); t < seg.stop; t += rng.exponential(seg.rate)) emit(t);
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const TraceRow& a, const TraceRow& b) { return a.timestamp < b.timestamp; });
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr std::string_view kHeader = "timestamp,src,dst,size_bytes";
constexpr std::string_view kHeaderLabeled = "timestamp,src,dst,size_bytes,label";

}  // namespace

std::optional<EndpointAddr> parse_endpoint(std::string_view s) {
  s = text::trim(s);
  if (s.find('.') == std::string_view::npos) {
    auto v = text::parse_uint(s);
    if (!v || *v > 0xffffffffULL) return std::nullopt;
    return EndpointAddr{static_cast<std::uint32_t>(*v)};
  }
  auto parts = text::split(s, '.');
  if (parts.size() != 4) return std::nullopt;
  std::uint32_t value = 0;
  for (auto part : parts) {
    auto octet = text::parse_uint(part);
    if (!octet || *octet > 255 || part.size() > 3) return std::nullopt;
    value = (value << 8) | static_cast<std::uint32_t>(*octet);
  }
  return EndpointAddr{value};
}

std::vector<TraceRow> read_trace_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](ErrorCode code, const std::string& why) {
    throw Error(code, source + ":" + std::to_string(line_no) + ": " + why);
  };
  if (!std::getline(in, line)) {
    line_no = 1;
    fail(ErrorCode::MalformedRow, "missing header");
  }
  ++line_no;
  auto header = text::trim(line);
  if (!header.empty() && static_cast<unsigned char>(header.front()) == 0xEF && header.substr(0, 3) == "\xEF\xBB\xBF")
    header.remove_prefix(3);
  bool labeled;
  if (header == kHeader) labeled = false;
  else if (header == kHeaderLabeled) labeled = true;
  else fail(ErrorCode::MalformedRow, "header must be '" + std::string(kHeaderLabeled) + "' (label optional)");
  const std::size_t columns = labeled ? 5 : 4;

  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    auto trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    auto cells = text::split(trimmed, ',');
    if (cells.size() != columns)
      fail(ErrorCode::MalformedRow, "expected " + std::to_string(columns) + " columns, got " + std::to_string(cells.size()));
    TraceRow row;
    auto ts = text::parse_double(cells[0]);
    if (!ts || !std::isfinite(*ts)) fail(ErrorCode::MalformedRow, "bad timestamp '" + std::string(cells[0]) + "'");
    row.timestamp = *ts;
    auto src = parse_endpoint(cells[1]);
    auto dst = parse_endpoint(cells[2]);
    if (!src) fail(ErrorCode::MalformedRow, "bad src '" + std::string(cells[1]) + "'");
    if (!dst) fail(ErrorCode::MalformedRow, "bad dst '" + std::string(cells[2]) + "'");
    row.src = *src;
    row.dst = *dst;
    auto size = text::parse_uint(cells[3]);
    if (!size || *size < 1 || *size > 0xffffffffULL)
      fail(ErrorCode::MalformedRow, "bad size_bytes '" + std::string(cells[3]) + "'");
    row.size_bytes = static_cast<std::uint32_t>(*size);
    if (labeled) {
      auto cell = text::trim(cells[4]);
      if (!cell.empty()) {
        row.label = parse_label(cell);
        if (!row.label) fail(ErrorCode::UnknownLabel, "unknown label '" + std::string(cell) + "'");
      }
    }
    if (!rows.empty() && row.timestamp < rows.back().timestamp)
      fail(ErrorCode::UnsortedTrace, "timestamp " + std::string(cells[0]) + " precedes the previous row");
    rows.push_back(row);
  }
  return rows;
}

std::vector<TraceRow> load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open trace " + path.string());
  return read_trace_csv(in, path.string());
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  bool labeled = std::any_of(rows.begin(), rows.end(), [](const TraceRow& r) { return r.label.has_value(); });
  out << (labeled ? kHeaderLabeled : kHeader) << '\n';
  std::string line;
  for (const auto& r : rows) {
    line = text::format_double(r.timestamp);
    line += ',';
    line += std::to_string(r.src.value);
    line += ',';
    line += std::to_string(r.dst.value);
    line += ',';
    line += std::to_string(r.size_bytes);
    if (labeled) {
      line += ',';
      if (r.label) line += label_name(*r.label);
    }
    line += '\n';
    out << line;
  }
}

void save_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_trace_csv(out, rows);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------

Dataset windowize(const std::vector<TraceRow>& rows, double window_len) {
  FlowWindower windows(window_len);
  std::map<FlowKey, bool> open_attack;
  Dataset data;
  auto emit = [&](const WindowStats& stats, bool attack) {
    data.rows.push_back(Sample{compute_features(stats, window_len).to_vector(), attack ? 1 : -1});
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (!row.label) throw Error(ErrorCode::MissingLabel, "trace row " + std::to_string(i + 1) + " has no label");
    FlowKey flow{row.src, row.dst};
    if (auto closed = windows.add(flow, row.timestamp, row.size_bytes)) {
      emit(*closed, open_attack[flow]);
      open_attack[flow] = false;
    }
    open_attack[flow] = open_attack[flow] || *row.label == TrafficLabel::Attack;
  }
  for (const auto& stats : windows.flush()) emit(stats, open_attack[stats.flow]);
  return data;
}

Host::Host(NodeId id, EndpointAddr addr, NodeId attached_switch) : id_(id), addr_(addr), switch_(attached_switch) {}

bool Host::receive(const Packet& packet) {
  if (packet.dst != addr_) return false;
  ++received_;
  return true;
}

}  // namespace rapidlearn

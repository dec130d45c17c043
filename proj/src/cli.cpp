#include "rapidlearn/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "rapidlearn/presets.hpp"
#include "rapidlearn/rng.hpp"
#include "rapidlearn/scenario.hpp"
#include "rapidlearn/simulation.hpp"
#include "rapidlearn/svc.hpp"
#include "rapidlearn/text.hpp"
#include "rapidlearn/traffic.hpp"

namespace rapidlearn {

namespace {

using json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;
constexpr std::uint64_t kDefaultSeed = 42;
constexpr std::uint64_t kSplitStream = 0x73706c6974ULL;

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  return f;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("RAPIDLEARN_SEED");
  if (!v || !*v) return std::nullopt;
  auto seed = text::parse_uint(v);
  if (!seed) throw Error(ErrorCode::Usage, std::string("RAPIDLEARN_SEED: not an unsigned integer: ") + v);
  return seed;
}

// flag > env > fallback
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (auto e = env_seed()) return *e;
  return fallback;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json eval_json(const EvalReport& r) {
  return json{{"tp", r.tp},
              {"fp", r.fp},
              {"tn", r.tn},
              {"fn", r.fn},
              {"precision", opt(r.precision())},
              {"recall", opt(r.recall())},
              {"accuracy", opt(r.accuracy())}};
}

struct TrainArgs {
  std::string trace, out;
  double c = 10.0, gamma = 0.5, window = 1.0, split = 0.7;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  if (!(a.split > 0.0 && a.split <= 1.0))
    throw Error(ErrorCode::InvalidSplit, "--split must be in (0, 1], got " + text::format_double(a.split));
  if (!(a.window > 0.0)) throw Error(ErrorCode::Usage, "--window must be positive");
  const std::uint64_t seed = resolve_seed(a.seed, kDefaultSeed);
  Dataset all = windowize(load_trace_csv(a.trace), a.window);

  Dataset train, test;
  if (a.split == 1.0) {
    train = all;
    test = all;
  } else {
    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng::derived(seed, kSplitStream).shuffle(order);
    auto n_train = static_cast<std::size_t>(a.split * static_cast<double>(all.size()));
    for (std::size_t i = 0; i < order.size(); ++i) (i < n_train ? train : test).rows.push_back(all.rows[order[i]]);
  }

  FitOptions fo;
  fo.C = a.c;
  fo.gamma = a.gamma;
  fo.seed = seed;
  SvcModel model = fit(train, fo);
  save_model(model, a.out);

  json doc{{"schema_version", kSchemaVersion},
           {"command", "train"},
           {"seed", seed},
           {"windows", all.size()},
           {"train_size", train.size()},
           {"test_size", test.size()},
           {"support_vectors", model.support_vectors.size()},
           {"model", a.out},
           {"eval", eval_json(evaluate(model, test))}};
  out << doc.dump(2) << '\n';
  return 0;
}

struct EvaluateArgs {
  std::string trace, model;
  double window = 1.0;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  if (!(a.window > 0.0)) throw Error(ErrorCode::Usage, "--window must be positive");
  SvcModel model = load_model(a.model);
  Dataset data = windowize(load_trace_csv(a.trace), a.window);
  json doc{{"schema_version", kSchemaVersion},
           {"command", "evaluate"},
           {"windows", data.size()},
           {"eval", eval_json(evaluate(model, data))}};
  out << doc.dump(2) << '\n';
  return 0;
}

struct SimulateArgs {
  std::string scenario, model, out, trace_out, window_log;
  std::optional<std::uint64_t> seed;
  std::optional<double> duplicate_prob;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  ScenarioConfig config = load_scenario(a.scenario);
  if (!a.model.empty()) config.model_path = a.model;
  config.seed = resolve_seed(a.seed, config.seed);
  if (a.duplicate_prob) {
    if (!(*a.duplicate_prob >= 0.0 && *a.duplicate_prob <= 1.0))
      throw Error(ErrorCode::Usage, "--duplicate-prob must be in [0, 1]");
    config.duplicate_control_prob = *a.duplicate_prob;
  }
  auto model = std::make_shared<const SvcModel>(load_model(config.model_path));

  std::map<NodeId, std::string> names;
  for (const Node& n : config.topology.nodes) names[n.id] = n.name;

  std::optional<std::ofstream> window_log;
  SimulationOptions options;
  options.record_trace = !a.trace_out.empty();
  if (!a.window_log.empty()) {
    window_log = open_out(a.window_log);
    *window_log << "time,monitor,flow_src,flow_dst,pps,mean_iat,mean_size,bps,flag,score\n";
    options.window_log = [&log = *window_log, &names](NodeId mon, const WindowRecord& r) {
      log << text::format_double(r.time) << ',' << names.at(mon) << ',' << r.flow.src.value << ','
          << r.flow.dst.value << ',' << text::format_double(r.features.pps) << ','
          << text::format_double(r.features.mean_iat) << ',' << text::format_double(r.features.mean_size) << ','
          << text::format_double(r.features.bps) << ',' << (r.flag ? 1 : 0) << ',' << text::format_double(r.score)
          << '\n';
    };
  }

  Simulation sim(config, model, std::move(options));
  sim.run();

  std::string metrics = metrics_to_json(sim.metrics(), sim.topology(), config);
  if (a.out.empty()) {
    out << metrics;
  } else {
    auto f = open_out(a.out);
    f << metrics;
  }
  if (!a.trace_out.empty()) {
    auto f = open_out(a.trace_out);
    write_trace(f, sim.trace());
  }
  return 0;
}

struct GenTraceArgs {
  std::string spec, preset, out;
  std::optional<std::uint64_t> seed;
};

int cmd_gen_trace(const GenTraceArgs& a, std::ostream& out) {
  if (a.spec.empty() == a.preset.empty()) throw Error(ErrorCode::Usage, "give exactly one of --spec or --preset");
  TrafficSpec spec;
  if (!a.spec.empty()) {
    spec = parse_traffic_spec(read_file(a.spec), a.spec);
  } else {
    auto p = traffic_preset(a.preset);
    if (!p) throw Error(ErrorCode::Usage, "unknown preset " + a.preset);
    spec = std::move(*p);
  }
  spec.validate();
  const std::uint64_t seed = resolve_seed(a.seed, kDefaultSeed);
  auto rows = generate_packets(spec, seed);
  if (a.out.empty()) {
    write_trace_csv(out, rows);
    return 0;
  }
  save_trace_csv(a.out, rows);
  out << json{{"schema_version", kSchemaVersion}, {"command", "gen-trace"}, {"seed", seed}, {"rows", rows.size()},
              {"out", a.out}}
             .dump(2)
      << '\n';
  return 0;
}

// Replays a saved event trace into the state the control plane built.
int cmd_inspect(const std::string& trace_path, std::ostream& out) {
  std::ifstream in(trace_path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + trace_path);
  std::map<std::uint32_t, FlowTable> tables;
  std::map<std::uint32_t, std::set<FlowKey>> blocks;
  VoteLedger ledger;
  std::map<std::uint32_t, std::set<FlowKey>> reported;  // controller -> flows
  std::uint64_t events = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    Event ev;
    try {
      ev = parse_event(line);
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedMessage, trace_path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    ++events;
    const std::uint32_t target = ev.target.value;
    if (const auto* fm = std::get_if<FlowMod>(&ev.message)) {
      tables[target].install(fm->dst_addr, fm->out_port);
    } else if (const auto* b = std::get_if<Block>(&ev.message)) {
      blocks[target].insert(FlowKey{b->src, b->dst});
    } else if (const auto* r = std::get_if<DdosYes>(&ev.message)) {
      FlowKey key{r->src, r->dst};
      ledger.record(key, r->monitor, r->switch_id, ev.fire_at);
      reported[target].insert(key);
    }
  }

  json doc{{"schema_version", kSchemaVersion}, {"command", "inspect"}, {"events", events}};
  json jt = json::object();
  for (const auto& [sw, table] : tables) {
    json rows = json::array();
    for (const auto& e : table.entries())
      rows.push_back(json{{"priority", e.priority}, {"dst", e.dst.value}, {"out_port", e.out_port.value}});
    jt[std::to_string(sw)] = std::move(rows);
  }
  doc["flow_tables"] = std::move(jt);
  json jb = json::object();
  for (const auto& [sw, set] : blocks) {
    json rows = json::array();
    for (const auto& k : set) rows.push_back(json{{"src", k.src.value}, {"dst", k.dst.value}});
    jb[std::to_string(sw)] = std::move(rows);
  }
  doc["blocks"] = std::move(jb);
  json jv = json::object();
  for (const auto& [ctrl, flows] : reported) {
    json rows = json::array();
    for (const auto& k : flows) {
      json voters = json::array();
      if (const auto* v = ledger.voters(k)) {
        for (const auto& [mon, vote] : *v)
          voters.push_back(json{{"monitor", mon.value},
                                {"switch", vote.reporting_switch.value},
                                {"first_report", vote.first_report},
                                {"last_report", vote.last_report}});
      }
      rows.push_back(json{{"src", k.src.value}, {"dst", k.dst.value}, {"voters", std::move(voters)}});
    }
    jv[std::to_string(ctrl)] = std::move(rows);
  }
  doc["votes"] = std::move(jv);
  out << doc.dump(2) << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"rapidlearn: distributed DDoS detection and mitigation simulator"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* sc_train = app.add_subcommand("train", "Fit an SVC on a labeled trace and report held-out metrics");
  sc_train->add_option("--trace", train.trace, "Labeled trace CSV")->required();
  sc_train->add_option("--out", train.out, "Model file to write")->required();
  sc_train->add_option("--c", train.c, "Box constraint C")->capture_default_str();
  sc_train->add_option("--gamma", train.gamma, "RBF kernel gamma")->capture_default_str();
  sc_train->add_option("--window", train.window, "Window length in seconds")->capture_default_str();
  sc_train->add_option("--split", train.split, "Training fraction in (0, 1]; 1 evaluates on the training set")
      ->capture_default_str();
  sc_train->add_option("--seed", train.seed, "Shuffle and solver seed");

  EvaluateArgs ev;
  auto* sc_eval = app.add_subcommand("evaluate", "Score a labeled trace with an existing model");
  sc_eval->add_option("--trace", ev.trace, "Labeled trace CSV")->required();
  sc_eval->add_option("--model", ev.model, "Model file")->required();
  sc_eval->add_option("--window", ev.window, "Window length in seconds")->capture_default_str();

  SimulateArgs sim;
  auto* sc_sim = app.add_subcommand("simulate", "Run a scenario and write metrics JSON");
  sc_sim->add_option("--scenario", sim.scenario, "Scenario TOML file")->required();
  sc_sim->add_option("--model", sim.model, "Override the scenario's model_path");
  sc_sim->add_option("--seed", sim.seed, "Override the scenario seed");
  sc_sim->add_option("--out", sim.out, "Metrics JSON file (default: stdout)");
  sc_sim->add_option("--trace-out", sim.trace_out, "Event trace file");
  sc_sim->add_option("--window-log", sim.window_log, "Per-window classification CSV");
  sc_sim->add_option("--duplicate-prob", sim.duplicate_prob, "Control-message duplication probability");

  GenTraceArgs gen;
  auto* sc_gen = app.add_subcommand("gen-trace", "Generate a labeled packet trace");
  auto* o_spec = sc_gen->add_option("--spec", gen.spec, "Traffic spec TOML file");
  auto* o_preset = sc_gen->add_option("--preset", gen.preset, "Built-in spec: default-ddos");
  o_spec->excludes(o_preset);
  sc_gen->add_option("--seed", gen.seed, "Generator seed");
  sc_gen->add_option("--out", gen.out, "Trace CSV to write (default: stdout)");

  std::string inspect_trace;
  auto* sc_inspect = app.add_subcommand("inspect", "Rebuild flow tables, block sets and votes from an event trace");
  sc_inspect->add_option("--trace", inspect_trace, "Event trace written by simulate --trace-out")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "Usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*sc_train) return cmd_train(train, out);
    if (*sc_eval) return cmd_evaluate(ev, out);
    if (*sc_sim) return cmd_simulate(sim, out);
    if (*sc_gen) return cmd_gen_trace(gen, out);
    if (*sc_inspect) return cmd_inspect(inspect_trace, out);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return is_validation_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace rapidlearn

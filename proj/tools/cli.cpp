#include "cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "clauseviz/control_api.hpp"
#include "clauseviz/formats.hpp"
#include "clauseviz/json_io.hpp"
#include "clauseviz/render.hpp"
#include "clauseviz/transport.hpp"

namespace clauseviz::cli {

namespace {

using nlohmann::json;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

void add_graph_options(Settings& s) {
    s.option("reduction", "ring", "hyperedge reduction: ring|clique");
    s.option("weight-fn", "inv-size-minus-one", "clause weight: inv-size-minus-one|inv-size|exp-decay");
}

void add_session_options(Settings& s) {
    add_graph_options(s);
    s.option("heat-mode", "window", "heat mode: window|decay");
    s.option("heat-k", "1000", "heat window / decay span in events");
    s.option("palette", "#00008B,#FFFF00,#FF0000", "heat colors, cold to hot");
    s.flag("include-deletions", "let deleted clauses add heat too");
    s.option("contract-target", "30000", "contract until at most this many nodes");
    s.option("contract-levels", "10", "maximum contraction steps");
    s.option("contract-rounds", "10", "label propagation rounds per step");
    s.option("tie-break", "keep-random", "label tie-break: keep-random|smallest");
    s.option("vote", "weighted", "label vote: weighted|count");
    s.option("seed", "1", "seed for contraction and layout");
    s.option("layout-iterations", "500", "spring embedder iterations");
    s.option("layout-theta", "0.9", "Barnes-Hut opening angle");
    s.option("layout-attraction", "1.0", "spring strength");
    s.option("layout-cooling", "0.1", "initial step as a fraction of the box diagonal");
    s.option("layout-gravity", "0.02", "pull toward the centroid");
    s.option("layout-budget-ms", "0", "wall-clock cap per layout, 0 = none");
    s.option("fps", "30", "frame rate");
    s.option("events-per-frame", "0", "events per frame, 0 = all buffered");
    s.option("checkpoint-interval", "10000", "events between seek checkpoints");
    s.option("memory-budget", "0", "events kept in memory before spilling to disk, 0 = unlimited");
    s.option("spill-dir", "", "directory for the spill file");
}

template <class Fn>
auto usage_guard(const std::string& flag, Fn fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        throw UsageError("--" + flag + ": " + e.what());
    }
}

TransformConfig transform_config(const Settings& s) {
    TransformConfig c;
    c.reduction = usage_guard("reduction", [&] { return parse_reduction(s.str("reduction")); });
    c.weight_function = usage_guard("weight-fn", [&] { return parse_weight_function(s.str("weight-fn")); });
    return c;
}

SessionConfig session_config(const Settings& s) {
    SessionConfig c;
    c.transform = transform_config(s);
    c.heat.mode = usage_guard("heat-mode", [&] { return parse_heat_mode(s.str("heat-mode")); });
    c.heat.k = s.count("heat-k");
    c.heat.palette = usage_guard("palette", [&] { return parse_palette(s.str("palette")); });
    c.heat.include_deletions = s.boolean("include-deletions");
    c.contraction.target_size = s.count("contract-target");
    c.contraction.max_levels = s.count("contract-levels");
    c.contraction.max_rounds = s.count("contract-rounds");
    const std::string tie = s.str("tie-break");
    if (tie == "smallest") {
        c.contraction.propagation.tie_break = TieBreak::SmallestLabel;
    } else if (tie != "keep-random") {
        throw UsageError("--tie-break: expected keep-random|smallest");
    }
    const std::string vote = s.str("vote");
    if (vote == "count") {
        c.contraction.propagation.vote = VoteMode::Count;
    } else if (vote != "weighted") {
        throw UsageError("--vote: expected weighted|count");
    }
    c.contraction.seed = s.count("seed");
    c.layout.seed = c.contraction.seed;
    c.layout.iterations = s.count("layout-iterations");
    c.layout.theta = s.real("layout-theta");
    c.layout.attraction = s.real("layout-attraction");
    c.layout.cooling = s.real("layout-cooling");
    c.layout.gravity = s.real("layout-gravity");
    if (const auto ms = s.count("layout-budget-ms"); ms > 0) c.layout.time_budget = std::chrono::milliseconds(ms);
    c.frame_rate = s.real("fps");
    c.chunk = ChunkPolicy{s.count("events-per-frame")};
    c.checkpoint_interval = s.count("checkpoint-interval");
    c.memory_budget = s.count("memory-budget");
    c.spill_dir = s.str("spill-dir");
    usage_guard("config", [&] {
        c.validate();
        return 0;
    });
    return c;
}

Endpoint endpoint(const Settings& s, const std::string& name) {
    return usage_guard(name, [&] { return Endpoint::parse(s.str(name)); });
}

void require(const Settings& s, const std::string& name) {
    if (!s.has(name)) throw UsageError("--" + name + " is required");
}

void print_stats(std::ostream& out, const Settings& s, const json& stats) {
    if (s.boolean("stats")) out << stats.dump() << '\n';
}

CnfFormula load_cnf(const std::string& path, std::ostream& err) {
    ParseReport report;
    CnfFormula f = parse_dimacs_file(path, &report);
    for (const std::string& w : report.warnings) err << "warning: " << path << ": " << w << '\n';
    return f;
}

int cmd_produce(const Settings& s, std::ostream& out, std::ostream& err) {
    require(s, "connect");
    if (s.has("proof") == s.has("solver")) throw UsageError("give exactly one of --proof and --solver");
    ProducerOptions options;
    options.rate = s.real("rate");
    if (options.rate < 0) throw UsageError("--rate must not be negative");
    options.num_variables_hint = s.count("num-vars");
    const Endpoint target = endpoint(s, "connect");
    const auto started = std::chrono::steady_clock::now();
    json stats;
    if (s.has("proof")) {
        ProofFileSource source(s.str("proof"));
        const ProducerOutcome o = run_producer(std::ref(source), target, options);
        stats["events_sent"] = o.events_sent;
    } else {
        SolverProcessSource source(s.str("solver"));
        const ProducerOutcome o = run_producer(std::ref(source), target, options);
        stats["events_sent"] = o.events_sent;
        stats["skipped_lines"] = source.skipped_lines();
        stats["solver_exit"] = source.close();
    }
    stats["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    err << "sent " << stats["events_sent"].get<std::uint64_t>() << " events to " << target.to_string() << '\n';
    print_stats(out, s, stats);
    return 0;
}

int cmd_view(const Settings& s, std::ostream& out, std::ostream& err) {
    require(s, "cnf");
    require(s, "listen");
    const SessionConfig config = session_config(s);
    const Endpoint listen = endpoint(s, "listen");
    const Endpoint api = endpoint(s, "api");
    const CnfFormula formula = load_cnf(s.str("cnf"), err);

    Session session(formula, config);
    SessionRunner runner(session);
    ConsumerListener listener(listen);
    ControlServer server(runner, api);
    err << "producer endpoint " << listen.host << ':' << listener.port() << '\n';
    err << "control API http://" << api.host << ':' << server.port() << "/api/state\n";
    if (!s.boolean("paused")) session.play();
    runner.start();

    std::atomic<bool> stop{false};
    std::optional<ConsumerOutcome> outcome;
    std::string ingest_error;
    std::thread ingest([&] {
        try {
            outcome = listener.serve_one([&](ClauseEvent e) { session.log().append(std::move(e)); }, 0, &stop);
        } catch (const std::exception& e) {
            ingest_error = e.what();
        }
        session.log().close();
    });

    g_interrupted = false;
    auto old_int = std::signal(SIGINT, on_signal);
    auto old_term = std::signal(SIGTERM, on_signal);
    const bool exit_on_end = s.boolean("exit-on-end");
    while (!g_interrupted) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        if (exit_on_end && runner.status() == PlaybackStatus::Ended) break;
    }
    std::signal(SIGINT, old_int);
    std::signal(SIGTERM, old_term);

    stop = true;
    ingest.join();
    server.stop();
    runner.stop();
    if (!ingest_error.empty()) err << "ingest: " << ingest_error << '\n';

    json stats = {{"events_received", outcome ? outcome->events_received : 0},
                  {"terminated", outcome && outcome->terminated},
                  {"cursor", session.cursor()},
                  {"frames", session.frame().frame_index},
                  {"unknown_deletes", session.frame().stats.unknown_deletes}};
    print_stats(out, s, stats);
    return ingest_error.empty() ? 0 : 2;
}

int cmd_render(const Settings& s, std::ostream& out, std::ostream& err) {
    require(s, "cnf");
    require(s, "proof");
    require(s, "out");
    const SessionConfig config = session_config(s);
    ExportOptions options;
    options.out_dir = s.str("out");
    options.fps = config.frame_rate;
    options.frames = s.count("frames");
    options.events_per_frame = config.chunk.fixed;
    options.relayout_every = s.count("relayout-every");
    options.svg = s.boolean("svg");
    options.png = !s.boolean("no-png");
    options.style.width = static_cast<int>(s.integer("width"));
    options.style.height = static_cast<int>(s.integer("height"));
    options.style.palette = config.heat.palette;
    if (options.frames == 0) throw UsageError("--frames must be positive");

    const CnfFormula formula = load_cnf(s.str("cnf"), err);
    Session session(formula, config);
    std::uint64_t events = 0;
    for (ClauseEvent& e : read_drat_file(s.str("proof"))) {
        session.log().append(std::move(e));
        ++events;
    }
    session.log().close();
    const auto started = std::chrono::steady_clock::now();
    const ExportResult result = export_sequence(session, options);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    err << "wrote " << result.frames_written << " frames and " << result.manifest.string() << '\n';
    if (s.boolean("stats")) {
        print_stats(out, s,
                    {{"frames", result.frames_written},
                     {"events", events},
                     {"cursor", session.cursor()},
                     {"seconds", seconds},
                     {"manifest", result.manifest.string()},
                     {"encoder_command", result.encoder_command}});
    } else {
        out << result.encoder_command << '\n';
    }
    return 0;
}

void write_to(const std::string& path, const std::function<void(std::ostream&)>& write, std::ostream& out) {
    if (path == "-") {
        write(out);
        return;
    }
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write " + path);
    write(file);
    if (!file) throw std::runtime_error("write to " + path + " failed");
}

int cmd_transform(const Settings& s, std::ostream& out, std::ostream& err) {
    require(s, "cnf");
    const TransformConfig config = transform_config(s);
    const std::string format = s.str("format");
    if (format != "edges" && format != "dot") throw UsageError("--format: expected edges|dot");
    // Parsed up front so bad values are reported even when unused.
    ContractionConfig cc;
    cc.target_size = s.count("contract-target");
    cc.seed = s.count("seed");
    if (cc.target_size == 0) throw UsageError("--contract-target must be positive");
    LayoutConfig lc;
    lc.seed = cc.seed;
    lc.iterations = s.count("layout-iterations");
    usage_guard("layout-iterations", [&] {
        lc.validate();
        return 0;
    });
    ParseReport report;
    const CnfFormula formula = parse_dimacs_file(s.str("cnf"), &report);
    for (const std::string& w : report.warnings) err << "warning: " << w << '\n';

    InteractionGraph vig(formula, config);
    std::uint64_t events = 0;
    if (s.has("proof")) {
        ProofFileSource source(s.str("proof"));
        while (auto e = source()) {
            vig.apply(*e);
            ++events;
        }
    }
    const WeightedGraph& graph = vig.graph();
    if (s.has("out")) {
        write_to(s.str("out"), [&](std::ostream& o) {
            if (format == "dot") {
                write_dot(o, graph, 1);
            } else {
                write_edge_list(o, graph, 1);
            }
        }, out);
    }

    json stats = {{"variables", graph.node_count()},
                  {"clauses", formula.clauses.size()},
                  {"tautologies_dropped", report.tautologies_dropped},
                  {"proof_events", events},
                  {"unknown_deletes", vig.unknown_deletes()},
                  {"edges", graph.edge_count()},
                  {"total_weight", graph.total_weight()}};

    if (s.has("map-out") || s.has("positions")) {
        const ContractionHierarchy h = build_hierarchy(vig.rebuild(), cc);
        stats["levels"] = h.level_count();
        stats["top_nodes"] = h.top().graph.node_count();
        if (s.has("map-out")) {
            const auto map = h.map_to_top();
            write_to(s.str("map-out"), [&](std::ostream& o) {
                for (std::size_t v = 0; v < map.size(); ++v) o << v + 1 << ' ' << map[v] << '\n';
            }, out);
        }
        if (s.has("positions")) {
            if (h.top().graph.node_count() == 0) throw std::runtime_error("formula has no variables to lay out");
            const LayoutResult r = layout(h.top().graph, lc);
            write_to(s.str("positions"), [&](std::ostream& o) { write_positions(o, r.positions, 0); }, out);
        }
    }
    print_stats(out, s, stats);
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
    CLI::App app{"Streaming SAT proof visualization", "clauseviz"};
    app.require_subcommand(1, 1);

    CLI::App* produce = app.add_subcommand("produce", "replay a DRAT proof or a solver's output to a consumer");
    Settings produce_s(produce);
    produce_s.option("proof", "", "DRAT proof file");
    produce_s.option("solver", "", "solver command line printing DRAT lines");
    produce_s.option("connect", "", "consumer HOST:PORT");
    produce_s.option("rate", "0", "events per second, 0 = unthrottled");
    produce_s.option("num-vars", "0", "variable count hint sent in the handshake");
    produce_s.flag("stats", "print JSON stats to standard output");

    CLI::App* view = app.add_subcommand("view", "consume a clause stream and serve the control API");
    Settings view_s(view);
    view_s.option("cnf", "", "DIMACS CNF file");
    view_s.option("listen", "127.0.0.1:7878", "producer endpoint HOST:PORT");
    view_s.option("api", "127.0.0.1:8080", "control API HOST:PORT");
    add_session_options(view_s);
    view_s.flag("paused", "start paused");
    view_s.flag("exit-on-end", "exit once the producer finished and playback reached the end");
    view_s.flag("stats", "print JSON stats to standard output on exit");

    CLI::App* render = app.add_subcommand("render", "headless frame export from a proof file");
    Settings render_s(render);
    render_s.option("cnf", "", "DIMACS CNF file");
    render_s.option("proof", "", "DRAT proof file");
    render_s.option("out", "", "output directory");
    render_s.option("frames", "300", "number of frames");
    render_s.option("relayout-every", "0", "relayout before every n-th frame, 0 = never");
    render_s.option("width", "1920", "canvas width in pixels");
    render_s.option("height", "1080", "canvas height in pixels");
    render_s.flag("svg", "also write SVG frames");
    render_s.flag("no-png", "skip PNG frames");
    add_session_options(render_s);
    render_s.flag("stats", "print JSON stats to standard output");

    CLI::App* transform = app.add_subcommand("transform", "one-shot CNF to graph export");
    Settings transform_s(transform);
    transform_s.option("cnf", "", "DIMACS CNF file");
    transform_s.option("proof", "", "apply this DRAT proof before exporting");
    transform_s.option("out", "", "edge list output, '-' for standard output");
    transform_s.option("format", "edges", "edges|dot");
    add_graph_options(transform_s);
    transform_s.option("contract-target", "30000", "contraction target for --map-out / --positions");
    transform_s.option("seed", "1", "seed for contraction and layout");
    transform_s.option("layout-iterations", "500", "layout iterations for --positions");
    transform_s.option("map-out", "", "write 'variable supernode' lines");
    transform_s.option("positions", "", "write 'node x y' lines for the top level");
    transform_s.flag("stats", "print JSON stats to standard output");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return 1;
    }

    try {
        if (produce->parsed()) {
            produce_s.resolve(env);
            return cmd_produce(produce_s, out, err);
        }
        if (view->parsed()) {
            view_s.resolve(env);
            return cmd_view(view_s, out, err);
        }
        if (render->parsed()) {
            render_s.resolve(env);
            return cmd_render(render_s, out, err);
        }
        transform_s.resolve(env);
        return cmd_transform(transform_s, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace clauseviz::cli

#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <future>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "clauseviz/contraction.hpp"
#include "clauseviz/event_log.hpp"
#include "clauseviz/graph.hpp"
#include "clauseviz/heatmap.hpp"
#include "clauseviz/layout.hpp"

namespace clauseviz {

/// Events consumed per tick: everything buffered, or at most `fixed`.
struct ChunkPolicy {
    std::size_t fixed = 0;  // 0 = drain

    static ChunkPolicy drain() { return {}; }
    static ChunkPolicy fixed_size(std::size_t n) { return {n}; }
    bool is_drain() const { return fixed == 0; }
    bool operator==(const ChunkPolicy&) const = default;
};

enum class PlaybackStatus { Playing, Paused, Ended };
std::string to_string(PlaybackStatus status);

struct SessionConfig {
    TransformConfig transform;
    HeatConfig heat;
    ContractionConfig contraction;
    LayoutConfig layout;
    std::size_t checkpoint_interval = 10000;
    double frame_rate = 30.0;
    ChunkPolicy chunk;
    /// See EventLogOptions.
    std::size_t memory_budget = 0;
    std::filesystem::path spill_dir;

    void validate() const;
};

struct FrameStats {
    double events_per_second = 0.0;
    std::size_t log_length = 0;
    std::uint64_t unknown_deletes = 0;
};

/// Everything one rendered frame needs, at the display (top) level of the
/// current hierarchy. Heats and edge weights reflect exactly events [0, cursor).
struct FrameState {
    std::uint64_t frame_index = 0;
    std::size_t cursor = 0;
    PlaybackStatus status = PlaybackStatus::Paused;
    std::uint64_t layout_generation = 0;
    Positions positions;
    std::vector<std::uint32_t> members;
    std::vector<double> heats;
    /// Sorted by (u, v).
    std::vector<Edge> edges;
    FrameStats stats;
};

class SessionError : public std::runtime_error {
public:
    enum class Kind { OutOfRange, AlreadyRunning };
    SessionError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// The consumer core. Not thread-safe apart from its event log, which an
/// ingest thread may append to while another thread drives the session.
class Session {
public:
    /// Builds the initial graph and runs the initial layout synchronously.
    Session(const CnfFormula& formula, SessionConfig config, std::shared_ptr<EventLog> log = nullptr);
    ~Session();

    EventLog& log() { return *log_; }
    std::shared_ptr<EventLog> shared_log() const { return log_; }

    /// Playing: consumes one chunk and produces the next frame. Otherwise a
    /// no-op returning the current frame. Also collects a finished relayout.
    const FrameState& tick();
    /// Restores the nearest checkpoint <= target and replays up to it.
    /// Positions are left alone. Throws SessionError(OutOfRange).
    const FrameState& seek(std::size_t target);
    const FrameState& step(std::int64_t n);

    void play();
    void pause();
    /// Pause and rewind to the start.
    void stop();

    /// Pauses, then rebuilds the graph from the live clauses and lays it out
    /// on a background thread. Throws SessionError(AlreadyRunning).
    void trigger_relayout();
    bool relayout_running() const { return pending_.valid(); }
    /// Swaps in a finished relayout; rethrows its error. True if swapped.
    bool poll_relayout();
    /// Blocks for a running relayout, then swaps it in.
    void wait_relayout();

    /// Replaces the heat configuration and recomputes heat (and every
    /// checkpoint's heat snapshot) from the log.
    void set_heat_config(HeatConfig heat);
    void set_chunk_policy(ChunkPolicy chunk) { config_.chunk = chunk; }

    const FrameState& frame() const { return frame_; }
    PlaybackStatus status() const { return status_; }
    std::size_t cursor() const { return cursor_; }
    const InteractionGraph& graph() const { return graph_; }
    const HeatState& heat() const { return heat_; }
    const ContractionHierarchy& hierarchy() const { return hierarchy_; }
    const Positions& positions() const { return positions_; }
    const SessionConfig& config() const { return config_; }
    std::size_t checkpoint_count() const { return checkpoints_.size(); }
    std::uint64_t layout_generation() const { return generation_; }

    /// Notices since the last call: "paused", "playing", "ended",
    /// "relayout_started", "relayout_done", "relayout_failed".
    std::vector<std::string> take_notifications();

private:
    struct Checkpoint {
        std::uint64_t digest = 0;
        std::size_t live_total = 0;
        std::size_t node_count = 0;
        std::vector<Edge> edges;
        std::uint64_t unknown_deletes = 0;
        HeatState heat;
    };

    void apply_range(std::size_t end);
    void record_checkpoint();
    void rebuild_frame(bool advance_index = true);
    void adopt(RelayoutResult result);
    void notify(std::string notice) { notices_.push_back(std::move(notice)); }
    void set_status(PlaybackStatus status);

    SessionConfig config_;
    std::shared_ptr<EventLog> log_;
    InteractionGraph graph_;
    HeatState heat_;
    std::size_t cursor_ = 0;
    PlaybackStatus status_ = PlaybackStatus::Paused;
    std::vector<Checkpoint> checkpoints_;
    /// Effect of each event the first time it was applied.
    std::vector<EventEffect> effects_;

    ContractionHierarchy hierarchy_;
    Positions positions_;
    std::vector<NodeId> top_map_;
    std::uint64_t generation_ = 0;
    std::future<RelayoutResult> pending_;

    FrameState frame_;
    std::deque<std::pair<std::chrono::steady_clock::time_point, std::size_t>> rate_samples_;
    std::vector<std::string> notices_;
};

}  // namespace clauseviz

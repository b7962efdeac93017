#include "clauseviz/session.hpp"

#include <algorithm>

namespace clauseviz {

std::string to_string(PlaybackStatus status) {
    switch (status) {
        case PlaybackStatus::Playing:
            return "playing";
        case PlaybackStatus::Paused:
            return "paused";
        case PlaybackStatus::Ended:
            return "ended";
    }
    return "?";
}

void SessionConfig::validate() const {
    heat.validate();
    layout.validate();
    if (checkpoint_interval == 0) throw std::invalid_argument("checkpoint interval must be positive");
    if (!(frame_rate > 0.0)) throw std::invalid_argument("frame rate must be positive");
    if (contraction.target_size == 0) throw std::invalid_argument("contraction target must be positive");
}

namespace {

const SessionConfig& validated(const SessionConfig& config) {
    config.validate();
    return config;
}

std::shared_ptr<EventLog> make_log(const SessionConfig& config) {
    return std::make_shared<EventLog>(EventLogOptions{config.checkpoint_interval, config.memory_budget, config.spill_dir});
}

}  // namespace

Session::Session(const CnfFormula& formula, SessionConfig config, std::shared_ptr<EventLog> log)
    : config_(validated(config)),
      log_(log ? std::move(log) : make_log(config_)),
      graph_(formula, config_.transform),
      heat_(config_.heat, formula.num_variables) {
    record_checkpoint();
    adopt(relayout(graph_.rebuild(), config_.contraction, config_.layout));
    rebuild_frame(false);
}

Session::~Session() {
    if (pending_.valid()) pending_.wait();
}

void Session::record_checkpoint() {
    const WeightedGraph& g = graph_.graph();
    checkpoints_.push_back(Checkpoint{graph_.live().digest(), graph_.live().total(), g.node_count(), g.edges(),
                                      graph_.unknown_deletes(), heat_});
}

void Session::apply_range(std::size_t end) {
    if (end <= cursor_) return;
    const std::size_t interval = config_.checkpoint_interval;
    log_->for_each(cursor_, end, [&](std::size_t i, const ClauseEvent& event) {
        const EventEffect effect = graph_.apply(event);
        if (i == effects_.size()) effects_.push_back(effect);
        heat_.update(event);
        cursor_ = i + 1;
        if (cursor_ % interval == 0 && cursor_ / interval == checkpoints_.size()) record_checkpoint();
    });
}

const FrameState& Session::seek(std::size_t target) {
    const std::size_t length = log_->size();
    if (target > length) {
        throw SessionError(SessionError::Kind::OutOfRange,
                           "seek target " + std::to_string(target) + " beyond log length " + std::to_string(length));
    }
    if (target < cursor_) {
        const std::size_t index = target / config_.checkpoint_interval;
        const Checkpoint& cp = checkpoints_.at(index);
        const std::size_t cp_cursor = index * config_.checkpoint_interval;
        // Walk the clause multiset back to the checkpoint; graph and heat come
        // from the snapshot so they match a forward replay bit for bit.
        log_->for_each_reverse(cp_cursor, cursor_,
                               [&](std::size_t i, const ClauseEvent& event) { graph_.revert(event, effects_[i]); });
        if (graph_.live().digest() != cp.digest || graph_.live().total() != cp.live_total) {
            throw std::logic_error("live clause set does not match checkpoint " + std::to_string(cp_cursor));
        }
        WeightedGraph restored(cp.node_count);
        for (const Edge& e : cp.edges) restored.add_weight(e.u, e.v, e.weight);
        graph_.restore(std::move(restored), cp.unknown_deletes);
        heat_ = cp.heat;
        cursor_ = cp_cursor;
    }
    apply_range(target);
    if (status_ == PlaybackStatus::Ended && cursor_ < length) set_status(PlaybackStatus::Paused);
    rebuild_frame();
    return frame_;
}

const FrameState& Session::step(std::int64_t n) {
    const auto target = static_cast<std::int64_t>(cursor_) + n;
    if (target < 0) throw SessionError(SessionError::Kind::OutOfRange, "step before the start of the log");
    return seek(static_cast<std::size_t>(target));
}

const FrameState& Session::tick() {
    if (status_ != PlaybackStatus::Playing) return frame_;
    const bool done = log_->closed();
    const std::size_t length = log_->size();
    const std::size_t end = config_.chunk.is_drain() ? length : std::min(length, cursor_ + config_.chunk.fixed);
    apply_range(end);

    const auto now = std::chrono::steady_clock::now();
    rate_samples_.emplace_back(now, cursor_);
    while (rate_samples_.size() > 2 && now - rate_samples_.front().first > std::chrono::seconds(1)) {
        rate_samples_.pop_front();
    }
    if (done && cursor_ == length) set_status(PlaybackStatus::Ended);
    rebuild_frame();
    return frame_;
}

void Session::set_status(PlaybackStatus status) {
    if (status == status_) return;
    status_ = status;
    frame_.status = status;
    if (status != PlaybackStatus::Playing) rate_samples_.clear();
    notify(to_string(status));
}

void Session::play() {
    if (log_->closed() && cursor_ == log_->size()) {
        set_status(PlaybackStatus::Ended);
    } else {
        set_status(PlaybackStatus::Playing);
    }
}

void Session::pause() {
    if (status_ == PlaybackStatus::Playing) set_status(PlaybackStatus::Paused);
}

void Session::stop() {
    pause();
    seek(0);
    if (status_ == PlaybackStatus::Ended) set_status(PlaybackStatus::Paused);
}

void Session::trigger_relayout() {
    if (pending_.valid()) throw SessionError(SessionError::Kind::AlreadyRunning, "a relayout is already running");
    pause();
    pending_ = std::async(std::launch::async, [graph = graph_.rebuild(), contraction = config_.contraction,
                                               layout = config_.layout, hierarchy = hierarchy_,
                                               positions = positions_]() mutable {
        return relayout(std::move(graph), contraction, layout, &hierarchy, &positions);
    });
    notify("relayout_started");
}

bool Session::poll_relayout() {
    if (!pending_.valid() || pending_.wait_for(std::chrono::seconds(0)) != std::future_status::ready) return false;
    RelayoutResult result;
    try {
        result = pending_.get();
    } catch (...) {
        notify("relayout_failed");
        throw;
    }
    adopt(std::move(result));
    rebuild_frame();
    notify("relayout_done");
    return true;
}

void Session::wait_relayout() {
    if (!pending_.valid()) return;
    pending_.wait();
    poll_relayout();
}

void Session::adopt(RelayoutResult result) {
    hierarchy_ = std::move(result.hierarchy);
    positions_ = std::move(result.layout.positions);
    top_map_ = hierarchy_.map_to_top();
    ++generation_;
}

void Session::set_heat_config(HeatConfig heat) {
    heat.validate();
    const std::size_t interval = config_.checkpoint_interval;
    const std::size_t end = std::max(cursor_, (checkpoints_.size() - 1) * interval);
    HeatState state(heat, heat_.node_count());
    HeatState at_cursor = state;
    checkpoints_[0].heat = state;
    log_->for_each(0, end, [&](std::size_t i, const ClauseEvent& event) {
        if (i == cursor_) at_cursor = state;
        state.update(event);
        const std::size_t n = i + 1;
        if (n % interval == 0 && n / interval < checkpoints_.size()) checkpoints_[n / interval].heat = state;
    });
    if (end == cursor_) at_cursor = state;
    heat_ = std::move(at_cursor);
    config_.heat = std::move(heat);
    rebuild_frame();
}

void Session::rebuild_frame(bool advance_index) {
    if (advance_index) ++frame_.frame_index;
    frame_.cursor = cursor_;
    frame_.status = status_;
    frame_.layout_generation = generation_;
    frame_.positions = positions_;
    frame_.members = hierarchy_.top().members;

    const std::size_t base = top_map_.size();
    const std::size_t top = hierarchy_.top().graph.node_count();
    frame_.heats = aggregate_heat(top_map_, top, heat_.values(base));

    frame_.edges.clear();
    const std::vector<Edge> fine = graph_.graph().edges();
    if (hierarchy_.level_count() == 1) {
        for (const Edge& e : fine) {
            if (e.v < base) frame_.edges.push_back(e);
        }
    } else {
        std::vector<std::pair<std::uint64_t, double>> mapped;
        mapped.reserve(fine.size());
        for (const Edge& e : fine) {
            if (e.v >= base) continue;
            NodeId a = top_map_[e.u];
            NodeId b = top_map_[e.v];
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            mapped.emplace_back((std::uint64_t{a} << 32) | b, e.weight);
        }
        std::stable_sort(mapped.begin(), mapped.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        for (const auto& [key, w] : mapped) {
            const auto a = static_cast<NodeId>(key >> 32);
            const auto b = static_cast<NodeId>(key & 0xffffffffu);
            if (!frame_.edges.empty() && frame_.edges.back().u == a && frame_.edges.back().v == b) {
                frame_.edges.back().weight += w;
            } else {
                frame_.edges.push_back({a, b, w});
            }
        }
    }

    frame_.stats.log_length = log_->size();
    frame_.stats.unknown_deletes = graph_.unknown_deletes();
    frame_.stats.events_per_second = 0.0;
    if (rate_samples_.size() >= 2) {
        const double dt = std::chrono::duration<double>(rate_samples_.back().first - rate_samples_.front().first).count();
        if (dt > 0) frame_.stats.events_per_second = static_cast<double>(rate_samples_.back().second - rate_samples_.front().second) / dt;
    }
}

std::vector<std::string> Session::take_notifications() {
    std::vector<std::string> out;
    out.swap(notices_);
    return out;
}

}  // namespace clauseviz

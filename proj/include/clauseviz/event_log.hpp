#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "clauseviz/cnf.hpp"

namespace clauseviz {

struct EventLogOptions {
    /// Events per storage block; the session aligns blocks with checkpoints.
    std::size_t block_size = 10000;
    /// Events kept in memory before whole blocks are spilled to disk (wire
    /// format). 0 keeps everything in memory.
    std::size_t memory_budget = 0;
    /// Directory for the spill file; defaults to the system temp directory.
    std::filesystem::path spill_dir;
};

/// Append-only clause event log. One writer (ingest) and any number of
/// readers may use it concurrently.
class EventLog {
public:
    explicit EventLog(EventLogOptions options = {});
    ~EventLog();
    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    /// Stores the event with sequence = its index in the log.
    void append(ClauseEvent event);
    /// Marks the producer as finished; later appends throw std::logic_error.
    void close();
    bool closed() const;
    std::size_t size() const;

    /// Blocks until size() > known, the log is closed, or the timeout expires.
    /// Returns the current size.
    std::size_t wait_for_more(std::size_t known, std::chrono::milliseconds timeout) const;

    ClauseEvent at(std::size_t index) const;
    /// Visits events [begin, end) in order; end must not exceed size().
    void for_each(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, const ClauseEvent&)>& fn) const;
    /// Same range, visited from end - 1 down to begin.
    void for_each_reverse(std::size_t begin, std::size_t end,
                          const std::function<void(std::size_t, const ClauseEvent&)>& fn) const;

    std::size_t spilled_blocks() const;
    std::size_t resident_events() const;
    const EventLogOptions& options() const { return options_; }

private:
    using Block = std::vector<ClauseEvent>;
    struct BlockRef {
        std::shared_ptr<Block> events;
        std::uint64_t file_offset = 0;
        std::uint64_t file_bytes = 0;
    };
    struct View {
        std::shared_ptr<const Block> block;
        const ClauseEvent* data = nullptr;
        std::size_t count = 0;
    };

    View view(std::size_t block) const;
    std::shared_ptr<Block> load(std::size_t block) const;
    void spill_locked();

    EventLogOptions options_;
    mutable std::mutex mutex_;
    mutable std::condition_variable grew_;
    std::vector<BlockRef> blocks_;
    std::size_t size_ = 0;
    std::size_t resident_ = 0;
    std::size_t spilled_ = 0;
    bool closed_ = false;
    std::filesystem::path spill_path_;
    mutable std::fstream spill_;
    mutable std::shared_ptr<Block> cache_;
    mutable std::size_t cache_index_ = 0;
};

}  // namespace clauseviz

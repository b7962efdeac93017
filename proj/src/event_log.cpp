#include "clauseviz/event_log.hpp"

#include <stdexcept>
#include <string>

#include <unistd.h>

#include "clauseviz/wire.hpp"

namespace clauseviz {

EventLog::EventLog(EventLogOptions options) : options_(std::move(options)) {
    if (options_.block_size == 0) throw std::invalid_argument("event log block size must be positive");
}

EventLog::~EventLog() {
    if (spill_.is_open()) spill_.close();
    if (!spill_path_.empty()) {
        std::error_code ec;
        std::filesystem::remove(spill_path_, ec);
    }
}

void EventLog::append(ClauseEvent event) {
    {
        std::lock_guard lock(mutex_);
        if (closed_) throw std::logic_error("append to a closed event log");
        const std::size_t b = size_ / options_.block_size;
        if (b == blocks_.size()) {
            auto block = std::make_shared<Block>();
            // Readers hold raw pointers into the block, so it must never reallocate.
            block->reserve(options_.block_size);
            blocks_.push_back({std::move(block), 0, 0});
        }
        event.sequence = size_;
        blocks_[b].events->push_back(std::move(event));
        ++size_;
        ++resident_;
        if (options_.memory_budget > 0 && resident_ > options_.memory_budget) spill_locked();
    }
    grew_.notify_all();
}

void EventLog::spill_locked() {
    if (spill_path_.empty()) {
        const auto dir = options_.spill_dir.empty() ? std::filesystem::temp_directory_path() : options_.spill_dir;
        std::filesystem::create_directories(dir);
        spill_path_ = dir / ("clauseviz-log-" + std::to_string(::getpid()) + "-" +
                             std::to_string(reinterpret_cast<std::uintptr_t>(this)) + ".bin");
        spill_.open(spill_path_, std::ios::in | std::ios::out | std::ios::binary | std::ios::trunc);
        if (!spill_) throw std::runtime_error("cannot create spill file " + spill_path_.string());
    }
    // Spill the oldest resident full blocks; the block being filled stays.
    const std::size_t full = size_ / options_.block_size;
    for (std::size_t b = 0; b < full && resident_ > options_.memory_budget; ++b) {
        BlockRef& ref = blocks_[b];
        if (!ref.events) continue;
        std::vector<std::uint8_t> bytes;
        for (const ClauseEvent& e : *ref.events) wire::encode_message(bytes, wire::Message::from_event(e));
        spill_.seekp(0, std::ios::end);
        ref.file_offset = static_cast<std::uint64_t>(spill_.tellp());
        ref.file_bytes = bytes.size();
        spill_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        spill_.flush();
        if (!spill_) throw std::runtime_error("write to spill file " + spill_path_.string() + " failed");
        resident_ -= ref.events->size();
        ref.events.reset();
        ++spilled_;
    }
}

std::shared_ptr<EventLog::Block> EventLog::load(std::size_t b) const {
    if (cache_ && cache_index_ == b) return cache_;
    const BlockRef& ref = blocks_[b];
    std::vector<std::uint8_t> bytes(ref.file_bytes);
    spill_.seekg(static_cast<std::streamoff>(ref.file_offset));
    spill_.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!spill_) throw std::runtime_error("read from spill file " + spill_path_.string() + " failed");
    auto block = std::make_shared<Block>();
    block->reserve(options_.block_size);
    std::span<const std::uint8_t> rest(bytes);
    std::uint64_t seq = b * options_.block_size;
    while (!rest.empty()) {
        const wire::Decoded d = *wire::try_decode(rest);
        rest = rest.subspan(d.consumed);
        const auto kind = d.message.tag == wire::Tag::AddClause ? EventKind::Add : EventKind::Delete;
        CanonicalClause c = canonicalize(d.message.literals);
        block->push_back({kind, c.status, std::move(c.clause), seq++});
    }
    cache_ = block;
    cache_index_ = b;
    return block;
}

EventLog::View EventLog::view(std::size_t b) const {
    std::lock_guard lock(mutex_);
    const std::size_t count = std::min(options_.block_size, size_ - b * options_.block_size);
    std::shared_ptr<const Block> block = blocks_[b].events ? blocks_[b].events : load(b);
    return {block, block->data(), count};
}

void EventLog::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    grew_.notify_all();
}

bool EventLog::closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
}

std::size_t EventLog::size() const {
    std::lock_guard lock(mutex_);
    return size_;
}

std::size_t EventLog::wait_for_more(std::size_t known, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mutex_);
    grew_.wait_for(lock, timeout, [&] { return size_ > known || closed_; });
    return size_;
}

ClauseEvent EventLog::at(std::size_t index) const {
    if (index >= size()) throw std::out_of_range("event index " + std::to_string(index) + " beyond log");
    const View v = view(index / options_.block_size);
    return v.data[index % options_.block_size];
}

void EventLog::for_each(std::size_t begin, std::size_t end,
                        const std::function<void(std::size_t, const ClauseEvent&)>& fn) const {
    if (end > size() || begin > end) throw std::out_of_range("event range beyond log");
    std::size_t i = begin;
    while (i < end) {
        const std::size_t b = i / options_.block_size;
        const View v = view(b);
        const std::size_t base = b * options_.block_size;
        const std::size_t stop = std::min(end, base + v.count);
        for (; i < stop; ++i) fn(i, v.data[i - base]);
    }
}

void EventLog::for_each_reverse(std::size_t begin, std::size_t end,
                                const std::function<void(std::size_t, const ClauseEvent&)>& fn) const {
    if (end > size() || begin > end) throw std::out_of_range("event range beyond log");
    std::size_t i = end;
    while (i > begin) {
        const std::size_t b = (i - 1) / options_.block_size;
        const View v = view(b);
        const std::size_t base = b * options_.block_size;
        const std::size_t stop = std::max(begin, base);
        for (; i > stop; --i) fn(i - 1, v.data[i - 1 - base]);
    }
}

std::size_t EventLog::spilled_blocks() const {
    std::lock_guard lock(mutex_);
    return spilled_;
}

std::size_t EventLog::resident_events() const {
    std::lock_guard lock(mutex_);
    return resident_;
}

}  // namespace clauseviz

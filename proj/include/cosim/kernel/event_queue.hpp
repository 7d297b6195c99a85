#pragma once

#include "cosim/error.hpp"
#include "cosim/kernel/sim_time.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>

namespace cosim::kernel {

COSIM_DEFINE_ERROR(SchedulingInPast, Error);

using EventId = std::uint64_t;

template <typename Payload>
struct Event {
    EventId id = 0;
    SimTime time;
    std::string owner;
    Payload payload;
};

/// Future event set ordered by (time, id).
///
/// Ids are assigned on insertion from a per-queue counter, so events sharing
/// a timestamp pop in insertion order. Cancelation removes the entry eagerly.
template <typename Payload>
class EventQueue {
public:
    using value_type = Event<Payload>;

    EventId schedule(SimTime at, std::string owner, Payload payload, SimTime now)
    {
        if (at < now) {
            throw SchedulingInPast("cannot schedule event for '" + owner + "' at " +
                                   std::to_string(at.micros()) + "us before now=" +
                                   std::to_string(now.micros()) + "us");
        }
        const EventId id = next_id_++;
        Key key{at, id};
        events_.emplace(key, value_type{id, at, std::move(owner), std::move(payload)});
        index_.emplace(id, at);
        return id;
    }

    std::optional<value_type> pop_next()
    {
        if (events_.empty()) {
            return std::nullopt;
        }
        auto node = events_.extract(events_.begin());
        index_.erase(node.mapped().id);
        return std::move(node.mapped());
    }

    bool cancel(EventId id)
    {
        auto it = index_.find(id);
        if (it == index_.end()) {
            return false;
        }
        events_.erase(Key{it->second, id});
        index_.erase(it);
        return true;
    }

    [[nodiscard]] const value_type* peek() const
    {
        return events_.empty() ? nullptr : &events_.begin()->second;
    }
    [[nodiscard]] std::optional<SimTime> peek_time() const
    {
        if (events_.empty()) {
            return std::nullopt;
        }
        return events_.begin()->first.first;
    }
    [[nodiscard]] bool contains(EventId id) const { return index_.contains(id); }
    [[nodiscard]] std::size_t size() const noexcept { return events_.size(); }
    [[nodiscard]] bool empty() const noexcept { return events_.empty(); }

private:
    using Key = std::pair<SimTime, EventId>;

    std::map<Key, value_type> events_;
    std::unordered_map<EventId, SimTime> index_;
    EventId next_id_ = 1;
};

}  // namespace cosim::kernel

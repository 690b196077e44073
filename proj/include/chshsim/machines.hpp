#pragma once

#include <cassert>
#include <cstdint>
#include <utility>

#include "chshsim/lookup_table.hpp"
#include "chshsim/rng.hpp"

namespace chshsim {

enum class SetMemoryCommand : std::uint8_t { Inactive, ForA, ForB };

enum class DetectorId : std::uint8_t { A, B };

inline bool command_targets(SetMemoryCommand cmd, DetectorId id) {
    return (cmd == SetMemoryCommand::ForA && id == DetectorId::A) ||
           (cmd == SetMemoryCommand::ForB && id == DetectorId::B);
}

// The message emitted by the source: a counter snapshot, a reference to
// the (immutable) table, and an optional set-memory command. The two
// eventrons of one emission are identical; sharing the table by reference
// is observationally equivalent to carrying a copy.
struct Eventron {
    TableIndex c;
    const LookupTable* table;
    SetMemoryCommand command;
};

class Source {
public:
    // Counter starts uniform on [2, L] so that c-1 >= 1 always holds,
    // matching the reachable set of the wrap rule.
    Source(const LookupTable& table, double command_probability, Rng& init_rng)
        : table_(&table),
          c_(static_cast<TableIndex>(init_rng.uniform_int(2, table.length()))),
          p_s_(command_probability) {}

    // Increment c first, then stamp both eventrons with the new value.
    Eventron emit(Rng& rng) {
        c_ = advance_index(c_, table_->length());
        SetMemoryCommand cmd = SetMemoryCommand::Inactive;
        if (rng.bernoulli(p_s_))
            cmd = rng.coin() ? SetMemoryCommand::ForA : SetMemoryCommand::ForB;
        return Eventron{c_, table_, cmd};
    }

    // Two identical eventrons, one per detector arm.
    std::pair<Eventron, Eventron> emit_pair(Rng& rng) {
        Eventron e = emit(rng);
        return {e, e};
    }

    TableIndex counter() const { return c_; }

private:
    const LookupTable* table_;
    TableIndex c_;
    double p_s_;
};

// One detector's local state: identity and memory index m. The setting is
// supplied per event (it belongs to the experimenter's schedule, not to
// the detector).
class Detector {
public:
    Detector(DetectorId id, const LookupTable& table, Rng& init_rng)
        : id_(id),
          m_(static_cast<TableIndex>(init_rng.uniform_int(2, table.length()))) {}

    Detector(DetectorId id, TableIndex memory) : id_(id), m_(memory) {}

    DetectorId id() const { return id_; }
    TableIndex memory() const { return m_; }

    // Setting 1: honor the command, look up t[m], advance m. The order
    // (set-memory, lookup, advance) is fixed; any other order changes the
    // statistics.
    bool detect_setting1(const Eventron& e) {
        if (command_targets(e.command, id_)) m_ = e.c;
        bool out = e.table->at(m_);
        m_ = advance_index(m_, e.table->length());
        return out;
    }

    // Setting 2: pure lookup of t[c-1]. No memory update, no command
    // processing.
    bool detect_setting2(const Eventron& e) const {
        assert(e.c >= 2);
        return e.table->at(e.c - 1);
    }

    bool detect(std::uint8_t setting, const Eventron& e) {
        return setting == 1 ? detect_setting1(e) : detect_setting2(e);
    }

private:
    DetectorId id_;
    TableIndex m_;
};

}  // namespace chshsim

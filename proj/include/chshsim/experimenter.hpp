#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "chshsim/rng.hpp"

namespace chshsim {

struct SettingPair {
    std::uint8_t a;  // 1 or 2
    std::uint8_t b;  // 1 or 2

    bool operator==(const SettingPair&) const = default;
};

inline bool is_mixed(SettingPair p) { return p.a != p.b; }

// Dense 0..3 index for tallying: (a-1)*2 + (b-1).
inline int pair_index(SettingPair p) { return (p.a - 1) * 2 + (p.b - 1); }

// Switching rule: leave mixed-index pairings with probability p_d, leave
// same-index pairings with probability alpha*p_s (clamped to 1). The
// redraw picks a and b independently and may reproduce the current pair;
// force_change redraws until the pair actually changes.
struct SwitchPolicy {
    double p_d = 0.01;
    double p_s = 0.1;
    double alpha = 2.0;
    bool force_change = false;

    double same_switch_probability() const {
        return std::min(alpha * p_s, 1.0);
    }
};

inline SettingPair random_pair(Rng& rng) {
    return SettingPair{static_cast<std::uint8_t>(rng.coin() ? 2 : 1),
                       static_cast<std::uint8_t>(rng.coin() ? 2 : 1)};
}

inline SettingPair next_pair(SettingPair current, const SwitchPolicy& policy,
                             Rng& rng) {
    double p = is_mixed(current) ? policy.p_d : policy.same_switch_probability();
    if (!rng.bernoulli(p)) return current;
    SettingPair drawn = random_pair(rng);
    while (policy.force_change && drawn == current) drawn = random_pair(rng);
    return drawn;
}

// A full per-event pairing list. Pure function of (initial pair, policy,
// rng stream); its signature admits no source or detector state, which is
// what makes the blindness property hold by construction.
using SettingSchedule = std::vector<SettingPair>;

inline SettingSchedule generate_schedule(std::size_t n_events,
                                         const SwitchPolicy& policy,
                                         SettingPair initial, Rng& rng) {
    if (n_events < 1)
        throw std::invalid_argument("schedule needs at least one event");
    SettingSchedule pairs;
    pairs.reserve(n_events);
    pairs.push_back(initial);
    for (std::size_t k = 1; k < n_events; ++k)
        pairs.push_back(next_pair(pairs.back(), policy, rng));
    return pairs;
}

struct DwellStatistics {
    double mean_dwell_same = 0.0;   // mean run length within {(1,1),(2,2)}
    double mean_dwell_mixed = 0.0;  // mean run length within {(1,2),(2,1)}
    std::array<double, 4> occupancy{};  // fraction of events per pair
};

// Run lengths are counted per identical-pair stretch; a class mean
// averages the stretches whose pair belongs to that class.
inline DwellStatistics dwell_statistics(const SettingSchedule& s) {
    if (s.empty()) throw std::invalid_argument("empty schedule");
    DwellStatistics out;
    std::array<std::size_t, 4> counts{};
    std::size_t same_runs = 0, same_len = 0, mixed_runs = 0, mixed_len = 0;
    std::size_t run = 1;
    auto close_run = [&](SettingPair p, std::size_t len) {
        if (is_mixed(p)) {
            ++mixed_runs;
            mixed_len += len;
        } else {
            ++same_runs;
            same_len += len;
        }
    };
    for (std::size_t k = 0; k < s.size(); ++k) {
        ++counts[static_cast<std::size_t>(pair_index(s[k]))];
        if (k + 1 < s.size() && s[k + 1] == s[k]) {
            ++run;
        } else {
            close_run(s[k], run);
            run = 1;
        }
    }
    if (same_runs) out.mean_dwell_same = double(same_len) / same_runs;
    if (mixed_runs) out.mean_dwell_mixed = double(mixed_len) / mixed_runs;
    for (int i = 0; i < 4; ++i)
        out.occupancy[i] = double(counts[i]) / s.size();
    return out;
}

// CSV schema: header "event,a,b", then one row per event.
inline void write_schedule_csv(std::ostream& os, const SettingSchedule& s) {
    os << "event,a,b\n";
    for (std::size_t k = 0; k < s.size(); ++k)
        os << k << ',' << int(s[k].a) << ',' << int(s[k].b) << '\n';
}

inline SettingSchedule read_schedule_csv(std::istream& is) {
    SettingSchedule s;
    std::string line;
    if (!std::getline(is, line) || line.rfind("event,a,b", 0) != 0)
        throw std::invalid_argument("schedule CSV: missing 'event,a,b' header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::size_t event;
        int a, b;
        char comma;
        if (!(row >> event >> comma >> a >> comma >> b) || a < 1 || a > 2 ||
            b < 1 || b > 2)
            throw std::invalid_argument("schedule CSV: bad row: " + line);
        s.push_back(SettingPair{std::uint8_t(a), std::uint8_t(b)});
    }
    if (s.empty()) throw std::invalid_argument("schedule CSV: no rows");
    return s;
}

}  // namespace chshsim

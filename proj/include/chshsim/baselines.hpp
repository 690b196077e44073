#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "chshsim/harness.hpp"

namespace chshsim {

// A memoryless local strategy: one fixed bit per detector setting. These
// are the extreme points of the classical memoryless models, so the
// maximum of C over the 16 of them certifies the classical bound.
struct DeterministicStrategy {
    std::uint8_t a1, a2, b1, b2;

    // Exact CHSH value: mismatch indicators in place of fractions.
    int chsh_value() const {
        int p11 = a1 != b1, p12 = a1 != b2, p21 = a2 != b1, p22 = a2 != b2;
        return p11 + p12 + p21 - p22;
    }
};

struct DeterministicBound {
    int max_c = 0;
    std::vector<DeterministicStrategy> maximizers;
};

inline DeterministicBound max_deterministic_chsh() {
    DeterministicBound bound;
    bound.max_c = -4;
    for (int bits = 0; bits < 16; ++bits) {
        DeterministicStrategy s{std::uint8_t(bits & 1), std::uint8_t(bits >> 1 & 1),
                                std::uint8_t(bits >> 2 & 1),
                                std::uint8_t(bits >> 3 & 1)};
        int c = s.chsh_value();
        if (c > bound.max_c) {
            bound.max_c = c;
            bound.maximizers.clear();
        }
        if (c == bound.max_c) bound.maximizers.push_back(s);
    }
    return bound;
}

// Ablation control: the same harness with memory and commands removed.
// Both settings' outputs are then equal deterministic functions of the
// eventron, so P[1][1] = P[2][2] = 0 and C = 2 * P[1][2] <= 2.
inline RunResult run_memoryless_control(const RunConfig& cfg) {
    return run_experiment(cfg, DetectorModel::memoryless);
}

// The sync-dependent instruction emitter: a source looping through four
// fixed output quadruples (A1,A2,B1,B2) while the experimenter loops
// through the four setting pairs.
inline constexpr std::array<std::array<std::uint8_t, 4>, 4> strawman_cycle{{
    {1, 0, 0, 1},
    {0, 1, 0, 1},
    {0, 0, 1, 1},
    {1, 0, 1, 0},
}};

inline constexpr std::array<SettingPair, 4> strawman_pair_loop{{
    {1, 1}, {1, 2}, {2, 1}, {2, 2}}};

// Exact evaluation over full cycles; `phase` is how many steps the source's
// quadruple stream leads the experimenter's pair loop. Statistics are
// periodic with period 4, so n_cycles only checks stationarity.
inline ChshEstimate run_strawman(int phase, std::size_t n_cycles = 1) {
    if (phase < 0 || phase > 3)
        throw std::invalid_argument("strawman phase must be in 0..3");
    if (n_cycles < 1) throw std::invalid_argument("need at least one cycle");
    TallyMatrix tally;
    for (std::size_t cycle = 0; cycle < n_cycles; ++cycle) {
        for (std::size_t k = 0; k < 4; ++k) {
            const auto& quad = strawman_cycle[(k + phase) % 4];
            SettingPair pair = strawman_pair_loop[k];
            bool xa = quad[pair.a - 1];
            bool xb = quad[2 + pair.b - 1];
            tally.record(pair, xa, xb);
        }
    }
    return chsh(tally);
}

struct StrawmanSummary {
    std::array<double, 4> c_by_phase{};
    double phase_average = 0.0;
    // The claimed values for phases 2, 3 and the average are 2, 2, 2; the
    // flag reports any disagreement between those and the enumeration.
    bool matches_claimed_phase23 = false;
    bool matches_claimed_average = false;
};

inline StrawmanSummary strawman_phase_average() {
    StrawmanSummary s;
    for (int phase = 0; phase < 4; ++phase) {
        s.c_by_phase[phase] = run_strawman(phase).c;
        s.phase_average += s.c_by_phase[phase] / 4.0;
    }
    s.matches_claimed_phase23 =
        s.c_by_phase[2] == 2.0 && s.c_by_phase[3] == 2.0;
    s.matches_claimed_average = s.phase_average == 2.0;
    return s;
}

}  // namespace chshsim

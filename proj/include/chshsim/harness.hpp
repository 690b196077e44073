#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chshsim/experimenter.hpp"
#include "chshsim/lookup_table.hpp"
#include "chshsim/machines.hpp"
#include "chshsim/rng.hpp"

namespace chshsim {

// Independent named streams. Perturbing one stream cannot move another,
// which is what makes the blindness and no-signalling audits meaningful.
struct SeedSet {
    std::uint64_t table;
    std::uint64_t source;
    std::uint64_t experimenter;
    std::uint64_t init;

    static SeedSet from_master(std::uint64_t master) {
        return SeedSet{derive_seed(master, 1), derive_seed(master, 2),
                       derive_seed(master, 3), derive_seed(master, 4)};
    }
};

struct RunConfig {
    std::uint32_t table_length = 10000;
    double p_t = 0.9;
    double p_s = 0.1;
    double p_d = 0.01;
    double alpha = 2.0;
    std::size_t n_events = 1'000'000;
    SeedSet seeds = SeedSet::from_master(0);

    void validate() const {
        if (table_length < 3)
            throw std::invalid_argument("table length must be >= 3");
        for (double p : {p_t, p_s, p_d})
            if (p < 0.0 || p > 1.0)
                throw std::invalid_argument("probabilities must be in [0, 1]");
        if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
        if (n_events < 1) throw std::invalid_argument("need at least one event");
    }

    SwitchPolicy policy() const { return SwitchPolicy{p_d, p_s, alpha}; }
};

// Per-pair event bookkeeping. Indices are setting-1-based via [i-1][j-1].
struct TallyMatrix {
    std::array<std::array<std::uint64_t, 2>, 2> counts{};
    std::array<std::array<std::uint64_t, 2>, 2> mismatches{};
    std::array<std::array<std::array<std::array<std::uint64_t, 2>, 2>, 2>, 2>
        joint{};  // joint[i-1][j-1][x_a][x_b]
    std::array<std::uint64_t, 2> ones_a{};  // output 1 count while A in setting i
    std::array<std::uint64_t, 2> ones_b{};

    void record(SettingPair pair, bool out_a, bool out_b) {
        int i = pair.a - 1, j = pair.b - 1;
        ++counts[i][j];
        mismatches[i][j] += out_a != out_b;
        ++joint[i][j][out_a][out_b];
        ones_a[i] += out_a;
        ones_b[j] += out_b;
    }

    std::uint64_t total_events() const {
        std::uint64_t n = 0;
        for (auto& row : counts)
            for (auto c : row) n += c;
        return n;
    }

    std::uint64_t exposure_a(int setting) const {
        return counts[setting - 1][0] + counts[setting - 1][1];
    }
    std::uint64_t exposure_b(int setting) const {
        return counts[0][setting - 1] + counts[1][setting - 1];
    }
};

// A tally cell with no events cannot contribute a mismatch fraction; the
// CHSH combination needs all four, so this is an error, never a silently
// dropped term.
class UndefinedEstimateError : public std::runtime_error {
public:
    UndefinedEstimateError(int i, int j)
        : std::runtime_error("no events in cell (A" + std::to_string(i) +
                             ", B" + std::to_string(j) + ")"),
          setting_a(i),
          setting_b(j) {}
    int setting_a, setting_b;
};

inline double binomial_se(double p, double n) {
    return std::sqrt(p * (1.0 - p) / n);
}

struct ChshEstimate {
    std::array<std::array<double, 2>, 2> p{};   // mismatch fractions
    std::array<std::array<double, 2>, 2> se{};  // binomial standard errors
    double c = 0.0;
    double se_c = 0.0;
};

inline ChshEstimate chsh(const TallyMatrix& t) {
    ChshEstimate est;
    double var_c = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            if (t.counts[i][j] == 0) throw UndefinedEstimateError(i + 1, j + 1);
            double n = static_cast<double>(t.counts[i][j]);
            est.p[i][j] = static_cast<double>(t.mismatches[i][j]) / n;
            est.se[i][j] = binomial_se(est.p[i][j], n);
            var_c += est.se[i][j] * est.se[i][j];
        }
    }
    est.c = est.p[0][0] + est.p[0][1] + est.p[1][0] - est.p[1][1];
    est.se_c = std::sqrt(var_c);
    return est;
}

struct MarginalReport {
    std::array<double, 2> one_fraction_a{}, se_a{};
    std::array<double, 2> one_fraction_b{}, se_b{};
    // a setting with zero exposure has an undefined fraction
    std::array<bool, 2> defined_a{}, defined_b{};
};

inline MarginalReport marginals(const TallyMatrix& t) {
    MarginalReport r;
    for (int i = 1; i <= 2; ++i) {
        std::uint64_t na = t.exposure_a(i), nb = t.exposure_b(i);
        if (na > 0) {
            r.defined_a[i - 1] = true;
            r.one_fraction_a[i - 1] = double(t.ones_a[i - 1]) / double(na);
            r.se_a[i - 1] = binomial_se(r.one_fraction_a[i - 1], double(na));
        }
        if (nb > 0) {
            r.defined_b[i - 1] = true;
            r.one_fraction_b[i - 1] = double(t.ones_b[i - 1]) / double(nb);
            r.se_b[i - 1] = binomial_se(r.one_fraction_b[i - 1], double(nb));
        }
    }
    return r;
}

struct FactorizationCell {
    double deviation = 0.0;  // max_{x_a,x_b} |P(x_a,x_b) - P(x_a)P(x_b)|
    double se = 0.0;         // delta-method error at the maximizing outcome
    bool defined = false;    // false when the pair saw no events
};

// Empirical non-factorization probe: per pair, compare the joint outcome
// distribution against the product of its own marginals.
inline std::array<std::array<FactorizationCell, 2>, 2> factorization_deviation(
    const TallyMatrix& t) {
    std::array<std::array<FactorizationCell, 2>, 2> out;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            if (t.counts[i][j] == 0) continue;  // left undefined
            double n = static_cast<double>(t.counts[i][j]);
            double pa1 = (t.joint[i][j][1][0] + t.joint[i][j][1][1]) / n;
            double pb1 = (t.joint[i][j][0][1] + t.joint[i][j][1][1]) / n;
            FactorizationCell best;
            for (int xa = 0; xa < 2; ++xa) {
                for (int xb = 0; xb < 2; ++xb) {
                    double pj = t.joint[i][j][xa][xb] / n;
                    double pa = xa ? pa1 : 1.0 - pa1;
                    double pb = xb ? pb1 : 1.0 - pb1;
                    double dev = std::abs(pj - pa * pb);
                    if (dev >= best.deviation) {
                        double var = pj * (1.0 - pj) +
                                     pb * pb * pa * (1.0 - pa) +
                                     pa * pa * pb * (1.0 - pb);
                        best = {dev, std::sqrt(var / n), true};
                    }
                }
            }
            out[i][j] = best;
        }
    }
    return out;
}

enum class DetectorModel {
    memory,      // the full apparatus: commands and m_X
    memoryless,  // ablated control: setting 1 reads t[c], setting 2 t[c-1]
};

struct RunResult {
    TallyMatrix tally;
    // absent when a tally cell saw no events; chsh(tally) then names the cell
    std::optional<ChshEstimate> estimate;
    TableIndex final_c = 0;
    TableIndex final_m_a = 0;
    TableIndex final_m_b = 0;

    // The estimate, or the UndefinedEstimateError naming the empty cell.
    const ChshEstimate& require_estimate() const {
        if (!estimate) chsh(tally);  // throws
        return *estimate;
    }
};

namespace detail {

struct TraceSink {
    std::ostream* os = nullptr;

    void header() {
        if (os) *os << "event,c,command,setting_a,setting_b,out_a,out_b\n";
    }
    void row(std::size_t k, const Eventron& e, SettingPair p, bool xa, bool xb) {
        if (!os) return;
        static constexpr const char* names[] = {"inactive", "A", "B"};
        *os << k << ',' << e.c << ',' << names[int(e.command)] << ','
            << int(p.a) << ',' << int(p.b) << ',' << xa << ',' << xb << '\n';
    }
};

// One run against an explicit schedule. Output recording is optional so
// the statistics path stays lean.
inline RunResult run_with_schedule(const RunConfig& cfg,
                                   const SettingSchedule& schedule,
                                   DetectorModel model,
                                   std::vector<bool>* outputs_a,
                                   std::vector<bool>* outputs_b,
                                   TraceSink trace = {}) {
    cfg.validate();
    if (schedule.size() != cfg.n_events)
        throw std::invalid_argument("schedule length != n_events");

    Rng table_rng(cfg.seeds.table);
    Rng source_rng(cfg.seeds.source);
    Rng init_rng(cfg.seeds.init);

    LookupTable table(cfg.table_length, cfg.p_t, table_rng);
    Source source(table, cfg.p_s, init_rng);
    Detector det_a(DetectorId::A, table, init_rng);
    Detector det_b(DetectorId::B, table, init_rng);

    if (outputs_a) outputs_a->reserve(cfg.n_events);
    if (outputs_b) outputs_b->reserve(cfg.n_events);
    trace.header();

    RunResult result;
    for (std::size_t k = 0; k < cfg.n_events; ++k) {
        SettingPair pair = schedule[k];
        Eventron e = source.emit(source_rng);
        bool xa, xb;
        if (model == DetectorModel::memory) {
            xa = det_a.detect(pair.a, e);
            xb = det_b.detect(pair.b, e);
        } else {
            xa = pair.a == 1 ? table.at(e.c) : table.at(e.c - 1);
            xb = pair.b == 1 ? table.at(e.c) : table.at(e.c - 1);
        }
        result.tally.record(pair, xa, xb);
        if (outputs_a) outputs_a->push_back(xa);
        if (outputs_b) outputs_b->push_back(xb);
        trace.row(k, e, pair, xa, xb);
    }
    try {
        result.estimate = chsh(result.tally);
    } catch (const UndefinedEstimateError&) {
        // estimate stays undefined; the tally is still valid
    }
    result.final_c = source.counter();
    result.final_m_a = det_a.memory();
    result.final_m_b = det_b.memory();
    return result;
}

}  // namespace detail

// The schedule for a config: initial pair drawn from the init stream (part
// of "all variables set to random values"), transitions from the
// experimenter stream.
inline SettingSchedule schedule_for(const RunConfig& cfg) {
    cfg.validate();
    Rng init_rng(cfg.seeds.init);
    init_rng.uniform_int(2, cfg.table_length);  // c
    init_rng.uniform_int(2, cfg.table_length);  // m_A
    init_rng.uniform_int(2, cfg.table_length);  // m_B
    SettingPair initial = random_pair(init_rng);
    Rng exp_rng(cfg.seeds.experimenter);
    return generate_schedule(cfg.n_events, cfg.policy(), initial, exp_rng);
}

// "Switching list beforehand" mode: the caller supplies the schedule.
inline RunResult run_with_schedule(const RunConfig& cfg,
                                   const SettingSchedule& schedule,
                                   DetectorModel model = DetectorModel::memory,
                                   std::ostream* trace = nullptr) {
    return detail::run_with_schedule(cfg, schedule, model, nullptr, nullptr,
                                     detail::TraceSink{trace});
}

inline RunResult run_experiment(const RunConfig& cfg,
                                DetectorModel model = DetectorModel::memory,
                                std::ostream* trace = nullptr) {
    return detail::run_with_schedule(cfg, schedule_for(cfg), model, nullptr,
                                     nullptr, detail::TraceSink{trace});
}

struct NoSignallingReport {
    bool a_identical = false;
    bool b_identical = false;
    // first index where B's outputs differ between the two replays, if any
    std::optional<std::size_t> first_b_difference;
    std::optional<std::size_t> first_a_difference;
};

// Replays the run twice, once with the config's own schedule and once with
// the alternate, all seeds fixed. When only B's settings were changed, A's
// output stream must be bit-identical (and symmetrically).
inline NoSignallingReport no_signalling_audit(
    const RunConfig& cfg, const SettingSchedule& alternate,
    DetectorModel model = DetectorModel::memory) {
    SettingSchedule base = schedule_for(cfg);
    if (alternate.size() != base.size())
        throw std::invalid_argument("alternate schedule length mismatch");
    std::vector<bool> a0, b0, a1, b1;
    detail::run_with_schedule(cfg, base, model, &a0, &b0);
    detail::run_with_schedule(cfg, alternate, model, &a1, &b1);
    NoSignallingReport report;
    report.a_identical = a0 == a1;
    report.b_identical = b0 == b1;
    for (std::size_t k = 0; k < a0.size(); ++k) {
        if (!report.first_a_difference && a0[k] != a1[k])
            report.first_a_difference = k;
        if (!report.first_b_difference && b0[k] != b1[k])
            report.first_b_difference = k;
    }
    return report;
}

}  // namespace chshsim

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "chshsim/harness.hpp"

namespace chshsim {

struct Histogram {
    double lo, hi;
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;

    Histogram(double lo_, double hi_, std::size_t n_bins)
        : lo(lo_), hi(hi_), counts(n_bins, 0) {
        if (n_bins < 1 || !(hi > lo))
            throw std::invalid_argument("histogram needs hi > lo, bins >= 1");
    }

    // Out-of-range values land in the end bins so that totals conserve.
    void add(double v) {
        double f = (v - lo) / (hi - lo) * counts.size();
        auto bin = f < 0.0 ? 0
                           : std::min(static_cast<std::size_t>(f),
                                      counts.size() - 1);
        ++counts[bin];
        ++total;
    }

    double bin_low(std::size_t i) const {
        return lo + (hi - lo) * i / counts.size();
    }
    double bin_high(std::size_t i) const { return bin_low(i + 1); }
};

struct BatchResult {
    std::vector<double> c_values;
    std::vector<RunResult> results;  // index-aligned with c_values
    Histogram histogram;
    double mean_c = 0.0;
    double sem = 0.0;  // standard error of the mean over runs
};

struct MeanSem {
    double mean = 0.0, sem = 0.0;
};

inline MeanSem mean_sem(const std::vector<double>& xs) {
    MeanSem r;
    if (xs.empty()) return r;
    for (double x : xs) r.mean += x;
    r.mean /= xs.size();
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - r.mean) * (x - r.mean);
        r.sem = std::sqrt(ss / (xs.size() - 1) / xs.size());
    }
    return r;
}

namespace detail {

// Runs jobs 0..n-1 across workers; each result lands at its own index, so
// the outcome is independent of the worker count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned n_threads, Fn&& body) {
    if (n_threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    unsigned count = std::min<std::size_t>(n_threads, n);
    workers.reserve(count);
    for (unsigned w = 0; w < count; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n;
                 i = next.fetch_add(1))
                body(i);
        });
    }
    for (auto& t : workers) t.join();
}

}  // namespace detail

// Fresh table and fresh random initial states per run; run r uses seed set
// derive_seed(master, r).
inline BatchResult run_batch(const RunConfig& base, std::size_t n_runs,
                             std::uint64_t master_seed,
                             double hist_lo = 1.5, double hist_hi = 2.5,
                             std::size_t hist_bins = 100,
                             unsigned n_threads = 1,
                             DetectorModel model = DetectorModel::memory) {
    if (n_runs < 1) throw std::invalid_argument("need at least one run");
    BatchResult result{std::vector<double>(n_runs),
                       std::vector<RunResult>(n_runs),
                       Histogram(hist_lo, hist_hi, hist_bins)};
    std::vector<std::string> errors(n_runs);
    detail::parallel_for(n_runs, n_threads, [&](std::size_t r) {
        RunConfig cfg = base;
        cfg.seeds = SeedSet::from_master(derive_seed(master_seed, r));
        try {
            result.results[r] = run_experiment(cfg, model);
            result.c_values[r] = result.results[r].require_estimate().c;
        } catch (const std::exception& e) {
            errors[r] = e.what();
        }
    });
    for (std::size_t r = 0; r < n_runs; ++r)
        if (!errors[r].empty())
            throw std::runtime_error("run " + std::to_string(r) + " (seed " +
                                     std::to_string(derive_seed(master_seed, r)) +
                                     ") failed: " + errors[r]);
    for (double c : result.c_values) result.histogram.add(c);
    auto ms = mean_sem(result.c_values);
    result.mean_c = ms.mean;
    result.sem = ms.sem;
    return result;
}

struct SweepCell {
    double p_s, p_d;
    double mean_c = 0.0, sem = 0.0;
    std::size_t runs = 0;
    bool violating = false;  // mean - 3*SEM > 2
    std::string error;       // nonempty when the cell failed
};

struct SweepGrid {
    std::vector<double> ps_values, pd_values;
    std::vector<SweepCell> cells;  // row-major: ps index major, pd minor

    const SweepCell& at(std::size_t si, std::size_t pj) const {
        return cells[si * pd_values.size() + pj];
    }
};

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
        throw std::invalid_argument("log grid needs 0 < lo < hi, n >= 2");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
    return v;
}

// Cell (si, pj), run r uses a seed chained from (master, si, pj, r), so
// cell values are independent of evaluation order and worker count.
inline SweepGrid sweep(const std::vector<double>& ps_values,
                       const std::vector<double>& pd_values,
                       const RunConfig& base, std::size_t runs_per_cell,
                       std::uint64_t master_seed, unsigned n_threads = 1) {
    if (runs_per_cell < 1) throw std::invalid_argument("runs_per_cell >= 1");
    for (double p : ps_values)
        if (!(p > 0.0) || p > 1.0)
            throw std::invalid_argument("p_s values must be in (0, 1]");
    for (double p : pd_values)
        if (!(p > 0.0) || p > 1.0)
            throw std::invalid_argument("p_d values must be in (0, 1]");
    SweepGrid grid{ps_values, pd_values, {}};
    grid.cells.resize(ps_values.size() * pd_values.size());
    detail::parallel_for(grid.cells.size(), n_threads, [&](std::size_t idx) {
        std::size_t si = idx / pd_values.size(), pj = idx % pd_values.size();
        SweepCell& cell = grid.cells[idx];
        cell.p_s = ps_values[si];
        cell.p_d = pd_values[pj];
        cell.runs = runs_per_cell;
        std::vector<double> cs(runs_per_cell);
        try {
            for (std::size_t r = 0; r < runs_per_cell; ++r) {
                RunConfig cfg = base;
                cfg.p_s = cell.p_s;
                cfg.p_d = cell.p_d;
                std::uint64_t s = derive_seed(master_seed, si);
                s = derive_seed(s, pj);
                s = derive_seed(s, r);
                cfg.seeds = SeedSet::from_master(s);
                cs[r] = run_experiment(cfg).require_estimate().c;
            }
            auto ms = mean_sem(cs);
            cell.mean_c = ms.mean;
            cell.sem = ms.sem;
            cell.violating = cell.mean_c - 3.0 * cell.sem > 2.0;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    });
    return grid;
}

// ---- CSV emission. All headers are part of the schema; numbers carry
// full round-trip precision.

inline std::ostream& full_precision(std::ostream& os) {
    return os << std::setprecision(17);
}

inline void write_run_csv_header(std::ostream& os) {
    os << "seed,n_events";
    for (const char* f : {"count", "mismatch", "p"})
        for (int i = 1; i <= 2; ++i)
            for (int j = 1; j <= 2; ++j)
                os << ',' << f << i << j;
    os << ",c,se_c\n";
}

inline void write_run_csv_row(std::ostream& os, std::uint64_t seed,
                              const RunConfig& cfg, const RunResult& r) {
    full_precision(os) << seed << ',' << cfg.n_events;
    for (auto& row : r.tally.counts)
        for (auto v : row) os << ',' << v;
    for (auto& row : r.tally.mismatches)
        for (auto v : row) os << ',' << v;
    const ChshEstimate& est = r.require_estimate();
    for (auto& row : est.p)
        for (auto v : row) os << ',' << v;
    os << ',' << est.c << ',' << est.se_c << '\n';
}

inline void write_histogram_csv(std::ostream& os, const Histogram& h) {
    full_precision(os) << "bin_low,bin_high,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        os << h.bin_low(i) << ',' << h.bin_high(i) << ',' << h.counts[i]
           << '\n';
}

inline void write_sweep_csv(std::ostream& os, const SweepGrid& grid) {
    full_precision(os) << "ps,pd,mean_C,sem,violating\n";
    for (const auto& cell : grid.cells) {
        if (!cell.error.empty()) {
            os << cell.p_s << ',' << cell.p_d << ",nan,nan,error\n";
            continue;
        }
        os << cell.p_s << ',' << cell.p_d << ',' << cell.mean_c << ','
           << cell.sem << ',' << (cell.violating ? 1 : 0) << '\n';
    }
}

}  // namespace chshsim

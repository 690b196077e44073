// Command-line driver for the eventron CHSH simulator.
//
// Subcommands: run, batch, sweep, control, strawman, audit, certify.
// Flags may also come from a key=value config file (--config); flags on
// the command line override file values. Master seed comes from --seed or
// the CHSHSIM_SEED environment variable.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "chshsim/chshsim.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitUndefinedEstimate = 3;

struct CommonOpts {
    chshsim::RunConfig cfg;
    std::uint64_t seed = 0;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--table-len", o.cfg.table_length, "Lookup table length")
        ->check(CLI::Range(3u, 1000000000u))
        ->capture_default_str();
    cmd->add_option("--pt", o.cfg.p_t, "Adjacent-flip probability of the table")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--ps", o.cfg.p_s, "Set-memory command probability")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--pd", o.cfg.p_d, "Mixed-pair switch probability")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--alpha", o.cfg.alpha,
                    "Same-pair switch factor (switch prob = alpha*ps)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--events", o.cfg.n_events, "Eventron emissions per run")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Master seed")
        ->envname("CHSHSIM_SEED")
        ->capture_default_str();
    cmd->add_option("--out", o.out, "Output CSV path (default: stdout)");
    cmd->set_config("--config", "", "Read options from a key=value file");
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    return file;
}

void print_estimate(std::ostream& os, const chshsim::ChshEstimate& est) {
    chshsim::full_precision(os);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            os << "P(A" << i + 1 << ",B" << j + 1 << ") = " << est.p[i][j]
               << " +- " << est.se[i][j] << '\n';
    os << "C = " << est.c << " +- " << est.se_c << '\n';
}

int cmd_run(const CommonOpts& o, const std::string& trace_path,
            const std::string& schedule_in, const std::string& schedule_out,
            bool dump_table) {
    chshsim::RunConfig cfg = o.cfg;
    cfg.seeds = chshsim::SeedSet::from_master(o.seed);

    std::ofstream trace_file;
    std::ostream* trace = nullptr;
    if (!trace_path.empty()) {
        trace_file.open(trace_path);
        if (!trace_file)
            throw std::runtime_error("cannot open trace file: " + trace_path);
        trace = &trace_file;
    }

    if (dump_table) {
        chshsim::Rng table_rng(cfg.seeds.table);
        chshsim::LookupTable table(cfg.table_length, cfg.p_t, table_rng);
        std::cerr << table.to_bit_string() << '\n';
    }

    chshsim::RunResult result;
    if (!schedule_in.empty()) {
        std::ifstream in(schedule_in);
        if (!in)
            throw std::runtime_error("cannot open schedule: " + schedule_in);
        auto schedule = chshsim::read_schedule_csv(in);
        cfg.n_events = schedule.size();
        result = chshsim::run_with_schedule(cfg, schedule,
                                            chshsim::DetectorModel::memory,
                                            trace);
    } else {
        if (!schedule_out.empty()) {
            std::ofstream out(schedule_out);
            if (!out)
                throw std::runtime_error("cannot open schedule output: " +
                                         schedule_out);
            chshsim::write_schedule_csv(out, chshsim::schedule_for(cfg));
        }
        result = chshsim::run_experiment(cfg, chshsim::DetectorModel::memory,
                                         trace);
    }

    std::ofstream out_file;
    std::ostream& os = open_out(o.out, out_file);
    chshsim::write_run_csv_header(os);
    chshsim::write_run_csv_row(os, o.seed, cfg, result);
    print_estimate(std::cerr, result.require_estimate());
    return 0;
}

int cmd_batch(const CommonOpts& o, std::size_t runs, std::size_t bins,
              double hist_lo, double hist_hi, const std::string& hist_out,
              unsigned threads, bool control) {
    auto model = control ? chshsim::DetectorModel::memoryless
                         : chshsim::DetectorModel::memory;
    auto batch = chshsim::run_batch(o.cfg, runs, o.seed, hist_lo, hist_hi,
                                    bins, threads, model);

    std::ofstream out_file;
    std::ostream& os = open_out(o.out, out_file);
    chshsim::write_run_csv_header(os);
    for (std::size_t r = 0; r < runs; ++r)
        chshsim::write_run_csv_row(os, chshsim::derive_seed(o.seed, r), o.cfg,
                                   batch.results[r]);
    if (!hist_out.empty()) {
        std::ofstream hf(hist_out);
        if (!hf)
            throw std::runtime_error("cannot open histogram file: " + hist_out);
        chshsim::write_histogram_csv(hf, batch.histogram);
    }
    chshsim::full_precision(std::cerr)
        << "runs = " << runs << ", mean C = " << batch.mean_c
        << " +- " << batch.sem << (control ? " (memoryless control)" : "")
        << '\n';
    return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& ps_grid,
              const std::string& pd_grid, std::size_t runs_per_cell,
              unsigned threads) {
    auto parse_grid = [](const std::string& s) {
        double lo, hi;
        std::size_t n;
        char c1, c2;
        std::istringstream in(s);
        if (!(in >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':')
            throw CLI::ValidationError("grid", "expected lo:hi:n, got " + s);
        return chshsim::log_spaced(lo, hi, n);
    };
    auto grid = chshsim::sweep(parse_grid(ps_grid), parse_grid(pd_grid), o.cfg,
                               runs_per_cell, o.seed, threads);
    std::ofstream out_file;
    std::ostream& os = open_out(o.out, out_file);
    chshsim::write_sweep_csv(os, grid);
    std::size_t violating = 0, failed = 0;
    for (const auto& cell : grid.cells) {
        violating += cell.violating;
        failed += !cell.error.empty();
    }
    std::cerr << grid.cells.size() << " cells, " << violating
              << " violating, " << failed << " failed\n";
    return 0;
}

int cmd_strawman(std::optional<int> phase) {
    auto summary = chshsim::strawman_phase_average();
    chshsim::full_precision(std::cout);
    if (phase) {
        std::cout << "phase " << *phase << ": C = "
                  << summary.c_by_phase[*phase] << '\n';
        return 0;
    }
    for (int p = 0; p < 4; ++p)
        std::cout << "phase " << p << ": C = " << summary.c_by_phase[p] << '\n';
    std::cout << "phase average: C = " << summary.phase_average << '\n';
    std::cout << "claimed phase 2,3 value (2): "
              << (summary.matches_claimed_phase23 ? "matches" : "DISAGREES")
              << '\n';
    std::cout << "claimed phase average (2): "
              << (summary.matches_claimed_average ? "matches" : "DISAGREES")
              << '\n';
    return 0;
}

int cmd_audit(const CommonOpts& o, std::size_t cases) {
    chshsim::RunConfig cfg = o.cfg;
    cfg.seeds = chshsim::SeedSet::from_master(o.seed);
    auto base = chshsim::schedule_for(cfg);
    chshsim::Rng pick(chshsim::derive_seed(o.seed, 0x61756469));
    std::size_t failures = 0;
    for (std::size_t k = 0; k < cases; ++k) {
        std::size_t at = pick.uniform_int(0, base.size() - 1);
        bool flip_b = pick.coin();
        auto alt = base;
        if (flip_b)
            alt[at].b = alt[at].b == 1 ? 2 : 1;
        else
            alt[at].a = alt[at].a == 1 ? 2 : 1;
        auto report = chshsim::no_signalling_audit(cfg, alt);
        bool ok = flip_b ? report.a_identical : report.b_identical;
        std::cout << "case " << k << ": flip " << (flip_b ? 'B' : 'A')
                  << " at event " << at << " -> "
                  << (flip_b ? "A" : "B") << " outputs "
                  << (ok ? "identical (pass)" : "CHANGED (FAIL)") << '\n';
        failures += !ok;
    }
    std::cout << cases << " cases, " << failures << " failures\n";
    return failures == 0 ? 0 : 1;
}

int cmd_certify() {
    auto bound = chshsim::max_deterministic_chsh();
    std::cout << "max deterministic C = " << bound.max_c << '\n';
    for (const auto& s : bound.maximizers)
        std::cout << "  maximizer (a1,a2,b1,b2) = (" << int(s.a1) << ','
                  << int(s.a2) << ',' << int(s.b1) << ',' << int(s.b2)
                  << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classical Bell-CHSH apparatus simulator"};
    app.require_subcommand(1);

    CommonOpts run_o;
    std::string trace_path, schedule_in, schedule_out;
    bool dump_table = false;
    auto* run = app.add_subcommand("run", "Single experimental run");
    add_common(run, run_o);
    run->add_option("--trace", trace_path, "Per-event trace CSV path");
    run->add_option("--schedule", schedule_in, "Replay a schedule CSV");
    run->add_option("--export-schedule", schedule_out,
                    "Write the generated schedule as CSV");
    run->add_flag("--dump-table", dump_table,
                  "Print the lookup table bits to stderr");

    CommonOpts batch_o;
    std::size_t runs = 100, bins = 100;
    double hist_lo = 1.5, hist_hi = 2.5;
    std::string hist_out;
    unsigned threads = std::thread::hardware_concurrency();
    auto* batch = app.add_subcommand("batch", "Histogram over many runs");
    add_common(batch, batch_o);
    batch->add_option("--runs", runs)->check(CLI::PositiveNumber);
    batch->add_option("--bins", bins)->check(CLI::PositiveNumber);
    batch->add_option("--hist-lo", hist_lo);
    batch->add_option("--hist-hi", hist_hi);
    batch->add_option("--hist-out", hist_out, "Histogram CSV path");
    batch->add_option("--threads", threads);

    CommonOpts sweep_o;
    sweep_o.cfg.n_events = 100000;
    std::string ps_grid = "0.001:0.5:8", pd_grid = "0.0001:0.5:8";
    std::size_t runs_per_cell = 10;
    unsigned sweep_threads = std::thread::hardware_concurrency();
    auto* sw = app.add_subcommand("sweep", "p_s x p_d violation-region grid");
    add_common(sw, sweep_o);
    sw->add_option("--ps-grid", ps_grid, "p_s grid as lo:hi:n (log-spaced)")
        ->capture_default_str();
    sw->add_option("--pd-grid", pd_grid, "p_d grid as lo:hi:n (log-spaced)")
        ->capture_default_str();
    sw->add_option("--runs-per-cell", runs_per_cell)
        ->check(CLI::PositiveNumber);
    sw->add_option("--threads", sweep_threads);

    CommonOpts control_o;
    std::size_t control_runs = 100;
    unsigned control_threads = std::thread::hardware_concurrency();
    auto* control =
        app.add_subcommand("control", "Memoryless control (certifies C <= 2)");
    add_common(control, control_o);
    control->add_option("--runs", control_runs)->check(CLI::PositiveNumber);
    control->add_option("--threads", control_threads);

    std::optional<int> phase;
    auto* straw = app.add_subcommand(
        "strawman", "Sync-dependent instruction emitter, exact C per phase");
    straw->add_option("--phase", phase, "Single phase 0..3 (default: all)")
        ->check(CLI::Range(0, 3));

    CommonOpts audit_o;
    audit_o.cfg.n_events = 100000;
    std::size_t audit_cases = 10;
    auto* audit =
        app.add_subcommand("audit", "No-signalling schedule-perturbation audit");
    add_common(audit, audit_o);
    audit->add_option("--cases", audit_cases)->check(CLI::PositiveNumber);

    app.add_subcommand("certify", "Deterministic-strategy CHSH bound");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(run_o, trace_path, schedule_in, schedule_out,
                           dump_table);
        if (batch->parsed())
            return cmd_batch(batch_o, runs, bins, hist_lo, hist_hi, hist_out,
                             threads, false);
        if (sw->parsed())
            return cmd_sweep(sweep_o, ps_grid, pd_grid, runs_per_cell,
                             sweep_threads);
        if (control->parsed())
            return cmd_batch(control_o, control_runs, 100, 1.5, 2.5, "",
                             control_threads, true);
        if (straw->parsed()) return cmd_strawman(phase);
        if (audit->parsed()) return cmd_audit(audit_o, audit_cases);
        return cmd_certify();
    } catch (const chshsim::UndefinedEstimateError& e) {
        std::cerr << "undefined estimate: " << e.what() << '\n';
        return kExitUndefinedEstimate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

#include "otsketch/bench.hpp"

#include <chrono>
#include <fstream>

#include "otsketch/errors.hpp"
#include "otsketch/sampling.hpp"
#include "otsketch/snr.hpp"

namespace otsketch {

GridDensity half_split_density() {
    const int w = 64;
    std::vector<double> s(std::size_t(w + 1) * 2);
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i <= w; ++i)
            s[std::size_t(j) * (w + 1) + i] = (2 * i < w) ? 2.0 : 0.0;
    return GridDensity(w, 1, std::move(s)).normalized();
}

std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
    if (cfg.sizes.empty()) throw BadInput("bench: no sizes given");
    const GridDensity d = cfg.density == BenchDensity::uniform
                              ? GridDensity::constant()
                              : half_split_density();
    const std::string dname = cfg.density == BenchDensity::uniform ? "uniform" : "half";

    std::vector<BenchRow> rows;
    for (std::size_t k = 0; k < cfg.sizes.size(); ++k) {
        const int n = cfg.sizes[k];
        SnrMeter meter = SnrMeter::for_density(d, cfg.snr_grid, n, cfg.exec);

        DescentConfig dc;
        dc.weight_mode = WeightMode::fixed;
        dc.stop = StopRule::snr;
        dc.snr_threshold_db = cfg.snr_threshold_db;
        dc.max_outer = cfg.max_outer;
        dc.time_limit_s = cfg.time_limit_s;
        dc.dual.mode = cfg.newton;
        dc.dual.exec = cfg.exec;
        dc.snr_eval = [&meter](const SiteSet& s) { return meter.evaluate(s); };

        const SiteSet init = init_sites(n, cfg.seed + k, &d);
        const auto t0 = std::chrono::steady_clock::now();
        MeasureState st;
        bool blew_up = false;
        try {
            st = run(d, init, dc);
        } catch (const EmptyCellEncountered&) {
            blew_up = true;
        } catch (const SingularKkt&) {
            blew_up = true;
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        BenchRow row;
        row.density = dname;
        row.n = n;
        row.iterations = st.outer_iterations;
        row.seconds = secs;
        row.snr_db = st.last_snr;
        row.status = blew_up ? "NC" : st.time_limit ? "TL" : st.converged ? "OK" : "NC";
        rows.push_back(row);
    }
    return rows;
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
    std::ofstream out(path);
    if (!out) throw BadInput("cannot open output file: " + path);
    out << "density,n,iterations,seconds,snr_db,status\n";
    for (const auto& r : rows)
        out << r.density << ',' << r.n << ',' << r.iterations << ',' << r.seconds << ','
            << r.snr_db << ',' << r.status << '\n';
}

} // namespace otsketch

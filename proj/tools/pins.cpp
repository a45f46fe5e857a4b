// pins: rovibrational partition functions by path-integral nested sampling.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "pins/config.hpp"
#include "pins/driver.hpp"
#include "pins/estimator.hpp"
#include "pins/svg_plot.hpp"

namespace {

int default_threads()
{
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

struct CommonOpts {
    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    int threads = default_threads();
};

void add_common(CLI::App* cmd, CommonOpts& o)
{
    cmd->add_option("config", o.config_path, "run configuration (JSON)")->required();
    cmd->add_option("--out", o.out_override, "override output.path");
    cmd->add_option("--seed", o.seed_override, "override run.seed")
        ->each([&](const std::string&) { o.seed_set = true; });
    cmd->add_option("--threads", o.threads, "parallel (T, run) workers");
}

pins::RunConfig load_with_overrides(const CommonOpts& o)
{
    pins::RunConfig cfg = pins::load_run_config(o.config_path);
    if (!o.out_override.empty()) cfg.output.path = o.out_override;
    if (o.seed_set) cfg.ns.seed = o.seed_override;
    return cfg;
}

void print_rows(const std::vector<pins::SweepRow>& rows)
{
    std::printf("%s\n", pins::sweep_csv_header);
    for (const auto& r : rows)
        std::printf("%s\n", pins::detail_driver::csv_line(r).c_str());
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"absolute rovibrational partition functions via path-integral nested sampling"};
    app.require_subcommand(1);

    CommonOpts run_opts, sl_opts, sm_opts;
    std::vector<double> l_values;
    std::vector<int> m_values;

    auto* run_cmd = app.add_subcommand("run", "temperature sweep from a config file");
    add_common(run_cmd, run_opts);

    auto* sl_cmd = app.add_subcommand("sweep-l", "box-length convergence sweep");
    add_common(sl_cmd, sl_opts);
    sl_cmd->add_option("--values", l_values, "box lengths L (bohr)")->required();

    auto* sm_cmd = app.add_subcommand("sweep-m", "bead-count convergence sweep");
    add_common(sm_cmd, sm_opts);
    sm_cmd->add_option("--values", m_values, "bead counts M")->required();

    int st_k = 1000, st_s = 800, st_runs = 20, st_threads = default_threads();
    std::uint64_t st_seed = 20180926;
    std::string st_out;
    auto* st_cmd = app.add_subcommand(
        "selftest-i9", "nine-dimensional Gaussian integral self-test ((2*pi)^(9/2))");
    st_cmd->add_option("--live-points", st_k, "live points K");
    st_cmd->add_option("--walk-steps", st_s, "MCMC steps S per replacement");
    st_cmd->add_option("--runs", st_runs, "independent runs");
    st_cmd->add_option("--seed", st_seed, "base seed");
    st_cmd->add_option("--threads", st_threads, "parallel runs");
    st_cmd->add_option("--out", st_out, "also write the report as CSV");

    std::string plot_in, plot_out, plot_x = "T_K", plot_y = "Q_mean", plot_yerr = "Q_sigma";
    bool plot_logy = false;
    auto* plot_cmd = app.add_subcommand("plot", "render a results CSV to an SVG image");
    plot_cmd->add_option("csv", plot_in, "results CSV")->required();
    plot_cmd->add_option("--out", plot_out, "output SVG path (default: <csv>.svg)");
    plot_cmd->add_option("--x", plot_x, "x column");
    plot_cmd->add_option("--y", plot_y, "y column");
    plot_cmd->add_option("--yerr", plot_yerr, "error-bar column ('' to disable)");
    plot_cmd->add_flag("--log-y", plot_logy, "logarithmic y axis");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            const auto cfg = load_with_overrides(run_opts);
            print_rows(pins::run_sweep(cfg, run_opts.threads));
        } else if (*sl_cmd) {
            const auto cfg = load_with_overrides(sl_opts);
            print_rows(pins::sweep_box_length(cfg, l_values, sl_opts.threads));
        } else if (*sm_cmd) {
            const auto cfg = load_with_overrides(sm_opts);
            print_rows(pins::sweep_beads(cfg, m_values, sm_opts.threads));
        } else if (*st_cmd) {
            const auto rep = pins::selftest_i9(st_k, st_s, st_runs, st_seed, st_threads);
            std::printf("I9 exact      %.6f\n", rep.exact);
            std::printf("I9 mean       %.6f\n", rep.mean);
            std::printf("I9 sigma_mean %.6f\n", rep.sigma_of_mean);
            std::printf("deviation     %.4f%%\n", 100.0 * rep.rel_deviation);
            if (!st_out.empty()) {
                std::ofstream out(st_out);
                out << "K,S,n_runs,exact,mean,sigma_of_mean,rel_deviation\n"
                    << rep.live_points << ',' << rep.walk_steps << ',' << rep.n_runs << ','
                    << pins::detail_driver::fmt(rep.exact) << ','
                    << pins::detail_driver::fmt(rep.mean) << ','
                    << pins::detail_driver::fmt(rep.sigma_of_mean) << ','
                    << pins::detail_driver::fmt(rep.rel_deviation) << "\n";
            }
        } else if (*plot_cmd) {
            const auto table = pins::read_csv(plot_in);
            pins::PlotSeries s;
            const int xi = table.column_index(plot_x);
            const int yi = table.column_index(plot_y);
            int ei = -1;
            if (!plot_yerr.empty()) ei = table.column_index(plot_yerr);
            for (const auto& row : table.rows) {
                s.x.push_back(row[xi]);
                s.y.push_back(row[yi]);
                if (ei >= 0) s.y_err.push_back(row[ei]);
            }
            s.x_label = plot_x;
            s.y_label = plot_y;
            s.log_y = plot_logy;
            s.title = plot_in;
            if (plot_out.empty()) plot_out = plot_in + ".svg";
            pins::write_svg_plot(plot_out, s);
            std::printf("wrote %s\n", plot_out.c_str());
        }
    } catch (const pins::InvalidInput& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

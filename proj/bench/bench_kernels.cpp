// Times the OpenMP kernels against their serial reference implementations
// and verifies they agree bit for bit. Usage: distkit_bench [samples]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "distkit/distance.hpp"
#include "distkit/mixture.hpp"
#include "distkit/parallel.hpp"
#include "distkit/pipeline.hpp"
#include "distkit/rng.hpp"
#include "distkit/stats.hpp"

using namespace distkit;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double time_call(F&& f) {
    const double start = now_seconds();
    f();
    return now_seconds() - start;
}

void print_row(const char* name, double serial, double parallel, bool identical) {
    std::printf("%-28s %10.3fs %10.3fs %8.2fx   %s\n", name, serial, parallel,
                serial / parallel, identical ? "bit-identical" : "MISMATCH");
}

stats::PanelData fake_panel(const std::string& id, std::uint64_t seed, int tickers, int days) {
    stats::PanelData p;
    p.market_id = id;
    p.values.resize(tickers, days);
    for (int c = 0; c < days; ++c)
        p.dates.push_back("2014-" + std::to_string(100 + c));
    for (int r = 0; r < tickers; ++r)
        p.tickers.push_back(id + std::to_string(r));
    for (Eigen::Index i = 0; i < p.values.size(); ++i)
        p.values(i) = 100.0 * std::exp(0.02 * rng::normal_at(seed, i));
    return p;
}

} // namespace

int main(int argc, char** argv) {
    const std::int64_t samples = argc > 1 ? std::atoll(argv[1]) : 4000000;
    std::printf("workers: %d\n", parallel::worker_count());
    std::printf("%-28s %11s %11s %9s\n", "kernel", "serial", "parallel", "speedup");

    {
        Eigen::Matrix3d cov;
        cov << 1.0, 0.4, 0.1, 0.4, 2.0, -0.3, 0.1, -0.3, 1.5;
        const Eigen::Vector3d mean(0.0, 0.0, 0.0);
        const Eigen::Vector3d lo(-2.0, -2.0, -2.0);
        const Eigen::Vector3d hi(2.0, 2.0, 2.0);
        distance::McResult rs, rp;
        const double ts = time_call([&] {
            rs = distance::gaussian_box_probability_mc_serial(mean, cov, lo, hi, samples, 7);
        });
        const double tp = time_call(
            [&] { rp = distance::gaussian_box_probability_mc(mean, cov, lo, hi, samples, 7); });
        print_row("box probability MC", ts, tp,
                  rs.value == rp.value && rs.std_error == rp.std_error);
    }

    {
        const mixture::MixtureComponentSpec spec{0.0, 0.5, 4};
        const auto f = [&](double u) { return mixture::nln_component_density(u, spec); };
        DensityGrid gs, gp;
        const double ts =
            time_call([&] { gs = mixture::tabulate_density_serial(f, -12.0, 12.0, 5e-4); });
        const double tp = time_call([&] { gp = mixture::tabulate_density(f, -12.0, 12.0, 5e-4); });
        print_row("nln tabulation 48k points", ts, tp,
                  (gs.values - gp.values).cwiseAbs().maxCoeff() == 0.0);
    }

    {
        std::vector<stats::PanelData> panels;
        for (int i = 0; i < 8; ++i)
            panels.push_back(fake_panel("B" + std::to_string(i), 40 + i, 40, 120));
        pipeline::RunConfig config;
        config.input_paths = {"a", "b"};
        config.sample_seed = 3;
        config.reduction.pca_sig_digits = 6;

        Eigen::MatrixXd serial_values, parallel_values;
        setenv("DISTKIT_THREADS", "1", 1);
        const double ts = time_call([&] {
            serial_values =
                pipeline::compute_distance_matrix(panels, config, "close", 0).values;
        });
        unsetenv("DISTKIT_THREADS");
        const double tp = time_call([&] {
            parallel_values =
                pipeline::compute_distance_matrix(panels, config, "close", 0).values;
        });
        print_row("8x8 distance matrix", ts, tp,
                  (serial_values - parallel_values).cwiseAbs().maxCoeff() == 0.0);
    }
    return 0;
}

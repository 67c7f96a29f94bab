#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "distkit/dimreduce.hpp"
#include "distkit/distance.hpp"
#include "distkit/mixture.hpp"
#include "distkit/pipeline.hpp"
#include "distkit/stats.hpp"

namespace {

using distkit::dimreduce::Method;
using distkit::pipeline::RunConfig;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

// key=value config file mirroring RunConfig; '#' starts a comment.
void apply_config_file(const std::string& path, RunConfig& config) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r' || line.back() == '\t'))
            line.pop_back();
        if (line.empty())
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ": bad line " + std::to_string(line_no));
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);

        if (key == "input")
            config.input_paths.push_back(value);
        else if (key == "inputs")
            for (const std::string& p : split_list(value))
                config.input_paths.push_back(p);
        else if (key == "variables")
            config.variables = split_list(value);
        else if (key == "reduction")
            config.reduction.method = value == "jl" ? Method::jl : Method::pca;
        else if (key == "sig_digits")
            config.reduction.pca_sig_digits = std::stoi(value);
        else if (key == "epsilon")
            config.reduction.jl_epsilon = std::stod(value);
        else if (key == "iterations")
            config.reduction.jl_iterations = std::stoi(value);
        else if (key == "vol_window")
            config.vol_window = std::stoi(value);
        else if (key == "sub_universe")
            config.sub_universe_size = std::stoi(value);
        else if (key == "seed")
            config.sample_seed = std::stoull(value);
        else if (key == "mc_samples")
            config.mc_samples = std::stoll(value);
        else if (key == "out")
            config.output_dir = value;
        else if (key == "format")
            config.output_format = value;
        else
            throw std::runtime_error(path + ": unknown key '" + key + "'");
    }
}

// Plain numeric CSV, rows = variables, columns = observations.
Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error(path + ": ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw std::runtime_error(path + ": empty matrix");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j)
            m(i, j) = rows[i][j];
    return m;
}

int cmd_distance(const std::string& path_a, const std::string& path_b, const std::string& family,
                 std::int64_t grid_points) {
    namespace dk = distkit;
    const Eigen::MatrixXd a = read_matrix_csv(path_a);
    const Eigen::MatrixXd b = read_matrix_csv(path_b);

    if (family == "mvn") {
        if (a.rows() != b.rows())
            throw std::runtime_error("matrices hold different variable counts; reduce first");
        const auto model = [](const Eigen::MatrixXd& m) {
            auto g = dk::stats::estimate_gaussian(m);
            g.cov.diagonal().array() += dk::stats::default_regularization(g.cov);
            return g;
        };
        std::cout << dk::distance::bc_distance_mvn(model(a), model(b)) << "\n";
        return 0;
    }

    if (a.rows() != 1 || b.rows() != 1)
        throw std::runtime_error("family '" + family + "' compares single-variable series");
    const auto row_a = a.row(0);
    const auto row_b = b.row(0);

    if (family == "normal") {
        const auto ga = dk::stats::estimate_gaussian(a);
        const auto gb = dk::stats::estimate_gaussian(b);
        std::cout << dk::distance::bc_distance_normal_1d(ga.mean[0], ga.cov(0, 0), gb.mean[0],
                                                         gb.cov(0, 0))
                  << "\n";
        return 0;
    }
    if (family == "truncated") {
        const auto ga = dk::stats::estimate_gaussian(a);
        const auto gb = dk::stats::estimate_gaussian(b);
        const auto ta = dk::distance::TruncatedGaussian::univariate(
            ga.mean[0], ga.cov(0, 0), row_a.minCoeff(), row_a.maxCoeff());
        const auto tb = dk::distance::TruncatedGaussian::univariate(
            gb.mean[0], gb.cov(0, 0), row_b.minCoeff(), row_b.maxCoeff());
        std::cout << dk::distance::bc_distance_truncated_normal_1d(ta, tb) << "\n";
        return 0;
    }
    if (family == "nln" || family == "nnp") {
        // Fit the exponent (nln: log of the data must be defined) or the
        // level (nnp) and compare the single-component densities on a grid.
        const auto fit = [&](const Eigen::RowVectorXd& row) {
            dk::mixture::MixtureComponentSpec spec;
            Eigen::MatrixXd samples(1, row.size());
            if (family == "nln") {
                if ((row.array() <= 0.0).any())
                    throw std::runtime_error("nln family requires positive data");
                samples.row(0) = row.array().log();
            } else {
                samples.row(0) = row;
            }
            const auto g = dk::stats::estimate_gaussian(samples);
            spec.mu_y = g.mean[0];
            spec.sigma_y = std::sqrt(g.cov(0, 0));
            spec.k = 1;
            return spec;
        };
        const auto spec_a = fit(row_a);
        const auto spec_b = fit(row_b);
        const auto family_enum =
            family == "nln" ? dk::mixture::Family::nln : dk::mixture::Family::nnp;
        auto grid = dk::mixture::default_grid({spec_a, spec_b}, family_enum);
        if (grid_points > 1)
            grid.step = (grid.hi - grid.lo) / static_cast<double>(grid_points - 1);
        const auto da = dk::mixture::sum_density({spec_a}, family_enum, grid);
        const auto db = dk::mixture::sum_density({spec_b}, family_enum, grid);
        const double rho = dk::distance::bc_coefficient_grid(da, db);
        std::cout << dk::distance::distance_from_coefficient(rho) << "\n";
        return 0;
    }
    throw std::runtime_error("unknown family: " + family);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Population similarity via Bhattacharyya distances"};
    app.require_subcommand(1);

    // --- run ---------------------------------------------------------------
    auto* run_cmd = app.add_subcommand("run", "Run the panel comparison pipeline");
    std::string config_path;
    std::vector<std::string> inputs;
    std::string reduction, variables, format, out_dir;
    int sig_digits = -1, iterations = -1, vol_window = -1, sub_universe = -1;
    double epsilon = -1.0;
    std::int64_t seed = -1;
    run_cmd->add_option("--config", config_path, "key=value config file");
    run_cmd->add_option("--input", inputs, "market CSV (repeatable)");
    run_cmd->add_option("--reduction", reduction)->check(CLI::IsMember({"pca", "jl"}));
    run_cmd->add_option("--variables", variables, "comma-separated variable list");
    run_cmd->add_option("--sig-digits", sig_digits);
    run_cmd->add_option("--epsilon", epsilon);
    run_cmd->add_option("--iterations", iterations);
    run_cmd->add_option("--vol-window", vol_window);
    run_cmd->add_option("--sub-universe", sub_universe);
    run_cmd->add_option("--seed", seed);
    run_cmd->add_option("--out", out_dir);
    run_cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

    // --- distance ----------------------------------------------------------
    auto* dist_cmd = app.add_subcommand("distance", "Distance between two CSV matrices");
    std::string path_a, path_b, family = "mvn";
    std::int64_t grid_points = 0;
    dist_cmd->add_option("a", path_a, "first matrix CSV")->required();
    dist_cmd->add_option("b", path_b, "second matrix CSV")->required();
    dist_cmd->add_option("--family", family)
        ->check(CLI::IsMember({"mvn", "normal", "truncated", "nln", "nnp"}));
    dist_cmd->add_option("--grid-points", grid_points, "density grid resolution");

    // --- jl-bound ----------------------------------------------------------
    auto* bound_cmd = app.add_subcommand("jl-bound", "Print the projection dimension bound");
    std::int64_t bound_n = 0;
    double bound_eps = 0.0;
    bound_cmd->add_option("--n", bound_n, "number of points")->required();
    bound_cmd->add_option("--epsilon", bound_eps, "distortion in (0,1)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1; // usage problems are configuration errors
    }

    try {
        if (bound_cmd->parsed()) {
            std::cout << distkit::dimreduce::jl_min_dimension(bound_n, bound_eps) << "\n";
            return 0;
        }
        if (dist_cmd->parsed())
            return cmd_distance(path_a, path_b, family, grid_points);

        RunConfig config;
        if (!config_path.empty())
            apply_config_file(config_path, config);
        for (const std::string& p : inputs)
            config.input_paths.push_back(p);
        if (!reduction.empty())
            config.reduction.method = reduction == "jl" ? Method::jl : Method::pca;
        if (!variables.empty())
            config.variables = split_list(variables);
        if (sig_digits >= 0)
            config.reduction.pca_sig_digits = sig_digits;
        if (epsilon >= 0.0)
            config.reduction.jl_epsilon = epsilon;
        if (iterations >= 0)
            config.reduction.jl_iterations = iterations;
        if (vol_window >= 0)
            config.vol_window = vol_window;
        if (sub_universe >= 0)
            config.sub_universe_size = sub_universe;
        if (seed >= 0)
            config.sample_seed = static_cast<std::uint64_t>(seed);
        if (!out_dir.empty())
            config.output_dir = out_dir;
        if (!format.empty())
            config.output_format = format;

        std::vector<std::string> log;
        const int code = distkit::pipeline::run(config, &log);
        for (const std::string& line : log)
            std::cerr << line << "\n";
        if (code == 2)
            std::cerr << "warning: some cells failed; see ERR entries\n";
        return code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

#include "distkit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "distkit/distance.hpp"
#include "distkit/parallel.hpp"
#include "distkit/rng.hpp"

namespace distkit::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kAllVariables = {"open",   "high",      "low",       "close",
                                                "volume", "close_vol", "volume_vol"};

namespace {

const std::vector<std::string> kRawVariables = {"open", "high", "low", "close", "volume"};

constexpr const char* kLibraryVersion = "0.1.0";

std::string base_variable(const std::string& name) {
    if (name == "close_vol")
        return "close";
    if (name == "volume_vol")
        return "volume";
    return name;
}

} // namespace

bool is_raw_variable(const std::string& name) {
    return std::find(kRawVariables.begin(), kRawVariables.end(), name) != kRawVariables.end();
}

bool is_valid_variable(const std::string& name) {
    return std::find(kAllVariables.begin(), kAllVariables.end(), name) != kAllVariables.end();
}

void RunConfig::validate() const {
    if (input_paths.size() < 2)
        throw std::invalid_argument("need at least two input panels");
    if (variables.empty())
        throw std::invalid_argument("variables must not be empty");
    for (const std::string& v : variables)
        if (!is_valid_variable(v))
            throw std::invalid_argument("unknown variable: " + v);
    if (vol_window < 2)
        throw std::invalid_argument("vol_window must be at least 2");
    if (sub_universe_size && *sub_universe_size < 2)
        throw std::invalid_argument("sub_universe_size must be at least 2");
    if (mc_samples < 2)
        throw std::invalid_argument("mc_samples must be at least 2");
    if (output_format != "csv" && output_format != "json")
        throw std::invalid_argument("output_format must be csv or json");
    reduction.validate();
}

std::map<std::string, stats::PanelData> load_panel(const std::string& path,
                                                   const std::string& market_id,
                                                   std::vector<std::string>* log) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "date,ticker,open,high,low,close,volume")
        throw std::runtime_error(path + ": bad header");

    // (ticker, date) -> [open, high, low, close, volume]
    std::map<std::string, std::map<std::string, std::array<double, 5>>> rows;
    std::set<std::string> dates;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;

        std::array<std::string, 7> fields;
        std::size_t start = 0;
        std::size_t field = 0;
        for (; field < 7; ++field) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields[field] = line.substr(start);
                start = std::string::npos;
                ++field;
                break;
            }
            fields[field] = line.substr(start, comma - start);
            start = comma + 1;
        }
        if (field != 7 || start != std::string::npos)
            throw std::runtime_error(path + ": malformed row at line " + std::to_string(line_no));

        std::array<double, 5> values{};
        try {
            for (int v = 0; v < 5; ++v) {
                std::size_t used = 0;
                values[v] = std::stod(fields[2 + v], &used);
                if (used != fields[2 + v].size())
                    throw std::invalid_argument("trailing characters");
            }
        } catch (const std::exception&) {
            throw std::runtime_error(path + ": malformed row at line " + std::to_string(line_no));
        }
        if (fields[0].empty() || fields[1].empty())
            throw std::runtime_error(path + ": malformed row at line " + std::to_string(line_no));
        if (rows[fields[1]].count(fields[0]))
            throw std::runtime_error(path + ": malformed row at line " + std::to_string(line_no) +
                                     " (duplicate date/ticker)");
        rows[fields[1]][fields[0]] = values;
        dates.insert(fields[0]);
    }
    if (dates.empty())
        throw std::runtime_error(path + ": no data rows");

    // Keep tickers with a complete, positive, finite history.
    std::vector<std::string> date_list(dates.begin(), dates.end());
    std::vector<std::string> kept;
    for (const auto& [ticker, by_date] : rows) {
        bool ok = by_date.size() == date_list.size();
        std::string reason = ok ? "" : "missing dates";
        if (ok) {
            for (const auto& [date, vals] : by_date) {
                for (double v : vals) {
                    if (!std::isfinite(v) || v <= 0.0) {
                        ok = false;
                        reason = "nonpositive or non-finite value";
                        break;
                    }
                }
                if (!ok)
                    break;
            }
        }
        if (ok)
            kept.push_back(ticker);
        else if (log)
            log->push_back(market_id + ": dropped ticker " + ticker + " (" + reason + ")");
    }
    if (kept.size() < 2)
        throw std::runtime_error(path + ": panel too small");

    std::map<std::string, stats::PanelData> panels;
    for (std::size_t v = 0; v < kRawVariables.size(); ++v) {
        stats::PanelData panel;
        panel.market_id = market_id;
        panel.tickers = kept;
        panel.dates = date_list;
        panel.values.resize(kept.size(), date_list.size());
        for (std::size_t r = 0; r < kept.size(); ++r)
            for (std::size_t c = 0; c < date_list.size(); ++c)
                panel.values(r, c) = rows[kept[r]][date_list[c]][v];
        panel.validate(true);
        panels[kRawVariables[v]] = std::move(panel);
    }
    return panels;
}

stats::PanelData derive_volatility_panel(const stats::PanelData& panel, int window) {
    if (panel.values.cols() <= window)
        throw std::invalid_argument("insufficient columns");

    stats::PanelData out;
    out.market_id = panel.market_id;
    out.tickers = panel.tickers;
    out.dates.assign(panel.dates.begin() + (window - 1), panel.dates.end());
    out.values.resize(panel.values.rows(), panel.values.cols() - window + 1);
    for (Eigen::Index r = 0; r < panel.values.rows(); ++r)
        out.values.row(r) = stats::rolling_volatility(panel.values.row(r).transpose(), window);
    return out;
}

stats::PanelData sample_sub_universe(const stats::PanelData& panel, int size, std::uint64_t seed) {
    const int m = static_cast<int>(panel.tickers.size());
    if (size > m)
        throw std::invalid_argument("sub-universe larger than ticker count");
    if (size < 1)
        throw std::invalid_argument("sub-universe must be positive");

    // Partial Fisher-Yates over the index array, then restore panel order.
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    rng::CounterRng gen(seed);
    for (int i = 0; i < size; ++i) {
        const int j = i + static_cast<int>(gen.next_u64() % static_cast<std::uint64_t>(m - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<int> selected(idx.begin(), idx.begin() + size);
    std::sort(selected.begin(), selected.end());

    stats::PanelData out;
    out.market_id = panel.market_id;
    out.dates = panel.dates;
    out.values.resize(size, panel.values.cols());
    for (int r = 0; r < size; ++r) {
        out.tickers.push_back(panel.tickers[selected[r]]);
        out.values.row(r) = panel.values.row(selected[r]);
    }
    return out;
}

std::vector<stats::PanelData> align_dates(const std::vector<stats::PanelData>& panels) {
    if (panels.empty())
        return {};

    std::set<std::string> common(panels[0].dates.begin(), panels[0].dates.end());
    for (std::size_t i = 1; i < panels.size(); ++i) {
        std::set<std::string> own(panels[i].dates.begin(), panels[i].dates.end());
        std::set<std::string> next;
        std::set_intersection(common.begin(), common.end(), own.begin(), own.end(),
                              std::inserter(next, next.begin()));
        common = std::move(next);
    }
    if (common.empty())
        throw std::runtime_error("no common dates across markets");

    std::vector<stats::PanelData> out;
    for (const stats::PanelData& panel : panels) {
        stats::PanelData aligned;
        aligned.market_id = panel.market_id;
        aligned.tickers = panel.tickers;
        aligned.dates.assign(common.begin(), common.end());
        aligned.values.resize(panel.values.rows(), common.size());
        Eigen::Index c = 0;
        for (std::size_t full = 0; full < panel.dates.size(); ++full) {
            if (common.count(panel.dates[full]))
                aligned.values.col(c++) = panel.values.col(full);
        }
        out.push_back(std::move(aligned));
    }
    return out;
}

namespace {

stats::GaussianModel estimate_with_default_ridge(const Eigen::MatrixXd& samples) {
    stats::GaussianModel model = stats::estimate_gaussian(samples);
    const double ridge = stats::default_regularization(model.cov);
    if (ridge > 0.0)
        model.cov.diagonal().array() += ridge;
    return model;
}

} // namespace

DistanceMatrix compute_distance_matrix(const std::vector<stats::PanelData>& panels,
                                       const RunConfig& config, const std::string& variable,
                                       int iteration) {
    const Eigen::Index m = static_cast<Eigen::Index>(panels.size());
    if (m < 2)
        throw std::invalid_argument("need at least two panels");
    for (const stats::PanelData& p : panels)
        if (p.dates != panels[0].dates)
            throw std::invalid_argument("date alignment violated");

    DistanceMatrix matrix;
    for (const stats::PanelData& p : panels)
        matrix.labels.push_back(p.market_id);
    matrix.values = Eigen::MatrixXd::Zero(m, m);
    matrix.cell_errors.assign(static_cast<std::size_t>(m * m), std::string());
    matrix.variable = variable;
    matrix.method = config.reduction.method == dimreduce::Method::pca ? "pca" : "jl";
    matrix.iteration = iteration;
    matrix.base_seed = config.sample_seed;
    for (const stats::PanelData& p : panels)
        matrix.panel_rows.push_back(static_cast<int>(p.values.rows()));
    if (config.reduction.method == dimreduce::Method::jl)
        matrix.jl_bound =
            dimreduce::jl_min_dimension(panels[0].values.cols(), config.reduction.jl_epsilon);

    struct Cell {
        Eigen::Index i, j;
    };
    std::vector<Cell> cells;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            if (i != j)
                cells.push_back({i, j});

    const auto n_cells = static_cast<std::int64_t>(cells.size());
#pragma omp parallel for schedule(dynamic) num_threads(parallel::worker_count())
    for (std::int64_t c = 0; c < n_cells; ++c) {
        const auto [i, j] = cells[static_cast<std::size_t>(c)];
        dimreduce::ReductionConfig cell_config = config.reduction;
        cell_config.jl_seed = rng::derive(config.sample_seed, static_cast<std::uint64_t>(i),
                                          static_cast<std::uint64_t>(j),
                                          static_cast<std::uint64_t>(iteration));
        try {
            const dimreduce::MatchResult match =
                dimreduce::match_dimensions(panels[i].values, panels[j].values, cell_config);
            const double d = distance::bc_distance_mvn(estimate_with_default_ridge(match.a),
                                                       estimate_with_default_ridge(match.b));
            matrix.values(i, j) = std::max(d, 0.0); // roundoff guard near zero
        } catch (const std::exception& e) {
            matrix.values(i, j) = std::numeric_limits<double>::quiet_NaN();
            matrix.cell_errors[static_cast<std::size_t>(i * m + j)] = e.what();
        }
    }

    matrix.has_errors = std::any_of(matrix.cell_errors.begin(), matrix.cell_errors.end(),
                                    [](const std::string& s) { return !s.empty(); });
    return matrix;
}

std::vector<RankedPair> rank_similarity(const DistanceMatrix& matrix) {
    std::vector<RankedPair> pairs;
    const Eigen::Index m = matrix.size();
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i == j)
                continue;
            RankedPair p;
            p.from = matrix.labels[i];
            p.to = matrix.labels[j];
            p.error = matrix.error_at(i, j);
            p.distance = p.error.empty() ? matrix.values(i, j)
                                         : std::numeric_limits<double>::infinity();
            pairs.push_back(std::move(p));
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const RankedPair& a, const RankedPair& b) {
        const bool ea = !a.error.empty();
        const bool eb = !b.error.empty();
        if (ea != eb)
            return eb; // error cells last
        if (!ea && a.distance != b.distance)
            return a.distance < b.distance;
        if (a.from != b.from)
            return a.from < b.from;
        return a.to < b.to;
    });
    return pairs;
}

namespace {

std::string format_cell(const DistanceMatrix& matrix, Eigen::Index i, Eigen::Index j) {
    const std::string& err = matrix.error_at(i, j);
    if (!err.empty()) {
        std::string clean = err;
        std::replace(clean.begin(), clean.end(), ',', ';');
        return "ERR:" + clean;
    }
    const double v = matrix.values(i, j);
    if (std::isinf(v))
        return "inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string matrix_file_stem(const DistanceMatrix& matrix) {
    return matrix.variable + "_" + matrix.method + "_iter" + std::to_string(matrix.iteration);
}

void write_csv(const DistanceMatrix& matrix, const fs::path& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << "market";
    for (const std::string& label : matrix.labels)
        out << ',' << label;
    out << '\n';
    for (Eigen::Index i = 0; i < matrix.size(); ++i) {
        out << matrix.labels[i];
        for (Eigen::Index j = 0; j < matrix.size(); ++j)
            out << ',' << format_cell(matrix, i, j);
        out << '\n';
    }
}

json config_echo(const RunConfig& config) {
    json j;
    j["variables"] = config.variables;
    j["reduction"] = config.reduction.method == dimreduce::Method::pca ? "pca" : "jl";
    j["pca_sig_digits"] = config.reduction.pca_sig_digits;
    j["jl_epsilon"] = config.reduction.jl_epsilon;
    j["jl_iterations"] = config.reduction.jl_iterations;
    j["vol_window"] = config.vol_window;
    j["sample_seed"] = config.sample_seed;
    j["mc_samples"] = config.mc_samples;
    j["output_format"] = config.output_format;
    if (config.sub_universe_size)
        j["sub_universe_size"] = *config.sub_universe_size;
    return j;
}

void write_json(const DistanceMatrix& matrix, const RunConfig& config, const fs::path& path) {
    json j;
    j["labels"] = matrix.labels;
    json values = json::array();
    for (Eigen::Index i = 0; i < matrix.size(); ++i) {
        json row = json::array();
        for (Eigen::Index j2 = 0; j2 < matrix.size(); ++j2) {
            const std::string& err = matrix.error_at(i, j2);
            const double v = matrix.values(i, j2);
            if (!err.empty())
                row.push_back("ERR:" + err);
            else if (std::isinf(v))
                row.push_back("inf");
            else
                row.push_back(v);
        }
        values.push_back(std::move(row));
    }
    j["values"] = std::move(values);
    j["metadata"] = {{"variable", matrix.variable},
                     {"method", matrix.method},
                     {"iteration", matrix.iteration},
                     {"seed", matrix.base_seed},
                     {"has_errors", matrix.has_errors},
                     {"panel_rows", matrix.panel_rows},
                     {"library_version", kLibraryVersion},
                     {"config", config_echo(config)}};
    if (matrix.method == "jl")
        j["metadata"]["jl_bound"] = matrix.jl_bound;

    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace

std::vector<std::string> emit_report(const std::vector<DistanceMatrix>& matrices,
                                     const RunConfig& config) {
    const fs::path dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::vector<std::string> files;

    json summary;
    summary["config"] = config_echo(config);
    summary["library_version"] = kLibraryVersion;
    json entries = json::array();

    for (const DistanceMatrix& matrix : matrices) {
        const std::string stem = matrix_file_stem(matrix);
        const fs::path path = dir / (stem + (config.output_format == "csv" ? ".csv" : ".json"));
        if (config.output_format == "csv")
            write_csv(matrix, path);
        else
            write_json(matrix, config, path);
        files.push_back(path.filename().string());

        const std::vector<RankedPair> ranked = rank_similarity(matrix);
        json entry;
        entry["variable"] = matrix.variable;
        entry["method"] = matrix.method;
        entry["iteration"] = matrix.iteration;
        entry["file"] = path.filename().string();
        entry["has_errors"] = matrix.has_errors;
        if (!ranked.empty() && ranked.front().error.empty()) {
            entry["most_similar"] = {{"from", ranked.front().from},
                                     {"to", ranked.front().to},
                                     {"distance", ranked.front().distance}};
        }
        entries.push_back(std::move(entry));
    }
    summary["matrices"] = std::move(entries);

    const fs::path summary_path = dir / "summary.json";
    std::ofstream out(summary_path);
    if (!out)
        throw std::runtime_error("cannot write " + summary_path.string());
    out << summary.dump(2) << '\n';
    files.push_back("summary.json");
    return files;
}

int run(const RunConfig& config, std::vector<std::string>* log) {
    config.validate();

    // Fail on an unwritable output directory before any computation.
    const fs::path dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    {
        const fs::path probe = dir / ".distkit_probe";
        std::ofstream test(probe);
        if (!test)
            throw std::runtime_error("output directory not writable: " + config.output_dir);
        test.close();
        fs::remove(probe, ec);
    }

    // Load every market and optionally restrict to a ticker sub-universe.
    std::vector<std::map<std::string, stats::PanelData>> markets;
    for (std::size_t i = 0; i < config.input_paths.size(); ++i) {
        const std::string market_id = fs::path(config.input_paths[i]).stem().string();
        auto panels = load_panel(config.input_paths[i], market_id, log);
        if (config.sub_universe_size) {
            const std::uint64_t seed = rng::derive(config.sample_seed, 0x5ab, i);
            const int available = static_cast<int>(panels.begin()->second.tickers.size());
            const int size = std::min(*config.sub_universe_size, available);
            if (log && size < *config.sub_universe_size)
                log->push_back(market_id + ": sub-universe clamped to " + std::to_string(size) +
                               " tickers");
            // The same ticker selection applies to every variable of the market.
            stats::PanelData sampled = sample_sub_universe(panels.at("close"), size, seed);
            for (auto& [name, panel] : panels) {
                stats::PanelData s = panel;
                s.tickers = sampled.tickers;
                s.values.resize(size, panel.values.cols());
                int r = 0;
                for (const std::string& t : sampled.tickers) {
                    const auto it = std::find(panel.tickers.begin(), panel.tickers.end(), t);
                    s.values.row(r++) =
                        panel.values.row(std::distance(panel.tickers.begin(), it));
                }
                panel = std::move(s);
            }
        }
        markets.push_back(std::move(panels));
    }

    std::vector<DistanceMatrix> matrices;
    for (const std::string& variable : config.variables) {
        std::vector<stats::PanelData> panels;
        for (auto& market : markets)
            panels.push_back(market.at(base_variable(variable)));
        panels = align_dates(panels);
        if (!is_raw_variable(variable)) {
            for (stats::PanelData& p : panels)
                p = derive_volatility_panel(p, config.vol_window);
        }

        const int iterations =
            config.reduction.method == dimreduce::Method::jl ? config.reduction.jl_iterations : 1;
        for (int t = 0; t < iterations; ++t)
            matrices.push_back(compute_distance_matrix(panels, config, variable, t));
    }

    emit_report(matrices, config);

    const bool any_errors = std::any_of(matrices.begin(), matrices.end(),
                                        [](const DistanceMatrix& m) { return m.has_errors; });
    return any_errors ? 2 : 0;
}

} // namespace distkit::pipeline

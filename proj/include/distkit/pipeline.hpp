#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "distkit/dimreduce.hpp"
#include "distkit/stats.hpp"

namespace distkit::pipeline {

// The seven panel variables of the empirical procedure.
extern const std::vector<std::string> kAllVariables;

bool is_raw_variable(const std::string& name);   // open/high/low/close/volume
bool is_valid_variable(const std::string& name); // raw or *_vol

struct RunConfig {
    std::vector<std::string> input_paths;
    std::vector<std::string> variables = kAllVariables;
    dimreduce::ReductionConfig reduction;
    int vol_window = 60;
    std::optional<int> sub_universe_size;
    std::uint64_t sample_seed = 0;
    std::int64_t mc_samples = 1000000;
    std::string output_dir = ".";
    std::string output_format = "csv"; // csv | json

    void validate() const;
};

// Labeled square matrix of pairwise distances. Not symmetric: the reduction
// is order-dependent, so every ordered pair is reported.
struct DistanceMatrix {
    std::vector<std::string> labels;
    Eigen::MatrixXd values;                // +inf allowed; 0 on the diagonal
    std::vector<std::string> cell_errors;  // row-major; empty string = ok
    std::string variable;
    std::string method; // "pca" | "jl"
    int iteration = 0;
    std::uint64_t base_seed = 0;
    bool has_errors = false;
    int jl_bound = 0;            // Lemma bound for the observation count (jl only)
    std::vector<int> panel_rows; // variable count per market; caps the bound per pair

    Eigen::Index size() const { return values.rows(); }
    const std::string& error_at(Eigen::Index i, Eigen::Index j) const {
        return cell_errors[static_cast<std::size_t>(i * size() + j)];
    }
};

struct RankedPair {
    std::string from;
    std::string to;
    double distance = 0.0;
    std::string error; // nonempty for error cells, ranked last
};

// Reads one market CSV (header: date,ticker,open,high,low,close,volume) into
// one panel per raw variable. Tickers missing any date or carrying a
// nonpositive value are dropped; dropped tickers are reported in `log`.
std::map<std::string, stats::PanelData> load_panel(const std::string& path,
                                                   const std::string& market_id,
                                                   std::vector<std::string>* log = nullptr);

// Row-wise rolling volatility; output columns are labeled with window-end
// dates.
stats::PanelData derive_volatility_panel(const stats::PanelData& panel, int window);

// Uniform ticker sample without replacement, preserving row order.
stats::PanelData sample_sub_universe(const stats::PanelData& panel, int size, std::uint64_t seed);

// Restricts every panel to the common (intersection) date set.
std::vector<stats::PanelData> align_dates(const std::vector<stats::PanelData>& panels);

// All ordered pairs, each cell fully determined by (panels, config,
// variable, iteration) through a per-cell derived seed; cells are evaluated
// in parallel and failures are recorded in place without aborting the run.
DistanceMatrix compute_distance_matrix(const std::vector<stats::PanelData>& panels,
                                       const RunConfig& config, const std::string& variable,
                                       int iteration);

// Off-diagonal cells in ascending distance order; ties broken by label pair;
// error cells last.
std::vector<RankedPair> rank_similarity(const DistanceMatrix& matrix);

// Writes one matrix file per (variable, method, iteration) plus summary.json.
// Returns the emitted file names.
std::vector<std::string> emit_report(const std::vector<DistanceMatrix>& matrices,
                                     const RunConfig& config);

// Full run: load, clean, derive, reduce, compare, emit.
// Returns 0 on success, 2 when any matrix contains error cells.
// Throws on configuration or I/O failure (CLI exit code 1).
int run(const RunConfig& config, std::vector<std::string>* log = nullptr);

} // namespace distkit::pipeline

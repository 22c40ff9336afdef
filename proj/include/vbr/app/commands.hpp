#pragma once

#include "vbr/scan.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

namespace vbr::app {

enum class Command { eval, scan, sequence, diagnose, reproduce, export_curves };

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 2;
inline constexpr int numerical = 3;
inline constexpr int acceptance = 4;
}  // namespace exit_code

struct RunConfig {
    Command command = Command::eval;
    std::optional<std::string> builtin;
    std::optional<std::string> file;
    bool auxiliary = false;  ///< work on the series f'_n = f_{n+1}

    std::optional<int> N;
    std::optional<std::pair<int, int>> N_range;
    std::optional<double> lambda;
    std::optional<double> lambda0;  ///< defaults to the model's reference coupling, else 1
    std::optional<double> p;
    std::optional<double> p_min;
    std::optional<double> p_max;
    int grid_points_per_decade = 60;
    SelectionRule rule = SelectionRule::principal_min;

    std::optional<double> lambda_max;  ///< export grid, defaults to the model's range, else 1
    int points = 100;
    std::optional<std::string> figure;  ///< export one figure dataset ("all" for every one)

    std::string example = "all";
    std::optional<std::string> manifest;
    int threads = 1;

    std::optional<std::string> out_dir;  ///< falls back to VBR_OUTPUT_DIR, then ./vbr_out
    bool json_stdout = false;

    /// Throws ParseError when the combination of fields is unusable.
    void validate() const;
};

/// Parses "a..b" or a single order.
std::pair<int, int> parse_order_range(const std::string& text);

/// Runs one command, printing the human-readable report to `out` (JSON with
/// json_stdout) and errors to `err`. Returns the process exit status.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command line front end.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vbr::app

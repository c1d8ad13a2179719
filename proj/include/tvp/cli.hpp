#ifndef TVP_CLI_HPP
#define TVP_CLI_HPP

#include <cstdint>
#include <algorithm>
#include <ostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tvp/simulation.hpp"
#include "tvp/types.hpp"

namespace tvp {

enum ExitCode { kExitOk = 0, kExitInput = 2, kExitNumerical = 3 };

/// Flags shared by all commands; each command reads the subset it needs.
struct RunConfig {
    Index k = 3;
    Index p = 2;
    Index T = 100;
    InterceptMode intercept_mode = InterceptMode::time_varying;
    double h_scale = 1.0;
    double q_scale = 0.03;
    ErrorKind error_kind = ErrorKind::gaussian;
    double rho = 0.9;
    double explosion_bound = 1e8;
    std::uint64_t seed = 1;
    int reps = 1;
    int steps = 2;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    Index cap = 2000;
    std::optional<double> tolerance;
    int instances = 25;
    int table = 0;  // 0 = every table
    std::string out_dir = ".";
    std::string input;
    char separator = ',';
    std::optional<Vector> b0;

    DgpConfig dgp() const;
    ModelSpec spec() const;
    void validate() const;
};

/// Period labels plus observations read from a delimited file with a header row.
struct CsvSeries {
    std::vector<std::string> header;
    ObservationSet data;
};

/// Reads `t,y1..yk` style input. Ragged rows and non-numeric cells raise a ValidationError
/// naming the line.
CsvSeries read_series(std::istream& in, char sep = ',');
CsvSeries read_series_file(const std::string& path, char sep = ',');

/// Writes rows of `label, values...` with 17 significant digits.
void write_series(std::ostream& out, const std::vector<std::string>& header,
                  const std::vector<std::string>& labels, const std::vector<Vector>& rows, char sep = ',');

/// Column headers t, <prefix>1..<prefix>n.
std::vector<std::string> numbered_header(const std::string& first, const std::string& prefix, Index n);

std::string format_double(double x);

/// Each command returns an exit code; the summary goes to `out`, diagnostics to `err`.
int cmd_simulate(const RunConfig& cfg, std::ostream& out);
int cmd_replicate(const RunConfig& cfg, std::ostream& out);
int cmd_tables(const RunConfig& cfg, std::ostream& out);
int cmd_estimate(const RunConfig& cfg, std::ostream& out);
int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Rows of the replicate CSV (without header) for one summary.
std::vector<std::string> metric_rows(const ReplicationSummary& summary, std::uint64_t seed, char sep = ',');

/// Runs `body` and maps exceptions onto the exit-code contract, printing to `err`.
template <typename F>
int run_guarded(F&& body, std::ostream& err) {
    try {
        return body();
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const ValidationError& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
}

/// Sum over t of |beta_t - beta_{t-1}|^2, a roughness measure for estimated paths.
double path_roughness(const CoefficientPath& path);

}  // namespace tvp

#endif

#include "tvp/cli.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "tvp/estimator.hpp"
#include "tvp/validation.hpp"

namespace tvp {

namespace fs = std::filesystem;

DgpConfig RunConfig::dgp() const {
    DgpConfig d;
    d.spec = spec();
    d.h_scale = h_scale;
    d.q_scale = q_scale;
    d.error_kind = error_kind;
    d.rho = rho;
    d.explosion_bound = explosion_bound;
    d.seed = seed;
    return d;
}

ModelSpec RunConfig::spec() const { return ModelSpec{k, p, T, intercept_mode}; }

void RunConfig::validate() const {
    if (reps < 1) throw ValidationError("--reps must be >= 1");
    if (steps < 0 || steps > 2) throw ValidationError("--steps must be 0, 1 or 2");
    if (threads < 1) throw ValidationError("--threads must be >= 1");
    if (cap < 1) throw ValidationError("--cap must be >= 1");
    if (instances < 1) throw ValidationError("--instances must be >= 1");
    if (tolerance && !(*tolerance > 0.0)) throw ValidationError("--tolerance must be > 0");
    if (separator != ',' && separator != '\t') throw ValidationError("format must be csv or tsv");
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::string> numbered_header(const std::string& first, const std::string& prefix, Index n) {
    std::vector<std::string> h{first};
    for (Index i = 1; i <= n; ++i) h.push_back(prefix + std::to_string(i));
    return h;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& cell, std::size_t line, std::size_t col) {
    const std::string s = trim(cell);
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ValidationError("line " + std::to_string(line) + ", column " + std::to_string(col) +
                              ": non-numeric cell '" + s + "'");
    return v;
}

std::string ext(char sep) { return sep == '\t' ? ".tsv" : ".csv"; }

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open '" + path.string() + "' for writing");
    return f;
}

fs::path out_dir(const RunConfig& cfg) {
    fs::path dir(cfg.out_dir.empty() ? "." : cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

std::string join(const Vector& v) {
    std::string s;
    for (Index i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v(i));
    return s;
}

}  // namespace

CsvSeries read_series(std::istream& in, char sep) {
    CsvSeries out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split(line, sep);
        if (out.header.empty()) {
            if (cells.size() < 2)
                throw ValidationError("line " + std::to_string(line_no) +
                                      ": header needs a period column and at least one series");
            for (auto& c : cells) out.header.push_back(trim(c));
            continue;
        }
        if (cells.size() != out.header.size())
            throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(out.header.size()) + " fields, got " +
                                  std::to_string(cells.size()));
        Vector y(static_cast<Index>(cells.size() - 1));
        for (std::size_t j = 1; j < cells.size(); ++j)
            y(static_cast<Index>(j - 1)) = parse_number(cells[j], line_no, j + 1);
        out.data.labels.push_back(trim(cells[0]));
        out.data.y.push_back(std::move(y));
    }
    if (out.header.empty()) throw ValidationError("input has no header row");
    return out;
}

CsvSeries read_series_file(const std::string& path, char sep) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open '" + path + "' for reading");
    try {
        return read_series(f, sep);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void write_series(std::ostream& out, const std::vector<std::string>& header,
                  const std::vector<std::string>& labels, const std::vector<Vector>& rows, char sep) {
    if (labels.size() != rows.size()) throw ValidationError("write_series: label count differs from rows");
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? std::string(1, sep) : "") << header[j];
    out << "\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out << labels[r];
        for (Index i = 0; i < rows[r].size(); ++i) out << sep << format_double(rows[r](i));
        out << "\n";
    }
}

double path_roughness(const CoefficientPath& path) {
    double s = 0.0;
    for (Index t = 1; t < path.n(); ++t) s += (path.beta[t] - path.beta[t - 1]).squaredNorm();
    return s;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    const DgpConfig dgp = cfg.dgp();
    const SimulatedData data = simulate_tvvar(dgp, 0);
    const fs::path dir = out_dir(cfg);
    const Index T = cfg.T, p = cfg.p, k = cfg.k, m = dgp.spec.m();

    std::vector<std::string> t_labels;
    for (Index t = 1; t <= T; ++t) t_labels.push_back(std::to_string(t));
    {
        auto f = open_out(dir / ("y" + ext(cfg.separator)));
        write_series(f, numbered_header("t", "y", k), t_labels, data.y.y, cfg.separator);
    }
    {
        auto f = open_out(dir / ("beta_true" + ext(cfg.separator)));
        const std::vector<std::string> beta_labels(t_labels.begin() + p, t_labels.end());
        write_series(f, numbered_header("t", "b", m), beta_labels, data.beta_true.beta, cfg.separator);
    }
    out << "rows_y=" << T << "\nrows_beta=" << data.beta_true.n() << "\nrejections=" << data.rejections
        << "\nsnr=" << format_double(snr(dgp)) << "\n";
    return kExitOk;
}

std::vector<std::string> metric_rows(const ReplicationSummary& summary, std::uint64_t seed, char sep) {
    std::vector<std::string> rows;
    auto row = [&](const MetricTable& t, const char* stat, double value) {
        std::ostringstream s;
        s << t.method << sep << stat << sep << format_double(value) << sep << t.n_reps << sep << seed << sep
          << t.rejections;
        rows.push_back(s.str());
    };
    row(summary.truth, "m", summary.truth.median_m);
    row(summary.truth, "s", summary.truth.median_s);
    for (const auto& t : summary.methods) {
        row(t, "m", t.median_m);
        row(t, "s", t.median_s);
        row(t, "dist", t.median_dist);
        row(t, "rat", t.median_rat);
    }
    return rows;
}

namespace {

const char* kMetricHeader[] = {"method", "stat", "value", "n_reps", "seed", "rejections"};

void write_metric_header(std::ostream& out, char sep, const std::vector<std::string>& leading = {}) {
    bool first = true;
    for (const auto& c : leading) {
        out << (first ? "" : std::string(1, sep)) << c;
        first = false;
    }
    for (const char* c : kMetricHeader) {
        out << (first ? "" : std::string(1, sep)) << c;
        first = false;
    }
    out << "\n";
}

}  // namespace

int cmd_replicate(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    ReplicationOptions opts;
    opts.threads = cfg.threads;
    const ReplicationSummary summary = run_replications(cfg.dgp(), cfg.reps, cfg.steps, opts);
    std::ostringstream table;
    write_metric_header(table, cfg.separator);
    for (const auto& r : metric_rows(summary, cfg.seed, cfg.separator)) table << r << "\n";
    auto f = open_out(out_dir(cfg) / ("metrics" + ext(cfg.separator)));
    f << table.str();
    out << table.str();
    return kExitOk;
}

int cmd_tables(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    struct Cell {
        int table;
        Index T;
        double h;
        ErrorKind kind;
    };
    const double hs[] = {0.002, 0.02, 0.2, 1.0, 10.0};
    std::vector<Cell> cells;
    for (double h : hs) cells.push_back({1, 100, h, ErrorKind::gaussian});
    for (double h : hs) cells.push_back({2, 250, h, ErrorKind::gaussian});
    for (Index T : {100, 250})
        for (ErrorKind kind : {ErrorKind::mixture_sv_rw, ErrorKind::mixture_sv_ar}) cells.push_back({3, T, 1.0, kind});
    for (double h : hs) cells.push_back({4, 100, h, ErrorKind::mixture});
    for (double h : hs) cells.push_back({5, 250, h, ErrorKind::mixture});
    for (Index T : {100, 250})
        for (ErrorKind kind : {ErrorKind::sv_rw, ErrorKind::sv_ar}) cells.push_back({6, T, 1.0, kind});

    std::ostringstream table;
    const char sep = cfg.separator;
    write_metric_header(table, sep, {"table", "T", "h_scale", "error_kind"});
    ReplicationOptions opts;
    opts.threads = cfg.threads;
    for (const Cell& c : cells) {
        if (cfg.table != 0 && cfg.table != c.table) continue;
        RunConfig cell_cfg = cfg;
        cell_cfg.T = c.T;
        cell_cfg.h_scale = c.h;
        cell_cfg.error_kind = c.kind;
        const ReplicationSummary summary = run_replications(cell_cfg.dgp(), cfg.reps, cfg.steps, opts);
        for (const auto& r : metric_rows(summary, cfg.seed, sep))
            table << c.table << sep << c.T << sep << format_double(c.h) << sep << to_string(c.kind) << sep << r
                  << "\n";
    }
    auto f = open_out(out_dir(cfg) / ("tables" + ext(sep)));
    f << table.str();
    out << table.str();
    return kExitOk;
}

int cmd_estimate(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    if (cfg.input.empty()) throw ValidationError("estimate needs an input file");
    const CsvSeries series = read_series_file(cfg.input, cfg.separator);
    const Index T = static_cast<Index>(series.data.y.size());
    const Index k = static_cast<Index>(series.header.size()) - 1;
    if (T <= cfg.p + 2)
        throw ValidationError(cfg.input + ": line " + std::to_string(T + 1) + ": only " + std::to_string(T) +
                              " observations; need more than p + 2 = " + std::to_string(cfg.p + 2));
    const ModelSpec spec{k, cfg.p, T, cfg.intercept_mode};
    spec.validate();
    if (cfg.b0 && cfg.b0->size() != spec.m())
        throw ValidationError("--b0 has " + std::to_string(cfg.b0->size()) + " entries, expected m = " +
                              std::to_string(spec.m()));

    const auto sets = fgls_pipeline(series.data, spec, cfg.steps, cfg.b0);
    const fs::path dir = out_dir(cfg);
    const Index m = spec.m();
    const std::vector<std::string> labels(series.data.labels.begin() + cfg.p, series.data.labels.end());
    std::vector<std::string> header = numbered_header(series.header.front(), "b", m);
    for (Index i = 1; i <= m; ++i) header.push_back("se" + std::to_string(i));

    out << "T=" << T << "\nk=" << k << "\np=" << cfg.p << "\nm=" << m << "\nn=" << spec.n()
        << "\nintercept=" << to_string(cfg.intercept_mode) << "\n";
    for (const EstimateSet& est : sets) {
        const std::string name = to_string(est.method);
        std::vector<Vector> rows;
        for (Index t = 0; t < spec.n(); ++t) {
            Vector r(2 * m);
            r.head(m) = est.path.beta[t];
            r.tail(m) = est.mse_blocks[t].diagonal().cwiseMax(0.0).cwiseSqrt();
            rows.push_back(std::move(r));
        }
        const std::string file = "path_" + name + ext(cfg.separator);
        auto f = open_out(dir / file);
        write_series(f, header, labels, rows, cfg.separator);

        const double tr_h = est.covariances->h_hat.trace(), tr_q = est.covariances->q_hat.trace();
        out << name << ".loglik=" << format_double(est.loglik) << "\n"
            << name << ".trace_h=" << format_double(tr_h) << "\n"
            << name << ".trace_q=" << format_double(tr_q) << "\n"
            << name << ".snr=" << format_double(tr_q / tr_h) << "\n"
            << name << ".snr_per_element=" << format_double((tr_q / m) / (tr_h / k)) << "\n"
            << name << ".roughness=" << format_double(path_roughness(est.path)) << "\n"
            << name << ".jittered=" << (est.jittered || est.covariances->jittered ? 1 : 0) << "\n";
        if (est.v_hat) out << name << ".v_hat=" << join(*est.v_hat) << "\n";
        out << name << ".path_file=" << (dir / file).string() << "\n";
    }
    return kExitOk;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    cfg.validate();
    const ValidationReport report = run_validation_suite(cfg.instances, cfg.seed, cfg.tolerance, cfg.cap);
    out << "identity,max_deviation,tolerance,worst_seed,status\n";
    for (const auto& e : report.entries)
        out << '"' << e.name << "\"," << format_double(e.max_deviation) << ',' << e.tolerance
            << ',' << e.worst_seed << ',' << (e.passed ? "ok" : "FAIL") << "\n";
    out << "instances=" << report.instances << "\n";
    if (report.passed()) return kExitOk;
    for (const auto& e : report.entries)
        if (!e.passed)
            err << "tolerance breach: " << e.name << " deviation " << format_double(e.max_deviation)
                << " > " << e.tolerance << " (instance seed " << e.worst_seed << ")\n";
    return kExitNumerical;
}

}  // namespace tvp

#pragma once

// Command-line driver: subcommands gen, geom, fitq, classify, vc, secondvar,
// mobius-check, descent and plotdata, plus the small report / CSV writers they
// share. Exit codes: 0 pass, 1 quantitative failure, 2 usage or I/O error.

#include "ctl/immersion.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace ctl {

enum ExitCode : int { exit_pass = 0, exit_fail = 1, exit_usage = 2 };

// RFC 4180 style CSV table with a header row and '.' decimals.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(std::vector<std::string> row);
    std::size_t rows() const { return rows_.size(); }
    void write(std::ostream& os) const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Shortest round-tripping decimal representation of x.
std::string fmt(double x);
// Escapes one CSV field when it contains a separator, a quote or a newline.
std::string csv_escape(const std::string& s);

// Human-readable structured report: the resolved configuration, then
// "key = value" result lines and a final status line.
struct Report {
    std::string command;
    std::string config;
    std::vector<std::pair<std::string, std::string>> values;
    bool pass = true;

    void add(const std::string& key, const std::string& value) { values.emplace_back(key, value); }
    void add(const std::string& key, double value) { values.emplace_back(key, fmt(value)); }
    std::string str() const;
};

// Reads "x,y,z" lines (m+1 arclength-uniform samples, last repeating the
// first); '#' starts a comment. Throws InputError on malformed lines.
std::vector<Vec3> read_curve_file(const std::string& path);

// Names accepted by `plotdata --quantity`.
const std::vector<std::string>& plot_quantities();

// Applies CTL_THREADS (if set to a positive integer) as the OpenMP thread cap.
void apply_thread_limit();

// Full command-line entry point; never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ctl

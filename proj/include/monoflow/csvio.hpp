#pragma once

#include <map>
#include <string>

#include "monoflow/flows.hpp"
#include "monoflow/iterations.hpp"

namespace monoflow {

std::string format_g17(double x);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);
void write_iterate_csv(const IterateLog& log, const std::string& path,
                       bool with_states = true);

/// Column-indexed numeric table read back from a CSV with a header row.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;  // per column; NaN for empty cells

    const std::vector<double>& column(const std::string& name) const;
    bool has_column(const std::string& name) const;
    std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
};

CsvTable read_csv(const std::string& path);

Mat load_matrix_csv(const std::string& path);  // row-major, no header

}  // namespace monoflow

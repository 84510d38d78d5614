#include "monoflow/csvio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace monoflow {

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SolverError("cannot open for writing: " + path);
    Eigen::Index n = traj.dim();
    out << "t";
    for (Eigen::Index i = 0; i < n; ++i) out << ",x_" << i;
    out << ",vel_norm,op_norm,state_norm,phi,psi\n";
    for (size_t i = 0; i < traj.times.size(); ++i) {
        out << format_g17(traj.times[i]);
        for (Eigen::Index j = 0; j < n; ++j) out << ',' << format_g17(traj.states[i][j]);
        out << ',' << format_g17(traj.velocity_norms[i]) << ','
            << format_g17(traj.operator_norms[i]) << ',' << format_g17(traj.state_norms[i])
            << ',' << format_g17(traj.phi[i]) << ',' << format_g17(traj.psi[i]) << '\n';
    }
}

void write_iterate_csv(const IterateLog& log, const std::string& path, bool with_states) {
    std::ofstream out(path);
    if (!out) throw SolverError("cannot open for writing: " + path);
    Eigen::Index n = log.final_state.size();
    out << "k,alpha_k,vel,res";
    if (with_states)
        for (Eigen::Index i = 0; i < n; ++i) out << ",x_" << i;
    out << '\n';
    size_t next_state = 0;
    for (size_t i = 0; i < log.k.size(); ++i) {
        out << log.k[i] << ',';
        if (std::isnan(log.alpha[i]))
            out << "";
        else
            out << format_g17(log.alpha[i]);
        out << ',' << format_g17(log.vel[i]) << ',' << format_g17(log.res[i]);
        if (with_states) {
            while (next_state < log.retained_states.size() &&
                   log.retained_states[next_state].first < log.k[i])
                ++next_state;
            bool have = next_state < log.retained_states.size() &&
                        log.retained_states[next_state].first == log.k[i];
            for (Eigen::Index j = 0; j < n; ++j) {
                out << ',';
                if (have) out << format_g17(log.retained_states[next_state].second[j]);
            }
        }
        out << '\n';
    }
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return data[i];
    throw ValidationError("csv: missing column " + name);
}

bool CsvTable::has_column(const std::string& name) const {
    for (const auto& c : columns)
        if (c == name) return true;
    return false;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SolverError("cannot open: " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("csv: empty file " + path);
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
    t.data.resize(t.columns.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        size_t col = 0;
        while (col < t.columns.size()) {
            if (!std::getline(ls, cell, ',')) cell = "";
            t.data[col].push_back(cell.empty() ? std::numeric_limits<double>::quiet_NaN()
                                               : std::stod(cell));
            ++col;
        }
    }
    return t;
}

Mat load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SolverError("cannot open: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw ValidationError("matrix csv: ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ValidationError("matrix csv: empty file " + path);
    Mat m(rows.size(), rows.front().size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

}  // namespace monoflow

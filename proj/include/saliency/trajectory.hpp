#pragma once

#include <cstddef>
#include <filesystem>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "saliency/csv.hpp"
#include "saliency/errors.hpp"
#include "saliency/matrix.hpp"

namespace saliency {

// Ordered per-timestep state vectors, one row per control step, plus any
// auxiliary channels carried alongside (aux_* columns in the CSV).
struct Trajectory {
    Matrix states;  // N x n
    double dt = 0.0;
    std::vector<std::pair<std::string, std::vector<double>>> aux;

    std::size_t timesteps() const { return states.rows(); }
    std::size_t state_dim() const { return states.cols(); }

    void validate() const {
        if (states.rows() == 0) throw InputError("trajectory has no timesteps");
        if (!states.all_finite()) throw InputError("trajectory contains non-finite entries");
        for (const auto& [name, values] : aux)
            if (values.size() != states.rows())
                throw InputError("aux channel '" + name + "' length does not match timesteps");
    }
};

// CSV layout: header `t,s0,...,s{n-1}[,aux_*...]`, one row per timestep.
inline Trajectory load_trajectory_csv(const std::filesystem::path& path) {
    auto lines = read_lines(path);
    if (lines.size() < 2) throw InputError("trajectory file " + path.string() + " has no data rows");

    auto header = split_csv_line(lines[0]);
    if (header.empty() || header[0] != "t")
        throw InputError(path.string() + ": first column must be 't'");
    std::size_t n = 0;
    while (1 + n < header.size() && header[1 + n] == "s" + std::to_string(n)) ++n;
    if (n == 0) throw InputError(path.string() + ": expected state columns s0..s{n-1} after 't'");
    std::vector<std::string> aux_names;
    for (std::size_t c = 1 + n; c < header.size(); ++c) {
        if (header[c].rfind("aux_", 0) != 0)
            throw InputError(path.string() + ": unexpected column '" + header[c] +
                             "' (state columns must be contiguous, extras must be prefixed aux_)");
        aux_names.push_back(header[c]);
    }

    Trajectory traj;
    const std::size_t rows = lines.size() - 1;
    traj.states = Matrix(rows, n);
    traj.aux.reserve(aux_names.size());
    for (const auto& name : aux_names) traj.aux.emplace_back(name, std::vector<double>(rows, 0.0));

    std::vector<double> times(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        auto fields = split_csv_line(lines[1 + r]);
        if (fields.size() != header.size())
            throw InputError(path.string() + ": row " + std::to_string(r) + " has " +
                             std::to_string(fields.size()) + " fields, expected " + std::to_string(header.size()));
        const std::string ctx = path.string() + " row " + std::to_string(r);
        times[r] = parse_double(fields[0], ctx);
        for (std::size_t c = 0; c < n; ++c) traj.states(r, c) = parse_double(fields[1 + c], ctx);
        for (std::size_t a = 0; a < aux_names.size(); ++a)
            traj.aux[a].second[r] = parse_double(fields[1 + n + a], ctx);
    }
    traj.dt = rows >= 2 ? times[1] - times[0] : 0.0;
    traj.validate();
    return traj;
}

inline std::string trajectory_to_csv(const Trajectory& traj) {
    std::ostringstream out;
    out << 't';
    for (std::size_t c = 0; c < traj.state_dim(); ++c) out << ",s" << c;
    for (const auto& [name, values] : traj.aux) out << ',' << name;
    out << '\n';
    for (std::size_t r = 0; r < traj.timesteps(); ++r) {
        out << format_double(static_cast<double>(r) * traj.dt);
        for (std::size_t c = 0; c < traj.state_dim(); ++c) out << ',' << format_double(traj.states(r, c));
        for (const auto& [name, values] : traj.aux) out << ',' << format_double(values[r]);
        out << '\n';
    }
    return out.str();
}

inline void save_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    write_text_file(path, trajectory_to_csv(traj));
}

} // namespace saliency

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "trieig/ergodic.hpp"
#include "trieig/errors.hpp"
#include "trieig/grid.hpp"
#include "trieig/hjb.hpp"
#include "trieig/perron.hpp"
#include "trieig/simplex.hpp"

namespace trieig {

using json = nlohmann::ordered_json;

/// Shortest exact decimal form of a double; identical inputs give
/// byte-identical files.
inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) {
        out_.open(path);
        if (!out_) throw validation_error("CsvWriter: cannot open " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << (i ? "," : "") << header[i];
        out_ << "\n";
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << fmt_double(values[i]);
        out_ << "\n";
    }

    void row_mixed(const std::vector<long>& ints, const std::vector<double>& values) {
        bool first = true;
        for (long v : ints) {
            out_ << (first ? "" : ",") << v;
            first = false;
        }
        for (double v : values) {
            out_ << (first ? "" : ",") << fmt_double(v);
            first = false;
        }
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

inline void write_perron_curve_csv(const std::filesystem::path& path, const PerronCurve& c) {
    CsvWriter w(path, {"alpha", "lambda", "dlambda"});
    for (std::size_t i = 0; i < c.alphas.size(); ++i)
        w.row({c.alphas[i], c.values[i], c.derivs[i]});
}

inline void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& rec) {
    CsvWriter w(path, {"t", "y1", "y2", "y3", "alpha", "phi"});
    for (std::size_t k = 0; k < rec.points.size(); ++k) {
        const double alpha = k == 0 ? (rec.control.empty() ? 0.0 : rec.control.front())
                                    : rec.control[std::min(k - 1, rec.control.size() - 1)];
        w.row({rec.times[k], rec.points[k][0], rec.points[k][1], rec.points[k][2], alpha,
               rec.phi_values[k]});
    }
}

/// Plain curve in simplex coordinates with a scalar parameter column.
inline void write_curve_csv(const std::filesystem::path& path, const std::string& param_name,
                            const std::vector<double>& params, const std::vector<Vec3>& pts) {
    CsvWriter w(path, {param_name, "y1", "y2", "y3"});
    for (std::size_t k = 0; k < pts.size(); ++k)
        w.row({k < params.size() ? params[k] : static_cast<double>(k), pts[k][0], pts[k][1],
               pts[k][2]});
}

inline void write_segments_csv(const std::filesystem::path& path,
                               const std::vector<std::pair<ChartPoint, ChartPoint>>& segs) {
    CsvWriter w(path, {"x1", "y1", "x2", "y2"});
    for (const auto& s : segs) w.row({s.first.x, s.first.y, s.second.x, s.second.y});
}

/// Row-major dump over the mask: i, j, y1, y2, y3, u.
inline void write_grid_field_csv(const std::filesystem::path& path, const SimplexGrid& g,
                                 const GridField& f) {
    CsvWriter w(path, {"i", "j", "y1", "y2", "y3", "u"});
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j)
            if (g.in_mask(i, j)) {
                const Vec3 y = g.node(i, j);
                w.row_mixed({i, j}, {y[0], y[1], y[2], f.at(g, i, j)});
            }
}

inline json run_sidecar(const HjbRun& run) {
    json j;
    j["dy"] = run.dy;
    j["dt"] = run.dt;
    if (run.eps > 0.0) {
        j["eps"] = run.eps;
        j["iterations"] = run.iterations;
        j["sup_update"] = run.sup_update;
        j["eps_u_mean"] = run.eps_u_mean;
        j["eps_u_min"] = run.eps_u_min;
        j["eps_u_max"] = run.eps_u_max;
    } else {
        j["T"] = run.T;
        j["lambda_ratio"] = run.lambda_ratio;
        j["lambda_slope"] = run.lambda_slope;
        j["probe"] = {run.probe.x, run.probe.y};
    }
    j["cfl_ratio"] = run.cfl_ratio;
    j["upwind_drops"] = run.upwind_drops;
    return j;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw validation_error("write_json: cannot open " + path.string());
    out << j.dump(2) << "\n";
}

} // namespace trieig

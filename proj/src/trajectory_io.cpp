#include "ringpbc/trajectory_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ringpbc {

namespace {

constexpr Index kColumnsPerConverter = 5;
constexpr const char* kFailureMarker = "# FAILED: ";

void put(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("trajectory csv line " + std::to_string(line_no) + ": bad number '" + cell + "'");
    }
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const Index m = traj.converters;
    os << 't';
    for (Index n = 0; n < m; ++n) {
        os << ",iL_" << n << ",vC_" << n << ",iT_" << n << ",mu_" << n << ",Hd_" << n;
    }
    os << ",Hd_total\n";
    for (std::size_t k = 0; k < traj.samples(); ++k) {
        put(os, traj.t[k]);
        for (Index n = 0; n < m; ++n) {
            const auto& x = traj.states[k];
            for (double v : {x.iL(n), x.vC(n), x.iT(n), traj.duties[k][n], traj.hd[k][static_cast<std::size_t>(n)]}) {
                os << ',';
                put(os, v);
            }
        }
        os << ',';
        put(os, traj.hd_total[k]);
        os << '\n';
    }
    if (!traj.ok) os << kFailureMarker << traj.failure << '\n';
    os.flush();
}

Trajectory read_trajectory_csv(std::istream& is) {
    Trajectory traj;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("trajectory csv is empty");
    const auto header = split(line);
    if (header.size() < 2 || header.front() != "t" || header.back() != "Hd_total" ||
        (header.size() - 2) % kColumnsPerConverter != 0) {
        throw std::runtime_error("trajectory csv has an unexpected header");
    }
    const Index m = static_cast<Index>(header.size() - 2) / kColumnsPerConverter;
    traj.converters = m;

    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.rfind(kFailureMarker, 0) == 0) {
            traj.ok = false;
            traj.failure = line.substr(std::string(kFailureMarker).size());
            continue;
        }
        if (line[0] == '#') continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error("trajectory csv line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " columns");
        }
        traj.t.push_back(parse_cell(cells[0], line_no));
        RingState x(m);
        DutyVector mu(m, 0.0);
        std::vector<double> hd(static_cast<std::size_t>(m));
        for (Index n = 0; n < m; ++n) {
            const std::size_t base = 1 + static_cast<std::size_t>(n * kColumnsPerConverter);
            x.iL(n) = parse_cell(cells[base], line_no);
            x.vC(n) = parse_cell(cells[base + 1], line_no);
            x.iT(n) = parse_cell(cells[base + 2], line_no);
            mu[n] = parse_cell(cells[base + 3], line_no);
            hd[static_cast<std::size_t>(n)] = parse_cell(cells[base + 4], line_no);
        }
        traj.states.push_back(std::move(x));
        traj.duties.push_back(std::move(mu));
        traj.hd.push_back(std::move(hd));
        traj.hd_total.push_back(parse_cell(cells.back(), line_no));
    }
    return traj;
}

void write_event_log(std::ostream& os, const std::vector<SimEvent>& events) {
    for (const auto& e : events) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9f", e.t);
        os << buf << ' ' << to_string(e.kind);
        if (e.converter >= 0) os << " converter=" << e.converter;
        if (!e.detail.empty()) os << ' ' << e.detail;
        os << '\n';
    }
    os.flush();
}

void write_period_average_csv(std::ostream& os, const Trajectory& traj) {
    const Index m = traj.converters;
    os << 't';
    for (Index n = 0; n < m; ++n) os << ",iL_" << n << ",vC_" << n << ",iT_" << n;
    os << '\n';
    for (std::size_t k = 0; k < traj.period_average.size() && k < traj.samples(); ++k) {
        put(os, traj.t[k]);
        const auto& x = traj.period_average[k];
        for (Index n = 0; n < m; ++n) {
            for (double v : {x.iL(n), x.vC(n), x.iT(n)}) {
                os << ',';
                put(os, v);
            }
        }
        os << '\n';
    }
}

}  // namespace ringpbc

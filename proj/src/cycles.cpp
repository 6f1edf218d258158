#include "item/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace item::cycles {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

}  // namespace

DriveCycle load_cycle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cycle file: " + path);

    DriveCycle cycle;
    cycle.name = std::filesystem::path(path).stem().string();

    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    bool has_grade = false;
    std::vector<double> times;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = split_csv(line);
        if (!header_seen) {
            if (fields.size() < 2 || fields[0] != "t_s" || fields[1] != "v_mps")
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": expected header t_s,v_mps[,grade_rad]");
            has_grade = fields.size() >= 3 && fields[2] == "grade_rad";
            header_seen = true;
            continue;
        }
        if (fields.size() < 2 || (has_grade && fields.size() < 3))
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
        try {
            std::size_t pos = 0;
            double t = std::stod(fields[0], &pos);
            double v = std::stod(fields[1]);
            times.push_back(t);
            cycle.speed.push_back(v);
            if (has_grade) cycle.grade.push_back(std::stod(fields[2]));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
        }
    }
    if (!header_seen) throw std::runtime_error(path + ": missing header");
    if (cycle.speed.empty()) throw std::invalid_argument(path + ": empty data section");
    for (double v : cycle.speed)
        if (v < 0.0) throw std::invalid_argument(path + ": negative speed");

    if (times.size() >= 2) {
        double dt = times[1] - times[0];
        if (dt <= 0.0) throw std::runtime_error(path + ": non-increasing timestamps");
        for (std::size_t i = 1; i < times.size(); ++i) {
            double d = times[i] - times[i - 1];
            if (std::abs(d - dt) > 1e-6)
                throw std::runtime_error(path + ": non-uniform timestamps near row " +
                                         std::to_string(i + 1));
        }
        cycle.dt = dt;
    }
    return cycle;
}

void save_cycle(const DriveCycle& cycle, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write cycle file: " + path);
    const bool has_grade = !cycle.grade.empty();
    out << "t_s,v_mps" << (has_grade ? ",grade_rad" : "") << "\n";
    for (std::size_t i = 0; i < cycle.speed.size(); ++i) {
        out << cycle.dt * static_cast<double>(i) << "," << cycle.speed[i];
        if (has_grade) out << "," << cycle.grade[i];
        out << "\n";
    }
}

namespace {

std::vector<double> interp_uniform(const std::vector<double>& y, double dt_old,
                                   double dt_new, std::size_t n_new) {
    std::vector<double> out(n_new);
    const std::size_t n_old = y.size();
    for (std::size_t i = 0; i < n_new; ++i) {
        double t = dt_new * static_cast<double>(i);
        double u = t / dt_old;
        auto k = static_cast<std::size_t>(std::floor(u));
        if (k >= n_old - 1) {
            out[i] = y[n_old - 1];
            continue;
        }
        double frac = u - static_cast<double>(k);
        out[i] = y[k] + frac * (y[k + 1] - y[k]);
    }
    return out;
}

}  // namespace

DriveCycle resample(const DriveCycle& cycle, double dt_new) {
    if (dt_new <= 0.0) throw std::invalid_argument("resample: dt_new must be > 0");
    if (cycle.speed.size() < 2) return cycle;
    DriveCycle out;
    out.name = cycle.name;
    out.dt = dt_new;
    double total = cycle.duration();
    auto n_new = static_cast<std::size_t>(std::floor(total / dt_new + 1e-9)) + 1;
    out.speed = interp_uniform(cycle.speed, cycle.dt, dt_new, n_new);
    if (!cycle.grade.empty())
        out.grade = interp_uniform(cycle.grade, cycle.dt, dt_new, n_new);
    return out;
}

std::vector<MicroTrip> segment(const DriveCycle& cycle, double window_s) {
    auto win = static_cast<std::size_t>(std::floor(window_s / cycle.dt + 1e-9));
    if (win < 2) throw std::invalid_argument("segment: window shorter than 2 samples");
    std::vector<MicroTrip> trips;
    for (std::size_t start = 0; start + win <= cycle.speed.size(); start += win) {
        MicroTrip t;
        t.parent = cycle.name;
        t.start_index = start;
        t.samples.assign(cycle.speed.begin() + static_cast<long>(start),
                         cycle.speed.begin() + static_cast<long>(start + win));
        trips.push_back(std::move(t));
    }
    return trips;
}

TripFeatures extract_features(const MicroTrip& trip, double dt) {
    if (trip.samples.size() < 2)
        throw std::invalid_argument("extract_features: need at least 2 samples");
    TripFeatures f;
    f.avg_speed = std::accumulate(trip.samples.begin(), trip.samples.end(), 0.0) /
                  static_cast<double>(trip.samples.size());
    double max_a = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < trip.samples.size(); ++i)
        max_a = std::max(max_a, (trip.samples[i + 1] - trip.samples[i]) / dt);
    f.max_accel = max_a;
    return f;
}

}  // namespace item::cycles

#pragma once

#include <string>
#include <vector>

namespace item::cycles {

// Uniformly sampled speed profile. Grade is optional and defaults to flat.
struct DriveCycle {
    std::string name;
    double dt = 1.0;                 // s
    std::vector<double> speed;       // m/s
    std::vector<double> grade;       // rad; empty means all zero

    double duration() const { return dt * static_cast<double>(speed.size() > 0 ? speed.size() - 1 : 0); }
    double grade_at(std::size_t i) const { return grade.empty() ? 0.0 : grade[i]; }
};

// One fixed-duration window of a cycle.
struct MicroTrip {
    std::string parent;
    std::size_t start_index = 0;
    std::vector<double> samples;     // m/s
};

struct TripFeatures {
    double avg_speed = 0.0;          // m/s
    double max_accel = 0.0;          // m/s^2, forward finite difference
};

// CSV format: header `t_s,v_mps[,grade_rad]`, `#` comment lines ignored.
DriveCycle load_cycle(const std::string& path);
void save_cycle(const DriveCycle& cycle, const std::string& path);

DriveCycle resample(const DriveCycle& cycle, double dt_new);

std::vector<MicroTrip> segment(const DriveCycle& cycle, double window_s);

TripFeatures extract_features(const MicroTrip& trip, double dt);

}  // namespace item::cycles

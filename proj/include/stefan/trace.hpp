#pragma once

#include <array>
#include <string_view>

namespace stefan {

/// One logged row of a closed-loop run.
struct TraceRecord {
    double t{0.0};
    double s{0.0};
    double qc{0.0};
    double U_applied{0.0};
    double U_star{0.0};
    double h1{0.0};
    double h2{0.0};
    double h3{0.0};
    double h_min{0.0};
    double sdot{0.0};
    double V{0.0};
    double Vh{0.0};
    double Vbar{0.0};
    double Phi{0.0};
    bool event_flag{false};
};

inline constexpr std::array<std::string_view, 15> kTraceColumns = {
    "t", "s", "qc", "U_applied", "U_star", "h1", "h2", "h3",
    "h_min", "sdot", "V", "Vh", "Vbar", "Phi", "event_flag"};

}  // namespace stefan

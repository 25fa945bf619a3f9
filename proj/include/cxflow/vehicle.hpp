#pragma once

#include <cstdint>

#include "cxflow/stream.hpp"

namespace cxflow {

enum class VehicleKind : uint8_t { RV, HV };
enum class VehicleZone : uint8_t { Upstream, ControlZone, Inside, Exited };
enum class Action : uint8_t { Stop, Go, None };

// Intelligent-driver-model parameters plus the braking/footprint constants
// shared by the whole simulation.
struct IdmParams {
    double v0 = 13.89;          // desired speed, m/s (50 km/h)
    double headway = 1.0;       // time headway T, s
    double delta = 4.0;         // acceleration exponent
    double s0 = 1.0;            // standstill gap, m
    double a_max = 2.6;         // m/s^2
    double b = 4.5;             // comfortable deceleration, m/s^2
    double b_emergency = 9.0;   // m/s^2
    double vehicle_length = 4.0; // m; length + s0 = 5 m queue footprint
};

// One vehicle on its route. Longitudinal position s runs along the route:
// negative upstream of the entrance line, 0 at the entrance, positive inside
// the intersection up to the inner path length.
struct Vehicle {
    int id = -1;
    VehicleKind kind = VehicleKind::HV;
    int stream = 0;             // canonical slot index
    int lane = 0;
    double s = 0.0;             // front bumper position, m
    double v = 0.0;             // m/s
    double a = 0.0;             // m/s^2 applied last step
    VehicleZone zone = VehicleZone::Upstream;
    double wait_accum = 0.0;    // accumulated still time in the control zone, s
    Action current_action = Action::None;
    double spawn_time = 0.0;
    bool entry_granted = false; // committed to cross / has crossed the entrance
    bool controlled = true;     // false once an RV goes offline (RvDrop)

    bool is_controlled_rv() const { return kind == VehicleKind::RV && controlled; }
    double rear(double vehicle_length) const { return s - vehicle_length; }
};

inline constexpr double kStillSpeed = 0.1; // m/s; below this a vehicle counts as still

} // namespace cxflow

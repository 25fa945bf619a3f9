#pragma once

#include <map>
#include <memory>
#include <set>
#include <vector>

#include "cxflow/geometry.hpp"
#include "cxflow/idm.hpp"
#include "cxflow/metrics.hpp"
#include "cxflow/vehicle.hpp"

namespace cxflow {

// Per-step inputs assembled by the controller layer.
struct StepInput {
    std::map<int, double> commands; // commanded accel per controlled RV
    std::set<int> may_cross;        // vehicles allowed to cross the entrance this step
};

struct StepResult {
    std::vector<EventRecord> events;
    bool conflict_occurred = false;
};

// Deterministic single-threaded world. dt is 1 s for both physics and
// decisions; the update is semi-implicit (speed first, then position) with
// positional truncation at stop lines, the leader's rear and conflict zones.
class World {
public:
    World(std::shared_ptr<const Intersection> geo, IdmParams idm = {}, double dt = 1.0);

    const Intersection& geo() const { return *geo_; }
    const IdmParams& idm() const { return idm_; }
    double dt() const { return dt_; }
    int step_count() const { return step_; }
    double time() const { return time_; }

    const std::vector<Vehicle>& vehicles() const { return vehicles_; }
    std::vector<Vehicle>& vehicles_mut() { return vehicles_; }
    const Vehicle* find(int id) const;
    Vehicle* find(int id);

    // Adds a vehicle; returns its id. Emits no event (the spawner logs Spawn).
    int add_vehicle(int stream, int lane, VehicleKind kind, double s, double v,
                    bool controlled = true);

    // Bumper gap and speed of the vehicle directly ahead (same lane upstream,
    // same inner path inside); infinite gap when the road is free.
    std::pair<double, double> leader_gap(const Vehicle& v) const;

    // Farthest route position the vehicle may advance to before an occupied
    // conflict zone on its path (start-of-step occupancy).
    double interior_yield_position(const Vehicle& v) const;

    // Front (nearest to the entrance, not yet entered) vehicle per lane.
    bool is_lane_front(const Vehicle& v) const;

    StepResult step(const StepInput& in);

    std::vector<VehicleSnap> snapshot() const;

private:
    std::shared_ptr<const Intersection> geo_;
    IdmParams idm_;
    double dt_;
    int step_ = 0;
    double time_ = 0.0;
    int next_id_ = 0;
    std::vector<Vehicle> vehicles_; // ascending id

    bool zone_occupied_by_other_side(const ConflictZone& z, int own_slot,
                                     const Vehicle* ignore) const;
};

} // namespace cxflow

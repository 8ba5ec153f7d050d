#pragma once

// Closed set of behavior controllers as a value type. Copying a Controller
// deep-copies its step memory, which is what rollouts rely on.

#include "usv/allocation.hpp"
#include "usv/reverse.hpp"
#include "usv/stationkeep.hpp"
#include "usv/transit.hpp"

#include <string>
#include <variant>

namespace usv {

using Controller = std::variant<TransitController, StationKeepController, ReverseController>;

inline ControlOutput compute(Controller& c, const VehicleState& s, const SampleView& ref, double dt) {
    return std::visit([&](auto& impl) { return impl.compute(s, ref, dt); }, c);
}

/// One member of the candidate set: controller, the reduced model its
/// rollouts use, and the allocation path its output goes through.
struct Candidate {
    int id = 0;
    std::string name;
    Controller controller;
    ModelKind model = ModelKind::General;
    AllocationPath path = AllocationPath::Underactuated;
};

inline constexpr int kTransitId = 1;
inline constexpr int kStationKeepId = 2;
inline constexpr int kReverseId = 3;

inline Candidate make_transit(const VehicleParams& p, const TransitGains& g) {
    return {kTransitId, "transit", TransitController(p, g), ModelKind::Transiting, AllocationPath::Underactuated};
}

inline Candidate make_station_keep(const VehicleParams& p, const StationKeepGains& g) {
    return {kStationKeepId, "station_keep", StationKeepController(p, g), ModelKind::StationKeeping,
            AllocationPath::Overactuated};
}

inline Candidate make_reverse(const ReverseGains& g) {
    return {kReverseId, "reverse", ReverseController(g), ModelKind::Reversing, AllocationPath::Underactuated};
}

}  // namespace usv

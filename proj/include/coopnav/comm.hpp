#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "coopnav/errors.hpp"

namespace coopnav {

/// Edge set used at schedule step k for a group of n_uavs (0-based ids).
/// The schedule cycles through three matchings; for a group of 2L UAVs:
///   E0 = {(0,1), (2,3), ..., (2L-2, 2L-1)}
///   E1 = {(1,2), (3,4), ..., (2L-1, 0)}
///   E2 = {(0,L), (1,L+1), ..., (L-1, 2L-1)}
/// Odd groups use the even-(n+1) sets with the phantom vertex's edge removed.
/// Pairs are returned as (lo, hi), sorted.
std::vector<std::pair<int, int>> edge_set(int n_uavs, std::int64_t k);

/// Number of distinct vertices one datum has reached after the edge sets of
/// steps 0..k have been applied (E0 first), assuming the group never
/// saturates: 2(k+1) for k <= 1, else 4k - 4*floor((k-2)/3).
std::int64_t vertices_reached(std::int64_t k);

/// Lower bound ceil(3N/8) on the steps needed for one UAV's datum to reach
/// the whole group.
int steps_lower_bound(int n_uavs);

/// Exact number of schedule steps after which any UAV's datum has reached
/// all n_uavs, for every emission phase of the cyclic schedule. Computed by
/// breadth-first traversal of the time-expanded schedule graph; always
/// >= steps_lower_bound(n_uavs).
int propagation_steps(int n_uavs);

/// Ranging observation attached to a packet entry.
struct RangeObservation {
    int partner = -1;
    double distance = 0.0; // m

    bool operator==(const RangeObservation&) const = default;
};

/// One UAV's data record for one time step: filter-rate odometry, the
/// magnetometer reading, and the ranging measurement if the UAV was covered
/// by that step's edge set.
struct MeasurementEntry {
    double velocity = 0.0; // m/s
    double yaw_rate = 0.0; // rad/s
    double magnetic = 0.0; // nT
    std::optional<RangeObservation> range;

    bool operator==(const MeasurementEntry&) const = default;
};

/// The group's (possibly incomplete) record for one time step.
struct Packet {
    std::int64_t time_index = 0;
    std::vector<std::optional<MeasurementEntry>> entries; // size = group size

    Packet() = default;
    Packet(std::int64_t k, int n_uavs) : time_index(k), entries(n_uavs) {}

    int entry_count() const;
    bool complete() const;
};

/// Per-UAV packet history spanning [now - horizon, now]. Merging is a union
/// of entries; packets older than the horizon are dropped as they are no
/// longer used for localization.
class PacketStore {
public:
    PacketStore(int n_uavs, int horizon);

    int n_uavs() const { return n_uavs_; }
    int horizon() const { return horizon_; }

    /// Insert (or overwrite-check) one UAV's own entry at step k.
    void insert(std::int64_t k, int uav, const MeasurementEntry& entry);

    /// Union-merge a batch of incoming packets. Stale packets are ignored;
    /// conflicting duplicate entries throw ConflictingEntryError. Idempotent.
    void merge(std::span<const Packet> incoming, std::int64_t now);

    /// Union-merge everything another store holds.
    void merge_from(const PacketStore& other, std::int64_t now);

    /// Drop packets with time_index < oldest.
    void drop_before(std::int64_t oldest);

    const Packet* packet(std::int64_t k) const;
    std::size_t size() const { return packets_.size(); }
    const std::map<std::int64_t, Packet>& packets() const { return packets_; }

private:
    void merge_packet(const Packet& incoming);

    int n_uavs_;
    int horizon_;
    std::map<std::int64_t, Packet> packets_;
};

} // namespace coopnav

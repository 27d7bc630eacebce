#include "coopnav/comm.hpp"

#include <algorithm>
#include <sstream>

namespace coopnav {

namespace {

// Edge sets for an even group size m, 0-based ids, phase in {0, 1, 2}.
std::vector<std::pair<int, int>> even_edge_set(int m, int phase) {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(m / 2);
    switch (phase) {
    case 0: // (0,1), (2,3), ...
        for (int i = 0; i + 1 < m; i += 2) edges.emplace_back(i, i + 1);
        break;
    case 1: // (1,2), (3,4), ..., (m-1, 0)
        for (int i = 1; i + 1 < m; i += 2) edges.emplace_back(i, i + 1);
        edges.emplace_back(0, m - 1);
        break;
    default: // (0, m/2), (1, m/2+1), ...
        for (int i = 0; i < m / 2; ++i) edges.emplace_back(i, i + m / 2);
        break;
    }
    return edges;
}

} // namespace

std::vector<std::pair<int, int>> edge_set(int n_uavs, std::int64_t k) {
    if (n_uavs < 2) return {};
    const int phase = static_cast<int>(((k % 3) + 3) % 3);
    const int even = n_uavs + (n_uavs % 2);
    auto edges = even_edge_set(even, phase);
    if (even != n_uavs) {
        // odd group: drop every edge incident to the phantom vertex
        std::erase_if(edges, [even](const auto& e) {
            return e.first == even - 1 || e.second == even - 1;
        });
    }
    for (auto& e : edges)
        if (e.first > e.second) std::swap(e.first, e.second);
    std::sort(edges.begin(), edges.end());
    return edges;
}

std::int64_t vertices_reached(std::int64_t k) {
    if (k <= 1) return 2 * (k + 1);
    return 4 * k - 4 * ((k - 2) / 3);
}

int steps_lower_bound(int n_uavs) {
    return (3 * n_uavs + 7) / 8;
}

int propagation_steps(int n_uavs) {
    if (n_uavs < 2) return 0;
    // Worst case over every source and every emission phase of the cyclic
    // schedule; with the result as the store horizon, the oldest retained
    // packet is complete no matter when its data was emitted.
    int worst = 0;
    for (int phase = 0; phase < 3; ++phase) {
        for (int src = 0; src < n_uavs; ++src) {
            std::vector<char> reached(n_uavs, 0);
            reached[src] = 1;
            int count = 1;
            int steps = 0;
            while (count < n_uavs) {
                const auto edges = edge_set(n_uavs, phase + steps);
                for (const auto& [a, b] : edges) {
                    if (reached[a] != reached[b]) {
                        reached[a] = reached[b] = 1;
                        ++count;
                    }
                }
                ++steps;
            }
            worst = std::max(worst, steps);
        }
    }
    return worst;
}

int Packet::entry_count() const {
    int n = 0;
    for (const auto& e : entries)
        if (e) ++n;
    return n;
}

bool Packet::complete() const {
    return entry_count() == static_cast<int>(entries.size());
}

PacketStore::PacketStore(int n_uavs, int horizon) : n_uavs_(n_uavs), horizon_(horizon) {}

void PacketStore::insert(std::int64_t k, int uav, const MeasurementEntry& entry) {
    auto [it, created] = packets_.try_emplace(k, k, n_uavs_);
    auto& slot = it->second.entries[uav];
    if (slot && !(*slot == entry)) {
        std::ostringstream msg;
        msg << "conflicting entry for step " << k << ", uav " << uav;
        throw ConflictingEntryError(msg.str());
    }
    slot = entry;
}

void PacketStore::merge_packet(const Packet& incoming) {
    auto [it, created] = packets_.try_emplace(incoming.time_index, incoming.time_index, n_uavs_);
    Packet& mine = it->second;
    for (int uav = 0; uav < n_uavs_; ++uav) {
        const auto& theirs = incoming.entries[uav];
        if (!theirs) continue;
        auto& slot = mine.entries[uav];
        if (slot) {
            if (!(*slot == *theirs)) {
                std::ostringstream msg;
                msg << "conflicting entry for step " << incoming.time_index << ", uav " << uav;
                throw ConflictingEntryError(msg.str());
            }
        } else {
            slot = *theirs;
        }
    }
}

void PacketStore::merge(std::span<const Packet> incoming, std::int64_t now) {
    for (const auto& p : incoming) {
        if (p.time_index < now - horizon_) continue; // stale, not used for localization
        merge_packet(p);
    }
    drop_before(now - horizon_);
}

void PacketStore::merge_from(const PacketStore& other, std::int64_t now) {
    for (const auto& [k, p] : other.packets_) {
        if (k < now - horizon_) continue;
        merge_packet(p);
    }
    drop_before(now - horizon_);
}

void PacketStore::drop_before(std::int64_t oldest) {
    packets_.erase(packets_.begin(), packets_.lower_bound(oldest));
}

const Packet* PacketStore::packet(std::int64_t k) const {
    const auto it = packets_.find(k);
    return it == packets_.end() ? nullptr : &it->second;
}

} // namespace coopnav

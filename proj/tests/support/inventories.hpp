#pragma once

// Random byte inventories and network profiles for load simulation tests.

#include "vtour/profiler.hpp"

#include <random>
#include <set>
#include <string>

namespace vtour::testing {

inline ByteInventory random_inventory(std::mt19937_64& rng, std::size_t max_assets = 20) {
    std::uniform_int_distribution<std::size_t> count(0, max_assets);
    std::uniform_int_distribution<int> scene(0, 3), cat(0, 6);
    std::uniform_int_distribution<std::uint64_t> size(0, 2'000'000);
    std::vector<InventoryRow> rows;
    std::set<std::string> used;
    const std::size_t n = count(rng);
    while (rows.size() < n) {
        const auto c = kAssetCategories[cat(rng)];
        const std::string s = "s" + std::to_string(scene(rng));
        std::string path;
        switch (c) {
        case AssetCategory::document: path = rng() % 2 ? "manifest.resolved" : "viewer/page" + std::to_string(rng() % 5) + ".html"; break;
        case AssetCategory::panorama: path = "scenes/" + s + "/pano.jpg"; break;
        case AssetCategory::preview: path = "scenes/" + s + "/preview.png"; break;
        case AssetCategory::cubemap: path = "scenes/" + s + "/cube_" + std::string(to_string(kCubeFaces[rng() % 6])) + ".png"; break;
        case AssetCategory::picture: path = "media/p" + std::to_string(rng() % 50) + ".jpg"; break;
        case AssetCategory::viewer_script: path = "viewer/v" + std::to_string(rng() % 9) + ".js"; break;
        case AssetCategory::viewer_style: path = "viewer/v" + std::to_string(rng() % 9) + ".css"; break;
        }
        // Occasional duplicate sizes and zero-byte files exercise ties.
        const std::uint64_t bytes = rng() % 7 == 0 ? 1000 : size(rng);
        if (used.insert(path).second) rows.push_back({path, c, bytes});
    }
    return ByteInventory::from_rows(std::move(rows));
}

inline NetworkModel random_network(std::mt19937_64& rng) {
    const double bandwidths[] = {1e6, 8e6, 1.5e7, 1e8, 3.3e6};
    return {bandwidths[rng() % 5], 1.0 + static_cast<double>(rng() % 200), static_cast<unsigned>(1 + rng() % 8)};
}

} // namespace vtour::testing

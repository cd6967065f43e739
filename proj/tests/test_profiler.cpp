#include "vtour/profiler.hpp"

#include "support/fixtures.hpp"
#include "support/inventories.hpp"
#include "support/load_oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace vtour;
using namespace vtour::testing;

namespace {

// 8 Mbit/s, 50 ms round trip, 6 connections, default client rates.
const NetworkModel kReference{8e6, 50.0, 6};

// Critical path of the checked-in workshop inventory under kReference.
constexpr double kWorkshopGoldenMs = 213.28975;

ByteInventory workshop_inventory() {
    return inventory_from_json(
        nlohmann::json::parse(read_text_file(std::filesystem::path(VTOUR_SOURCE_DIR) / "tests/data/workshop_inventory.json")));
}

OracleResult oracle(const ByteInventory& inv, const NetworkModel& net, const ClientModel& client,
                    const std::string& start) {
    return event_list_simulation(inv, net.bandwidth_bps, net.rtt_ms, net.connections, client.script_bytes_per_s,
                                 client.image_bytes_per_s, start);
}

} // namespace

TEST(SimulateLoad, SingleByteDocument) {
    const auto inv = ByteInventory::from_rows({{"manifest.resolved", AssetCategory::document, 1}});
    const NetworkModel net{1e6, 40.0, 4};
    const ClientModel client{1000.0, 1e6};
    const auto r = simulate_load(inv, net, client, {});
    ASSERT_EQ(r.timeline.size(), 1u);
    EXPECT_DOUBLE_EQ(r.critical_path_ms, 40.0 + 8.0 / 1e6 * 1000.0 + 1.0);
    EXPECT_EQ(r.timeline[0].start_ms, 0.0);
    EXPECT_FALSE(r.timeline[0].lazy);
}

TEST(SimulateLoad, EmptyInventory) {
    const auto r = simulate_load(ByteInventory{}, kReference, {}, {"intro"});
    EXPECT_TRUE(r.timeline.empty());
    EXPECT_EQ(r.critical_path_ms, 0.0);
}

TEST(SimulateLoad, FetchOrderAndLaziness) {
    const auto r = simulate_load(workshop_inventory(), kReference, {}, {"intro"});
    std::vector<std::string> order;
    for (const auto& t : r.timeline) order.push_back(t.path + (t.lazy ? "*" : ""));
    EXPECT_EQ(order, (std::vector<std::string>{"manifest.resolved", "viewer/index.html", "viewer/viewer.js",
                                               "viewer/viewer.css", "scenes/intro/pano.jpg", "scenes/advance/preview.png",
                                               "scenes/intro/preview.png", "scenes/medium/preview.png",
                                               "media/pictures/bench-vise.jpg*", "media/pictures/cnc-panel.jpg*",
                                               "scenes/advance/pano.jpg*", "scenes/medium/pano.jpg*"}));
}

TEST(SimulateLoad, ReportInvariants) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 100; ++k) {
        const auto inv = random_inventory(rng);
        const auto r = simulate_load(inv, random_network(rng), {}, {"s1"});
        ASSERT_EQ(r.timeline.size(), inv.rows.size());
        std::set<std::string> seen;
        double eager_max = 0;
        for (const auto& t : r.timeline) {
            EXPECT_TRUE(seen.insert(t.path).second);
            EXPECT_DOUBLE_EQ(t.end_ms, t.start_ms + t.latency_ms + t.transfer_ms + t.processing_ms);
            if (!t.lazy) eager_max = std::max(eager_max, t.end_ms);
        }
        EXPECT_EQ(r.critical_path_ms, eager_max);
        for (auto c : kAssetCategories) {
            std::uint64_t bytes = 0, assets = 0;
            for (const auto& row : inv.rows)
                if (row.category == c) bytes += row.bytes, ++assets;
            EXPECT_EQ(r.category(c).bytes, bytes);
            EXPECT_EQ(r.category(c).assets, assets);
        }
    }
}

TEST(SimulateLoad, MatchesEventListOracle) {
    std::mt19937_64 rng(20);
    for (int k = 0; k < 100; ++k) {
        const auto inv = random_inventory(rng);
        const auto net = random_network(rng);
        const ClientModel client{1e5 + static_cast<double>(rng() % 5'000'000), 1e6 + static_cast<double>(rng() % 50'000'000)};
        const std::string start = "s" + std::to_string(rng() % 4);
        const auto r = simulate_load(inv, net, client, {start});
        const auto o = oracle(inv, net, client, start);
        ASSERT_EQ(r.timeline.size(), o.rows.size());
        for (std::size_t i = 0; i < o.rows.size(); ++i) {
            ASSERT_EQ(r.timeline[i].path, o.rows[i].path) << k;
            ASSERT_EQ(r.timeline[i].connection, o.rows[i].connection) << k;
            ASSERT_EQ(r.timeline[i].start_ms, o.rows[i].start_ms) << k;
            ASSERT_EQ(r.timeline[i].end_ms, o.rows[i].end_ms) << k;
            ASSERT_EQ(r.timeline[i].lazy, o.rows[i].lazy) << k;
        }
        ASSERT_EQ(r.critical_path_ms, o.critical_path_ms) << k;
    }
}

TEST(SimulateLoad, DoublingBandwidthHalvesTransfer) {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 50; ++k) {
        const auto inv = random_inventory(rng);
        NetworkModel net = random_network(rng);
        const auto slow = simulate_load(inv, net, {}, {"s0"});
        net.bandwidth_bps *= 2;
        const auto fast = simulate_load(inv, net, {}, {"s0"});
        for (auto c : kAssetCategories) {
            EXPECT_EQ(fast.category(c).transfer_ms * 2, slow.category(c).transfer_ms);
            EXPECT_EQ(fast.category(c).latency_ms, slow.category(c).latency_ms);
            EXPECT_EQ(fast.category(c).processing_ms, slow.category(c).processing_ms);
        }
        for (std::size_t i = 0; i < slow.timeline.size(); ++i) {
            EXPECT_EQ(fast.timeline[i].transfer_ms * 2, slow.timeline[i].transfer_ms);
        }
    }
}

TEST(SimulateLoad, SingleConnectionIsFifo) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 50; ++k) {
        const auto inv = random_inventory(rng);
        const auto r = simulate_load(inv, {8e6, 20.0, 1}, {}, {"s2"});
        for (std::size_t i = 1; i < r.timeline.size(); ++i) {
            const auto& prev = r.timeline[i - 1];
            EXPECT_EQ(r.timeline[i].start_ms, prev.start_ms + (prev.latency_ms + prev.transfer_ms));
        }
    }
}

TEST(SimulateLoad, GrowingAnAssetNeverShortensCriticalPath) {
    std::mt19937_64 rng(6);
    for (int k = 0; k < 200; ++k) {
        auto inv = random_inventory(rng, 12);
        if (inv.rows.empty()) continue;
        const auto net = random_network(rng);
        const double before = simulate_load(inv, net, {}, {"s0"}).critical_path_ms;
        auto rows = inv.rows;
        rows[rng() % rows.size()].bytes += 1 + rng() % 500'000;
        const double after = simulate_load(ByteInventory::from_rows(rows), net, {}, {"s0"}).critical_path_ms;
        EXPECT_GE(after, before) << k;
    }
}

TEST(SimulateLoad, WorkshopGoldenAtReferenceProfile) {
    const auto inv = workshop_inventory();
    const auto r = simulate_load(inv, kReference, {}, {"intro"});
    EXPECT_EQ(oracle(inv, kReference, {}, "intro").critical_path_ms, kWorkshopGoldenMs);
    EXPECT_EQ(r.critical_path_ms, kWorkshopGoldenMs);
}

TEST(SimulateLoad, LiveSampleBundleMatchesOracle) {
    const WorkshopFixture f;
    const auto inv = inventory(f.bundle);
    const auto policy = LoadPolicy::for_tour(f.bundle.tour);
    EXPECT_EQ(simulate_load(inv, kReference, {}, policy).critical_path_ms,
              oracle(inv, kReference, {}, policy.start_scene).critical_path_ms);
}

TEST(SimulateLoad, RejectsInvalidModels) {
    EXPECT_THROW(simulate_load({}, {0, 50, 6}, {}, {}), ParameterError);
    EXPECT_THROW(simulate_load({}, {8e6, 0, 6}, {}, {}), ParameterError);
    EXPECT_THROW(simulate_load({}, {8e6, 50, 0}, {}, {}), ParameterError);
    EXPECT_THROW(simulate_load({}, kReference, {0, 1}, {}), ParameterError);
    EXPECT_THROW(simulate_load({}, kReference, {1, -1}, {}), ParameterError);
}

TEST(RenderReport, EmptyTimelineIsHeaderOnly) {
    const auto text = render_report(simulate_load({}, kReference, {}, {}), ReportFormat::text);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
    EXPECT_TRUE(text.starts_with("category"));
}

TEST(RenderReport, JsonRoundTrip) {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 30; ++k) {
        const auto r = simulate_load(random_inventory(rng), random_network(rng), {3.3e6, 1.7e7}, {"s3"});
        const auto back = load_report_from_json(nlohmann::json::parse(render_report(r, "json")));
        EXPECT_EQ(back, r);
        EXPECT_EQ(render_report(back, ReportFormat::json), render_report(r, ReportFormat::json));
    }
}

TEST(RenderReport, CategoryOrderIsFixed) {
    auto rows = workshop_inventory().rows;
    std::reverse(rows.begin(), rows.end());
    const auto a = simulate_load(workshop_inventory(), kReference, {}, {"intro"});
    const auto b = simulate_load(ByteInventory::from_rows(rows), kReference, {}, {"intro"});
    EXPECT_EQ(render_report(a, ReportFormat::text), render_report(b, ReportFormat::text));

    const auto text = render_report(a, ReportFormat::text);
    std::vector<std::size_t> positions;
    for (const char* c : {"\ndocument", "\npanorama", "\npreview", "\npicture", "\nviewer_script", "\nviewer_style"}) {
        positions.push_back(text.find(c));
        EXPECT_NE(positions.back(), std::string::npos) << c;
    }
    EXPECT_TRUE(std::is_sorted(positions.begin(), positions.end()));
    EXPECT_NE(text.find("critical path: 213.290 ms"), std::string::npos);
}

TEST(RenderReport, UnknownFormat) {
    EXPECT_THROW(render_report(LoadReport{}, "xml"), ParameterError);
}

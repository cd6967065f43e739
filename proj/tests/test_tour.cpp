#include "vtour/sample.hpp"
#include "vtour/tour.hpp"

#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace vtour;
using namespace vtour::testing;

namespace {

const std::set<std::string> kWorkshopMedia{"panoramas/intro.jpg", "panoramas/medium.jpg", "panoramas/advance.jpg",
                                           "pictures/bench-vise.jpg", "pictures/cnc-panel.jpg"};

std::string chain_manifest(const std::string& links) {
    // Scenes A, B, C; `links` is a JSON array body of hotspots placed in scene A.
    return R"({"id":"t","start_scene":"A","scenes":[
      {"id":"A","panorama":"a.jpg","hotspots":[)" + links + R"(]},
      {"id":"B","panorama":"b.jpg","hotspots":[{"id":"l","kind":"link","yaw_deg":0,"pitch_deg":0,"payload":"C"}]},
      {"id":"C","panorama":"c.jpg"}]})";
}

ManifestError parse_error_of(const std::string& text) {
    try {
        parse_manifest(text);
    } catch (const ManifestError& e) {
        return e;
    }
    ADD_FAILURE() << "manifest parsed unexpectedly: " << text;
    return ManifestError(ManifestError::Kind::semantic, "", "");
}

std::vector<Finding> of_code(const ValidationReport& r, std::string_view code) {
    std::vector<Finding> out;
    std::copy_if(r.findings.begin(), r.findings.end(), std::back_inserter(out),
                 [&](const Finding& f) { return f.code == code; });
    return out;
}

} // namespace

TEST(ParseManifest, WorkshopThreeAreas) {
    const Tour t = parse_manifest(sample::kWorkshopManifest);
    ASSERT_EQ(t.scenes.size(), 3u);
    EXPECT_EQ(t.start_scene, "intro");
    EXPECT_EQ(t.scenes[0].id, "intro");
    EXPECT_EQ(t.scenes[1].id, "medium");
    EXPECT_EQ(t.scenes[2].id, "advance");
    EXPECT_EQ(t.scenes[1].initial_view, (InitialView{45, -10, 80}));
    const Hotspot& video = t.scenes[1].hotspots[2];
    EXPECT_EQ(video.kind, HotspotKind::video);
    EXPECT_TRUE(video.payload.starts_with("https://www.youtube.com/"));
    EXPECT_NEAR(t.scenes[0].hotspots[0].direction().yaw(), kHalfPi, 1e-15);
}

TEST(ParseManifest, CheckedInSampleMatchesGenerator) {
    const std::string on_disk = read_text_file(std::filesystem::path(VTOUR_SOURCE_DIR) / "samples" /
                                               "workshop" / "manifest.json");
    EXPECT_EQ(on_disk, sample::kWorkshopManifest);
}

TEST(ParseManifest, EmptySceneListIsSemanticError) {
    const auto e = parse_error_of(R"({"id":"t","start_scene":"intro","scenes":[]})");
    EXPECT_EQ(e.kind(), ManifestError::Kind::semantic);
    EXPECT_EQ(e.path(), "start_scene");
}

TEST(ParseManifest, SyntaxErrorHasPosition) {
    const auto e = parse_error_of("{\n  \"id\": \"t\",\n  \"scenes\": [,]\n}");
    EXPECT_EQ(e.kind(), ManifestError::Kind::syntax);
    EXPECT_EQ(e.line(), 3u);
    EXPECT_GT(e.column(), 1u);
}

TEST(ParseManifest, SemanticErrorsNameThePath) {
    struct Case {
        std::string text, path;
    };
    const Case cases[] = {
        {R"({"id":"t","start_scene":"a","scenes":[{"id":"a","panorama":"p.jpg"},{"id":"a","panorama":"q.jpg"}]})",
         "scenes[1].id"},
        {R"({"id":"t","start_scene":"a","scenes":[{"id":"a","panorama":"p.jpg","hotspots":[
            {"id":"h","kind":"sound","yaw_deg":0,"pitch_deg":0,"payload":"x"}]}]})",
         "scenes[0].hotspots[0].kind"},
        {R"({"id":"t","start_scene":"a","scenes":[{"id":"a","panorama":"p.jpg","hotspots":[
            {"id":"h","kind":"video","yaw_deg":0,"pitch_deg":0,"payload":"clip.mp4"}]}]})",
         "scenes[0].hotspots[0].payload"},
        {R"({"id":"t","start_scene":"a","scenes":[{"id":"a","panorama":"p.jpg","hotspots":[
            {"id":"h","kind":"text","yaw_deg":0,"pitch_deg":95,"payload":"x"}]}]})",
         "scenes[0].hotspots[0].pitch_deg"},
        {R"({"id":"t","start_scene":"a","scenes":[{"id":"a","panorama":"p.jpg","hotspots":[
            {"id":"h","kind":"text","yaw_deg":0,"pitch_deg":0,"payload":"x"},
            {"id":"h","kind":"text","yaw_deg":9,"pitch_deg":0,"payload":"y"}]}]})",
         "scenes[0].hotspots[1].id"},
        {R"({"id":"t","start_scene":"a","scenes":[{"id":"a","panorama":"../etc/passwd"}]})", "scenes[0].panorama"},
        {R"({"id":"t","start_scene":"a","scenes":[{"id":"a b","panorama":"p.jpg"}]})", "scenes[0].id"},
        {R"({"id":"t","start_scene":"a","scenes":[{"id":"a","panorama":"p.jpg","initial_view":{"fov_deg":180}}]})",
         "scenes[0].initial_view.fov_deg"},
        {R"({"id":"t","start_scene":"a","scenes":[{"id":"a","panorama":"p.jpg","hotspots":[
            {"id":"h","kind":"picture","yaw_deg":"0","pitch_deg":0,"payload":"x.jpg"}]}]})",
         "scenes[0].hotspots[0].yaw_deg"},
        {R"({"id":"t","start_scene":"a"})", "scenes"},
        {R"([1,2])", ""},
    };
    for (const auto& c : cases) {
        const auto e = parse_error_of(c.text);
        EXPECT_EQ(e.kind(), ManifestError::Kind::semantic) << c.text;
        EXPECT_EQ(e.path(), c.path) << e.what();
    }
}

TEST(ParseManifest, UnknownFieldsWarn) {
    std::vector<std::string> warnings;
    const Tour t = parse_manifest(
        R"({"id":"t","start_scene":"a","author":"x","scenes":[{"id":"a","panorama":"p.jpg","mood":1}]})", &warnings);
    EXPECT_EQ(t.scenes.size(), 1u);
    ASSERT_EQ(warnings.size(), 2u);
    EXPECT_NE(warnings[0].find("author"), std::string::npos);
    EXPECT_NE(warnings[1].find("scenes[0].mood"), std::string::npos);
}

TEST(ParseManifest, DefaultsForOptionalFields) {
    const Tour t = parse_manifest(R"({"id":"t","start_scene":"a","scenes":[{"id":"a","panorama":"p.jpg"}]})");
    EXPECT_EQ(t.title, "");
    EXPECT_EQ(t.scenes[0].initial_view, InitialView{});
    EXPECT_TRUE(t.scenes[0].hotspots.empty());
}

TEST(MediaReference, Rules) {
    EXPECT_TRUE(is_valid_media_reference("a/b.jpg"));
    for (const char* bad : {"", "/abs.jpg", "a/../b", "./a", "a//b", "c:\\x", "a\\b", "a/"}) {
        EXPECT_FALSE(is_valid_media_reference(bad)) << bad;
    }
}

TEST(SerializeManifest, RoundTripAndDeterminism) {
    const Tour t = parse_manifest(sample::kWorkshopManifest);
    const std::string a = serialize_manifest(t);
    EXPECT_EQ(a, serialize_manifest(t));
    EXPECT_EQ(parse_manifest(a), t);
    EXPECT_EQ(serialize_manifest(parse_manifest(a)), a);
}

TEST(SerializeManifest, GeneratedToursFixpoint) {
    std::mt19937_64 rng(2024);
    for (int k = 0; k < 100; ++k) {
        const Tour t = random_tour(rng);
        const std::string text = serialize_manifest(t);
        const Tour back = parse_manifest(text);
        ASSERT_EQ(back, t) << text;
        ASSERT_EQ(serialize_manifest(back), text);
    }
}

TEST(ValidateTour, WorkshopIsClean) {
    const auto r = validate_tour(parse_manifest(sample::kWorkshopManifest), kWorkshopMedia);
    EXPECT_TRUE(r.ok);
    EXPECT_TRUE(r.findings.empty()) << format_finding(r.findings.front());
}

TEST(ValidateTour, ChainIsClean) {
    const Tour t = parse_manifest(chain_manifest(R"({"id":"l","kind":"link","yaw_deg":0,"pitch_deg":0,"payload":"B"})"));
    const auto r = validate_tour(t, {"a.jpg", "b.jpg", "c.jpg"});
    EXPECT_TRUE(r.ok);
    EXPECT_TRUE(r.findings.empty());
}

TEST(ValidateTour, DanglingLink) {
    const Tour t = parse_manifest(R"({"id":"t","start_scene":"A","scenes":[{"id":"A","panorama":"a.jpg","hotspots":[
        {"id":"go","kind":"link","yaw_deg":0,"pitch_deg":0,"payload":"advance"}]}]})");
    const auto r = validate_tour(t, {"a.jpg"});
    EXPECT_FALSE(r.ok);
    const auto d = of_code(r, codes::dangling_link);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].path, "scenes/A/hotspots/go/payload");
}

TEST(ValidateTour, UnreachableScene) {
    // A links to B only; B's link to C is absent in this variant.
    const Tour t = parse_manifest(R"({"id":"t","start_scene":"A","scenes":[
      {"id":"A","panorama":"a.jpg","hotspots":[{"id":"l","kind":"link","yaw_deg":0,"pitch_deg":0,"payload":"B"}]},
      {"id":"B","panorama":"b.jpg"},{"id":"C","panorama":"c.jpg"}]})");
    const auto r = validate_tour(t, {"a.jpg", "b.jpg", "c.jpg"});
    EXPECT_TRUE(r.ok);
    ASSERT_EQ(r.findings.size(), 1u);
    EXPECT_EQ(r.findings[0].code, codes::unreachable);
    EXPECT_EQ(r.findings[0].severity, Severity::warning);
    EXPECT_EQ(r.findings[0].path, "scenes/C");
    EXPECT_EQ(reachable_by_path_enumeration(t), (std::set<std::string>{"A", "B"}));
}

TEST(ValidateTour, MissingMediaAndOverlap) {
    const Tour t = parse_manifest(R"({"id":"t","start_scene":"A","scenes":[{"id":"A","panorama":"a.jpg","hotspots":[
        {"id":"p","kind":"picture","yaw_deg":10,"pitch_deg":0,"payload":"pic.jpg"},
        {"id":"q","kind":"text","yaw_deg":11.5,"pitch_deg":1,"payload":"x"},
        {"id":"r","kind":"text","yaw_deg":40,"pitch_deg":0,"payload":"y"}]}]})");
    const auto r = validate_tour(t, {});
    EXPECT_EQ(of_code(r, codes::missing_media).size(), 2u);
    const auto o = of_code(r, codes::overlap);
    ASSERT_EQ(o.size(), 1u);
    EXPECT_EQ(o[0].severity, Severity::warning);
    EXPECT_TRUE(validate_tour(t, {"a.jpg", "pic.jpg"}, {.overlap_threshold_deg = 1.0}).findings.empty());
}

TEST(ValidateTour, OverlapAcrossSeamAndAtPole) {
    const Tour t = parse_manifest(R"({"id":"t","start_scene":"A","scenes":[{"id":"A","panorama":"a.jpg","hotspots":[
        {"id":"w","kind":"text","yaw_deg":179.5,"pitch_deg":0,"payload":"x"},
        {"id":"e","kind":"text","yaw_deg":-179.5,"pitch_deg":0,"payload":"x"},
        {"id":"n1","kind":"text","yaw_deg":0,"pitch_deg":89.5,"payload":"x"},
        {"id":"n2","kind":"text","yaw_deg":120,"pitch_deg":89.5,"payload":"x"}]}]})");
    EXPECT_EQ(of_code(validate_tour(t, {"a.jpg"}), codes::overlap).size(), 2u);
}

TEST(ValidateTour, ReachabilityMatchesEnumerationOracle) {
    std::mt19937_64 rng(77);
    for (int k = 0; k < 300; ++k) {
        const Tour t = random_tour(rng, {.max_scenes = 6, .max_hotspots = 3, .dangling_probability = 0.1});
        const auto expected = reachable_by_path_enumeration(t);
        ASSERT_EQ(reachable_scenes(t), expected);
        const auto r = validate_tour(t, media_of(t));
        std::set<std::string> flagged;
        for (const auto& f : of_code(r, codes::unreachable)) flagged.insert(f.path.substr(7));
        for (const auto& s : t.scenes) ASSERT_EQ(flagged.contains(s.id), !expected.contains(s.id));
    }
}

TEST(ValidateTour, FindingsIndependentOfSceneOrder) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 100; ++k) {
        Tour t = random_tour(rng, {.max_scenes = 6, .max_hotspots = 4, .dangling_probability = 0.2});
        auto media = media_of(t);
        if (!media.empty() && k % 2) media.erase(media.begin());
        const auto before = validate_tour(t, media).findings;
        std::shuffle(t.scenes.begin(), t.scenes.end(), rng);
        EXPECT_EQ(validate_tour(t, media).findings, before);
    }
}

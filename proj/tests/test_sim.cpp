#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "otfs/sim.hpp"

using namespace otfs;

namespace {

SimSpec small_spec() {
    SimSpec s;
    s.M = 32;
    s.N = 16;
    s.l_max = 4;
    s.doppler_cap = 4;
    s.snr_db = {8.0, 14.0};
    s.detectors = {"mrc", "mrc_init:2", "mmse_tf_only", "ofdm_mmse"};
    s.S = 3;
    s.stop.frames = 6;
    s.stop.batch = 4;
    s.seed = 5;
    return s;
}

std::filesystem::path identity_channel_file() {
    auto p = std::filesystem::temp_directory_path() / "otfs_test_identity_channel.json";
    std::ofstream(p) << R"([{"gain_re":1.0,"gain_im":0.0,"delay_tap":0,"doppler_tap":0}])";
    return p;
}

}  // namespace

TEST_CASE("detector names") {
    CHECK(parse_detector("mrc").kind == DetectorKind::mrc);
    CHECK(parse_detector("mrc").iterations == -1);
    auto d = parse_detector("mrc_init:2");
    CHECK(d.kind == DetectorKind::mrc_init);
    CHECK(d.iterations == 2);
    CHECK(d.label == "mrc_init:2");
    CHECK(parse_detector("turbo_mrc:3").iterations == 3);
    CHECK(is_coded(DetectorKind::coded_mrc));
    CHECK_FALSE(is_coded(DetectorKind::mrc));
    CHECK_THROWS_AS(parse_detector("zf"), std::invalid_argument);
    CHECK_THROWS_AS(parse_detector("mrc:x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_detector("mrc:-1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_detector("ofdm_mmse:3"), std::invalid_argument);
}

TEST_CASE("snr convention") {
    CHECK(sigma_from_snr_db(0.0) == doctest::Approx(1.0));
    CHECK(sigma_from_snr_db(20.0) == doctest::Approx(0.1));
}

TEST_CASE("spec json round trip and validation") {
    auto s = small_spec();
    s.stop.count_bit_errors = true;
    auto j = spec_to_json(s);
    auto t = spec_from_json(j);
    CHECK(spec_to_json(t) == j);
    CHECK(t.stop.count_bit_errors);
    auto bad = j;
    bad["stop"]["unit"] = "symbol";
    CHECK_THROWS(spec_from_json(bad));

    auto v = small_spec();
    v.detectors = {"coded_mrc"};
    CHECK_THROWS_AS(v.validate(), std::invalid_argument);
    v = small_spec();
    v.snr_db.clear();
    CHECK_THROWS_AS(v.validate(), std::invalid_argument);
    v = small_spec();
    v.doppler_cap = 8;
    CHECK_THROWS_AS(v.validate(), std::invalid_argument);
    v = small_spec();
    v.M = 24;
    CHECK_THROWS_AS(v.validate(), std::invalid_argument);
}

TEST_CASE("noiseless identity channel gives zero errors") {
    auto s = small_spec();
    s.channel = identity_channel_file().string();
    s.snr_db = {300.0};
    auto recs = run_campaign(s);
    REQUIRE(recs.size() == 4);
    for (const auto& r : recs) {
        CHECK(r.bit_errors == 0);
        CHECK(r.ber == 0.0);
        CHECK(r.frames == 6);
    }
    std::filesystem::remove(s.channel);
}

TEST_CASE("missing channel file is an error") {
    auto s = small_spec();
    s.channel = "/nonexistent/channel.json";
    CHECK_THROWS(run_campaign(s));
}

TEST_CASE("reruns and thread counts give identical records") {
    auto s = small_spec();
    auto a = run_campaign(s);
    auto b = run_campaign(s);
    s.threads = 4;
    auto c = run_campaign(s);
    CHECK(to_csv(a) == to_csv(b));
    CHECK(to_csv(a) == to_csv(c));
    s.seed = 6;
    CHECK(to_csv(a) != to_csv(run_campaign(s)));
}

TEST_CASE("error-count stopping rule") {
    auto s = small_spec();
    s.stop.frames = 0;
    s.stop.errors = 20;
    s.stop.count_bit_errors = true;
    s.stop.batch = 2;
    s.snr_db = {6.0};
    s.detectors = {"mrc"};
    auto r = run_campaign(s).at(0);
    CHECK(r.bit_errors >= 20);
    CHECK(r.frames % 2 == 0);
}

TEST_CASE("multiplies per frame follow the closed form") {
    auto s = small_spec();
    s.detectors = {"mrc"};
    s.snr_db = {10.0};
    s.stop.frames = 1;
    auto r = run_campaign(s).at(0);
    auto rep = measure_complexity(s);
    CHECK(r.multiplies_per_frame == 16u * 28u * 3u * (3u * rep.L + 1u));
    CHECK(rep.measured.iterative == rep.expected.iterative);
    CHECK(rep.measured.tf_init == rep.expected.tf_init);
}

TEST_CASE("coded campaign counts codewords") {
    SimSpec s;
    s.M = 64;
    s.N = 32;
    s.l_max = 8;
    s.doppler_cap = 8;
    s.qam = 16;
    s.snr_db = {30.0};
    s.detectors = {"coded_mrc:2", "turbo_mrc"};
    s.ldpc = default_ldpc_path(1024).string();
    s.stop.frames = 2;
    auto recs = run_campaign(s);
    for (const auto& r : recs) {
        CHECK(r.frames == 14);
        CHECK(r.bits == 14u * 512u);
        CHECK(r.frame_errors == 0);
    }
    s.qam = 4;
    CHECK_THROWS(run_campaign(s));
}

TEST_CASE("csv output") {
    MetricRecord r{10.5, "mrc", 1000, 3, 2, 1, 0.003, 0.5, 42, 1.25};
    auto text = to_csv({r});
    CHECK(text.find("snr_db,detector,bits,bit_errors,frames,frame_errors,ber,fer,multiplies_per_frame\n") == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    std::istringstream in(text);
    auto back = parse_csv(in);
    REQUIRE(back.size() == 1);
    auto expect = r;
    expect.wall_time_s = 0.0;
    CHECK(back[0] == expect);

    std::istringstream timed(to_csv({r}, true));
    CHECK(parse_csv(timed)[0] == r);

    CHECK_THROWS(to_csv({}));
    CHECK_THROWS(emit_csv({}, std::filesystem::temp_directory_path() / "otfs_empty.csv"));
    CHECK_THROWS(emit_csv({r}, "/nonexistent/dir/out.csv"));
    auto path = std::filesystem::temp_directory_path() / "otfs_one.csv";
    emit_csv({r}, path);
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(ss.str() == text);
    std::filesystem::remove(path);
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "otfs/ldpc.hpp"
#include "otfs/mrc_detector.hpp"

namespace otfs {

enum class DetectorKind { mrc, mrc_init, mmse_tf_only, ofdm_mmse, coded_mrc, turbo_mrc };

// A detector entry: kind plus optional iteration override, written "name" or
// "name:iters" (iters is S, or n_turbo for turbo_mrc).
struct DetectorSpec {
    DetectorKind kind;
    int iterations = -1;  // -1: take S / n_turbo from the campaign
    std::string label;
};

DetectorSpec parse_detector(std::string_view text);
bool is_coded(DetectorKind k);

struct StopRule {
    // When nonzero, exactly this many OTFS frames per point.
    std::uint64_t frames = 0;
    // Otherwise run until `errors` error events (frame or bit errors) or
    // `max_bits` bits, with at least min_frames and at most max_frames frames.
    std::uint64_t errors = 200;
    bool count_bit_errors = false;
    std::uint64_t max_bits = 10'000'000;
    std::uint64_t min_frames = 1;
    std::uint64_t max_frames = 1'000'000;
    // Frames evaluated between stop checks; fixed so results do not depend on
    // the worker count.
    std::uint64_t batch = 32;
};

struct SimSpec {
    std::size_t M = 512;
    std::size_t N = 128;
    std::size_t l_max = 32;
    double delta_f = 15e3;
    std::string channel = "eva";  // "eva" or a channel JSON file
    double speed_kmh = 120.0;
    int doppler_cap = 16;
    double carrier_hz = 0.0;
    unsigned qam = 4;
    std::vector<double> snr_db;
    std::vector<std::string> detectors;
    int S = 10;
    int n_turbo = 2;
    StopRule stop;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string ldpc;  // alist file; required by coded detectors
    double epsilon = 1e-12;
    bool turbo_restart = false;
    int decoder_iterations = kDecoderIterations;

    void validate() const;
};

SimSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const SimSpec& spec);

struct MetricRecord {
    double snr_db = 0.0;
    std::string detector;
    std::uint64_t bits = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t frames = 0;  // OTFS/OFDM frames, or codewords for coded detectors
    std::uint64_t frame_errors = 0;
    double ber = 0.0;
    double fer = 0.0;
    std::uint64_t multiplies_per_frame = 0;  // iterative-part detector multiplies
    double wall_time_s = 0.0;

    bool operator==(const MetricRecord&) const = default;
};

// Noise standard deviation for Es/N0 in dB with unit symbol energy.
double sigma_from_snr_db(double snr_db);

using ProgressFn = std::function<void(const MetricRecord&)>;

std::vector<MetricRecord> run_campaign(const SimSpec& spec, const ProgressFn& progress = {});

// Fixed column order; wall time is only written when requested since it
// breaks byte-identical reruns.
std::string to_csv(const std::vector<MetricRecord>& records, bool with_timing = false);
void emit_csv(const std::vector<MetricRecord>& records, const std::filesystem::path& path, bool with_timing = false);
std::vector<MetricRecord> parse_csv(std::istream& in);

struct ComplexityReport {
    std::size_t L = 0;
    int S = 0;
    OpCounters measured;
    ComplexityTerms expected;
};

// Instrumented single-frame run of the TF-initialized detector.
ComplexityReport measure_complexity(const SimSpec& spec);

std::filesystem::path default_ldpc_path(std::size_t n);

}  // namespace otfs

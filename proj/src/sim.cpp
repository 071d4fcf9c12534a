#include "otfs/sim.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "otfs/channel.hpp"
#include "otfs/ldpc.hpp"
#include "otfs/rng.hpp"
#include "otfs/tf_equalizer.hpp"
#include "otfs/turbo.hpp"

#ifndef OTFS_DATA_DIR
#define OTFS_DATA_DIR "data"
#endif

namespace otfs {

namespace {

constexpr std::uint64_t kInterleaverTag = 0x696e746c76ull;

Bits random_bits(std::size_t count, std::uint64_t seed) {
    auto rng = make_rng(seed, Stream::payload);
    Bits out(count);
    std::uint32_t word = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (i % 32 == 0) word = rng();
        out[i] = static_cast<std::uint8_t>((word >> (i % 32)) & 1u);
    }
    return out;
}

std::uint64_t count_errors(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    std::uint64_t e = 0;
    for (std::size_t i = 0; i < a.size(); ++i) e += (a[i] != b[i]);
    return e;
}

struct FrameOutcome {
    std::uint64_t bits = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t frames = 0;
    std::uint64_t frame_errors = 0;
    std::uint64_t multiplies = 0;
};

// Immutable per-campaign context shared by the workers.
struct Campaign {
    const SimSpec& spec;
    FrameConfig cfg;
    QamAlphabet alphabet;
    std::optional<ChannelModel> fixed_channel;
    std::shared_ptr<const LdpcCode> code;
    std::shared_ptr<const Interleaver> interleaver;

    explicit Campaign(const SimSpec& s)
        : spec(s), cfg(s.M, s.N, s.l_max, s.delta_f), alphabet(s.qam) {
        if (s.channel != "eva") fixed_channel = load_channel_json(s.channel, cfg);
        bool coded = false;
        for (const auto& d : s.detectors) coded = coded || is_coded(parse_detector(d).kind);
        if (coded) {
            code = std::make_shared<LdpcCode>(LdpcCode::load(s.ldpc));
            codewords_per_frame(cfg, alphabet, *code);
            interleaver = std::make_shared<Interleaver>(cfg.payload_symbols() * alphabet.bits_per_symbol(),
                                                        derive_seed(s.seed, kInterleaverTag));
        }
    }

    ChannelModel channel(std::uint64_t seed) const {
        if (fixed_channel) return *fixed_channel;
        return generate_eva(cfg, EvaOptions{spec.speed_kmh, spec.doppler_cap, spec.carrier_hz}, seed);
    }

    FrameOutcome run_frame(const DetectorSpec& det, double sigma, std::uint64_t seed) const {
        const ChannelModel model = channel(seed);
        FrameOutcome out;
        const unsigned bps = alphabet.bits_per_symbol();

        if (det.kind == DetectorKind::ofdm_mmse) {
            const Bits bits = random_bits(cfg.M() * cfg.N() * bps, seed);
            const OfdmResult r = ofdm_mmse_baseline(bits, model, cfg, alphabet, sigma, seed);
            out.bits = bits.size();
            out.bit_errors = count_errors(bits, r.bits);
            out.frames = 1;
            out.frame_errors = out.bit_errors > 0;
            return out;
        }

        const DopplerSpreadTable table(model, cfg);
        DetectorConfig dc;
        dc.sigma_w = sigma;
        dc.epsilon = spec.epsilon;

        if (is_coded(det.kind)) {
            const std::size_t words = codewords_per_frame(cfg, alphabet, *code);
            const Bits info = random_bits(words * code->k(), seed);
            const DelayDopplerGrid X = encode_frame(info, *code, *interleaver, alphabet, cfg);
            const DelayDopplerGrid Y = apply_channel(X, table, sigma, seed);
            dc.init = InitMode::tf_mmse;
            CodedFrameResult r;
            if (det.kind == DetectorKind::coded_mrc) {
                dc.iterations = det.iterations >= 0 ? det.iterations : spec.S;
                r = coded_detect(Y, table, alphabet, *code, *interleaver, dc, spec.decoder_iterations);
            } else {
                TurboConfig tc;
                tc.detector = dc;
                tc.n_turbo = det.iterations >= 0 ? det.iterations : spec.n_turbo;
                tc.restart_from_scratch = spec.turbo_restart;
                tc.decoder_iterations = spec.decoder_iterations;
                r = turbo_detect(Y, table, alphabet, *code, *interleaver, tc);
            }
            out.bits = info.size();
            out.frames = words;
            for (std::size_t w = 0; w < words; ++w) {
                const auto k = code->k();
                const std::uint64_t e = count_errors(std::span(info).subspan(w * k, k),
                                                     std::span(r.info_bits).subspan(w * k, k));
                out.bit_errors += e;
                out.frame_errors += e > 0;
            }
            out.multiplies = r.counters.iterative;
            return out;
        }

        const Bits bits = random_bits(cfg.payload_symbols() * bps, seed);
        const DelayDopplerGrid X = map_to_grid(qam_modulate(bits, alphabet), cfg);
        const DelayDopplerGrid Y = apply_channel(X, table, sigma, seed);
        std::vector<std::uint32_t> symbols;
        if (det.kind == DetectorKind::mmse_tf_only) {
            const DelayDopplerGrid est = mmse_tf_estimate(Y, ideal_dd_channel(table), sigma, cfg.l_max());
            symbols = slice_indices(est.entries().first(cfg.payload_symbols()), alphabet);
        } else {
            dc.iterations = det.iterations >= 0 ? det.iterations : spec.S;
            dc.init = det.kind == DetectorKind::mrc ? InitMode::zero : InitMode::tf_mmse;
            const DetectorState s = detect(Y, table, alphabet, dc);
            symbols = s.symbols;
            out.multiplies = s.counters.iterative;
        }
        const Bits rx = qam_demodulate(symbols, alphabet);
        out.bits = bits.size();
        out.bit_errors = count_errors(bits, rx);
        out.frames = 1;
        out.frame_errors = out.bit_errors > 0;
        return out;
    }
};

void run_batch(const Campaign& c, const DetectorSpec& det, double sigma, std::size_t snr_index,
               std::uint64_t first, std::vector<FrameOutcome>& results, unsigned threads) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= results.size()) return;
            try {
                results[i] = c.run_frame(det, sigma, derive_seed(c.spec.seed, snr_index, first + i));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = results.size();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(results.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

DetectorSpec parse_detector(std::string_view text) {
    DetectorSpec d;
    d.label = std::string(text);
    std::string_view name = text;
    if (const auto colon = text.find(':'); colon != std::string_view::npos) {
        name = text.substr(0, colon);
        const std::string iters(text.substr(colon + 1));
        std::size_t used = 0;
        int v = -1;
        try {
            v = std::stoi(iters, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != iters.size() || v < 0)
            throw std::invalid_argument("detector '" + std::string(text) + "': bad iteration count");
        d.iterations = v;
    }
    static const std::pair<const char*, DetectorKind> names[] = {
        {"mrc", DetectorKind::mrc},           {"mrc_init", DetectorKind::mrc_init},
        {"mmse_tf_only", DetectorKind::mmse_tf_only}, {"ofdm_mmse", DetectorKind::ofdm_mmse},
        {"coded_mrc", DetectorKind::coded_mrc}, {"turbo_mrc", DetectorKind::turbo_mrc}};
    for (const auto& [n, k] : names) {
        if (name == n) {
            d.kind = k;
            if (d.iterations >= 0 && (k == DetectorKind::mmse_tf_only || k == DetectorKind::ofdm_mmse))
                throw std::invalid_argument("detector '" + std::string(text) + "' takes no iteration count");
            return d;
        }
    }
    throw std::invalid_argument("unknown detector '" + std::string(name) + "'");
}

bool is_coded(DetectorKind k) { return k == DetectorKind::coded_mrc || k == DetectorKind::turbo_mrc; }

void SimSpec::validate() const {
    FrameConfig(M, N, l_max, delta_f);
    QamAlphabet{qam};
    if (snr_db.empty()) throw std::invalid_argument("SNR list is empty");
    if (detectors.empty()) throw std::invalid_argument("detector list is empty");
    for (const auto& d : detectors) {
        const auto spec = parse_detector(d);
        if (is_coded(spec.kind) && ldpc.empty())
            throw std::invalid_argument("detector " + d + " needs an LDPC code (ldpc)");
    }
    if (S < 0) throw std::invalid_argument("S must be non-negative");
    if (n_turbo < 1) throw std::invalid_argument("n_turbo must be at least 1");
    if (stop.frames == 0 && (stop.errors == 0 || stop.max_bits == 0))
        throw std::invalid_argument("stop rule needs a positive error target and bit budget");
    if (stop.batch == 0 || stop.max_frames == 0) throw std::invalid_argument("stop rule batch and max_frames must be positive");
    if (doppler_cap < 0 || static_cast<std::size_t>(doppler_cap) >= N / 2)
        throw std::invalid_argument("doppler_cap must lie in [0, N/2)");
    if (epsilon < 0.0) throw std::invalid_argument("epsilon must be non-negative");
}

SimSpec spec_from_json(const nlohmann::json& j) {
    SimSpec s;
    auto take = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    take("M", s.M);
    take("N", s.N);
    take("l_max", s.l_max);
    take("delta_f", s.delta_f);
    take("channel", s.channel);
    take("speed_kmh", s.speed_kmh);
    take("doppler_cap", s.doppler_cap);
    take("carrier_hz", s.carrier_hz);
    take("qam", s.qam);
    take("snr_db", s.snr_db);
    take("detectors", s.detectors);
    take("S", s.S);
    take("n_turbo", s.n_turbo);
    take("seed", s.seed);
    take("threads", s.threads);
    take("ldpc", s.ldpc);
    take("epsilon", s.epsilon);
    take("turbo_restart", s.turbo_restart);
    take("decoder_iterations", s.decoder_iterations);
    if (j.contains("stop")) {
        const auto& st = j.at("stop");
        auto stake = [&](const char* key, auto& field) {
            if (st.contains(key)) st.at(key).get_to(field);
        };
        stake("frames", s.stop.frames);
        stake("errors", s.stop.errors);
        stake("max_bits", s.stop.max_bits);
        stake("min_frames", s.stop.min_frames);
        stake("max_frames", s.stop.max_frames);
        stake("batch", s.stop.batch);
        if (st.contains("unit")) {
            const auto unit = st.at("unit").get<std::string>();
            if (unit != "frame" && unit != "bit") throw std::invalid_argument("stop.unit must be frame or bit");
            s.stop.count_bit_errors = unit == "bit";
        }
    }
    return s;
}

nlohmann::json spec_to_json(const SimSpec& s) {
    nlohmann::json j;
    j["M"] = s.M;
    j["N"] = s.N;
    j["l_max"] = s.l_max;
    j["delta_f"] = s.delta_f;
    j["channel"] = s.channel;
    j["speed_kmh"] = s.speed_kmh;
    j["doppler_cap"] = s.doppler_cap;
    j["carrier_hz"] = s.carrier_hz;
    j["qam"] = s.qam;
    j["snr_db"] = s.snr_db;
    j["detectors"] = s.detectors;
    j["S"] = s.S;
    j["n_turbo"] = s.n_turbo;
    j["seed"] = s.seed;
    j["threads"] = s.threads;
    j["ldpc"] = s.ldpc;
    j["epsilon"] = s.epsilon;
    j["turbo_restart"] = s.turbo_restart;
    j["decoder_iterations"] = s.decoder_iterations;
    j["stop"] = {{"frames", s.stop.frames},       {"errors", s.stop.errors},
                 {"unit", s.stop.count_bit_errors ? "bit" : "frame"},
                 {"max_bits", s.stop.max_bits},   {"min_frames", s.stop.min_frames},
                 {"max_frames", s.stop.max_frames}, {"batch", s.stop.batch}};
    return j;
}

double sigma_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 20.0); }

std::vector<MetricRecord> run_campaign(const SimSpec& spec, const ProgressFn& progress) {
    spec.validate();
    const Campaign campaign(spec);
    std::vector<DetectorSpec> detectors;
    for (const auto& d : spec.detectors) detectors.push_back(parse_detector(d));

    std::vector<MetricRecord> records;
    for (std::size_t si = 0; si < spec.snr_db.size(); ++si) {
        const double sigma = sigma_from_snr_db(spec.snr_db[si]);
        for (const auto& det : detectors) {
            const auto t0 = std::chrono::steady_clock::now();
            MetricRecord rec;
            rec.snr_db = spec.snr_db[si];
            rec.detector = det.label;
            std::uint64_t run = 0;
            bool first = true;
            const auto& st = spec.stop;
            auto done = [&] {
                if (st.frames > 0) return run >= st.frames;
                if (run < st.min_frames) return false;
                if (run >= st.max_frames) return true;
                const std::uint64_t events = st.count_bit_errors ? rec.bit_errors : rec.frame_errors;
                return events >= st.errors || rec.bits >= st.max_bits;
            };
            while (!done()) {
                std::uint64_t count = st.batch;
                if (st.frames > 0) count = std::min(count, st.frames - run);
                else count = std::min(count, st.max_frames - run);
                std::vector<FrameOutcome> outcomes(count);
                run_batch(campaign, det, sigma, si, run, outcomes, spec.threads);
                for (const auto& o : outcomes) {
                    rec.bits += o.bits;
                    rec.bit_errors += o.bit_errors;
                    rec.frames += o.frames;
                    rec.frame_errors += o.frame_errors;
                    if (first) rec.multiplies_per_frame = o.multiplies;
                    first = false;
                }
                run += count;
            }
            rec.ber = rec.bits ? static_cast<double>(rec.bit_errors) / static_cast<double>(rec.bits) : 0.0;
            rec.fer = rec.frames ? static_cast<double>(rec.frame_errors) / static_cast<double>(rec.frames) : 0.0;
            rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (progress) progress(rec);
            records.push_back(std::move(rec));
        }
    }
    return records;
}

std::string to_csv(const std::vector<MetricRecord>& records, bool with_timing) {
    if (records.empty()) throw std::invalid_argument("to_csv: no records");
    std::ostringstream os;
    os << "snr_db,detector,bits,bit_errors,frames,frame_errors,ber,fer,multiplies_per_frame";
    if (with_timing) os << ",wall_time_s";
    os << '\n';
    for (const auto& r : records) {
        os << format_double(r.snr_db) << ',' << r.detector << ',' << r.bits << ',' << r.bit_errors << ','
           << r.frames << ',' << r.frame_errors << ',' << format_double(r.ber) << ',' << format_double(r.fer) << ','
           << r.multiplies_per_frame;
        if (with_timing) os << ',' << format_double(r.wall_time_s);
        os << '\n';
    }
    return os.str();
}

void emit_csv(const std::vector<MetricRecord>& records, const std::filesystem::path& path, bool with_timing) {
    const std::string text = to_csv(records, with_timing);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<MetricRecord> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("parse_csv: missing header");
    const bool timing = line.find(",wall_time_s") != std::string::npos;
    std::vector<MetricRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != (timing ? 10u : 9u)) throw std::runtime_error("parse_csv: bad row '" + line + "'");
        MetricRecord r;
        r.snr_db = std::stod(f[0]);
        r.detector = f[1];
        r.bits = std::stoull(f[2]);
        r.bit_errors = std::stoull(f[3]);
        r.frames = std::stoull(f[4]);
        r.frame_errors = std::stoull(f[5]);
        r.ber = std::stod(f[6]);
        r.fer = std::stod(f[7]);
        r.multiplies_per_frame = std::stoull(f[8]);
        if (timing) r.wall_time_s = std::stod(f[9]);
        out.push_back(std::move(r));
    }
    return out;
}

ComplexityReport measure_complexity(const SimSpec& spec) {
    const FrameConfig cfg(spec.M, spec.N, spec.l_max, spec.delta_f);
    const QamAlphabet alphabet(spec.qam);
    const std::uint64_t seed = derive_seed(spec.seed, 0, 0);
    const ChannelModel model = spec.channel == "eva"
                                   ? generate_eva(cfg, EvaOptions{spec.speed_kmh, spec.doppler_cap, spec.carrier_hz}, seed)
                                   : load_channel_json(spec.channel, cfg);
    const DopplerSpreadTable table(model, cfg);
    const Bits bits = random_bits(cfg.payload_symbols() * alphabet.bits_per_symbol(), seed);
    const double sigma = sigma_from_snr_db(spec.snr_db.empty() ? 20.0 : spec.snr_db.front());
    const DelayDopplerGrid Y = apply_channel(map_to_grid(qam_modulate(bits, alphabet), cfg), table, sigma, seed);

    DetectorConfig dc;
    dc.iterations = spec.S;
    dc.init = InitMode::tf_mmse;
    dc.sigma_w = sigma;
    dc.epsilon = spec.epsilon;
    const DetectorState s = detect(Y, table, alphabet, dc);

    ComplexityReport rep;
    rep.L = table.num_delays();
    rep.S = spec.S;
    rep.measured = s.counters;
    rep.expected = complexity_terms(cfg, rep.L, spec.S);
    return rep;
}

std::filesystem::path default_ldpc_path(std::size_t n) {
    return std::filesystem::path(OTFS_DATA_DIR) / "ldpc" / ("peg_n" + std::to_string(n) + "_r12.alist");
}

}  // namespace otfs

#include "qoe/cli/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "qoe/error.hpp"
#include "qoe/random.hpp"

namespace qoe::cli {
namespace {

constexpr std::array<double, 8> kLadder = {0.35, 0.75, 1.2, 1.85, 2.85, 4.3, 6.0, 8.0};
constexpr std::array<double, 5> kFrameRates = {24, 25, 30, 50, 60};

double round_to(double v, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::round(v * scale) / scale;
}

std::string numbered(char prefix, std::size_t i, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, i);
    return buf;
}

struct Content {
    std::string id;
    double ti;
    double si;
};

}  // namespace

double synthetic_mos_mean(const dataset::SessionRecord& s) {
    const double complexity = (s.ti + s.si) / 200.0;
    const double mean_rate = std::accumulate(s.segment_bitrates.begin(), s.segment_bitrates.end(), 0.0) /
                             static_cast<double>(s.segment_bitrates.size());
    const double last = s.segment_bitrates.back();
    const double stall_total = std::accumulate(s.intermediate_stalls.begin(), s.intermediate_stalls.end(), 0.0);
    const double stalls = static_cast<double>(s.intermediate_stalls.size());

    const double quality = 1.0 - std::exp(-mean_rate / (0.6 + 2.4 * complexity));
    const double ending = 1.0 - std::exp(-last / (0.8 + 2.0 * complexity));
    return 18.0 + 62.0 * quality + 12.0 * ending + 2.0 * dataset::index_slope(s.segment_bitrates) -
           3.0 * stalls - 1.8 * stall_total - 1.5 * s.initial_stall_s + 0.05 * (s.fps - 30.0);
}

std::vector<dataset::SessionRecord> synthesize(const SynthParams& p) {
    if (p.g0_count == 0 || p.g0_count >= p.n) throw ConfigError("synthetic g0_count must lie in (0, n)");
    if (p.contents < 2) throw ConfigError("synthetic data needs at least two contents");
    if (!(p.noise_sd >= 0.0)) throw ConfigError("synthetic noise_sd must be non-negative");

    Rng rng(p.seed);
    const double share = static_cast<double>(p.g0_count) / static_cast<double>(p.n);
    const auto low_contents = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(share * static_cast<double>(p.contents))), 1, p.contents - 1);

    std::vector<Content> contents;
    for (std::size_t c = 0; c < p.contents; ++c) {
        const bool low = c < low_contents;
        const double ti = low ? rng.uniform(15.0, 75.0) : rng.uniform(88.0, 120.0);
        const double si = low ? rng.uniform(20.0, 80.0) : rng.uniform(88.0, 140.0);
        contents.push_back({numbered('c', c + 1, 2), round_to(ti, 1), round_to(si, 1)});
    }

    std::vector<dataset::SessionRecord> sessions;
    sessions.reserve(p.n);
    for (std::size_t i = 0; i < p.n; ++i) {
        const bool low = i < p.g0_count;
        const std::size_t k = low ? i : i - p.g0_count;
        const Content& content = low ? contents[k % low_contents]
                                     : contents[low_contents + k % (p.contents - low_contents)];

        dataset::SessionRecord s;
        s.content_id = content.id;
        s.ti = content.ti;
        s.si = content.si;
        s.fps = kFrameRates[rng.index(kFrameRates.size())];

        const std::size_t segments = 10 + rng.index(21);
        auto level = static_cast<std::ptrdiff_t>(rng.index(kLadder.size()));
        for (std::size_t t = 0; t < segments; ++t) {
            const double u = rng.uniform01();
            if (u < 0.2) --level;
            if (u > 0.8) ++level;
            level = std::clamp<std::ptrdiff_t>(level, 0, kLadder.size() - 1);
            s.segment_bitrates.push_back(kLadder[static_cast<std::size_t>(level)]);
        }

        s.initial_stall_s = rng.uniform01() < 0.5 ? 0.0 : round_to(rng.uniform(0.2, 6.0), 3);
        const std::size_t stalls = rng.uniform01() < 0.45 ? 0 : 1 + rng.index(4);
        for (std::size_t j = 0; j < stalls; ++j) s.intermediate_stalls.push_back(round_to(rng.uniform(0.5, 8.0), 3));

        const double mos = synthetic_mos_mean(s) + p.noise_sd * rng.normal();
        s.mos = round_to(std::clamp(mos, 0.0, 100.0), 2);
        sessions.push_back(std::move(s));
    }

    std::vector<std::size_t> order(p.n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<dataset::SessionRecord> shuffled;
    shuffled.reserve(p.n);
    for (std::size_t i = 0; i < p.n; ++i) {
        shuffled.push_back(std::move(sessions[order[i]]));
        shuffled.back().session_id = numbered('s', i + 1, 4);
    }
    return shuffled;
}

}  // namespace qoe::cli

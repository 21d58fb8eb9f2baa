#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qoe/cli/commands.hpp"
#include "qoe/cli/config.hpp"
#include "qoe/cli/run.hpp"
#include "qoe/cli/synth.hpp"
#include "qoe/dataset/dataset.hpp"
#include "qoe/dataset/session.hpp"
#include "qoe/error.hpp"

using namespace qoe;
using namespace qoe::cli;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = "seed = 5\ndataset = \"data.csv\"\noutput_dir = \"out\"\n";

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("qoe_unit_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string small_config(const fs::path& data, const fs::path& out, int repetitions) {
    std::ostringstream s;
    s << "seed = 11\nrepetitions = " << repetitions << "\n"
      << "dataset = \"" << data.generic_string() << "\"\n"
      << "output_dir = \"" << out.generic_string() << "\"\n"
      << "[stacking]\npairs = [\"gbt:gbt\", \"model_tree:mlp\"]\n"
      << "[analysis]\nshap_rows = 20\n"
      << "[hyperparameters.gbt]\nn_rounds = 60\nlearning_rate = 0.05\n"
      << "[hyperparameters.mlp]\nepochs = 10\n";
    return s.str();
}

}  // namespace

TEST_CASE("config defaults and path resolution") {
    const auto cfg = parse_config(kMinimal, {}, "/base");
    CHECK(cfg.seed == 5);
    CHECK(cfg.dataset == fs::path("/base/data.csv"));
    CHECK(cfg.repetitions == 100);
    CHECK(cfg.train_fraction == 0.7);
    CHECK(cfg.split.ti_threshold == 85.0);
    CHECK(cfg.base.projection == dataset::Projection::kGenericOnly);
    CHECK(cfg.stacking.pairs.size() == 9);
    CHECK(cfg.analysis.ks_alpha == 0.01);
    CHECK(cfg.spec_for(learners::Algorithm::kGbt, 1).get("n_rounds") == 2000);
}

TEST_CASE("config rejects missing seed and unknown keys") {
    CHECK_THROWS_AS(parse_config("dataset = \"d.csv\"\noutput_dir = \"o\"\n", {}, "."), ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "colour = 3\n", {}, "."), ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[split]\nmode = \"diagonal\"\n", {}, "."), ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[hyperparameters.gbt]\ndepth = 3\n", {}, "."), ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[hyperparameters.mlp]\ndropout = 2.0\n", {}, "."),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("seed = = 1", {}, "."), ConfigError);
}

TEST_CASE("overrides replace file values") {
    const auto cfg = parse_config(kMinimal, {"repetitions=3", "split.mode=random", "hyperparameters.gbt.max_depth=2",
                                             "local.algorithm=mlp"},
                                  ".");
    CHECK(cfg.repetitions == 3);
    CHECK(cfg.split.mode == SplitMode::kRandom);
    CHECK(cfg.spec_for(learners::Algorithm::kGbt, 0).get("max_depth") == 2);
    CHECK(cfg.local.algorithm == learners::Algorithm::kMlp);
    CHECK_THROWS_AS(parse_config(kMinimal, {"no_equals_sign"}, "."), ConfigError);
}

TEST_CASE("stacking pairs parse as base:local") {
    const auto cfg = parse_config(std::string(kMinimal) + "[stacking]\npairs = [\"mlp:gbt\"]\n", {}, ".");
    REQUIRE(cfg.stacking.pairs.size() == 1);
    CHECK(cfg.stacking.pairs[0].first == learners::Algorithm::kMlp);
    CHECK(cfg.stacking.pairs[0].second == learners::Algorithm::kGbt);
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[stacking]\npairs = [\"mlp\"]\n", {}, "."), ConfigError);
}

TEST_CASE("synthetic sessions follow the requested content split") {
    SynthParams p;
    p.seed = 3;
    const auto sessions = synthesize(p);
    REQUIRE(sessions.size() == 450);
    const auto d = dataset::extract_dataset(sessions, "synth");
    const auto split = dataset::content_split(d, 85, 85);
    CHECK(split.g0.size() == 353);
    CHECK(split.g1.size() == 97);
    for (const auto& s : sessions) CHECK_NOTHROW(dataset::validate(s));

    std::ostringstream a, b;
    dataset::write_sessions(a, sessions);
    dataset::write_sessions(b, synthesize(p));
    CHECK(a.str() == b.str());
    p.seed = 4;
    std::ostringstream c;
    dataset::write_sessions(c, synthesize(p));
    CHECK(a.str() != c.str());
}

TEST_CASE("synthetic MOS falls as stalls grow") {
    dataset::SessionRecord s;
    s.ti = 40;
    s.si = 50;
    s.fps = 30;
    s.segment_bitrates = {2.0, 3.0, 3.0};
    double previous = synthetic_mos_mean(s);
    for (int k = 1; k <= 5; ++k) {
        s.intermediate_stalls.push_back(1.0);
        const double now = synthetic_mos_mean(s);
        CHECK(now < previous);
        previous = now;
    }
}

TEST_CASE("synthesizer rejects impossible group sizes") {
    SynthParams p;
    p.g0_count = 0;
    CHECK_THROWS_AS(synthesize(p), ConfigError);
    p.g0_count = 450;
    CHECK_THROWS_AS(synthesize(p), ConfigError);
    p.g0_count = 10;
    p.contents = 1;
    CHECK_THROWS_AS(synthesize(p), ConfigError);
}

TEST_CASE("exit codes follow the innermost classified error") {
    CHECK(exit_code_for(ConfigError("x")) == kExitConfig);
    CHECK(exit_code_for(ParseError(4, "bad")) == kExitData);
    CHECK(exit_code_for(DivergenceError(3, 0.1)) == kExitDivergence);
    CHECK(exit_code_for(TransferError("x")) == kExitTransfer);
    CHECK(exit_code_for(std::runtime_error("x")) == kExitFailure);
    try {
        try {
            throw DivergenceError(7, 0.5);
        } catch (...) {
            std::throw_with_nested(Error("stage 'fit' failed"));
        }
    } catch (const std::exception& e) {
        CHECK(exit_code_for(e) == kExitDivergence);
        const auto text = describe(e);
        CHECK(text.find("stage 'fit' failed") != std::string::npos);
        CHECK(text.find("epoch 7") != std::string::npos);
    }
}

TEST_CASE("a single repetition reports n/a intervals") {
    const auto dir = scratch("single");
    SynthParams p;
    p.n = 120;
    p.g0_count = 90;
    p.seed = 8;
    std::ofstream(dir / "data.csv") << [&] {
        std::ostringstream s;
        dataset::write_sessions(s, synthesize(p));
        return s.str();
    }();
    const auto cfg = parse_config(small_config(dir / "data.csv", dir / "out", 1), {}, dir);
    const auto report = run_experiment(cfg);
    for (const auto& f : kReportFiles) CHECK(fs::exists(dir / "out" / f));
    CHECK(report["table3"][0]["scores"]["r2"]["ci_half_width"].is_null());
    CHECK(report["table3"][0]["scores"]["r2"]["mean"].is_number());
    CHECK(slurp(dir / "out" / "table3.csv").find("n/a") != std::string::npos);
    CHECK(report["stacking_checks"]["all_passed"] == true);
    CHECK_FALSE(fs::exists(dir / "out.partial"));
    fs::remove_all(dir);
}

TEST_CASE("a failed run leaves no report behind") {
    const auto dir = scratch("failed");
    SynthParams p;
    p.n = 60;
    p.g0_count = 40;
    p.seed = 9;
    {
        std::ofstream out(dir / "data.csv");
        dataset::write_sessions(out, synthesize(p));
    }
    const auto cfg =
        parse_config(small_config(dir / "data.csv", dir / "out", 2), {"split.ti_threshold=1000", "split.si_threshold=1000"}, dir);
    CHECK_THROWS(run_experiment(cfg));
    CHECK_FALSE(fs::exists(dir / "out"));
    CHECK_FALSE(fs::exists(dir / "out.partial"));
    fs::remove_all(dir);
}

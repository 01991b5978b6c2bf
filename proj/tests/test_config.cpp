#include <doctest.h>

#include <string>

#include "dpgm/config.hpp"
#include "dpgm/errors.hpp"

using namespace dpgm;

namespace {

const char* kBase = R"cfg(
name = "demo"

[experiment]
runs = 7
master_seed = 42

[scenario]
nodes = 6
dim = 3
horizon = 20

[topology]
kinds = [star, "circulant(2)", random(edges=9)]

[[solver]]
algorithm = [dpgm, pg-extra]
alpha = [0.1, auto]
inner_steps = [1, 5]

[[solver]]
algorithm = nids
alpha = 0.3

[[noise]]
id = exact

[[noise]]
id = state   # trailing comment
state_variance = 1e-4
)cfg";

std::string error_of(const std::string& text) {
    try {
        build_experiment_config(parse_config_text(text, "t.toml"));
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("config: full document expands grid axes") {
    auto cfg = build_experiment_config(parse_config_text(kBase, "t.toml"));
    CHECK(cfg.name == "demo");
    CHECK(cfg.runs == 7);
    CHECK(cfg.master_seed == 42);
    CHECK(cfg.nodes == 6);
    CHECK(cfg.scenario.dim == 3);
    CHECK(cfg.scenario.rows_per_node == 6);
    CHECK(cfg.scenario.horizon == 20);
    REQUIRE(cfg.topologies.size() == 3);
    CHECK(cfg.topologies[1].kind == TopologyKind::Circulant);
    CHECK(cfg.topologies[1].degree == 2);
    CHECK(cfg.topologies[2].target_edges == 9);
    REQUIRE(cfg.solvers.size() == 9);
    CHECK(cfg.solvers[0].algorithm == Algorithm::DPGM);
    CHECK(cfg.solvers[0].alpha == 0.1);
    CHECK(cfg.solvers[1].inner_steps == 5);
    CHECK_FALSE(cfg.solvers[2].alpha.has_value());
    CHECK(cfg.solvers[4].algorithm == Algorithm::PG_EXTRA);
    CHECK(cfg.solvers[8].algorithm == Algorithm::NIDS);
    REQUIRE(cfg.noises.size() == 2);
    CHECK(cfg.noises[0].model(4).exact());
    CHECK(cfg.noises[1].state_variance == doctest::Approx(1e-4));
    CHECK(cfg.noises[1].model(4).state.has_value());
    CHECK_FALSE(cfg.noises[1].model(4).gradient.has_value());
}

TEST_CASE("config: defaults") {
    auto cfg = build_experiment_config(parse_config_text("[topology]\nkinds = circle\n[[solver]]\nalgorithm = dpgm\n"));
    CHECK(cfg.runs == 100);
    CHECK(cfg.noises.size() == 1);
    CHECK(cfg.noises[0].model(3).exact());
    CHECK(cfg.solvers.size() == 1);
    CHECK(cfg.solvers[0].inner_steps == 1);
}

TEST_CASE("config: diagnostics carry line and field") {
    CHECK(error_of("[topology]\nkinds = circle\n[[solver]]\nalgorithm = dpgm\n[experiment]\nruns = 0\n")
              .find("t.toml:6: field 'experiment.runs'") != std::string::npos);
    CHECK(error_of("[topology]\nkinds = circle\n[[solver]]\nalgorithm = bogus\n").find("t.toml:4") !=
          std::string::npos);
    CHECK(error_of("[topology]\nkinds = circle\n[[solver]]\nalgorithm = dpgm\nalpha = -1\n")
              .find("solver.alpha") != std::string::npos);
    CHECK(error_of("[topology]\nkinds = circle\n[[solver]]\nalgorithm = dpgm\ncolour = red\n")
              .find("t.toml:5: unknown field 'solver.colour'") != std::string::npos);
    CHECK(error_of("[topology\n").find("t.toml:1: malformed section header") != std::string::npos);
    CHECK(error_of("[bogus]\n").find("unknown section") != std::string::npos);
    CHECK(error_of("just words\n").find("t.toml:1: expected key = value") != std::string::npos);
    CHECK(error_of("a = 1\na = 2\n").find("t.toml:2: duplicate key") != std::string::npos);
    CHECK(error_of("x = [1, 2\n").find("unterminated list") != std::string::npos);
    CHECK(error_of("[[solver]]\nalgorithm = dpgm\n").find("topology.kinds") != std::string::npos);
    CHECK(error_of("[topology]\nkinds = circle\n").find("[[solver]]") != std::string::npos);
    CHECK(error_of("[topology]\nkinds = wheel\n[[solver]]\nalgorithm = dpgm\n").find("topology.kinds") !=
          std::string::npos);
    CHECK(error_of("[scenario]\ndim = 4\nrows_per_node = 2\n").find("rows_per_node") != std::string::npos);
    CHECK(error_of("[experiment]\nbounds = 3\n").find("expected true or false") != std::string::npos);
    CHECK(error_of("[experiment]\nruns = 2.5\n").find("expected an integer") != std::string::npos);
}

TEST_CASE("config: missing file") {
    CHECK_THROWS_AS(load_experiment_config("/nonexistent/path.toml"), ConfigError);
}

// kawactl: scenario-driven front end for the Kawahara solve/control library.
//
// Exit codes: 0 success, 1 mode check failed, 2 validation error,
// 3 solver breakdown, 4 fixed-point divergence.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "kawahara/kawahara.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Kawahara initial-boundary-value solver and moment-matching control synthesis"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir;
    long long seed_override = -1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
        cmd->add_option("--out", out_dir, "output directory (overrides scenario)");
        cmd->add_option("--seed", seed_override, "seed override for randomized checks");
    };

    CLI::App* c_solve = app.add_subcommand("solve", "run the initial-boundary-value solver");
    CLI::App* c_cb = app.add_subcommand("control-boundary", "synthesize the boundary control");
    CLI::App* c_ci = app.add_subcommand("control-internal", "synthesize the internal control");
    CLI::App* c_verify = app.add_subcommand("verify", "run the property suite");
    CLI::App* c_conv = app.add_subcommand("convergence", "run a manufactured convergence study");
    for (CLI::App* c : {c_solve, c_cb, c_ci, c_verify, c_conv}) add_common(c);

    CLI11_PARSE(app, argc, argv);

    const std::string mode = app.get_subcommands().front()->get_name();
    try {
        kawahara::Scenario s = kawahara::parse_scenario(scenario_path);
        if (s.mode != mode) {
            std::cerr << "scenario mode '" << s.mode << "' does not match subcommand '" << mode
                      << "'\n";
            return 2;
        }
        if (seed_override >= 0) s.seed = static_cast<uint64_t>(seed_override);
        const kawahara::RunRecord rec = kawahara::run(s, out_dir);
        std::cout << rec.summary.dump(2) << "\n";
        std::cout << "artifacts in " << rec.output_dir << " (" << rec.wall_seconds << " s)\n";
        return rec.exit_code;
    } catch (const kawahara::validation_error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const kawahara::precondition_error& e) {
        std::cerr << "precondition violated: " << e.what() << "\n";
        return 2;
    } catch (const kawahara::config_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const kawahara::argument_error& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    } catch (const kawahara::divergence_error& e) {
        std::cerr << "fixed-point divergence: " << e.what() << "\n";
        return 4;
    } catch (const kawahara::nonconvergence_error& e) {
        std::cerr << "solver nonconvergence: " << e.what() << "\n";
        return 3;
    } catch (const kawahara::singular_matrix_error& e) {
        std::cerr << "singular system: " << e.what() << "\n";
        return 3;
    } catch (const kawahara::solver_breakdown_error& e) {
        std::cerr << "solver breakdown: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

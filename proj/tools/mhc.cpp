#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mhc/config.hpp"
#include "mhc/error.hpp"
#include "mhc/run.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

int main(int argc, char** argv)
{
    CLI::App app{"Principal-multi-agent contract solver"};
    std::string config_path;
    mhc::RunOptions opts;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "configuration file (JSON)")->required();
    app.add_option("--mode", opts.mode, "equilibrium | solve | simulate | audit");
    app.add_option("--out", opts.out_dir, "output directory (default: $MHC_OUT_DIR or ./mhc_out)");
    app.add_option("--seed", seed, "simulation seed, overrides the config");
    app.add_option("--threads", opts.threads, "worker threads (0: all available)")->check(CLI::NonNegativeNumber);
    app.set_version_flag("--version", MHC_VERSION);
    CLI11_PARSE(app, argc, argv);
    opts.seed = seed;

#if defined(_OPENMP)
    if (opts.threads > 0) omp_set_num_threads(opts.threads);
#endif

    try {
        const auto config = mhc::load_config(config_path);
        return mhc::run(config, opts, std::cout);
    } catch (const mhc::Error& e) {
        std::cerr << mhc::error_record(mhc::to_string(e.kind()), e.what()) << '\n';
        return mhc::kExitError;
    } catch (const std::exception& e) {
        std::cerr << mhc::error_record("internal", e.what()) << '\n';
        return mhc::kExitError;
    }
}

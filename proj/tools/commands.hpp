#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace c3bf::cli {

// Exit-code contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUnsafe = 2;   // collision verdict or aborted run
inline constexpr int kExitInvalid = 3;  // malformed input, failed validation, bad usage

struct Overrides {
    std::optional<double> dt;
    std::optional<double> duration;
    std::optional<double> gamma;
};

struct SimulateOptions {
    std::filesystem::path scenario;
    std::filesystem::path out_dir;
    Overrides overrides;
    std::optional<std::string> plot_mode;  // writes plot.svg when set
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_batch(const std::filesystem::path& dir, const std::filesystem::path& out_dir, const Overrides& overrides,
              std::ostream& out, std::ostream& err);
int cmd_plot(const std::filesystem::path& csv, const std::filesystem::path& svg, const std::string& mode,
             std::ostream& err);
int cmd_validate(const std::filesystem::path& scenario, std::ostream& out, std::ostream& err);

/// Full command line front end. Never returns a code outside {0, 2, 3}.
int run(int argc, char** argv);

}  // namespace c3bf::cli

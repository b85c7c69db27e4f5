#ifndef TORSIONLAB_TOOLS_CLI_HPP
#define TORSIONLAB_TOOLS_CLI_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace torsionlab::cli {

struct JobSpec {
    std::string command;  // torsion, hodge, glue-check, ses-check, lueck, duality-check, product
    std::vector<std::string> inputs;
    std::optional<double> tol;
    std::optional<double> rank_tol;
    bool json = false;
    std::uint64_t seed = 1;
    int random = 0;  // > 0: run a seeded random suite instead of reading inputs
    std::string levels = "2..4096";
    std::optional<int> degree;
    std::optional<std::string> op;  // lueck: Laurent polynomial given inline
};

struct Outcome {
    int exit_code = 0;  // 0 ok, 1 numerical failure, 2 validation error
    std::string out;
    std::string err;
};

[[nodiscard]] const std::vector<std::string>& commands();

/// Never throws; errors are reported through the exit code and `err`.
[[nodiscard]] Outcome run(const JobSpec& job);

}  // namespace torsionlab::cli

#endif

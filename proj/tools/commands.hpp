#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"

namespace nsnn::cli {

struct RunContext
{
    std::string command;
    std::uint64_t seed = 0;
    std::filesystem::path out;
    std::filesystem::path base_dir; ///< relative paths in the config resolve here
    unsigned jobs = 1;
    std::string hash;
};

/// A configured command. Construction validates the config block and loads
/// every referenced file; run() does the work and writes the outputs.
class Experiment
{
public:
    virtual ~Experiment() = default;
    virtual void run(const RunContext& ctx) = 0;
};

const std::vector<std::string>& command_names();

/// Config key of a command's parameter block ("boundary-map" -> "boundary_map").
std::string block_name(std::string_view command);

std::unique_ptr<Experiment> prepare_experiment(const RunContext& ctx, const ConfigNode& block);

} // namespace nsnn::cli

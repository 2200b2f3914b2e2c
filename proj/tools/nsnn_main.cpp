#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

constexpr int exit_config = 1;
constexpr int exit_runtime = 2;

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw nsnn::ParseError(path.string(), "cannot open config file");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

int main(int argc, char** argv)
{
    using namespace nsnn::cli;

    CLI::App app{"Spiking-network experiments: neuron traces, weight-space boundary maps, evolution, "
                 "perturbation robustness and ReRAM variability.",
                 "nsnn"};
    std::string command;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> jobs;
    app.add_option("command", command, "Experiment to run")->required()->check(CLI::IsMember(command_names()));
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--seed", seed, "Master seed (overrides the config)");
    app.add_option("--out", out, "Output directory (overrides the config)");
    app.add_option("--jobs", jobs, "Worker threads (overrides the config)")->check(CLI::Range(1u, 1024u));
    app.set_version_flag("--version", std::string(NSNN_VERSION));

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        return app.exit(e) == 0 ? 0 : exit_config;
    }

    RunContext ctx;
    ctx.command = command;
    std::unique_ptr<Experiment> experiment;
    json doc;
    try
    {
        const std::filesystem::path path(config_path);
        doc = parse_config_text(read_file(path), path.string());
        const ConfigNode root(doc, "");
        std::vector<std::string> blocks;
        for (const auto& c : command_names())
            blocks.push_back(block_name(c));
        for (auto it = doc.begin(); it != doc.end(); ++it)
            if (it.key() != "seed" && it.key() != "out" && it.key() != "jobs" &&
                std::find(blocks.begin(), blocks.end(), it.key()) == blocks.end())
                throw nsnn::ParseError(it.key(), "unknown field");

        if (seed)
            ctx.seed = *seed;
        else if (root.has("seed"))
            ctx.seed = root.get<std::uint64_t>("seed");
        else
            throw nsnn::ParseError("seed", "missing (set it in the config or pass --seed)");

        ctx.base_dir = path.parent_path();
        if (out)
            ctx.out = *out;
        else
            ctx.out = root.has("out") ? ctx.base_dir / root.get<std::string>("out") : std::filesystem::path("out");
        ctx.jobs = jobs ? *jobs : root.get<unsigned>("jobs", 1u);
        if (ctx.jobs < 1)
            throw nsnn::ParseError("jobs", "must be at least 1");

        const auto block = root.object(block_name(command));
        ctx.hash = config_hash(json{{"command", command}, {"seed", ctx.seed}, {"config", block.raw()}});
        experiment = prepare_experiment(ctx, block);
    }
    catch (const std::exception& e)
    {
        std::cerr << "nsnn: config error: " << e.what() << '\n';
        return exit_config;
    }

    try
    {
        experiment->run(ctx);
    }
    catch (const std::exception& e)
    {
        std::cerr << "nsnn: error: " << e.what() << '\n';
        return exit_runtime;
    }
    return 0;
}

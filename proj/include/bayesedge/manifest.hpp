#pragma once

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bayesedge
{
    inline constexpr std::string_view tool_version = "0.1.0";

    /// Everything needed to repeat a command. Written as manifest.json in the output directory.
    struct RunManifest
    {
        std::string command;
        std::vector<std::string> argv;  // arguments after the program name
        std::size_t output_index = 0;   // position of the output directory in argv
        std::uint64_t seed = 0;
        nlohmann::ordered_json params = nlohmann::ordered_json::object();
        std::vector<std::string> inputs;
        std::vector<std::string> outputs; // file names inside the output directory
        std::string version{tool_version};
    };

    nlohmann::ordered_json to_json(const RunManifest &m);
    RunManifest manifest_from_json(const nlohmann::json &j);

    void write_manifest(const std::filesystem::path &path, const RunManifest &m);
    RunManifest read_manifest(const std::filesystem::path &path);

    // argv with the output directory replaced, ready to hand back to the CLI.
    std::vector<std::string> replay_arguments(const RunManifest &m, const std::string &output_override = {});
} // namespace bayesedge

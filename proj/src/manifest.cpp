#include "bayesedge/manifest.hpp"

#include "bayesedge/errors.hpp"

#include <fstream>

namespace bayesedge
{
    nlohmann::ordered_json to_json(const RunManifest &m)
    {
        nlohmann::ordered_json j;
        j["tool"] = "bayesedge";
        j["version"] = m.version;
        j["command"] = m.command;
        j["argv"] = m.argv;
        j["output_index"] = m.output_index;
        j["seed"] = m.seed;
        j["params"] = m.params;
        j["inputs"] = m.inputs;
        j["outputs"] = m.outputs;
        return j;
    }

    RunManifest manifest_from_json(const nlohmann::json &j)
    {
        try
        {
            RunManifest m;
            m.command = j.at("command").get<std::string>();
            m.argv = j.at("argv").get<std::vector<std::string>>();
            m.output_index = j.at("output_index").get<std::size_t>();
            m.seed = j.at("seed").get<std::uint64_t>();
            m.params = j.at("params");
            m.inputs = j.at("inputs").get<std::vector<std::string>>();
            m.outputs = j.at("outputs").get<std::vector<std::string>>();
            m.version = j.at("version").get<std::string>();
            if (m.output_index >= m.argv.size() || m.argv.empty() || m.argv.front() != m.command)
                throw IoError("manifest argv is inconsistent with its command");
            return m;
        }
        catch (const nlohmann::json::exception &e)
        {
            throw IoError(std::string("malformed manifest: ") + e.what());
        }
    }

    void write_manifest(const std::filesystem::path &path, const RunManifest &m)
    {
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw IoError("cannot write " + path.string());
        os << to_json(m).dump(2) << '\n';
        if (!os)
            throw IoError("failed writing " + path.string());
    }

    RunManifest read_manifest(const std::filesystem::path &path)
    {
        std::ifstream is(path, std::ios::binary);
        if (!is)
            throw IoError("cannot open " + path.string());
        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(is);
        }
        catch (const nlohmann::json::exception &e)
        {
            throw IoError("manifest is not valid JSON: " + std::string(e.what()));
        }
        return manifest_from_json(j);
    }

    std::vector<std::string> replay_arguments(const RunManifest &m, const std::string &output_override)
    {
        std::vector<std::string> args = m.argv;
        if (!output_override.empty())
            args[m.output_index] = output_override;
        return args;
    }
} // namespace bayesedge

#pragma once

// Run manifests: enough resolved configuration to replay any command and
// verify its outputs byte for byte. Timestamps live here, never inside the
// data artifacts themselves, which must be bit-identical across reruns.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fnolab/io.hpp"
#include "fnolab/version.hpp"

namespace fnolab {

struct RunManifest {
    std::string tool_version = kVersion;
    std::string command;                            // e.g. "gen-data"
    nlohmann::json options;                         // fully resolved flag set
    std::map<std::string, std::string> inputs;      // path -> checksum
    std::vector<std::pair<std::string, std::string>> outputs; // path, checksum
    std::string created_at;

    static std::string now_utc() {
        const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&t, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    void add_input(const std::string& path) {
        inputs[path] = io::checksum_hex(io::file_checksum(path));
    }
    void add_output(const std::string& path) {
        outputs.emplace_back(path, io::checksum_hex(io::file_checksum(path)));
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["tool_version"] = tool_version;
        j["command"] = command;
        j["options"] = options;
        j["inputs"] = inputs;
        j["outputs"] = nlohmann::json::array();
        for (const auto& [p, c] : outputs) j["outputs"].push_back({{"path", p}, {"checksum", c}});
        j["created_at"] = created_at.empty() ? now_utc() : created_at;
        return j;
    }

    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        m.tool_version = j.at("tool_version").get<std::string>();
        m.command = j.at("command").get<std::string>();
        m.options = j.at("options");
        if (j.contains("inputs"))
            m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
        for (const auto& o : j.value("outputs", nlohmann::json::array()))
            m.outputs.emplace_back(o.at("path").get<std::string>(),
                                   o.at("checksum").get<std::string>());
        m.created_at = j.value("created_at", "");
        return m;
    }
};

inline void write_manifest(const std::string& path, const RunManifest& m) {
    io::write_text_file(path, m.to_json().dump(2) + "\n");
}

inline RunManifest read_manifest(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw io::MalformedFile(path + ": manifest is not valid JSON: " + e.what());
    }
    return RunManifest::from_json(j);
}

} // namespace fnolab

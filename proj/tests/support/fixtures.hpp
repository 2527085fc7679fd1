#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "stitchsmc/road/network.hpp"

namespace testfix {

inline std::string fixture_path(const std::string& name) {
    return std::string(STITCHSMC_FIXTURE_DIR) + "/" + name;
}

inline nlohmann::json read_fixture_json(const std::string& name) {
    std::ifstream in(fixture_path(name));
    if (!in) throw std::runtime_error("missing fixture " + name);
    return nlohmann::json::parse(in);
}

inline stitchsmc::RoadNetwork load_fixture_network(const std::string& name) {
    return stitchsmc::load_network(read_fixture_json(name));
}

}  // namespace testfix

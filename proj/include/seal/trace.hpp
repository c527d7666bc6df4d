#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seal/text.hpp"

namespace seal {

// Run trace: JSON Lines, one event per line with (event_type, loop_index,
// payload). No wall-clock timestamps — traces must be byte-identical across
// re-runs with equal config.
class Trace {
public:
    void event(const std::string& event_type, int loop_index, nlohmann::json payload) {
        events_.push_back(nlohmann::json{
            {"event_type", event_type}, {"loop_index", loop_index}, {"payload", std::move(payload)}});
    }

    const std::vector<nlohmann::json>& events() const { return events_; }

    std::vector<nlohmann::json> events_of_type(const std::string& event_type) const {
        std::vector<nlohmann::json> out;
        for (const auto& e : events_) {
            if (e.at("event_type") == event_type) out.push_back(e);
        }
        return out;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("trace: cannot write '" + path + "'");
        for (const auto& e : events_) out << e.dump() << '\n';
    }

    static std::vector<nlohmann::json> load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("trace: cannot open '" + path + "'");
        std::vector<nlohmann::json> out;
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            out.push_back(nlohmann::json::parse(line));
        }
        if (out.empty()) throw std::runtime_error("trace: '" + path + "' holds no events");
        return out;
    }

private:
    std::vector<nlohmann::json> events_;
};

}  // namespace seal

#include "sclm/transport.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace sclm {

uint64_t fnv1a(const std::string& text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

HttpTransport::HttpTransport(HttpTransportConfig config) : config_(std::move(config)) {}

std::string HttpTransport::complete(const std::string& prompt) {
    using namespace std::chrono;
    if (config_.min_interval_ms > 0) {
        int64_t now = duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
        int64_t wait = last_request_ms_ + config_.min_interval_ms - now;
        if (wait > 0) std::this_thread::sleep_for(milliseconds(wait));
        last_request_ms_ =
            duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
    }

    nlohmann::json body{{"model", config_.model}, {"prompt", prompt}};
    if (config_.temperature >= 0.0) body["temperature"] = config_.temperature;

    httplib::Client client(config_.host, config_.port);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()))
        headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!res) throw TransportError("transport failure: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw TransportError("transport returned status " + std::to_string(res->status));
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("text") || !parsed["text"].is_string())
        throw TransportError("transport response missing \"text\" field");
    return parsed["text"].get<std::string>();
}

TranscriptReplayTransport TranscriptReplayTransport::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TransportError("cannot open transcript file: " + path);
    std::vector<std::string> responses;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.contains("response"))
            throw TransportError("malformed transcript line in " + path);
        responses.push_back(record["response"].get<std::string>());
    }
    return TranscriptReplayTransport(std::move(responses));
}

std::string TranscriptReplayTransport::complete(const std::string&) {
    if (next_ >= responses_.size()) throw TransportError("transcript exhausted");
    return responses_[next_++];
}

std::string MockTransport::complete(const std::string& prompt) {
    uint64_t h = fnv1a(prompt);
    if (prompt.find("scale from 1 to 5") != std::string::npos)
        return "rating: " + std::to_string(1 + h % 5);
    if (prompt.find("The best reward function is at number") != std::string::npos) {
        size_t count = 0;
        for (size_t pos = prompt.find("Function Number "); pos != std::string::npos;
             pos = prompt.find("Function Number ", pos + 1))
            ++count;
        if (count == 0) count = 1;
        return "The best reward function is at number: " + std::to_string(h % count);
    }
    return "$$$ state $$$";
}

std::string TranscriptRecorder::complete(const std::string& prompt) {
    std::string response = inner_->complete(prompt);
    nlohmann::json record{{"prompt", prompt}, {"response", response}};
    std::ofstream out(path_, std::ios::app);
    out << record.dump() << '\n';
    return response;
}

}  // namespace sclm

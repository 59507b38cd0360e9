#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace sclm {

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One blocking text-completion call. Implementations: HTTP client, transcript
// replay, deterministic mock.
class LlmTransport {
public:
    virtual ~LlmTransport() = default;
    virtual std::string complete(const std::string& prompt) = 0;
};

struct HttpTransportConfig {
    std::string host = "localhost";
    int port = 8080;
    std::string path = "/v1/complete";
    std::string model;
    std::string api_key_env = "SCLM_API_KEY";
    double temperature = -1.0;  // < 0: omit from the request
    int min_interval_ms = 0;    // request rate cap
    int timeout_seconds = 60;
};

// JSON-over-HTTP client: POST {model, prompt[, temperature]}, expects
// {"text": ...} back.
class HttpTransport : public LlmTransport {
public:
    explicit HttpTransport(HttpTransportConfig config);
    std::string complete(const std::string& prompt) override;

private:
    HttpTransportConfig config_;
    int64_t last_request_ms_ = 0;
};

// Replays recorded responses in order; tests run transcript-only.
class TranscriptReplayTransport : public LlmTransport {
public:
    explicit TranscriptReplayTransport(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}
    static TranscriptReplayTransport from_file(const std::string& path);

    std::string complete(const std::string& prompt) override;

private:
    std::vector<std::string> responses_;
    size_t next_ = 0;
};

// Deterministic offline stand-in: rating prompts get a hash-derived score,
// reflection prompts a hash-derived pick, generation prompts a fixed reward.
class MockTransport : public LlmTransport {
public:
    std::string complete(const std::string& prompt) override;
};

// Wraps another transport and appends {prompt, response} JSON lines to a file.
class TranscriptRecorder : public LlmTransport {
public:
    TranscriptRecorder(std::shared_ptr<LlmTransport> inner, std::string path)
        : inner_(std::move(inner)), path_(std::move(path)) {}
    std::string complete(const std::string& prompt) override;

private:
    std::shared_ptr<LlmTransport> inner_;
    std::string path_;
};

uint64_t fnv1a(const std::string& text);

}  // namespace sclm

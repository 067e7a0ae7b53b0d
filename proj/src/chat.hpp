#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace encls {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ProviderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised in replay mode when the live request does not match the recorded
// one at the same index, or the cassette runs out.
struct TranscriptMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProviderConfig {
  std::string name;           // label used for grouping and manifests
  std::string kind = "http";  // http | scripted
  std::string base_url;       // e.g. http://localhost:8080
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env;    // environment variable holding the key
  int max_tokens = 4096;
  int max_retries = 3;
  double retry_backoff_seconds = 1.0;
  double timeout_seconds = 120.0;
  std::vector<std::string> scripted_responses;  // kind == scripted
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string name() const = 0;
  // Returns the assistant reply. Throws ProviderError after retries.
  virtual std::string complete(const std::vector<ChatMessage>& messages,
                               double temperature) = 0;
};

// Chat-completions style HTTP backend. The API key is read from the
// environment at call time and never stored.
std::unique_ptr<ChatProvider> make_http_provider(const ProviderConfig& config);

// Replays config.scripted_responses in order; errors when exhausted. Lets
// the whole pipeline run without any network.
std::unique_ptr<ChatProvider> make_scripted_provider(const ProviderConfig& config);

std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config);

// Record/replay shim around a provider. Cassettes are line-delimited JSON,
// one (request, response) pair per line in call order. Replay matches each
// request against the recorded one at the same index and fails loudly on
// any difference.
class Transcript : public ChatProvider {
 public:
  static std::unique_ptr<Transcript> record(std::unique_ptr<ChatProvider> inner,
                                            const std::string& cassette_path);
  static std::unique_ptr<Transcript> replay(const std::string& cassette_path,
                                            const std::string& provider_name);

  std::string name() const override { return name_; }
  std::string complete(const std::vector<ChatMessage>& messages,
                       double temperature) override;

  size_t calls_made() const { return index_; }

 private:
  Transcript() = default;

  struct Entry {
    std::vector<ChatMessage> request;
    double temperature = 0.0;
    std::string response;
  };

  bool recording_ = false;
  std::string name_;
  std::string path_;
  std::unique_ptr<ChatProvider> inner_;
  std::vector<Entry> entries_;  // replay mode
  size_t index_ = 0;
};

}  // namespace encls

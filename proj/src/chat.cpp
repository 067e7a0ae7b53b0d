#include "chat.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace encls {

namespace {

nlohmann::json messages_to_json(const std::vector<ChatMessage>& messages) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : messages) arr.push_back({{"role", m.role}, {"content", m.content}});
  return arr;
}

std::vector<ChatMessage> messages_from_json(const nlohmann::json& arr) {
  std::vector<ChatMessage> out;
  for (const auto& m : arr)
    out.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
  return out;
}

class HttpProvider : public ChatProvider {
 public:
  explicit HttpProvider(ProviderConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty())
      throw ProviderError("provider '" + config_.name + "' has no base_url");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (config_.base_url.rfind("https://", 0) == 0)
      throw ProviderError("provider '" + config_.name +
                          "': https endpoints need a TLS-enabled build");
#endif
  }

  std::string name() const override { return config_.name; }

  std::string complete(const std::vector<ChatMessage>& messages,
                       double temperature) override {
    nlohmann::json body;
    body["model"] = config_.model;
    body["messages"] = messages_to_json(messages);
    body["temperature"] = temperature;
    body["max_tokens"] = config_.max_tokens;
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(
            config_.retry_backoff_seconds * attempt));
      }
      httplib::Client client(config_.base_url);
      client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_seconds));
      client.set_read_timeout(std::chrono::duration<double>(config_.timeout_seconds));
      httplib::Headers headers;
      if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key || !*key)
          throw ProviderError("environment variable " + config_.api_key_env +
                              " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
      }
      auto res = client.Post(config_.path, headers, payload, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200)
        throw ProviderError("provider '" + config_.name + "' returned HTTP " +
                            std::to_string(res->status) + ": " + res->body);
      try {
        const nlohmann::json reply = nlohmann::json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw ProviderError("provider '" + config_.name +
                            "' sent an unparseable reply: " + e.what());
      }
    }
    throw ProviderError("provider '" + config_.name + "' failed after " +
                        std::to_string(config_.max_retries + 1) + " attempts (" +
                        last_error + ")");
  }

 private:
  ProviderConfig config_;
};

class ScriptedProvider : public ChatProvider {
 public:
  explicit ScriptedProvider(ProviderConfig config) : config_(std::move(config)) {}

  std::string name() const override { return config_.name; }

  std::string complete(const std::vector<ChatMessage>&, double) override {
    if (next_ >= config_.scripted_responses.size())
      throw ProviderError("scripted provider '" + config_.name +
                          "' has no response for call " + std::to_string(next_ + 1));
    return config_.scripted_responses[next_++];
  }

 private:
  ProviderConfig config_;
  size_t next_ = 0;
};

std::string now_iso8601() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::tm tm_utc;
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace

std::unique_ptr<ChatProvider> make_http_provider(const ProviderConfig& config) {
  return std::make_unique<HttpProvider>(config);
}

std::unique_ptr<ChatProvider> make_scripted_provider(const ProviderConfig& config) {
  return std::make_unique<ScriptedProvider>(config);
}

std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config) {
  if (config.kind == "http") return make_http_provider(config);
  if (config.kind == "scripted") return make_scripted_provider(config);
  throw ProviderError("unknown provider kind: " + config.kind);
}

std::unique_ptr<Transcript> Transcript::record(std::unique_ptr<ChatProvider> inner,
                                               const std::string& cassette_path) {
  if (!inner) throw ProviderError("record mode needs an inner provider");
  auto t = std::unique_ptr<Transcript>(new Transcript());
  t->recording_ = true;
  t->name_ = inner->name();
  t->path_ = cassette_path;
  t->inner_ = std::move(inner);
  std::ofstream out(cassette_path, std::ios::trunc);
  if (!out) throw ProviderError("cannot write cassette " + cassette_path);
  return t;
}

std::unique_ptr<Transcript> Transcript::replay(const std::string& cassette_path,
                                               const std::string& provider_name) {
  auto t = std::unique_ptr<Transcript>(new Transcript());
  t->recording_ = false;
  t->name_ = provider_name;
  t->path_ = cassette_path;
  std::ifstream in(cassette_path);
  if (!in) throw ProviderError("cannot open cassette " + cassette_path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      Entry e;
      e.request = messages_from_json(j.at("request"));
      e.temperature = j.at("temperature").get<double>();
      e.response = j.at("response").get<std::string>();
      t->entries_.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ProviderError("cassette " + cassette_path + " line " +
                          std::to_string(line_no) + ": " + ex.what());
    }
  }
  return t;
}

std::string Transcript::complete(const std::vector<ChatMessage>& messages,
                                 double temperature) {
  if (recording_) {
    const std::string response = inner_->complete(messages, temperature);
    nlohmann::json j;
    j["index"] = index_;
    j["ts"] = now_iso8601();
    j["provider"] = name_;
    j["temperature"] = temperature;
    j["request"] = messages_to_json(messages);
    j["response"] = response;
    j["response_tokens_approx"] = response.size() / 4;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw ProviderError("cannot append to cassette " + path_);
    out << j.dump() << "\n";
    ++index_;
    return response;
  }

  if (index_ >= entries_.size())
    throw TranscriptMismatch("cassette " + path_ + " exhausted at call " +
                             std::to_string(index_ + 1));
  const Entry& e = entries_[index_];
  if (e.request != messages || e.temperature != temperature) {
    std::ostringstream why;
    why << "cassette " << path_ << " mismatch at call " << index_ + 1;
    if (e.temperature != temperature)
      why << " (temperature recorded " << e.temperature << ", got " << temperature << ")";
    if (e.request.size() != messages.size()) {
      why << " (message count recorded " << e.request.size() << ", got "
          << messages.size() << ")";
    } else {
      for (size_t i = 0; i < messages.size(); ++i) {
        if (!(e.request[i] == messages[i])) {
          why << " (message " << i + 1 << " differs)";
          break;
        }
      }
    }
    throw TranscriptMismatch(why.str());
  }
  ++index_;
  return e.response;
}

}  // namespace encls

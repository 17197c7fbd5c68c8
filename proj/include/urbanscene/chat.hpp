// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

// Chat-completion client plumbing shared by captioning and evaluation:
// request model, an HTTP transport for OpenAI-compatible endpoints, retry
// with exponential backoff, and record/replay fixtures so runs are
// reproducible offline.

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "urbanscene/error.hpp"

namespace urbanscene {

struct ContentPart {
  enum class Kind { Text, Image };
  Kind kind = Kind::Text;
  std::string text;
  // Image parts: a data URL (or http URL) and a digest of the decoded
  // pixels, which stands in for the image when keying fixtures.
  std::string image_url;
  std::string image_digest;

  static ContentPart make_text(std::string text);
  static ContentPart make_image(std::string url, std::string digest);
};

struct ChatMessage {
  std::string role;
  std::vector<ContentPart> parts;

  static ChatMessage text(std::string role, std::string content);
  // Concatenated text parts.
  std::string text_content() const;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;

  // Body for POST {base}/chat/completions.
  std::string wire_body() const;
  // Canonical form with images replaced by their digests.
  std::string canonical() const;
  // SHA-256 of canonical(), hex.
  std::string fixture_key() const;
};

struct ChatReply {
  std::string content;
  std::string model;
};

class TransportError : public Error {
 public:
  TransportError(const std::string& what, bool retryable)
      : Error(ErrorCode::Transport, what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual ChatReply complete(const ChatRequest& request) = 0;
};

struct EndpointConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  int timeout_seconds = 120;
};

// OpenAI-compatible chat completions over HTTP(S). Connection failures, 429
// and 5xx raise retryable TransportErrors; other statuses are permanent.
class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(EndpointConfig config);
  ChatReply complete(const ChatRequest& request) override;

 private:
  EndpointConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_delay{500};
  double backoff_factor = 2.0;
};

class RetryingTransport : public ChatTransport {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;
  RetryingTransport(std::shared_ptr<ChatTransport> inner, RetryPolicy policy, Sleeper sleeper = {});
  ChatReply complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<ChatTransport> inner_;
  RetryPolicy policy_;
  Sleeper sleeper_;
};

// Recorded request/reply pairs keyed by ChatRequest::fixture_key(). Saved
// sorted by key so files diff cleanly.
class FixtureStore {
 public:
  FixtureStore() = default;
  // A missing file loads as an empty store.
  static std::shared_ptr<FixtureStore> load(const std::filesystem::path& path);
  static std::shared_ptr<FixtureStore> parse(std::string_view text);

  std::optional<std::string> find(const std::string& key) const;
  void record(const ChatRequest& request, const std::string& reply);
  std::size_t size() const;
  std::string dump() const;
  void save(const std::filesystem::path& path) const;

 private:
  struct Entry {
    std::string request;  // canonical form
    std::string reply;
  };
  mutable std::mutex mutex_;
  std::map<std::string, Entry> entries_;
};

enum class FixtureMode { Replay, Record };

// Replay answers from the store and raises ErrorCode::Fixture on a miss.
// Record forwards to `inner` and stores every reply.
class FixtureTransport : public ChatTransport {
 public:
  FixtureTransport(std::shared_ptr<FixtureStore> store, FixtureMode mode,
                   std::shared_ptr<ChatTransport> inner = nullptr);
  ChatReply complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<FixtureStore> store_;
  FixtureMode mode_;
  std::shared_ptr<ChatTransport> inner_;
};

// In-process responder, used for deterministic pipelines and tests. Every
// request is captured.
class ScriptedTransport : public ChatTransport {
 public:
  using Handler = std::function<std::string(const ChatRequest&)>;
  explicit ScriptedTransport(Handler handler, std::string model = "scripted");
  ChatReply complete(const ChatRequest& request) override;
  std::vector<ChatRequest> requests() const;

 private:
  Handler handler_;
  std::string model_;
  mutable std::mutex mutex_;
  std::vector<ChatRequest> requests_;
};

std::string sha256_hex(std::string_view bytes);
std::string base64_encode(std::string_view bytes);
// Throws Parse on malformed input.
std::string base64_decode(std::string_view text);

}  // namespace urbanscene

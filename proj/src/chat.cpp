// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include "urbanscene/chat.hpp"

// Keep above httplib.h.
#include "urbanscene/ingest.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

namespace urbanscene {

namespace {

using json = nlohmann::json;

json content_json(const ChatMessage& m, bool canonical) {
  // Plain text messages go out as a string, which every compatible server
  // accepts; mixed content uses the parts array.
  const bool text_only = std::all_of(m.parts.begin(), m.parts.end(),
                                     [](const ContentPart& p) { return p.kind == ContentPart::Kind::Text; });
  if (text_only) return m.text_content();
  json parts = json::array();
  for (const ContentPart& p : m.parts) {
    if (p.kind == ContentPart::Kind::Text) {
      parts.push_back({{"type", "text"}, {"text", p.text}});
    } else if (canonical) {
      parts.push_back({{"type", "image"}, {"digest", p.image_digest}});
    } else {
      parts.push_back({{"type", "image_url"}, {"image_url", {{"url", p.image_url}}}});
    }
  }
  return parts;
}

json request_json(const ChatRequest& r, bool canonical) {
  json messages = json::array();
  for (const ChatMessage& m : r.messages) {
    messages.push_back({{"role", m.role}, {"content", content_json(m, canonical)}});
  }
  return {{"model", r.model}, {"messages", messages}, {"temperature", r.temperature}};
}

std::string reply_text(const json& message) {
  const json& content = message.at("content");
  if (content.is_string()) return content.get<std::string>();
  if (content.is_null()) return {};
  std::string out;
  if (content.is_array()) {
    for (const json& part : content) {
      if (part.value("type", "") == "text") out += part.value("text", "");
    }
  }
  return out;
}

}  // namespace

ContentPart ContentPart::make_text(std::string text) {
  ContentPart p;
  p.kind = Kind::Text;
  p.text = std::move(text);
  return p;
}

ContentPart ContentPart::make_image(std::string url, std::string digest) {
  ContentPart p;
  p.kind = Kind::Image;
  p.image_url = std::move(url);
  p.image_digest = std::move(digest);
  return p;
}

ChatMessage ChatMessage::text(std::string role, std::string content) {
  ChatMessage m;
  m.role = std::move(role);
  m.parts.push_back(ContentPart::make_text(std::move(content)));
  return m;
}

std::string ChatMessage::text_content() const {
  std::string out;
  for (const ContentPart& p : parts) {
    if (p.kind == ContentPart::Kind::Text) out += p.text;
  }
  return out;
}

std::string ChatRequest::wire_body() const { return request_json(*this, false).dump(); }

std::string ChatRequest::canonical() const { return request_json(*this, true).dump(); }

std::string ChatRequest::fixture_key() const { return sha256_hex(canonical()); }

HttpChatTransport::HttpChatTransport(EndpointConfig config) : config_(std::move(config)) {
  const std::string& url = config_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "endpoint base URL needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

ChatReply HttpChatTransport::complete(const ChatRequest& request) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(std::min(config_.timeout_seconds, 30), 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  const std::string path = path_prefix_ + "/chat/completions";
  auto res = client.Post(path, headers, request.wire_body(), "application/json");
  if (!res) {
    throw TransportError("request to " + scheme_host_port_ + path + " failed: " + httplib::to_string(res.error()),
                         true);
  }
  if (res->status == 429 || res->status >= 500) {
    throw TransportError("endpoint returned HTTP " + std::to_string(res->status), true);
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 512),
                         false);
  }
  try {
    const json body = json::parse(res->body);
    const json& choices = body.at("choices");
    if (!choices.is_array() || choices.empty()) throw TransportError("endpoint reply has no choices", false);
    ChatReply reply;
    reply.content = reply_text(choices.at(0).at("message"));
    reply.model = body.value("model", request.model);
    return reply;
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed endpoint reply: ") + e.what(), false);
  }
}

RetryingTransport::RetryingTransport(std::shared_ptr<ChatTransport> inner, RetryPolicy policy, Sleeper sleeper)
    : inner_(std::move(inner)), policy_(policy), sleeper_(std::move(sleeper)) {
  if (!inner_) throw Error(ErrorCode::InvalidArgument, "retrying transport needs an inner transport");
  if (policy_.max_attempts < 1) policy_.max_attempts = 1;
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

ChatReply RetryingTransport::complete(const ChatRequest& request) {
  auto delay = policy_.initial_delay;
  for (int attempt = 1;; ++attempt) {
    try {
      return inner_->complete(request);
    } catch (const TransportError& e) {
      if (!e.retryable() || attempt >= policy_.max_attempts) {
        throw TransportError(std::string(e.what()) + " (after " + std::to_string(attempt) + " attempt" +
                                 (attempt == 1 ? "" : "s") + ")",
                             false);
      }
    }
    sleeper_(delay);
    delay = std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(delay.count()) * policy_.backoff_factor));
  }
}

std::shared_ptr<FixtureStore> FixtureStore::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return std::make_shared<FixtureStore>();
  return parse(read_file(path));
}

std::shared_ptr<FixtureStore> FixtureStore::parse(std::string_view text) {
  auto store = std::make_shared<FixtureStore>();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("fixture file: ") + e.what(), 0, e.byte);
  }
  if (!doc.contains("fixtures") || !doc.at("fixtures").is_array()) {
    throw ParseError("fixture file: missing 'fixtures' array", 1, 0);
  }
  for (const json& e : doc.at("fixtures")) {
    Entry entry;
    entry.request = e.value("request", json()).dump();
    entry.reply = e.at("reply").get<std::string>();
    store->entries_[e.at("key").get<std::string>()] = std::move(entry);
  }
  return store;
}

std::optional<std::string> FixtureStore::find(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.reply;
}

void FixtureStore::record(const ChatRequest& request, const std::string& reply) {
  Entry e{request.canonical(), reply};
  const std::string key = request.fixture_key();
  std::lock_guard<std::mutex> lock(mutex_);
  entries_[key] = std::move(e);
}

std::size_t FixtureStore::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

std::string FixtureStore::dump() const {
  std::lock_guard<std::mutex> lock(mutex_);
  json list = json::array();
  for (const auto& [key, e] : entries_) {
    list.push_back({{"key", key}, {"request", json::parse(e.request)}, {"reply", e.reply}});
  }
  return json{{"fixtures", list}}.dump(2) + "\n";
}

void FixtureStore::save(const std::filesystem::path& path) const { write_file(path, dump()); }

FixtureTransport::FixtureTransport(std::shared_ptr<FixtureStore> store, FixtureMode mode,
                                   std::shared_ptr<ChatTransport> inner)
    : store_(std::move(store)), mode_(mode), inner_(std::move(inner)) {
  if (!store_) throw Error(ErrorCode::InvalidArgument, "fixture transport needs a store");
  if (mode_ == FixtureMode::Record && !inner_) {
    throw Error(ErrorCode::InvalidArgument, "recording fixtures needs an inner transport");
  }
}

ChatReply FixtureTransport::complete(const ChatRequest& request) {
  if (mode_ == FixtureMode::Replay) {
    const std::string key = request.fixture_key();
    auto hit = store_->find(key);
    if (!hit) throw Error(ErrorCode::Fixture, "fixture miss for request " + key + " (model " + request.model + ")");
    return {*hit, request.model};
  }
  ChatReply reply = inner_->complete(request);
  store_->record(request, reply.content);
  return reply;
}

ScriptedTransport::ScriptedTransport(Handler handler, std::string model)
    : handler_(std::move(handler)), model_(std::move(model)) {}

ChatReply ScriptedTransport::complete(const ChatRequest& request) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    requests_.push_back(request);
  }
  return {handler_(request), model_};
}

std::vector<ChatRequest> ScriptedTransport::requests() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return requests_;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Internal, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error(ErrorCode::Parse, "base64 length is not a multiple of 4");
  std::string out(3 * (text.size() / 4), '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorCode::Parse, "malformed base64");
  std::size_t size = static_cast<std::size_t>(n);
  for (std::size_t i = text.size(); i > 0 && text[i - 1] == '='; --i) --size;
  out.resize(size);
  return out;
}

}  // namespace urbanscene

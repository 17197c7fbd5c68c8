// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include "urbanscene/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>

namespace urbanscene {

const std::string_view kQaSystemPrompt =
    "Based on the data provided by the user, you can perform many spatial reasoning tasks. In addition to some basic "
    "information, the structured text also includes several specialized fields:\n"
    "- ID: Unique identifier for each geographic object (e.g.,\"1317798\")\n"
    "- bbox: The coordinates of the bottom-left and top-right corners of the minimum bounding rectangle of the "
    "polygon.\n"
    "- Visual information: Detailed description of the object's physical appearance and immediate environment.\n"
    "- Spatial Relationship: Direction and distance to surrounding objects\n"
    "- Geographic Topology Relationship: Geographic information about the object's surroundings, including: Adjacent "
    "roads, Points of interest (POIs) with their distances.\n"
    "Your answers must rely strictly on this data structure, and your output should follow this format: "
    "Option#Reasoning process. If none of the options are correct, output: F#Reasoning process\n"
    "Example: User Question: If I am at building A, in which direction should I walk to reach building B?\n"
    "A. Northwest  B. Southwest  C. Southeast  D. Northeast\n"
    "Answer: C#Based on the data, ...., making option C the correct answer";

const std::string_view kAskSystemPrompt =
    "Based on the data provided by the user, you can perform many spatial reasoning tasks. Answer the user's question "
    "using the structured scene description, and state the fields you relied on.";

namespace {

using ordered_json = nlohmann::ordered_json;

std::string question_block(const QAItem& q) {
  std::string out = "User Question: " + q.question;
  for (std::size_t i = 0; i < 4; ++i) out += "\n" + std::string(1, static_cast<char>('A' + i)) + ". " + q.options[i];
  return out;
}

std::string scene_block(std::string_view ssd_text) {
  std::string out(kSceneHeader);
  out.append(ssd_text);
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

// Inverse of build_prompt's user message, for the oracle respondent.
struct RecoveredPrompt {
  std::string ssd;
  QAItem item;
};

std::optional<RecoveredPrompt> recover(const std::string& user) {
  if (user.rfind(kSceneHeader, 0) != 0) return std::nullopt;
  const std::size_t marker = user.rfind(kQuestionMarker);
  if (marker == std::string::npos) return std::nullopt;
  RecoveredPrompt out;
  out.ssd = user.substr(kSceneHeader.size(), marker - kSceneHeader.size());
  std::string rest = user.substr(marker + kQuestionMarker.size());
  std::size_t pos = rest.find("\nA. ");
  if (pos == std::string::npos) return std::nullopt;
  out.item.question = rest.substr(0, pos);
  for (std::size_t i = 0; i < 4; ++i) {
    const std::string tag = "\n" + std::string(1, static_cast<char>('A' + i)) + ". ";
    const std::size_t start = rest.find(tag, pos);
    if (start == std::string::npos) return std::nullopt;
    const std::size_t end = i < 3 ? rest.find("\n" + std::string(1, static_cast<char>('B' + i)) + ". ", start + 1)
                                  : std::string::npos;
    out.item.options[i] = rest.substr(start + tag.size(), end == std::string::npos ? std::string::npos
                                                                                    : end - start - tag.size());
    pos = start + 1;
  }
  return out;
}

std::optional<QaCategory> category_of(const std::string& question) {
  if (question.rfind("Calculate the straight-line distance", 0) == 0) return QaCategory::Distance;
  if (question.rfind("If I am at ", 0) == 0) return QaCategory::Directional;
  if (question.rfind("Which route along the roads", 0) == 0) return QaCategory::Path;
  if (question.rfind("Which object matches this description", 0) == 0) return QaCategory::Grounding;
  if (question.find(" is closest to the coordinates (") != std::string::npos) return QaCategory::Poi;
  return std::nullopt;
}

class OracleResponder {
 public:
  std::string operator()(const ChatRequest& req) {
    if (req.messages.size() < 2) return "F#The prompt carries no question.";
    const auto recovered = recover(req.messages.back().text_content());
    if (!recovered) return "F#The prompt does not follow the expected layout.";
    QAItem item = recovered->item;
    const auto cat = category_of(item.question);
    if (!cat) return "F#The question is not one of the templated forms.";
    item.category = *cat;
    const Entry& entry = lookup(recovered->ssd);
    if (!entry.oracle) return "F#The scene description could not be parsed: " + entry.error;
    const OracleAnswer a = entry.oracle->answer(item);
    return std::string(1, a.option) + "#" + a.reasoning;
  }

 private:
  struct Entry {
    std::unique_ptr<StructuredSceneDescription> ssd;
    std::unique_ptr<Oracle> oracle;
    std::string error;
  };

  const Entry& lookup(const std::string& text) {
    const std::string key = sha256_hex(text);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Entry e;
    try {
      e.ssd = std::make_unique<StructuredSceneDescription>(parse_ssd(text));
      e.oracle = std::make_unique<Oracle>(*e.ssd);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    return cache_.emplace(key, std::move(e)).first->second;
  }

  std::mutex mutex_;
  std::map<std::string, Entry> cache_;
};

}  // namespace

ParsedAnswer parse_answer(std::string_view reply) {
  ParsedAnswer out;
  out.raw = std::string(reply);
  std::size_t i = 0;
  while (i < reply.size() && std::isspace(static_cast<unsigned char>(reply[i]))) ++i;
  if (i + 1 >= reply.size() || reply[i + 1] != '#') return out;
  const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(reply[i])));
  if (c != 'A' && c != 'B' && c != 'C' && c != 'D' && c != 'F') return out;
  out.option = c;
  out.reasoning = std::string(reply.substr(i + 2));
  return out;
}

std::vector<ChatMessage> build_prompt(std::string_view ssd_text, const QAItem& q) {
  std::vector<ChatMessage> out;
  out.push_back(ChatMessage::text("system", std::string(kQaSystemPrompt)));
  out.push_back(ChatMessage::text("user", scene_block(ssd_text) + "\n\n" + question_block(q)));
  return out;
}

std::vector<ChatMessage> build_ask_prompt(std::string_view ssd_text, std::string_view question) {
  std::vector<ChatMessage> out;
  out.push_back(ChatMessage::text("system", std::string(kAskSystemPrompt)));
  out.push_back(ChatMessage::text("user", scene_block(ssd_text) + "\n\nUser Question: " + std::string(question)));
  return out;
}

std::size_t prompt_tokens(const std::vector<ChatMessage>& messages) {
  std::size_t n = 0;
  for (const ChatMessage& m : messages) n += estimate_tokens(m.text_content());
  return n;
}

std::string_view to_string(Respondent::Kind kind) {
  switch (kind) {
    case Respondent::Kind::Remote: return "remote";
    case Respondent::Kind::Scripted: return "scripted";
    case Respondent::Kind::Oracle: return "oracle";
  }
  return "?";
}

Respondent make_remote_respondent(std::string name, const EndpointConfig& endpoint, std::size_t context_limit,
                                  RetryPolicy retry) {
  Respondent r;
  r.name = std::move(name);
  r.kind = Respondent::Kind::Remote;
  r.transport = std::make_shared<RetryingTransport>(std::make_shared<HttpChatTransport>(endpoint), retry);
  r.model = endpoint.model;
  r.temperature = endpoint.temperature;
  r.context_limit = context_limit;
  return r;
}

Respondent make_scripted_respondent(std::string name, ScriptedTransport::Handler handler) {
  Respondent r;
  r.name = std::move(name);
  r.kind = Respondent::Kind::Scripted;
  r.model = "scripted";
  r.transport = std::make_shared<ScriptedTransport>(std::move(handler), r.model);
  return r;
}

Respondent make_constant_respondent(std::string name, std::string reply) {
  return make_scripted_respondent(std::move(name), [reply = std::move(reply)](const ChatRequest&) { return reply; });
}

Respondent make_echo_length_respondent(std::string name) {
  return make_scripted_respondent(std::move(name), [](const ChatRequest& req) {
    const std::size_t n = req.messages.empty() ? 0 : req.messages.back().text_content().size();
    return "Prompt length: " + std::to_string(n) + " characters.";
  });
}

Respondent make_oracle_respondent(std::string name) {
  Respondent r;
  r.name = std::move(name);
  r.kind = Respondent::Kind::Oracle;
  r.model = "oracle";
  auto responder = std::make_shared<OracleResponder>();
  r.transport = std::make_shared<ScriptedTransport>(
      [responder](const ChatRequest& req) { return (*responder)(req); }, r.model);
  return r;
}

EvalReport run_eval(const std::vector<QAItem>& items, const StructuredSceneDescription& ssd,
                    const Respondent& respondent, const AblationMask& mask) {
  if (items.empty()) throw Error(ErrorCode::InvalidArgument, "evaluation needs at least one item");
  if (!respondent.transport) throw Error(ErrorCode::InvalidArgument, "respondent '" + respondent.name + "' has no transport");
  const std::string ssd_text = serialize(apply_ablation(ssd, mask));

  EvalReport report;
  report.respondent = respondent.name;
  report.model = respondent.model;
  report.mask = mask;
  report.system_prompt = std::string(kQaSystemPrompt);
  report.ssd_sha256 = sha256_hex(ssd_text);
  report.ssd_tokens = estimate_tokens(ssd_text);

  std::vector<ChatRequest> requests(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    validate(items[i]);
    requests[i].model = respondent.model;
    requests[i].temperature = respondent.temperature;
    requests[i].messages = build_prompt(ssd_text, items[i]);
    const std::size_t tokens = prompt_tokens(requests[i].messages);
    report.max_prompt_tokens = std::max(report.max_prompt_tokens, tokens);
    if (respondent.context_limit && tokens > respondent.context_limit) {
      throw Error(ErrorCode::ContextLimit, "prompt of about " + std::to_string(tokens) +
                                               " tokens exceeds the context limit of " +
                                               std::to_string(respondent.context_limit) + " tokens of respondent '" +
                                               respondent.name + "'");
    }
  }

  std::vector<std::string> replies(items.size());
  std::vector<std::string> errors(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        replies[i] = respondent.transport->complete(requests[i]).content;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(respondent.max_in_flight, 1), items.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::map<QaCategory, CategoryScore> by_cat;
  for (std::size_t i = 0; i < items.size(); ++i) {
    Transcript t;
    t.item_id = items[i].id;
    t.category = items[i].category;
    t.question = question_block(items[i]);
    t.expected = items[i].answer;
    CategoryScore& s = by_cat[items[i].category];
    s.category = items[i].category;
    ++s.total;
    if (!errors[i].empty()) {
      t.error = errors[i];
      ++s.errors;
    } else {
      t.reply = replies[i];
      t.parsed = parse_answer(replies[i]);
      t.correct = t.parsed.option == items[i].answer;
      if (t.correct) ++s.correct;
      if (t.parsed.option == 'F') ++s.f_count;
      if (t.parsed.malformed()) ++s.malformed;
    }
    report.transcripts.push_back(std::move(t));
  }
  for (QaCategory c : kAllCategories) {
    auto it = by_cat.find(c);
    if (it == by_cat.end()) continue;
    const CategoryScore& s = it->second;
    report.categories.push_back(s);
    report.macro += s.ratio();
    report.total += s.total;
    report.correct += s.correct;
    report.f_count += s.f_count;
    report.malformed += s.malformed;
    report.errors += s.errors;
  }
  report.macro /= static_cast<double>(report.categories.size());
  report.micro = static_cast<double>(report.correct) / static_cast<double>(report.total);
  return report;
}

std::string report_json(const EvalReport& r) {
  ordered_json j;
  j["respondent"] = r.respondent;
  j["model"] = r.model;
  j["mask"] = {{"drop_identity", r.mask.drop_identity},
               {"drop_geometric", r.mask.drop_geometric},
               {"drop_visual", r.mask.drop_visual},
               {"drop_relationship", r.mask.drop_relationship}};
  j["complete"] = r.complete();
  j["ssd_sha256"] = r.ssd_sha256;
  j["ssd_tokens"] = r.ssd_tokens;
  j["max_prompt_tokens"] = r.max_prompt_tokens;
  ordered_json cats = ordered_json::object();
  for (const CategoryScore& s : r.categories) {
    cats[std::string(to_string(s.category))] = {{"ratio", s.ratio()},   {"correct", s.correct},
                                                 {"total", s.total},    {"f", s.f_count},
                                                 {"malformed", s.malformed}, {"errors", s.errors}};
  }
  j["categories"] = cats;
  j["overall"] = {{"macro", r.macro}, {"micro", r.micro}, {"correct", r.correct}, {"total", r.total}};
  j["f_count"] = r.f_count;
  j["malformed_count"] = r.malformed;
  j["error_count"] = r.errors;
  j["system_prompt"] = r.system_prompt;
  ordered_json ts = ordered_json::array();
  for (const Transcript& t : r.transcripts) {
    ordered_json e;
    e["id"] = t.item_id;
    e["category"] = std::string(to_string(t.category));
    e["question"] = t.question;
    e["expected"] = std::string(1, t.expected);
    if (!t.error.empty()) {
      e["error"] = t.error;
    } else {
      e["reply"] = t.reply;
      e["parsed"] = t.parsed.malformed() ? std::string("MALFORMED") : std::string(1, t.parsed.option);
      e["correct"] = t.correct;
    }
    ts.push_back(std::move(e));
  }
  j["transcripts"] = std::move(ts);
  return j.dump(2) + "\n";
}

std::string report_csv(const EvalReport& r) {
  auto ratio = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  std::string head = "respondent,mask";
  std::string row = r.respondent + "," + r.mask.describe();
  for (QaCategory c : kAllCategories) {
    head += "," + std::string(to_string(c));
    row += ",";
    for (const CategoryScore& s : r.categories) {
      if (s.category == c) row += ratio(s.ratio());
    }
  }
  head += ",overall_macro,overall_micro,f_count,malformed_count,error_count\n";
  row += "," + ratio(r.macro) + "," + ratio(r.micro) + "," + std::to_string(r.f_count) + "," +
         std::to_string(r.malformed) + "," + std::to_string(r.errors) + "\n";
  return head + row;
}

}  // namespace urbanscene

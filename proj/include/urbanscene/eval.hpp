// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

// Multiple-choice evaluation of chat respondents against a scene
// description: prompt construction, "Option#Reasoning" reply parsing and
// per-category scoring.

#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "urbanscene/chat.hpp"
#include "urbanscene/oracle.hpp"
#include "urbanscene/ssd.hpp"

namespace urbanscene {

extern const std::string_view kQaSystemPrompt;
extern const std::string_view kAskSystemPrompt;
inline constexpr std::string_view kSceneHeader = "Structured scene description:\n";
inline constexpr std::string_view kQuestionMarker = "\n\nUser Question: ";

struct ParsedAnswer {
  char option = 0;  // 'A'-'D', 'F', or 0 when malformed
  std::string reasoning;
  std::string raw;
  bool malformed() const { return option == 0; }
};

// Optional whitespace, one of A/B/C/D/F in either case, '#', reasoning.
// Anything else is malformed.
ParsedAnswer parse_answer(std::string_view reply);

// System message plus one user message: the scene description, the
// question and the lettered options.
std::vector<ChatMessage> build_prompt(std::string_view ssd_text, const QAItem& q);
std::vector<ChatMessage> build_ask_prompt(std::string_view ssd_text, std::string_view question);
std::size_t prompt_tokens(const std::vector<ChatMessage>& messages);

struct Respondent {
  enum class Kind { Remote, Scripted, Oracle };
  std::string name;
  Kind kind = Kind::Scripted;
  std::shared_ptr<ChatTransport> transport;
  std::string model;
  double temperature = 0.0;
  std::size_t context_limit = 0;  // estimated tokens, 0 for none
  std::size_t max_in_flight = 4;
};

std::string_view to_string(Respondent::Kind kind);

// Remote endpoint behind retries with exponential backoff.
Respondent make_remote_respondent(std::string name, const EndpointConfig& endpoint, std::size_t context_limit,
                                  RetryPolicy retry = {});
Respondent make_scripted_respondent(std::string name, ScriptedTransport::Handler handler);
// Always replies with `reply`.
Respondent make_constant_respondent(std::string name, std::string reply);
// Replies with the character length of the user message.
Respondent make_echo_length_respondent(std::string name);
// Recovers the scene description and question from the prompt and answers
// with the oracle.
Respondent make_oracle_respondent(std::string name);

struct Transcript {
  std::string item_id;
  QaCategory category = QaCategory::Distance;
  std::string question;  // user message after the scene description
  std::string reply;
  ParsedAnswer parsed;
  char expected = 'A';
  bool correct = false;
  std::string error;  // set when no reply was obtained
};

struct CategoryScore {
  QaCategory category = QaCategory::Distance;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t f_count = 0;
  std::size_t malformed = 0;
  std::size_t errors = 0;
  double ratio() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

struct EvalReport {
  std::string respondent;
  std::string model;
  AblationMask mask;
  std::string system_prompt;
  std::string ssd_sha256;
  std::size_t ssd_tokens = 0;
  std::size_t max_prompt_tokens = 0;
  std::vector<CategoryScore> categories;  // categories present, fixed order
  double macro = 0.0;                     // mean of category ratios
  double micro = 0.0;                     // correct / total
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t f_count = 0;
  std::size_t malformed = 0;
  std::size_t errors = 0;
  std::vector<Transcript> transcripts;  // item order
  bool complete() const { return errors == 0; }
};

// Applies the mask, prompts the respondent once per item and scores the
// replies. Items without a reply are recorded with their error and leave
// the report incomplete. Throws ContextLimit before sending anything when a
// prompt exceeds the respondent's limit.
EvalReport run_eval(const std::vector<QAItem>& items, const StructuredSceneDescription& ssd,
                    const Respondent& respondent, const AblationMask& mask = {});

std::string report_json(const EvalReport& report);
std::string report_csv(const EvalReport& report);

}  // namespace urbanscene

// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace urbanscene {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  Io,
  Degenerate,
  NotFound,
  Transport,
  ContextLimit,
  Alignment,
  Fixture,
  Internal,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries a code so the C layer can map
// it onto a status value without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t offset)
      : Error(ErrorCode::Parse, what), line_(line), offset_(offset) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

// Non-fatal diagnostics collected while a stage runs (skipped ways, empty
// footprints, categories that could not be generated...).
struct Warning {
  std::string stage;
  std::string subject;
  std::string message;
};

using Warnings = std::vector<Warning>;

}  // namespace urbanscene

// Copyright 2026 The urbanscene Authors
// SPDX-License-Identifier: Apache-2.0

#include "urbanscene/error.hpp"

namespace urbanscene {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Degenerate: return "degenerate input";
    case ErrorCode::NotFound: return "not found";
    case ErrorCode::Transport: return "transport error";
    case ErrorCode::ContextLimit: return "context limit exceeded";
    case ErrorCode::Alignment: return "alignment error";
    case ErrorCode::Fixture: return "fixture error";
    case ErrorCode::Internal: return "internal error";
  }
  return "unknown error";
}

}  // namespace urbanscene

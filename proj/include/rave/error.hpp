// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace rave {

enum class ErrorCode {
    kInvalidArgument = 1,
    kIo,
    kShape,
    kSchema,
    kReplayMismatch,
    kAdapter,
    kUnavailable,
};

// Core code throws rave::Error; the C API maps code() onto rave_status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace rave

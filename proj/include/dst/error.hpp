// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dst {

enum class ErrorCode {
    // typo augmentation
    IneligibleWord,
    NoEligibleWords,
    // encoder
    EmptyText,
    EmptyBatch,
    InvalidConfig,
    // objective
    EmptyCandidates,
    DimensionMismatch,
    LabelOutOfRange,
    CandidateMismatch,
    KMismatch,
    // training
    BatchTooSmall,
    StepOutOfRange,
    NonFiniteGradient,
    // index
    EmptyCorpus,
    EncoderMismatch,
    // evaluation
    MissingJudgments,
    RaggedVariants,
    GridMismatch,
    InvalidArgument,
    // io
    ParseError,
    DanglingReference,
    ParameterTooSmall,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Process exit status class for an error: 1 usage, 2 data, 3 runtime.
int exit_status(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

 private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace dst

// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include "dst/error.hpp"

namespace dst {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::IneligibleWord: return "IneligibleWord";
        case ErrorCode::NoEligibleWords: return "NoEligibleWords";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::EmptyBatch: return "EmptyBatch";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::EmptyCandidates: return "EmptyCandidates";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
        case ErrorCode::CandidateMismatch: return "CandidateMismatch";
        case ErrorCode::KMismatch: return "KMismatch";
        case ErrorCode::BatchTooSmall: return "BatchTooSmall";
        case ErrorCode::StepOutOfRange: return "StepOutOfRange";
        case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::EncoderMismatch: return "EncoderMismatch";
        case ErrorCode::MissingJudgments: return "MissingJudgments";
        case ErrorCode::RaggedVariants: return "RaggedVariants";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DanglingReference: return "DanglingReference";
        case ErrorCode::ParameterTooSmall: return "ParameterTooSmall";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

int exit_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidConfig:
        case ErrorCode::InvalidArgument:
        case ErrorCode::ParameterTooSmall:
            return 1;
        case ErrorCode::ParseError:
        case ErrorCode::DanglingReference:
        case ErrorCode::MissingJudgments:
        case ErrorCode::RaggedVariants:
        case ErrorCode::EmptyCorpus:
        case ErrorCode::EncoderMismatch:
        case ErrorCode::NoEligibleWords:
        case ErrorCode::IneligibleWord:
        case ErrorCode::EmptyText:
        case ErrorCode::GridMismatch:
            return 2;
        default:
            return 3;
    }
}

}  // namespace dst

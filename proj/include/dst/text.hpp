// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dst {

/// An identified query or passage string.
struct TextRecord {
    std::string id;
    std::string text;

    bool operator==(const TextRecord&) const = default;
};

/// Lowercases ASCII letters and collapses whitespace runs to single spaces.
std::string normalize_text(std::string_view text);

/// Splits on ASCII whitespace, dropping empty tokens.
std::vector<std::string> split_words(std::string_view text);

std::string join_words(const std::vector<std::string>& words);

/// Splits one line on a delimiter, keeping empty fields.
std::vector<std::string> split_fields(std::string_view line, char delimiter = '\t');

}  // namespace dst

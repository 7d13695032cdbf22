// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dst/random.hpp"
#include "dst/text.hpp"

namespace dst::typo {

enum class TypoKind : std::uint8_t { RandInsert, RandDelete, RandSub, SwapNeighbor, SwapAdjacent };

inline constexpr std::array<TypoKind, 5> kAllKinds = {
    TypoKind::RandInsert, TypoKind::RandDelete, TypoKind::RandSub,
    TypoKind::SwapNeighbor, TypoKind::SwapAdjacent};

std::string_view to_string(TypoKind kind);
std::optional<TypoKind> parse_kind(std::string_view name);

/// Letter adjacency on a physical keyboard, used by SwapAdjacent.
class KeyboardAdjacency {
 public:
    /// Row-staggered layout: keys in the same row at distance one and keys in
    /// the next row up or down within one column are adjacent (diagonals included).
    static KeyboardAdjacency from_rows(const std::vector<std::string>& rows);

    /// Tab-separated `letter<TAB>neighbors` lines; '#' starts a comment.
    static KeyboardAdjacency load(const std::filesystem::path& path);

    static const KeyboardAdjacency& qwerty();

    /// Sorted adjacent letters; empty for letters not on the layout.
    const std::vector<char>& neighbors(char letter) const;

    bool is_symmetric() const;

    bool operator==(const KeyboardAdjacency&) const = default;

 private:
    std::array<std::vector<char>, 26> adjacency_{};
};

/// Only purely alphabetic lowercase words of length >= 3 are corrupted.
bool is_eligible_word(std::string_view word);

/// A fully resolved single-word corruption.
struct TypoEdit {
    TypoKind kind;
    std::size_t position = 0;  // insert index, deleted/substituted index, or left index of a swap
    char letter = 0;           // inserted or substituted letter; unused for swaps and deletes

    bool operator==(const TypoEdit&) const = default;
};

/// Applies an explicit edit. Throws IneligibleWord for ineligible words, or
/// InvalidArgument for edits that are out of range or would not change the word.
std::string apply_edit(std::string_view word, const TypoEdit& edit);

/// Draws a random edit of the given kind. Throws IneligibleWord when the word
/// is ineligible or the kind cannot change it (e.g. swapping in "aaa").
TypoEdit draw_edit(std::string_view word, TypoKind kind, Rng& rng,
                   const KeyboardAdjacency& keyboard = KeyboardAdjacency::qwerty());

std::string apply_typo(std::string_view word, TypoKind kind, Rng& rng,
                       const KeyboardAdjacency& keyboard = KeyboardAdjacency::qwerty());

/// Provenance of one generated variant.
struct VariantRecord {
    std::uint64_t seed = 0;
    std::size_t word_index = 0;
    TypoEdit edit{TypoKind::RandInsert};
    std::size_t attempts = 0;  // attempts consumed, at most kRetryBudget
};

struct AugmentedQuerySet {
    TextRecord original;
    std::vector<TextRecord> variants;
    std::vector<VariantRecord> records;
    bool fallback = false;  // no eligible word: variants are verbatim copies
};

inline constexpr std::size_t kRetryBudget = 8;

/// Id of the k-th variant (1-based) of a query.
std::string variant_id(std::string_view query_id, std::size_t k);

/// K misspelled variants of a query, each corrupting exactly one eligible
/// word. Variant k is generated from its own seed derived from `seed` and k,
/// so any single variant can be regenerated in isolation. Throws NoEligibleWords.
AugmentedQuerySet augment_query(const TextRecord& query, std::size_t k, std::uint64_t seed,
                                const KeyboardAdjacency& keyboard = KeyboardAdjacency::qwerty());

/// Like augment_query, but queries without eligible words fall back to K
/// verbatim copies with `fallback` set instead of throwing.
AugmentedQuerySet augment_query_or_copy(const TextRecord& query, std::size_t k, std::uint64_t seed,
                                        const KeyboardAdjacency& keyboard = KeyboardAdjacency::qwerty());

/// Per-query seed for corpus augmentation; depends only on the master seed and query id.
std::uint64_t query_seed(std::uint64_t master_seed, std::string_view query_id);

struct CorpusAugmentation {
    std::vector<AugmentedQuerySet> sets;
    std::vector<std::string> warnings;
};

CorpusAugmentation augment_corpus(const std::vector<TextRecord>& queries, std::size_t k,
                                  std::uint64_t master_seed,
                                  const KeyboardAdjacency& keyboard = KeyboardAdjacency::qwerty());

/// One row of a variants file: `variant_id \t original_query_id \t variant_text`.
struct VariantRow {
    std::string variant_id;
    std::string query_id;
    std::string text;

    bool operator==(const VariantRow&) const = default;
};

std::vector<VariantRow> variant_rows(const CorpusAugmentation& augmentation);
void write_variants_tsv(const std::filesystem::path& path, const std::vector<VariantRow>& rows);
/// Throws ParseError with file:line on malformed rows.
std::vector<VariantRow> read_variants_tsv(const std::filesystem::path& path);

}  // namespace dst::typo

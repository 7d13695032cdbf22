// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#include "dst/typo.hpp"

#include <algorithm>
#include <fstream>

#include "dst/error.hpp"

namespace dst::typo {

namespace {

bool is_lower(char c) { return c >= 'a' && c <= 'z'; }

std::size_t letter_index(char c) { return static_cast<std::size_t>(c - 'a'); }

}  // namespace

std::string_view to_string(TypoKind kind) {
    switch (kind) {
        case TypoKind::RandInsert: return "RandInsert";
        case TypoKind::RandDelete: return "RandDelete";
        case TypoKind::RandSub: return "RandSub";
        case TypoKind::SwapNeighbor: return "SwapNeighbor";
        case TypoKind::SwapAdjacent: return "SwapAdjacent";
    }
    return "?";
}

std::optional<TypoKind> parse_kind(std::string_view name) {
    for (TypoKind k : kAllKinds)
        if (to_string(k) == name) return k;
    return std::nullopt;
}

KeyboardAdjacency KeyboardAdjacency::from_rows(const std::vector<std::string>& rows) {
    KeyboardAdjacency kb;
    auto link = [&](char a, char b) {
        if (a == b || !is_lower(a) || !is_lower(b)) return;
        kb.adjacency_[letter_index(a)].push_back(b);
    };
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string& row = rows[r];
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) link(row[c], row[c - 1]);
            if (c + 1 < row.size()) link(row[c], row[c + 1]);
            for (std::size_t other : {r - 1, r + 1}) {
                if (other >= rows.size()) continue;  // r - 1 wraps for r == 0
                const std::string& next = rows[other];
                for (std::size_t oc = (c == 0 ? 0 : c - 1); oc <= c + 1 && oc < next.size(); ++oc)
                    link(row[c], next[oc]);
            }
        }
    }
    for (auto& list : kb.adjacency_) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return kb;
}

KeyboardAdjacency KeyboardAdjacency::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open keyboard layout " + path.string());
    KeyboardAdjacency kb;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line);
        if (fields.size() != 2 || fields[0].size() != 1 || !is_lower(fields[0][0]))
            fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) +
                                            ": expected 'letter<TAB>neighbors'");
        auto& list = kb.adjacency_[letter_index(fields[0][0])];
        for (char c : fields[1]) {
            if (!is_lower(c) || c == fields[0][0])
                fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) +
                                                ": invalid neighbor '" + std::string(1, c) + "'");
            list.push_back(c);
        }
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    if (!kb.is_symmetric())
        fail(ErrorCode::ParseError, path.string() + ": adjacency is not symmetric");
    return kb;
}

const KeyboardAdjacency& KeyboardAdjacency::qwerty() {
    static const KeyboardAdjacency kb = from_rows({"qwertyuiop", "asdfghjkl", "zxcvbnm"});
    return kb;
}

const std::vector<char>& KeyboardAdjacency::neighbors(char letter) const {
    static const std::vector<char> kEmpty;
    if (!is_lower(letter)) return kEmpty;
    return adjacency_[letter_index(letter)];
}

bool KeyboardAdjacency::is_symmetric() const {
    for (std::size_t a = 0; a < 26; ++a) {
        for (char b : adjacency_[a]) {
            if (letter_index(b) == a) return false;
            const auto& back = adjacency_[letter_index(b)];
            if (!std::binary_search(back.begin(), back.end(), static_cast<char>('a' + a))) return false;
        }
    }
    return true;
}

bool is_eligible_word(std::string_view word) {
    return word.size() >= 3 && std::all_of(word.begin(), word.end(), is_lower);
}

std::string apply_edit(std::string_view word, const TypoEdit& edit) {
    if (!is_eligible_word(word))
        fail(ErrorCode::IneligibleWord, "'" + std::string(word) + "'");
    std::string out(word);
    const std::size_t n = word.size();
    auto bad = [&](const char* why) {
        fail(ErrorCode::InvalidArgument, std::string(to_string(edit.kind)) + " on '" +
                                             std::string(word) + "': " + why);
    };
    switch (edit.kind) {
        case TypoKind::RandInsert:
            if (edit.position == 0 || edit.position >= n) bad("insert position must be interior");
            if (!is_lower(edit.letter)) bad("letter must be lowercase");
            out.insert(out.begin() + static_cast<std::ptrdiff_t>(edit.position), edit.letter);
            break;
        case TypoKind::RandDelete:
            if (edit.position >= n) bad("position out of range");
            out.erase(edit.position, 1);
            break;
        case TypoKind::RandSub:
        case TypoKind::SwapAdjacent:
            if (edit.position >= n) bad("position out of range");
            if (!is_lower(edit.letter) || edit.letter == word[edit.position])
                bad("replacement must be a different lowercase letter");
            out[edit.position] = edit.letter;
            break;
        case TypoKind::SwapNeighbor:
            if (edit.position + 1 >= n) bad("position out of range");
            if (word[edit.position] == word[edit.position + 1]) bad("swap of equal letters");
            std::swap(out[edit.position], out[edit.position + 1]);
            break;
    }
    return out;
}

TypoEdit draw_edit(std::string_view word, TypoKind kind, Rng& rng, const KeyboardAdjacency& keyboard) {
    if (!is_eligible_word(word))
        fail(ErrorCode::IneligibleWord, "'" + std::string(word) + "'");
    const std::size_t n = word.size();
    TypoEdit edit{kind};
    switch (kind) {
        case TypoKind::RandInsert:
            edit.position = 1 + rng.uniform_index(n - 1);
            edit.letter = static_cast<char>('a' + rng.uniform_index(26));
            break;
        case TypoKind::RandDelete:
            edit.position = rng.uniform_index(n);
            break;
        case TypoKind::RandSub: {
            edit.position = rng.uniform_index(n);
            // 25 letters other than the current one
            std::size_t pick = rng.uniform_index(25);
            if (pick >= letter_index(word[edit.position])) ++pick;
            edit.letter = static_cast<char>('a' + pick);
            break;
        }
        case TypoKind::SwapNeighbor: {
            std::vector<std::size_t> slots;
            for (std::size_t i = 0; i + 1 < n; ++i)
                if (word[i] != word[i + 1]) slots.push_back(i);
            if (slots.empty())
                fail(ErrorCode::IneligibleWord, "'" + std::string(word) + "' has no distinct neighbors");
            edit.position = slots[rng.uniform_index(slots.size())];
            break;
        }
        case TypoKind::SwapAdjacent: {
            std::vector<std::size_t> slots;
            for (std::size_t i = 0; i < n; ++i)
                if (!keyboard.neighbors(word[i]).empty()) slots.push_back(i);
            if (slots.empty())
                fail(ErrorCode::IneligibleWord, "'" + std::string(word) + "' has no keyboard neighbors");
            edit.position = slots[rng.uniform_index(slots.size())];
            const auto& adj = keyboard.neighbors(word[edit.position]);
            edit.letter = adj[rng.uniform_index(adj.size())];
            break;
        }
    }
    return edit;
}

std::string apply_typo(std::string_view word, TypoKind kind, Rng& rng, const KeyboardAdjacency& keyboard) {
    return apply_edit(word, draw_edit(word, kind, rng, keyboard));
}

std::string variant_id(std::string_view query_id, std::size_t k) {
    return std::string(query_id) + "." + std::to_string(k);
}

AugmentedQuerySet augment_query(const TextRecord& query, std::size_t k, std::uint64_t seed,
                                const KeyboardAdjacency& keyboard) {
    AugmentedQuerySet set;
    set.original = {query.id, normalize_text(query.text)};
    const std::vector<std::string> words = split_words(set.original.text);
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < words.size(); ++i)
        if (is_eligible_word(words[i])) eligible.push_back(i);
    if (eligible.empty())
        fail(ErrorCode::NoEligibleWords, "query " + query.id + ": '" + set.original.text + "'");

    set.variants.reserve(k);
    set.records.reserve(k);
    for (std::size_t v = 1; v <= k; ++v) {
        VariantRecord record;
        record.seed = derive_seed(seed, v);
        Rng rng(record.seed);
        std::vector<std::string> out = words;
        for (std::size_t attempt = 1; attempt <= kRetryBudget; ++attempt) {
            record.attempts = attempt;
            const std::size_t wi = eligible[rng.uniform_index(eligible.size())];
            const TypoKind kind = kAllKinds[rng.uniform_index(kAllKinds.size())];
            try {
                TypoEdit edit = draw_edit(words[wi], kind, rng, keyboard);
                std::string corrupted = apply_edit(words[wi], edit);
                out[wi] = corrupted;
                record.word_index = wi;
                record.edit = edit;
                if (corrupted != words[wi]) break;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::IneligibleWord) throw;
            }
        }
        set.variants.push_back({variant_id(query.id, v), join_words(out)});
        set.records.push_back(record);
    }
    return set;
}

AugmentedQuerySet augment_query_or_copy(const TextRecord& query, std::size_t k, std::uint64_t seed,
                                        const KeyboardAdjacency& keyboard) {
    try {
        return augment_query(query, k, seed, keyboard);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoEligibleWords) throw;
    }
    AugmentedQuerySet set;
    set.original = {query.id, normalize_text(query.text)};
    set.fallback = true;
    for (std::size_t v = 1; v <= k; ++v) {
        set.variants.push_back({variant_id(query.id, v), set.original.text});
        VariantRecord record;
        record.seed = derive_seed(seed, v);
        set.records.push_back(record);
    }
    return set;
}

std::uint64_t query_seed(std::uint64_t master_seed, std::string_view query_id) {
    return derive_seed(master_seed, query_id);
}

CorpusAugmentation augment_corpus(const std::vector<TextRecord>& queries, std::size_t k,
                                  std::uint64_t master_seed, const KeyboardAdjacency& keyboard) {
    CorpusAugmentation out;
    out.sets.reserve(queries.size());
    for (const TextRecord& q : queries) {
        out.sets.push_back(augment_query_or_copy(q, k, query_seed(master_seed, q.id), keyboard));
        if (out.sets.back().fallback)
            out.warnings.push_back("query " + q.id + " has no eligible words; variants copy the original");
    }
    return out;
}

std::vector<VariantRow> variant_rows(const CorpusAugmentation& augmentation) {
    std::vector<VariantRow> rows;
    for (const auto& set : augmentation.sets)
        for (const auto& v : set.variants) rows.push_back({v.id, set.original.id, v.text});
    return rows;
}

void write_variants_tsv(const std::filesystem::path& path, const std::vector<VariantRow>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    for (const auto& r : rows) out << r.variant_id << '\t' << r.query_id << '\t' << r.text << '\n';
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<VariantRow> read_variants_tsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open variants " + path.string());
    std::vector<VariantRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_fields(line);
        if (f.size() != 3 || f[0].empty() || f[1].empty())
            fail(ErrorCode::ParseError,
                 path.string() + ":" + std::to_string(line_no) + ": expected variant_id<TAB>query_id<TAB>text");
        rows.push_back({f[0], f[1], f[2]});
    }
    return rows;
}

}  // namespace dst::typo

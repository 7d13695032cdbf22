// Copyright 2026 The dst-retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dst/error.hpp"

namespace dst {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written with native little-endian layout");

/// Append-only little-endian byte buffer.
class ByteWriter {
 public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        buffer_.insert(buffer_.end(), p, p + n);
    }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void f64(double v) { bytes(&v, 8); }
    void f64s(std::span<const double> v) { bytes(v.data(), v.size() * sizeof(double)); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }

    const std::vector<std::uint8_t>& data() const { return buffer_; }
    std::vector<std::uint8_t> release() { return std::move(buffer_); }

 private:
    std::vector<std::uint8_t> buffer_;
};

class ByteReader {
 public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    void bytes(void* out, std::size_t n) {
        if (n > data_.size() - pos_) fail(ErrorCode::ParseError, "truncated binary data");
        std::memcpy(out, data_.data() + pos_, n);
        pos_ += n;
    }
    std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
    std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
    double f64() { double v; bytes(&v, 8); return v; }
    void f64s(std::span<double> out) { bytes(out.data(), out.size() * sizeof(double)); }
    std::string str() {
        std::uint32_t n = u32();
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }

    std::size_t remaining() const { return data_.size() - pos_; }

 private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace dst

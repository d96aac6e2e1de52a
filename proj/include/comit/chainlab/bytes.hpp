// Copyright 2026 The comit-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace comit {

using Bytes = std::vector<std::uint8_t>;
using Hash32 = std::array<std::uint8_t, 32>;
using Amount = std::uint64_t;
using Height = std::uint64_t;

std::string to_hex(std::span<const std::uint8_t> data);
Bytes from_hex(std::string_view hex);
Hash32 hash32_from_hex(std::string_view hex);

inline std::span<const std::uint8_t> as_bytes(std::string_view s)
{
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Append-only little-endian writer used for every canonical serialization in
/// the project. Variable-length fields carry a u32 length prefix.
class Writer
{
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void raw(std::span<const std::uint8_t> data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
    void var_bytes(std::span<const std::uint8_t> data);
    void str(std::string_view s) { var_bytes(as_bytes(s)); }

    const Bytes& bytes() const& { return buf_; }
    Bytes take() && { return std::move(buf_); }

private:
    Bytes buf_;
};

class Reader
{
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::span<const std::uint8_t> raw(std::size_t n);
    Bytes var_bytes();
    std::string str();

    bool done() const { return pos_ == data_.size(); }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

/// Checked u64 arithmetic for amounts.
class AmountOverflow : public std::overflow_error
{
public:
    AmountOverflow() : std::overflow_error("value-overflow") {}
};

inline Amount checked_add(Amount a, Amount b)
{
    Amount r;
    if (__builtin_add_overflow(a, b, &r))
        throw AmountOverflow();
    return r;
}

inline Amount checked_mul(Amount a, Amount b)
{
    Amount r;
    if (__builtin_mul_overflow(a, b, &r))
        throw AmountOverflow();
    return r;
}

} // namespace comit

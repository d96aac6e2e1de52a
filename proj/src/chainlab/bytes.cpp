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

#include "comit/chainlab/bytes.hpp"

namespace comit {

std::string to_hex(std::span<const std::uint8_t> data)
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data)
    {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0f]);
    }
    return out;
}

namespace {
int nibble(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    throw std::invalid_argument("invalid hex digit");
}
} // namespace

Bytes from_hex(std::string_view hex)
{
    if (hex.size() % 2 != 0)
        throw std::invalid_argument("odd-length hex string");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    return out;
}

Hash32 hash32_from_hex(std::string_view hex)
{
    auto raw = from_hex(hex);
    if (raw.size() != 32)
        throw std::invalid_argument("expected 32-byte hex digest");
    Hash32 out;
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}

void Writer::u32(std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Writer::u64(std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Writer::var_bytes(std::span<const std::uint8_t> data)
{
    u32(static_cast<std::uint32_t>(data.size()));
    raw(data);
}

std::span<const std::uint8_t> Reader::raw(std::size_t n)
{
    if (remaining() < n)
        throw std::out_of_range("truncated input");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t Reader::u8()
{
    return raw(1)[0];
}

std::uint32_t Reader::u32()
{
    auto b = raw(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t Reader::u64()
{
    auto b = raw(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

Bytes Reader::var_bytes()
{
    auto n = u32();
    auto b = raw(n);
    return Bytes(b.begin(), b.end());
}

std::string Reader::str()
{
    auto b = var_bytes();
    return std::string(b.begin(), b.end());
}

} // namespace comit

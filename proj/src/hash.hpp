#pragma once

#include <bit>
#include <cstdint>
#include <string_view>

namespace uelicit::detail {

// 64-bit FNV-1a over the byte representation of the values fed in.
class Fnv1a
{
public:
    void add_bytes(const void* data, std::size_t n) noexcept
    {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
    }
    void add(std::uint64_t v) noexcept { add_bytes(&v, sizeof v); }
    void add(double v) noexcept { add(std::bit_cast<std::uint64_t>(v)); }
    void add(std::string_view s) noexcept
    {
        add(static_cast<std::uint64_t>(s.size()));
        add_bytes(s.data(), s.size());
    }
    std::uint64_t value() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

} // namespace uelicit::detail

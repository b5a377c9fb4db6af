#pragma once

#include <cstdint>
#include <stdexcept>

namespace naer {

/// Electrode array geometry. Channels are mapped row-major:
/// channel c sits at (x, y) = (c % n_cols, c / n_cols).
struct ArrayGeometry {
    uint16_t n_rows = 1;
    uint16_t n_cols = 1;

    uint32_t capacity() const { return uint32_t(n_rows) * n_cols; }

    uint32_t channel_of(uint16_t x, uint16_t y) const
    {
        return uint32_t(y) * n_cols + x;
    }

    void address_of(uint32_t channel, uint16_t& x, uint16_t& y) const
    {
        if (channel >= capacity()) {
            throw std::out_of_range("channel outside array geometry");
        }
        x = uint16_t(channel % n_cols);
        y = uint16_t(channel / n_cols);
    }

    /// Address payload bits: ceil(log2 n_rows) + ceil(log2 n_cols).
    /// Fractional bits are unphysical, so we round up.
    int address_bits() const
    {
        return ceil_log2(n_rows) + ceil_log2(n_cols);
    }

    static int ceil_log2(uint32_t n)
    {
        if (n <= 1) return 0;
        int bits = 0;
        uint32_t v = n - 1;
        while (v) {
            ++bits;
            v >>= 1;
        }
        return bits;
    }

    /// Smallest near-square geometry holding n channels.
    static ArrayGeometry near_square(uint32_t n);
};

}  // namespace naer

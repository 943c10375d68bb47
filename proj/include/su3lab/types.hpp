#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace su3lab {

enum class Precision { F32, F64 };

constexpr std::string_view to_string(Precision p) {
    return p == Precision::F32 ? "f32" : "f64";
}

// Real/imaginary pair. The default constructor is user-provided and writes
// nothing: containers and placement-new must not touch the underlying pages,
// so that the first touch happens in the initialization routine, on the
// worker that will later compute with the data.
template <typename T>
struct Complex {
    T real;
    T imag;

    Complex() {} // leaves members indeterminate
    constexpr Complex(T re, T im) : real(re), imag(im) {}

    friend constexpr bool operator==(const Complex &a, const Complex &b) {
        return a.real == b.real && a.imag == b.imag;
    }
};

template <typename T>
constexpr Complex<T> operator*(const Complex<T> &a, const Complex<T> &b) {
    return {a.real * b.real - a.imag * b.imag,
            a.real * b.imag + a.imag * b.real};
}

template <typename T>
constexpr Complex<T> operator+(const Complex<T> &a, const Complex<T> &b) {
    return {a.real + b.real, a.imag + b.imag};
}

// acc += a*b with a fixed scalar operation order: 2 muls and 2 adds per
// component, 4 muls + 4 adds total. Every dot-product style kernel goes
// through here so that accumulation order (and flop counts) stay identical.
template <typename T>
constexpr void cmul_acc(Complex<T> &acc, const Complex<T> &a, const Complex<T> &b) {
    acc.real += a.real * b.real - a.imag * b.imag;
    acc.imag += a.real * b.imag + a.imag * b.real;
}

// acc += a*b written as four explicit multiply-add pairs; each line maps to
// one scalar FMA. Accumulation is reassociated relative to cmul_acc, which
// is why cross-variant checks are tolerance based.
template <typename T>
constexpr void cfma(Complex<T> &acc, const Complex<T> &a, const Complex<T> &b) {
    acc.real = acc.real + a.real * b.real;
    acc.real = acc.real - a.imag * b.imag;
    acc.imag = acc.imag + a.real * b.imag;
    acc.imag = acc.imag + a.imag * b.real;
}

// 3x3 complex matrix, row-major: e[row][col].
template <typename T>
struct Su3Matrix {
    Complex<T> e[3][3];
};

static_assert(sizeof(Su3Matrix<float>) == 72);
static_assert(sizeof(Su3Matrix<double>) == 144);

namespace detail {

constexpr std::size_t pad_to_64(std::size_t used) {
    return (used + 63) / 64 * 64 - used;
}

} // namespace detail

// One lattice point: four link matrices plus coordinates, flat index and
// parity, padded out to a multiple of 64 bytes (320 fp32 / 640 fp64).
template <typename T>
struct Site {
    static constexpr std::size_t payload_bytes = 4 * sizeof(Su3Matrix<T>);
    static constexpr std::size_t meta_bytes = 6 * sizeof(std::int32_t);
    static constexpr std::size_t pad_bytes = detail::pad_to_64(payload_bytes + meta_bytes);
    static_assert(pad_bytes > 0, "scalar type leaves no room for explicit padding");

    Su3Matrix<T> link[4];
    std::int32_t x, y, z, t;
    std::int32_t index;
    std::int32_t parity;
    std::byte pad[pad_bytes];

    Site() {} // no-touch constructor, see Complex
};

static_assert(sizeof(Site<float>) == 320);
static_assert(sizeof(Site<double>) == 640);
static_assert(sizeof(Site<float>) % 64 == 0);
static_assert(sizeof(Site<double>) % 64 == 0);

// The constant 4-link operand shared by every site. Small enough to stay
// cache resident for the whole run.
template <typename T>
struct LinkSet {
    Su3Matrix<T> b[4];
};

static_assert(sizeof(LinkSet<float>) == 288);
static_assert(sizeof(LinkSet<double>) == 576);

} // namespace su3lab

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "gsal/error.hpp"
#include "gsal/grid.hpp"

namespace gsal {

static_assert(std::endian::native == std::endian::little, "tensor IO assumes a little-endian host");

/// H x W x N float32 tensor, map index outermost then rows then columns.
struct Tensor {
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::uint32_t count = 0;
    std::vector<float> data;

    float& at(std::uint32_t n, std::uint32_t y, std::uint32_t x) {
        return data[(static_cast<std::size_t>(n) * height + y) * width + x];
    }
    float at(std::uint32_t n, std::uint32_t y, std::uint32_t x) const {
        return data[(static_cast<std::size_t>(n) * height + y) * width + x];
    }
    bool operator==(const Tensor&) const = default;
};

inline constexpr std::array<char, 4> kTensorMagic{'G', 'S', 'A', 'L'};
inline constexpr std::uint16_t kTensorVersion = 1;
inline constexpr std::uint16_t kDtypeF32 = 1;
inline constexpr std::size_t kTensorHeaderBytes = 20;
/// Upper bound on the payload a reader will accept (4 GiB).
inline constexpr std::uint64_t kMaxTensorPayload = 1ULL << 32;

class TensorMagicError : public FormatError {
public:
    using FormatError::FormatError;
};
class TensorTruncatedError : public FormatError {
public:
    using FormatError::FormatError;
};
class TensorDimensionError : public FormatError {
public:
    using FormatError::FormatError;
};

namespace detail {

template <typename T>
void put(std::vector<char>& buf, T v) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T get(const char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

inline std::uint64_t checked_element_count(std::uint32_t h, std::uint32_t w, std::uint32_t n) {
    if (h == 0 || w == 0 || n == 0)
        throw TensorDimensionError("tensor dimensions must be positive, got H=" + std::to_string(h) +
                                   " W=" + std::to_string(w) + " N=" + std::to_string(n));
    const std::uint64_t plane = static_cast<std::uint64_t>(h) * w;
    if (plane > kMaxTensorPayload / 4 / n)
        throw TensorDimensionError("tensor dimensions overflow the payload limit: H=" + std::to_string(h) +
                                   " W=" + std::to_string(w) + " N=" + std::to_string(n));
    return plane * n;
}

}  // namespace detail

inline std::vector<char> encode_tensor(const Tensor& t) {
    const std::uint64_t elems = detail::checked_element_count(t.height, t.width, t.count);
    if (t.data.size() != elems) throw ValidationError("tensor data size does not match its dimensions");
    std::vector<char> buf(kTensorMagic.begin(), kTensorMagic.end());
    buf.reserve(kTensorHeaderBytes + elems * 4);
    detail::put(buf, kTensorVersion);
    detail::put(buf, t.height);
    detail::put(buf, t.width);
    detail::put(buf, t.count);
    detail::put(buf, kDtypeF32);
    const auto* bytes = reinterpret_cast<const char*>(t.data.data());
    buf.insert(buf.end(), bytes, bytes + elems * 4);
    return buf;
}

inline Tensor decode_tensor(const std::vector<char>& buf, const std::string& origin = "<memory>") {
    if (buf.size() < 4 || !std::equal(kTensorMagic.begin(), kTensorMagic.end(), buf.begin()))
        throw TensorMagicError(origin + ": not a GSAL tensor (bad magic)");
    if (buf.size() < kTensorHeaderBytes) throw TensorTruncatedError(origin + ": truncated header");
    const auto version = detail::get<std::uint16_t>(buf.data() + 4);
    if (version != kTensorVersion) throw FormatError(origin + ": unsupported tensor version " + std::to_string(version));
    Tensor t;
    t.height = detail::get<std::uint32_t>(buf.data() + 6);
    t.width = detail::get<std::uint32_t>(buf.data() + 10);
    t.count = detail::get<std::uint32_t>(buf.data() + 14);
    const auto dtype = detail::get<std::uint16_t>(buf.data() + 18);
    if (dtype != kDtypeF32) throw FormatError(origin + ": unsupported dtype code " + std::to_string(dtype));
    const std::uint64_t elems = detail::checked_element_count(t.height, t.width, t.count);
    const std::uint64_t payload = buf.size() - kTensorHeaderBytes;
    if (payload < elems * 4)
        throw TensorTruncatedError(origin + ": truncated payload (" + std::to_string(payload) + " of " +
                                   std::to_string(elems * 4) + " bytes)");
    if (payload > elems * 4) throw FormatError(origin + ": trailing bytes after payload");
    t.data.resize(elems);
    std::memcpy(t.data.data(), buf.data() + kTensorHeaderBytes, elems * 4);
    return t;
}

/// Callers must not write the same path concurrently.
inline void write_tensor(const std::string& path, const Tensor& t) {
    const auto buf = encode_tensor(t);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path, path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed: " + path, path);
}

inline Tensor read_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("tensor file not found: " + path, path);
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_tensor(buf, path);
}

inline Tensor tensor_from_grids(const std::vector<GridD>& maps) {
    if (maps.empty()) throw TensorDimensionError("cannot build a tensor from zero maps");
    Tensor t;
    t.width = static_cast<std::uint32_t>(maps.front().width());
    t.height = static_cast<std::uint32_t>(maps.front().height());
    t.count = static_cast<std::uint32_t>(maps.size());
    t.data.reserve(static_cast<std::size_t>(t.width) * t.height * t.count);
    for (const auto& m : maps) {
        if (m.width() != maps.front().width() || m.height() != maps.front().height())
            throw ValidationError("maps differ in shape");
        for (double v : m) t.data.push_back(static_cast<float>(v));
    }
    return t;
}

inline std::vector<GridD> grids_from_tensor(const Tensor& t) {
    std::vector<GridD> maps;
    maps.reserve(t.count);
    const std::size_t plane = static_cast<std::size_t>(t.width) * t.height;
    for (std::uint32_t n = 0; n < t.count; ++n) {
        GridD g(static_cast<int>(t.width), static_cast<int>(t.height));
        for (std::size_t i = 0; i < plane; ++i) g.data()[i] = t.data[n * plane + i];
        maps.push_back(std::move(g));
    }
    return maps;
}

}  // namespace gsal

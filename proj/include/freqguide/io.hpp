// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "freqguide/tensor.hpp"

namespace freqguide {

enum class DType : std::uint8_t { f64 = 0, f32 = 1 };

inline constexpr std::array<char, 4> tensor_magic{'F', 'Q', 'G', '1'};
inline constexpr std::size_t tensor_header_size = 4 + 1 + 1 + 4 * 4;

/// Writes bytes to path via a sibling temp file and a rename, so readers
/// never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::io, "cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) fail(ErrorKind::io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorKind::io, "cannot rename " + tmp.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

namespace detail {

inline void put_le(std::string& out, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_le(std::string_view in, std::size_t pos, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    return v;
}

} // namespace detail

inline std::string encode_tensor(const Tensor4& t, DType dtype = DType::f64) {
    const Dims& d = t.dims();
    for (std::size_t v : {d.batch, d.channels, d.height, d.width})
        if (v > 0xffffffffULL) fail(ErrorKind::shape, "dimension too large for file format");
    std::string out;
    const int width = dtype == DType::f64 ? 8 : 4;
    out.reserve(tensor_header_size + t.size() * width);
    out.append(tensor_magic.data(), tensor_magic.size());
    out.push_back(static_cast<char>(dtype));
    out.push_back(static_cast<char>(4));
    for (std::size_t v : {d.batch, d.channels, d.height, d.width}) detail::put_le(out, v, 4);
    for (double v : t.data()) {
        if (dtype == DType::f64)
            detail::put_le(out, std::bit_cast<std::uint64_t>(v), 8);
        else {
            const float f = static_cast<float>(v);
            if (!std::isfinite(f)) fail(ErrorKind::domain, "value " + std::to_string(v) + " overflows float32");
            detail::put_le(out, std::bit_cast<std::uint32_t>(f), 4);
        }
    }
    return out;
}

inline Tensor4 decode_tensor(std::string_view bytes) {
    if (bytes.size() < 4) throw FormatError(bytes.size(), "truncated magic");
    for (std::size_t i = 0; i < 4; ++i)
        if (bytes[i] != tensor_magic[i]) throw FormatError(i, "bad magic");
    if (bytes.size() < 5) throw FormatError(4, "missing dtype");
    const auto code = static_cast<unsigned char>(bytes[4]);
    if (code > 1) throw FormatError(4, "unsupported dtype " + std::to_string(code));
    const DType dtype = static_cast<DType>(code);
    if (bytes.size() < 6) throw FormatError(5, "missing ndim");
    if (bytes[5] != 4)
        throw FormatError(5, "unsupported ndim " +
                                 std::to_string(static_cast<unsigned char>(bytes[5])));
    if (bytes.size() < tensor_header_size) throw FormatError(bytes.size(), "truncated header");
    std::array<std::size_t, 4> dims{};
    for (std::size_t i = 0; i < 4; ++i) {
        dims[i] = detail::get_le(bytes, 6 + 4 * i, 4);
        if (dims[i] == 0) throw FormatError(6 + 4 * i, "zero dimension");
    }
    const Dims d{dims[0], dims[1], dims[2], dims[3]};
    const std::size_t width = dtype == DType::f64 ? 8 : 4;
    const std::size_t expected = tensor_header_size + d.size() * width;
    if (bytes.size() < expected)
        throw FormatError(bytes.size(), "truncated payload, expected " +
                                            std::to_string(expected) + " bytes");
    if (bytes.size() > expected) throw FormatError(expected, "trailing bytes after payload");
    std::vector<double> data(d.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t pos = tensor_header_size + i * width;
        double v = dtype == DType::f64
                       ? std::bit_cast<double>(detail::get_le(bytes, pos, 8))
                       : static_cast<double>(std::bit_cast<float>(
                             static_cast<std::uint32_t>(detail::get_le(bytes, pos, 4))));
        if (!std::isfinite(v)) throw FormatError(pos, "non-finite value");
        data[i] = v;
    }
    return Tensor4(d, std::move(data));
}

inline void write_tensor(const std::filesystem::path& path, const Tensor4& t,
                         DType dtype = DType::f64) {
    require_finite(t, "tensor");
    write_file_atomic(path, encode_tensor(t, dtype));
}

inline Tensor4 read_tensor(const std::filesystem::path& path) {
    return decode_tensor(read_file(path));
}

using CsvCell = std::variant<std::int64_t, double, std::string>;

/// 17 significant digits (like %.17g), which parses back to the same double.
inline std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

inline std::string csv_field(const CsvCell& cell) {
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
    const std::string& s = std::get<std::string>(cell);
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q.push_back('"');
        q.push_back(c);
    }
    q.push_back('"');
    return q;
}

inline std::string encode_csv(const std::vector<std::string>& columns,
                              const std::vector<std::vector<CsvCell>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out.push_back(',');
        out += csv_field(columns[i]);
    }
    out.push_back('\n');
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            fail(ErrorKind::usage, "csv row has " + std::to_string(row.size()) + " cells, expected " +
                                       std::to_string(columns.size()));
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out.push_back(',');
            out += csv_field(row[i]);
        }
        out.push_back('\n');
    }
    return out;
}

inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                      const std::vector<std::vector<CsvCell>>& rows) {
    write_file_atomic(path, encode_csv(columns, rows));
}

} // namespace freqguide

#include "dnd/dataio.hpp"

#include <array>
#include <charconv>
#include <cstring>

namespace dnd {

namespace detail {

namespace {

constexpr std::array<char, 4> kMagic = {'D', 'N', 'B', '1'};

void append_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>((v >> (8 * k)) & 0xff));
}

std::uint64_t decode_u64_le(const std::uint8_t* bytes) {
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
    return v;
}

}  // namespace

std::vector<std::uint8_t> encode_header(const DnbHeader& header) {
    std::vector<std::uint8_t> out;
    out.reserve(header.header_bytes());
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    out.push_back(static_cast<std::uint8_t>(header.dtype));
    out.push_back(static_cast<std::uint8_t>(header.extents.size()));
    for (auto e : header.extents) append_u64_le(out, e);
    return out;
}

void write_at(const std::string& path, std::uint64_t byte_offset, const char* bytes,
              std::size_t count) {
    std::fstream out(path, std::ios::binary | std::ios::in | std::ios::out);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out.seekp(static_cast<std::streamoff>(byte_offset));
    out.write(bytes, static_cast<std::streamsize>(count));
    if (!out) throw DataError("write to " + path + " failed");
}

void read_at(const std::string& path, std::uint64_t byte_offset, char* bytes, std::size_t count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path + " for reading");
    in.seekg(static_cast<std::streamoff>(byte_offset));
    in.read(bytes, static_cast<std::streamsize>(count));
    if (in.gcount() != static_cast<std::streamsize>(count))
        throw DataError("short read from " + path);
}

}  // namespace detail

DnbHeader dnb_read_header(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("dnb_read_header: cannot open " + path);

    std::array<std::uint8_t, 6> fixed{};
    in.read(reinterpret_cast<char*>(fixed.data()), fixed.size());
    if (in.gcount() != static_cast<std::streamsize>(fixed.size()))
        throw DataError("dnb_read_header: " + path + " is shorter than the fixed header");
    if (std::memcmp(fixed.data(), detail::kMagic.data(), 4) != 0)
        throw DataError("dnb_read_header: bad magic in " + path + ", expected \"DNB1\"");

    DnbHeader header;
    const std::uint8_t dtype_code = fixed[4];
    if (dtype_code != static_cast<std::uint8_t>(DnbDtype::f32) &&
        dtype_code != static_cast<std::uint8_t>(DnbDtype::f64))
        throw DataError("dnb_read_header: unknown dtype_code " + std::to_string(dtype_code) +
                        " in " + path);
    header.dtype = static_cast<DnbDtype>(dtype_code);

    const std::uint8_t ndim = fixed[5];
    if (ndim == 0) throw DataError("dnb_read_header: ndim must be at least 1 in " + path);

    std::vector<std::uint8_t> raw(static_cast<std::size_t>(ndim) * 8);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw DataError("dnb_read_header: truncated extents in " + path);
    for (std::uint8_t k = 0; k < ndim; ++k)
        header.extents.push_back(detail::decode_u64_le(raw.data() + static_cast<std::size_t>(k) * 8));
    return header;
}

namespace {

std::vector<double> parse_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        std::size_t lo = pos, hi = comma;
        while (lo < hi && (line[lo] == ' ' || line[lo] == '\t')) ++lo;
        while (hi > lo && (line[hi - 1] == ' ' || line[hi - 1] == '\t' || line[hi - 1] == '\r')) --hi;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(line.data() + lo, line.data() + hi, v);
        if (ec != std::errc{} || ptr != line.data() + hi)
            throw DataError("csv_to_dnb: line " + std::to_string(line_no) + ", column " +
                            std::to_string(values.size() + 1) + ": cannot parse \"" +
                            line.substr(lo, hi - lo) + "\" as a number");
        values.push_back(v);
        pos = comma + 1;
        if (comma == line.size()) break;
    }
    return values;
}

bool blank(const std::string& line) {
    for (char c : line)
        if (c != ' ' && c != '\t' && c != '\r') return false;
    return true;
}

}  // namespace

void csv_to_dnb(const std::string& src_path, const std::string& dst_path, DnbDtype dtype,
                bool skip_header) {
    std::ifstream in(src_path);
    if (!in) throw DataError("csv_to_dnb: cannot open " + src_path);

    std::vector<double> values;
    std::size_t rows = 0, cols = 0, line_no = 0;
    std::string line;
    bool skipped = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_header && !skipped) {
            skipped = true;
            continue;
        }
        if (blank(line)) continue;
        auto parsed = parse_csv_line(line, line_no);
        if (rows == 0) {
            cols = parsed.size();
        } else if (parsed.size() != cols) {
            throw DataError("csv_to_dnb: line " + std::to_string(line_no) + ": expected " +
                            std::to_string(cols) + " columns, got " + std::to_string(parsed.size()));
        }
        values.insert(values.end(), parsed.begin(), parsed.end());
        ++rows;
    }
    if (rows == 0) throw DataError("csv_to_dnb: " + src_path + " holds no data rows");

    DnbHeader header;
    header.dtype = dtype;
    header.extents = {rows, cols};
    const auto bytes = detail::encode_header(header);

    std::ofstream out(dst_path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("csv_to_dnb: cannot create " + dst_path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (dtype == DnbDtype::f64) {
        out.write(reinterpret_cast<const char*>(values.data()),
                  static_cast<std::streamsize>(values.size() * sizeof(double)));
    } else {
        std::vector<float> narrowed(values.begin(), values.end());
        out.write(reinterpret_cast<const char*>(narrowed.data()),
                  static_cast<std::streamsize>(narrowed.size() * sizeof(float)));
    }
    if (!out) throw DataError("csv_to_dnb: write to " + dst_path + " failed");
}

}  // namespace dnd

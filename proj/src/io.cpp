#include "ssm/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "ssm/errors.hpp"

namespace ssm::io {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'C', 'L', 'T', 'I'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[offset + i]) << (8 * i);
    return value;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
    return bytes;
}

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("error while writing '" + path.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("error while writing '" + path.string() + "'");
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string real17(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

double parse_real(const std::string& text, const std::string& field) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw FormatError(field, "cannot parse '" + text + "' as a number in " + field);
    return v;
}

Matrix matrix_of(Stored s) {
    if (auto* m = std::get_if<Matrix>(&s)) return std::move(*m);
    return std::get<SignalBlock>(s).to_matrix();
}

}  // namespace

std::string shortest(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::vector<std::uint8_t> encode(const Matrix& a, FileKind kind) {
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderBytes + 8 * a.size());
    for (std::uint8_t b : kMagic) out.push_back(b);
    put_le<std::uint32_t>(out, kFormatVersion);
    out.push_back(static_cast<std::uint8_t>(kind));
    put_le<std::uint64_t>(out, a.rows());
    put_le<std::uint64_t>(out, a.cols());
    for (double v : a.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

Stored decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
        throw FormatError("magic", "bad magic (expected \"CLTI\")");
    if (bytes.size() < kHeaderBytes) throw FormatError("header", "truncated header (" + std::to_string(bytes.size()) + " bytes)");
    const auto version = get_le<std::uint32_t>(bytes, 4);
    if (version != kFormatVersion) throw FormatError("version", "unsupported version " + std::to_string(version));
    const std::uint8_t kind = bytes[8];
    if (kind > 1) throw FormatError("kind", "bad kind " + std::to_string(kind));
    const auto rows = get_le<std::uint64_t>(bytes, 9);
    const auto cols = get_le<std::uint64_t>(bytes, 17);
    if (rows == 0) throw FormatError("rows", "rows must be >= 1");
    if (cols == 0) throw FormatError("cols", "cols must be >= 1");
    const std::uint64_t payload = bytes.size() - kHeaderBytes;
    if (rows > payload / 8 / cols || rows * cols * 8 != payload)
        throw FormatError("payload", "payload is " + std::to_string(payload) + " bytes, expected " + std::to_string(rows) +
                                         "x" + std::to_string(cols) + " doubles");
    std::vector<double> data(rows * cols);
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, kHeaderBytes + 8 * i));
        if (!std::isfinite(data[i])) throw FormatError("payload", "non-finite entry at index " + std::to_string(i));
    }
    Matrix m(rows, cols, std::move(data));
    if (kind == static_cast<std::uint8_t>(FileKind::signal)) return SignalBlock::from_matrix(m);
    return m;
}

void write_matrix(const fs::path& path, const Matrix& a) {
    if (a.empty()) throw ContractError("write_matrix: empty matrix");
    write_bytes(path, encode(a, FileKind::matrix));
}

void write_signal(const fs::path& path, const SignalBlock& s) {
    if (s.dim() == 0 || s.length() == 0) throw ContractError("write_signal: empty signal block");
    write_bytes(path, encode(s.to_matrix(), FileKind::signal));
}

Stored read_file(const fs::path& path) {
    const auto bytes = read_bytes(path);
    try {
        return decode(bytes);
    } catch (const FormatError& e) {
        throw FormatError(e.field(), path.string() + ": " + e.what());
    }
}

Matrix read_matrix(const fs::path& path) { return matrix_of(read_file(path)); }

SignalBlock read_signal(const fs::path& path) {
    Stored s = read_file(path);
    if (auto* b = std::get_if<SignalBlock>(&s)) return std::move(*b);
    return SignalBlock::from_matrix(std::get<Matrix>(s));
}

Matrix read_csv_matrix(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::vector<double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::size_t count = 0;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const auto b = cell.find_first_not_of(" \t");
            const auto e = cell.find_last_not_of(" \t");
            cell = b == std::string::npos ? std::string() : cell.substr(b, e - b + 1);
            const double v = parse_real(cell, "row " + std::to_string(rows + 1));
            if (!std::isfinite(v)) throw FormatError("row " + std::to_string(rows + 1), "non-finite entry");
            data.push_back(v);
            ++count;
        }
        if (rows == 0) cols = count;
        if (count != cols || count == 0)
            throw FormatError("row " + std::to_string(rows + 1), path.string() + ": row has " + std::to_string(count) +
                                                                     " values, expected " + std::to_string(cols));
        ++rows;
    }
    if (rows == 0) throw FormatError("rows", path.string() + ": no data rows");
    return Matrix(rows, cols, std::move(data));
}

void save_model(const fs::path& dir, const DiscreteLti& sys) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create model directory '" + dir.string() + "': " + ec.message());
    write_matrix(dir / "abar.clti", sys.abar());
    write_matrix(dir / "bbar.clti", sys.bbar());
    write_matrix(dir / "c.clti", sys.c());
    write_matrix(dir / "d.clti", sys.d());
    write_text(dir / "meta", "delta=" + shortest(sys.delta()) + "\nscheme=" + std::string(to_string(sys.scheme())) + "\n");
}

DiscreteLti load_model(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("model directory '" + dir.string() + "' does not exist");
    std::ifstream in(dir / "meta");
    if (!in) throw IoError("cannot open '" + (dir / "meta").string() + "' for reading");
    std::map<std::string, std::string> meta;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("meta", "meta line without '=': " + line);
        meta[line.substr(0, eq)] = line.substr(eq + 1);
    }
    if (!meta.contains("delta")) throw FormatError("delta", "meta has no delta");
    const double delta = parse_real(meta["delta"], "delta");
    const Scheme scheme = meta.contains("scheme") ? parse_scheme(meta["scheme"]) : Scheme::none;
    return DiscreteLti(read_matrix(dir / "abar.clti"), read_matrix(dir / "bbar.clti"), read_matrix(dir / "c.clti"),
                       read_matrix(dir / "d.clti"), delta, scheme);
}

std::string format_csv(std::span<const ResultRow> rows) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const ResultRow& r : rows) {
        out += csv_field(r.method) + ',' + std::to_string(r.m) + ',' + std::to_string(r.p) + ',' + std::to_string(r.q) + ',' +
               std::to_string(r.length) + ',' + std::to_string(r.stages) + ',' + real17(r.tol) + ',' +
               std::to_string(r.matvec_count) + ',' + std::to_string(r.wall_ns) + ',' +
               (r.rel_l2_err ? real17(*r.rel_l2_err) : std::string()) + "\n";
    }
    return out;
}

void export_csv(std::span<const ResultRow> rows, const fs::path& path) { write_text(path, format_csv(rows)); }

}  // namespace ssm::io

#pragma once
//
// Binary matrix files (.clti), model directories and the benchmark CSV.
//
// .clti layout, all integers little-endian:
//
//   offset  size  field
//   0       4     magic "CLTI"
//   4       4     version (u32) = 1
//   8       1     kind (u8): 0 = matrix, 1 = signal block
//   9       8     rows (u64)
//   17      8     cols (u64)
//   25      8*n   payload: rows*cols binary64, little-endian, row-major
//
// A signal block is stored with rows = channels and cols = time samples.
//

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ssm/lti.hpp"
#include "ssm/matrix.hpp"
#include "ssm/signal.hpp"

namespace ssm::io {

enum class FileKind : std::uint8_t { matrix = 0, signal = 1 };

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderBytes = 25;

using Stored = std::variant<Matrix, SignalBlock>;

std::vector<std::uint8_t> encode(const Matrix& a, FileKind kind = FileKind::matrix);
Stored decode(std::span<const std::uint8_t> bytes);

void write_matrix(const std::filesystem::path& path, const Matrix& a);
void write_signal(const std::filesystem::path& path, const SignalBlock& s);

// Reads either kind; the variant alternative follows the stored kind.
Stored read_file(const std::filesystem::path& path);
// Either kind, as a rows x cols matrix.
Matrix read_matrix(const std::filesystem::path& path);
// Either kind, as a signal block (rows = channels).
SignalBlock read_signal(const std::filesystem::path& path);

// Plain-text importer: one matrix row per line, comma-separated values.
// Blank lines and lines starting with '#' are skipped.
Matrix read_csv_matrix(const std::filesystem::path& path);

// Model directory: abar.clti, bbar.clti, c.clti, d.clti and a key=value
// `meta` file with delta and scheme.
void save_model(const std::filesystem::path& dir, const DiscreteLti& sys);
DiscreteLti load_model(const std::filesystem::path& dir);

struct ResultRow {
    std::string method;  // cascade | recurrence | conv | cascade-plr
    std::size_t m = 0;
    std::size_t p = 0;
    std::size_t q = 0;
    std::size_t length = 0;
    std::size_t stages = 0;
    double tol = 0.0;
    std::uint64_t matvec_count = 0;
    std::uint64_t wall_ns = 0;
    std::optional<double> rel_l2_err;  // empty for the recurrence itself

    bool operator==(const ResultRow&) const = default;
};

inline constexpr const char* kCsvHeader = "method,m,p,q,L,stages,tol,matvec_count,wall_ns,rel_l2_err";

// Reals are printed with 17 significant digits.
std::string format_csv(std::span<const ResultRow> rows);
void export_csv(std::span<const ResultRow> rows, const std::filesystem::path& path);

// Shortest decimal string that reads back to the same double.
std::string shortest(double v);

}  // namespace ssm::io

#include "oifs/matrix_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "oifs/errors.hpp"

namespace oifs {

namespace {

template <typename T>
void put_le(std::string& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(std::begin(bytes), std::end(bytes));
    }
    out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
    if (in.size() - pos < sizeof(T)) {
        throw FormatError("matrix file truncated");
    }
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, in.data() + pos, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(std::begin(bytes), std::end(bytes));
    }
    pos += sizeof(T);
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

std::string encode_matrix(const Eigen::MatrixXd& matrix) {
    std::string out;
    out.reserve(24 + static_cast<std::size_t>(matrix.size()) * 8);
    out.append(kMatrixMagic, 4);
    put_le<std::uint32_t>(out, kMatrixFormatVersion);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(matrix.rows()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(matrix.cols()));
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
        for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
            put_le<double>(out, matrix(i, j));
        }
    }
    return out;
}

Eigen::MatrixXd decode_matrix(const std::string& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMatrixMagic, 4) != 0) {
        throw FormatError("bad magic: not an OIFS matrix file");
    }
    std::size_t pos = 4;
    const auto version = get_le<std::uint32_t>(bytes, pos);
    if (version != kMatrixFormatVersion) {
        throw FormatError("unsupported matrix format version " + std::to_string(version));
    }
    const auto rows = get_le<std::uint64_t>(bytes, pos);
    const auto cols = get_le<std::uint64_t>(bytes, pos);
    constexpr auto index_max = static_cast<std::uint64_t>(std::numeric_limits<Eigen::Index>::max());
    if (rows > index_max || cols > index_max || (cols != 0 && rows > index_max / 8 / cols)) {
        throw FormatError("matrix dimensions overflow");
    }
    const std::uint64_t count = rows * cols;
    if (bytes.size() - pos != count * 8) {
        throw FormatError(bytes.size() - pos < count * 8 ? "matrix file truncated"
                                                         : "trailing bytes after matrix payload");
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            m(i, j) = get_le<double>(bytes, pos);
        }
    }
    return m;
}

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& matrix) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    const std::string bytes = encode_matrix(matrix);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write to '" + path.string() + "' failed");
    }
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return decode_matrix(buf.str());
}

void export_field_csv(const std::filesystem::path& path, const StructuredMesh& mesh,
                      const Eigen::VectorXd& nodal_field) {
    if (nodal_field.size() != mesh.node_count()) {
        throw ConfigError("field length does not match the mesh node count");
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out << std::setprecision(17) << "x,y,u\n";
    for (int id = 0; id < mesh.node_count(); ++id) {
        const Point p = mesh.node(id);
        out << p.x << ',' << p.y << ',' << nodal_field[id] << '\n';
    }
    if (!out) {
        throw std::runtime_error("write to '" + path.string() + "' failed");
    }
}

Eigen::VectorXd load_field_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line) || line != "x,y,u") {
        throw FormatError("field CSV must start with header 'x,y,u'");
    }
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto last = line.rfind(',');
        if (last == std::string::npos) {
            throw FormatError("malformed field CSV row: " + line);
        }
        values.push_back(std::stod(line.substr(last + 1)));
    }
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace oifs

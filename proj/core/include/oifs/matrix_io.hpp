#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Core>

#include "oifs/mesh.hpp"

namespace oifs {

// Binary matrix file: "OIFS", u32 version, u64 rows, u64 cols, then rows*cols
// little-endian IEEE-754 doubles in column-major order.
inline constexpr char kMatrixMagic[4] = {'O', 'I', 'F', 'S'};
inline constexpr std::uint32_t kMatrixFormatVersion = 1;

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& matrix);
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);

/// Serialized form used by save_matrix, exposed for in-memory checks.
std::string encode_matrix(const Eigen::MatrixXd& matrix);
Eigen::MatrixXd decode_matrix(const std::string& bytes);

/// CSV with header "x,y,u" and one row per node in id order, 17 significant digits.
void export_field_csv(const std::filesystem::path& path, const StructuredMesh& mesh,
                      const Eigen::VectorXd& nodal_field);

/// Reads the third column of a file written by export_field_csv.
Eigen::VectorXd load_field_csv(const std::filesystem::path& path);

}  // namespace oifs

#ifndef DEFLAMG_IO_HPP
#define DEFLAMG_IO_HPP

/**
 * \file   deflamg/io.hpp
 * \brief  MatrixMarket matrices and plain-text vectors.
 */

#include <deflamg/sparse.hpp>

#include <string>
#include <vector>

namespace deflamg {

/// Reads a MatrixMarket coordinate file (real, integer or pattern; general
/// or symmetric). Symmetric storage is mirrored, duplicates are summed.
/// Throws ParseError carrying the offending line number.
SparseMatrix read_matrix_market(const std::string &path);

/// Writes A as a general real coordinate file.
void write_matrix_market(const std::string &path, const SparseMatrix &A);

/// One value per line; blank lines and lines starting with '%' or '#' are
/// skipped. A MatrixMarket array file is accepted as well.
std::vector<double> read_vector(const std::string &path);

void write_vector(const std::string &path, const std::vector<double> &x);

/// One 0 or 1 per line.
std::vector<char> read_mask(const std::string &path);

} // namespace deflamg

#endif

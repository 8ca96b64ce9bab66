#pragma once

#include <iosfwd>
#include <string>

#include "circuitry/matrix.hpp"

namespace circuitry {

enum class MatrixFormat { Auto, MatrixMarket, Csv };

/// Reads a dense matrix from disk. Auto sniffs the banner line: files opening
/// with %%MatrixMarket parse as Matrix Market, everything else as headerless
/// comma-separated rows. Parse errors carry the path and line number.
Matrix load_matrix(const std::string& path, MatrixFormat format = MatrixFormat::Auto);

/// Stream-level parsers, exposed so errors can be produced without a file.
Matrix parse_matrix_market(std::istream& in);
Matrix parse_csv(std::istream& in);

/// Writes array-format Matrix Market with full double precision.
void save_matrix_market(const std::string& path, const Matrix& a);

/// Writes headerless comma-separated rows with full double precision.
void save_csv(const std::string& path, const Matrix& a);

}  // namespace circuitry

#pragma once

#include <string>
#include <vector>

#include "jgl/matrix_core.hpp"
#include "jgl/solver_core.hpp"

namespace jgl {

/// Headerless comma-separated matrix of plain decimals; throws
/// std::runtime_error naming the path and line on malformed input.
Matrix read_csv_matrix(const std::string& path);

/// %.17g cells so a write/read round trip is exact. All writers here go
/// through a temp file and rename, so readers never observe partial files.
void write_csv_matrix(const std::string& path, const Matrix& m);

void write_text_atomic(const std::string& path, const std::string& content);

/// Rows "class,i,j,value,kind" for every nonzero off-diagonal entry, i < j,
/// 1-based; kind is "common" when the entry is nonzero in every class and
/// "specific" otherwise.
void write_edge_list(const std::string& path, const PrecisionSet& estimate);

}  // namespace jgl

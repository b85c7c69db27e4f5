#ifndef TORSIONLAB_TOOLS_IO_HPP
#define TORSIONLAB_TOOLS_IO_HPP

// JSON input documents (see docs/FORMAT.md) and report encoding.

#include <string>

#include <json.hpp>

#include "torsionlab/lueck.hpp"

namespace torsionlab::io {

using Json = nlohmann::ordered_json;

/// Reads and parses a JSON file; I/O and syntax errors become ValidationError.
[[nodiscard]] Json load_file(const std::string& path);

/// The "kind" member, required.
[[nodiscard]] std::string kind_of(const Json& doc);

[[nodiscard]] Complex parse_scalar(const Json& value);
/// Nested rows of scalars with the given shape ([] for zero rows).
[[nodiscard]] Matrix parse_matrix(const Json& value, Eigen::Index rows, Eigen::Index cols);
[[nodiscard]] TraceContext parse_context(const Json& value);

[[nodiscard]] CochainComplex parse_complex(const Json& doc, const Tolerances& tol);
[[nodiscard]] TwistedCellComplex parse_cw(const Json& doc);
[[nodiscard]] GluingSpec parse_gluing(const Json& doc);
[[nodiscard]] ComplexSES parse_ses(const Json& doc, const Tolerances& tol);
[[nodiscard]] LaurentMatrix parse_laurent(const Json& doc);
[[nodiscard]] IncidenceWord parse_word(const Json& value);

/// Value rounded to 15 significant digits; −0 becomes 0, non-finite values
/// become null.
[[nodiscard]] Json number(double value);
[[nodiscard]] Json numbers(const std::vector<double>& values);
[[nodiscard]] std::string format(double value);

/// Indented key/value text with arrays of records laid out as tables.
[[nodiscard]] std::string render_text(const Json& report);

}  // namespace torsionlab::io

#endif

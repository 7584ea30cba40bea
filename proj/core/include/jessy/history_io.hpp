#pragma once

#include <string>
#include <string_view>

#include "jessy/history.hpp"

namespace jessy {

/// Parses the linear notation, e.g. "r1(x0).w1(x1).c1.ra(x1).ca".
///
/// Tokens are separated by '.'; whitespace around tokens is ignored. A read
/// names its version either by appending a numeric label to the object
/// ("x12") or with an underscore ("x_a"). The result is totally ordered.
History parse_linear(std::string_view text);

/// Parses the poset JSON document {"ops": [...], "edges": [[from, to], ...]}.
History parse_poset_json(std::string_view text);

/// Dispatches on the first non-blank character: '{' selects JSON.
History parse_history(std::string_view text);

/// Renders a totally ordered history in linear notation. Throws ModelError
/// when h is not a total order.
std::string render_linear(const History& h);

/// Canonical JSON: two-space indentation, sorted edges, trailing newline.
std::string render_poset_json(const History& h);

/// Single-token description of one operation, e.g. "ra(x1)".
std::string render_op(const History& h, std::size_t index);

}  // namespace jessy

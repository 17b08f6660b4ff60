#pragma once

#include <string>
#include <string_view>

#include "ulab/kernel.hpp"

namespace ulab {

// Kernel file format, one "key: value" line per field, schema-versioned:
//
//   format: 1
//   d: 2
//   m: 2
//   q: 1
//   symmetric: true        (optional; omitted when undeclared)
//   probs: 0.5 0.5
//   values: 1 -1 -1 1
//
// `values` is flat, row-major over (x_1..x_d) and then the value coordinate.
// Numbers are written in shortest round-trip form, so load -> save -> load
// yields bit-identical tensors. Parse errors name the offending field.

Kernel parse_kernel_text(std::string_view text);
std::string kernel_to_text(const Kernel& h);

Kernel load_kernel(const std::string& path);
void save_kernel(const Kernel& h, const std::string& path);

}  // namespace ulab

#pragma once

#include <string>

namespace advseq {

/// Fixed 12-significant-digit rendering used by every CSV the library writes,
/// so outputs diff cleanly across runs.
std::string format_number(double v);

}  // namespace advseq

#pragma once

#include <string>
#include <vector>

namespace tempogan {

//! Entry point behind the tempogan binary: gen-data, train, infer, eval,
//! augment-preview, plot. Returns 0 on success, 1 on runtime failure (one
//! diagnostic line on stderr), 2 on usage errors. Relative data paths resolve
//! against TEMPOGAN_DATA_DIR when that is set.
int cli_dispatch(const std::vector<std::string>& args);

} // namespace tempogan

#pragma once

#include <functional>
#include <vector>

#include "tygar/atn.hpp"
#include "tygar/reach.hpp"
#include "tygar/signature.hpp"
#include "tygar/term.hpp"

namespace tygar {

/// Receives each program; return false to stop the enumeration.
using ProgramVisitor = std::function<bool(const NormalForm&)>;

/// Replays `path` over tokens labelled with terms and reports every distinct
/// program it denotes, in a deterministic order. Parameters are arg0..argN-1.
/// Throws std::invalid_argument if the path does not replay to a valid final marking.
void from_path(const TransitionNet& net, const Library& lib, const Path& path, const ProgramVisitor& visit);

/// All programs of the path.
std::vector<NormalForm> from_path(const TransitionNet& net, const Library& lib, const Path& path);

}  // namespace tygar

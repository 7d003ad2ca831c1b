#pragma once

#include "llmloc/eval.hpp"
#include "llmloc/scripted_backend.hpp"

namespace llmloc {

/// Run every ablation variant of one instance against its answer script and keep
/// all exchanges, so the session replays the full pipeline and each ablation.
Session author_session(const BenchmarkInstance& inst, const BenchmarkOptions& opts, DiagnosticSink& sink);

}  // namespace llmloc

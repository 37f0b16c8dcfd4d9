#pragma once

#include <string>

#include "mflar/article.hpp"
#include "mflar/library.hpp"
#include "mflar/verifier.hpp"

namespace mflar {

// JSON document mirroring the article for the browser view: identifier spans
// with kind and declaration anchor, items with their proofs, and per step the
// obligation id, status and thesis after the step.
//
// Anchors: `#item-<label>`, `#step-<item>-<index>`, `#func-<name>`,
// `#reserve-<var>`, `#v<offset>` for bound variables, `/library/<name>` for
// library items. Predicates and types have no declaration site (null anchor).
std::string render_model(const Article& a, const VerificationReport& report,
                         const LibraryStore& lib);

// Anchor a functor occurrence resolves to; empty when undeclared.
std::string functor_anchor(const Article& a, const LibraryStore& lib, const std::string& name);

}  // namespace mflar

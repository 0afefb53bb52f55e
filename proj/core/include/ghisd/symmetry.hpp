#pragma once

namespace ghisd {

/// Which cyclic grid translations leave the vector field equivariant.
enum class TranslationSymmetry {
  kNone,
  kXOnly,  // column shifts only (sheared flow breaks y-translation)
  kXY,     // full periodic translation group
};

/// Declared symmetries of a system. Translations drive state deduplication;
/// sign_flip is report-only grouping, never merged (phi and -phi stay
/// distinct landscape nodes).
struct SymmetrySpec {
  TranslationSymmetry translations = TranslationSymmetry::kNone;
  bool sign_flip = false;
};

}  // namespace ghisd

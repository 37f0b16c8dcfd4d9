#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace mflar {

// MPTP-style names:
//   t<N>_<art>            theorem N
//   d<N>_<art>            definition N
//   dt_k<N>_<art>         type axiom of functor N
//   c<N>_<I>__<art>       scope constant N of item I
//   dt_c<N>_<I>__<art>    type axiom of that constant
//   e<K>_<I>__<art>       local proposition K of item I
enum class NameKind { theorem, definition, functor_type, scope_constant, constant_type, local_prop };

struct MptpName {
  NameKind kind = NameKind::theorem;
  int ordinal = 0;
  // Item position; only for the double-underscore forms.
  int item = 0;
  std::string article;

  friend bool operator==(const MptpName&, const MptpName&) = default;
};

std::string format_name(const MptpName& n);
// Inverse of format_name; nullopt for anything else (including leading zeros).
std::optional<MptpName> parse_name(std::string_view s);

bool is_type_axiom_name(std::string_view s);

}  // namespace mflar

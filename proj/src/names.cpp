#include "mflar/names.hpp"

#include <regex>

namespace mflar {

std::string format_name(const MptpName& n) {
  auto N = std::to_string(n.ordinal);
  auto local = "_" + std::to_string(n.item) + "__" + n.article;
  switch (n.kind) {
    case NameKind::theorem: return "t" + N + "_" + n.article;
    case NameKind::definition: return "d" + N + "_" + n.article;
    case NameKind::functor_type: return "dt_k" + N + "_" + n.article;
    case NameKind::scope_constant: return "c" + N + local;
    case NameKind::constant_type: return "dt_c" + N + local;
    case NameKind::local_prop: return "e" + N + local;
  }
  return "";
}

std::optional<MptpName> parse_name(std::string_view s) {
  // Article names never contain "__", which keeps the two families apart.
  static const std::regex global_re("(t|d|dt_k)([1-9][0-9]*)_([a-z][a-z0-9_]*)");
  static const std::regex local_re("(c|dt_c|e)([1-9][0-9]*)_([1-9][0-9]*)__([a-z][a-z0-9_]*)");
  std::string str(s);
  std::smatch m;
  MptpName n;
  if (std::regex_match(str, m, local_re)) {
    const std::string tag = m[1];
    n.kind = tag == "c" ? NameKind::scope_constant
             : tag == "e" ? NameKind::local_prop
                          : NameKind::constant_type;
    n.ordinal = std::stoi(m[2]);
    n.item = std::stoi(m[3]);
    n.article = m[4];
  } else if (std::regex_match(str, m, global_re)) {
    const std::string tag = m[1];
    n.kind = tag == "t" ? NameKind::theorem
             : tag == "d" ? NameKind::definition
                          : NameKind::functor_type;
    n.ordinal = std::stoi(m[2]);
    n.article = m[3];
  } else {
    return std::nullopt;
  }
  if (n.article.find("__") != std::string::npos) return std::nullopt;
  return n;
}

bool is_type_axiom_name(std::string_view s) {
  auto n = parse_name(s);
  return n && (n->kind == NameKind::functor_type || n->kind == NameKind::constant_type);
}

}  // namespace mflar

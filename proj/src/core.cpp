#include "dcm/core.hpp"

#include "dcm/errors.hpp"

namespace dcm {
namespace {

// '%', '=' and '|' are the only characters with structural meaning in a key.
void append_escaped(std::string& out, const std::string& s) {
  for (char c : s) {
    switch (c) {
      case '%': out += "%25"; break;
      case '=': out += "%3D"; break;
      case '|': out += "%7C"; break;
      default: out += c;
    }
  }
}

}  // namespace

ClusterKey derive_cluster_key(const TreatmentVector& treatment) {
  if (treatment.empty()) throw EmptyTreatment();
  std::string key;
  bool first = true;
  for (const auto& [name, label] : treatment) {  // map iterates name-sorted
    if (!first) key += '|';
    first = false;
    append_escaped(key, name);
    key += '=';
    append_escaped(key, label);
  }
  return key;
}

}  // namespace dcm

#pragma once

#include <stdexcept>
#include <string>

namespace evoimit {

// Thrown on violated preconditions (dimension mismatches, stepping a
// finished episode, non-finite inputs, ...). The CLI maps these to exit
// code 2 together with other runtime errors.
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

inline void contract(bool ok, const char* what) {
  if (!ok) throw ContractError(what);
}

}  // namespace evoimit

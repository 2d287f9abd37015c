#pragma once

#include <stdexcept>
#include <string>

namespace ttscale {

// Domain error carrying a module-qualified message, e.g.
//   "traces: fixture.jsonl:12: gen_len exceeds max_new_tokens".
class error : public std::runtime_error {
  public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void fail(const std::string& module, const std::string& msg) {
    throw error(module + ": " + msg);
}

}  // namespace ttscale

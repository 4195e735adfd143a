#pragma once

#include <stdexcept>
#include <string>

namespace anchorcrc {

/// Broad failure categories, mapped onto process exit codes by the CLI.
enum class errc {
    invalid_input, // malformed files, schema violations, inconsistent counts
    degenerate,    // estimator undefined on this data (zero denominators etc.)
    internal,      // should-not-happen conditions
};

class error : public std::runtime_error {
  public:
    error(errc code, std::string message) : std::runtime_error(std::move(message)), code_(code) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void throw_invalid(const std::string& message) {
    throw error(errc::invalid_input, message);
}

[[noreturn]] inline void throw_degenerate(const std::string& message) {
    throw error(errc::degenerate, message);
}

[[noreturn]] inline void throw_internal(const std::string& message) {
    throw error(errc::internal, message);
}

} // namespace anchorcrc

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace levcross {

// Error categories map onto CLI exit codes: validation -> 1, everything
// numeric -> 2. Verification failures are reported by the verify driver
// itself (exit 3), not through exceptions.
enum class errc {
    validation,         // bad inputs, broken invariants at construction
    numerical,          // quadrature/ODE/inversion did not converge or left its domain
    consistency,        // internal cross-check failed (signals upstream numerical trouble)
    out_of_support,     // query outside the supported grid/range
    insufficient_data,  // estimator asked for more samples than available
};

class error : public std::runtime_error {
public:
    error(errc kind, std::string_view where, const std::string& what)
        : std::runtime_error(std::string(where) + ": " + what),
          kind_(kind),
          where_(where) {}

    errc kind() const noexcept { return kind_; }
    const std::string& where() const noexcept { return where_; }

private:
    errc kind_;
    std::string where_;
};

[[noreturn]] inline void raise(errc kind, std::string_view where, const std::string& what) {
    throw error(kind, where, what);
}

}  // namespace levcross

#pragma once

#include "emu/machine.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace emu::cli {

enum ExitCode : int {
    kOk = 0,
    kDiagnostics = 1,
    kUsage = 2,
    kFault = 3,
    kBudget = 4,
};

/// Entry point shared by the `emu` binary and in-process tests. `args`
/// excludes the program name.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

/// Renders device output the way `emu run` prints it. Values from signed
/// devices print one decimal per line. Terminal values 32..126, '\n' and '\t'
/// print as characters and anything else as a decimal on its own line.
class OutputRenderer {
public:
    void add(const DeviceOutput& output, bool signed_values);
    /// Rendered text, terminated by a newline when non-empty.
    std::string text() const;

private:
    void line(const std::string& s);

    std::string text_;
};

/// Decimal integers separated by whitespace; negatives allowed.
std::vector<Word> parse_values(std::string_view text);

/// `state=<s> pc=<hex>` followed by every other register and flag.
std::string status_line(const Machine& machine);
/// Hex address padded to the program counter's width.
std::string format_address(const Machine& machine, Address address);

}  // namespace emu::cli

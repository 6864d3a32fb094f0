#ifndef WPROX_HARNESS_CLI_HPP_
#define WPROX_HARNESS_CLI_HPP_

#include <iosfwd>

namespace wprox::harness {

/// Entry point of the `wprox` tool. Returns 0 on success; failures print a
/// one-line cause to `err`, usage errors also print the synopsis.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace wprox::harness

#endif  // WPROX_HARNESS_CLI_HPP_

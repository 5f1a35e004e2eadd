#ifndef RDA_CLI_HPP
#define RDA_CLI_HPP

#include <string>
#include <utility>
#include <vector>

#include "rda/spectral.hpp"

namespace rda::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point: gen-data, decompose, attack, train, curves.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

/// Parses "lo:hi"; throws UsageError on malformed text.
RadialBand parse_band(const std::string& text);

}  // namespace rda::cli

#endif  // RDA_CLI_HPP

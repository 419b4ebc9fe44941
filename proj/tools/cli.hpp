#pragma once

// Command-line front end. Subcommands: density, mse, recover, sir, rate.
// Options may also come from a flat key=value file given with --config;
// flags on the command line take precedence.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 numerical
// failure, 4 I/O error.

#include "spectra/ensembles.hpp"
#include "spectra/kde.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spectra::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 2, kNumericalError = 3, kIoError = 4 };

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// exp | bion
EntryDistribution parse_ensemble(const std::string& text);
/// identity | diagonal:<t>@<w>,... | wishart:<ensemble>:<n2/p ratio>
PopulationSpec parse_population(const std::string& text, std::size_t p);
/// default | fixed:<h> | power:<coef>:<exponent>
BandwidthRule parse_bandwidth(const std::string& text);
/// <min>:<max>:<points>
std::vector<double> parse_grid(const std::string& text);

/// Shortest decimal string that reads back to the same double.
std::string format_number(double value);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

} // namespace spectra::cli

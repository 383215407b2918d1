// Command-line front end. Configuration is flat "key = value" text
// with dotted keys (model.N, drive.phi, ...) or [section] headers; --set
// overrides file keys. Every command validates the whole configuration before
// it writes anything.
//
// Exit codes: 0 success, 2 configuration error, 3 degenerate spectrum,
// 4 integrator failure, 5 failed check, 1 anything else.

#pragma once

#include "bjj/classical.hpp"
#include "bjj/model.hpp"
#include "bjj/quantum_dynamics.hpp"

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bjj::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kDegenerate = 3,
    kIntegratorError = 4,
    kCheckFailed = 5,
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using KeyValues = std::map<std::string, std::string>;

// Parses config text; later keys override earlier ones.
KeyValues parse_config_text(const std::string& text);
// "key=value".
void apply_override(KeyValues& kv, const std::string& assignment);

// A decimal number or a multiple of pi: "1.5", "pi", "-pi/2", "3pi/2",
// "0.5*pi".
double parse_real(const std::string& s);
// "start:stop:count", count points from start (inclusive) to stop (exclusive).
std::vector<double> parse_phi_grid(const std::string& s);

struct RunConfig {
    int N{2};
    double Lambda{5.0};
    DriveParams drive;
    std::optional<std::vector<double>> phi_grid;
    ACSParams initial;
    double classical_Z{0.0};
    double classical_phi{0.5 * kTwoPi};
    PropagatorConfig propagator;
    AveragingWindow window;  // quantum
    double classical_tau{1e3};
    double classical_tau_prime{1e6};
    int classical_samples_per_period{128};
    ClassicalConfig classical;
    std::string classical_mode{"api"};
    long psos_periods{10000};
    double evolve_horizon{100.0};
    int evolve_samples_per_period{128};
    PdfGrid pdf_grid;
    bool sweep_classical{true};
    std::vector<std::string> checks;
    std::vector<double> check_grid;
    int mode_samples_per_period{16};

    ModelParams model() const { return ModelParams::from_coupling(N, Lambda); }
    // Classical window in whole drive periods.
    AveragingWindow classical_window() const;
    nlohmann::json echo() const;

    // Throws ConfigError on unknown keys, malformed values or out-of-range
    // parameters.
    static RunConfig from(const KeyValues& kv);
};

// Full command line without the program name, e.g. {"spectrum", "--set",
// "model.N=3", "--out", "dir"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bjj::cli

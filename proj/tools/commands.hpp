#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "wcnet/lattice.hpp"

namespace wcnet::cli {

inline constexpr const char* kConfigSchema = "wcnet-config/1";
inline constexpr const char* kReportSchema = "wcnet-report/1";

enum ExitCode { Ok = 0, Fail = 1, BadInput = 2, CapExceeded = 3, Unresolved = 4, NotCertified = 5 };

using json = nlohmann::ordered_json;

struct Overrides {
    std::optional<double> truncation;
    std::optional<Order> order;
};

struct Outcome {
    json report;
    int code = Ok;
    std::string svg;  // network-svg only
};

json load_config(const std::string& path);

Outcome run_spectrum(const json& cfg, const Overrides& ov = {});
Outcome run_verify_wcf(const json& cfg, const Overrides& ov = {});
Outcome run_verify_wall(const json& cfg, const Overrides& ov = {});
Outcome run_network_svg(const json& cfg, const Overrides& ov = {});
Outcome run_fg(const json& cfg, const Overrides& ov = {});
Outcome run_approx(const json& cfg, const Overrides& ov = {});

// dispatch by command name; errors become reports with a nonzero code
Outcome run_command(const std::string& command, const json& cfg, const Overrides& ov = {});

std::string dump_report(const json& report);

}

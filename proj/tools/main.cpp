#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
    using namespace wcnet::cli;
    CLI::App app{"wall-crossing and spectral network tools"};
    app.require_subcommand(1);
    std::string config, out, order;
    std::optional<double> truncation;
    const char* names[] = {"spectrum", "verify-wcf", "verify-wall", "network-svg", "fg", "approx"};
    const char* help[] = {"scan a sector for active rays and their BPS content",
                          "compare wall-crossing products on two sides of a wall",
                          "check wall identities in local models and one-sided limits",
                          "render the spectral network at a phase as SVG",
                          "laminations from edge coordinates and back",
                          "approximate a generator by lifts of laminations"};
    for (int i = 0; i < 6; ++i) {
        auto* sub = app.add_subcommand(names[i], help[i]);
        sub->add_option("--config", config, "config file (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--truncation", truncation, "truncation L");
        sub->add_option("--order", order, "order of the product")->check(CLI::IsMember({"cw", "ccw"}));
        sub->add_option("--out", out, "output path; stdout if absent");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? BadInput : Ok;
    }
    std::string command = app.get_subcommands().front()->get_name();
    Overrides ov;
    if (truncation) {
        if (!(*truncation > 0)) {
            std::cerr << "truncation must be positive\n";
            return BadInput;
        }
        ov.truncation = truncation;
    }
    if (!order.empty()) ov.order = order == "cw" ? wcnet::Order::Cw : wcnet::Order::Ccw;
    Outcome res;
    try {
        res = run_command(command, load_config(config), ov);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return BadInput;
    }
    std::string text = res.svg.empty() ? dump_report(res.report) : res.svg;
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) {
            std::cerr << "cannot write " << out << "\n";
            return BadInput;
        }
        f << text;
        if (!res.svg.empty()) std::cerr << dump_report(res.report);
    }
    if (res.code && res.report.contains("error")) std::cerr << res.report["error"].get<std::string>() << "\n";
    return res.code;
}

#include "entimg/cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "entimg/errors.hpp"
#include "entimg/scenario.hpp"

namespace entimg {

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("file", "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

scenario::Scenario load(const std::string& target)
{
    if (std::filesystem::is_regular_file(target)) return scenario::parse_scenario(read_file(target));
    for (const auto& d : scenario::demo_catalog()) {
        if (d.name == target) return scenario::parse_scenario(d.document);
    }
    throw ValidationError("file", "'" + target + "' is neither a readable file nor a demo name");
}

std::vector<std::string> split_formats(const std::string& s)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = std::min(s.find(',', start), s.size());
        if (comma > start) out.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
    if (out.empty()) throw ValidationError("format", "no output formats given");
    return out;
}

std::string format_double(double v)
{
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

} // namespace

int run_cli(int argc, char** argv)
{
    CLI::App app{"Discretized one- and two-photon imaging simulator"};
    app.require_subcommand(1);

    std::string target;
    std::string out_dir;
    std::string formats;
    std::uint64_t seed = 0;
    int jobs = 1;
    auto* run = app.add_subcommand("run", "Evaluate a scenario file or a built-in demo and write outputs");
    run->add_option("scenario", target, "Scenario JSON file or demo name")->required();
    run->add_option("--out", out_dir, "Output directory (default: the scenario's outputs.directory)");
    run->add_option("--format", formats, "Comma-separated subset of csv,pgm,json");
    auto* seed_opt = run->add_option("--seed", seed, "Override the seed of every sample measurement");
    run->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 1024));

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Parse and validate a scenario file");
    validate->add_option("file", validate_path, "Scenario JSON file")->required();

    auto* list = app.add_subcommand("list-demos", "List the built-in demo scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (list->parsed()) {
            for (const auto& d : scenario::demo_catalog()) {
                std::cout << d.name << "  " << scenario::parse_scenario(d.document).description << "\n";
            }
            return 0;
        }
        if (validate->parsed()) {
            const auto s = scenario::parse_scenario(read_file(validate_path));
            std::cout << "valid: " << s.name << "\n";
            return 0;
        }
        const auto s = load(target);
        scenario::RunOptions opt;
        if (!out_dir.empty()) opt.out_dir = out_dir;
        if (!formats.empty()) opt.formats = split_formats(formats);
        if (*seed_opt) opt.seed = seed;
        opt.jobs = jobs;
        const auto summary = scenario::run_scenario(s, opt);
        const auto dir = opt.out_dir.value_or(std::filesystem::path(s.outputs.directory));
        for (const auto& [key, value] : summary.scalars) std::cout << key << " = " << format_double(value) << "\n";
        std::cout << "wrote " << summary.files.size() << " files to " << dir.string() << " in "
                  << format_double(std::round(summary.seconds * 1000.0) / 1000.0) << " s\n";
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

} // namespace entimg

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "rtree/cli.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laplacians on radial metric trees: m-functions, spectral diagnostics and tree reports"};
    std::string command, config_path, out_path, format = "csv", artifact_path;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;

    std::string names;
    for (const auto& n : rtree::cli::command_names()) names += (names.empty() ? "" : ", ") + n;
    app.add_option("command", command, "One of: " + names + ", verify-artifact (default: command.name)");
    app.add_option("--config", config_path, "JSON config")->required();
    app.add_option("--out", out_path, "Output file (default: stdout)");
    app.add_option("--format", format, "csv, json or gnuplot")->check(CLI::IsMember({"csv", "json", "gnuplot"}));
    app.add_option("--threads", threads, "Worker threads (0: hardware concurrency)");
    app.add_option("--seed", seed, "Seed for random sampling (overrides config \"seed\")");
    app.add_option("--artifact", artifact_path, "Artifact to check with verify-artifact");
    CLI11_PARSE(app, argc, argv);

    rtree::cli::RunConfig cfg;
    try {
        cfg.document = nlohmann::json::parse(slurp(config_path));
    } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "schema error at /: " << e.what() << '\n';
        return rtree::cli::ExitCode::schema_violation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return rtree::cli::ExitCode::failure;
    }
    cfg.format = rtree::cli::parse_format(format);
    cfg.threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    cfg.seed = seed;

    if (command == "verify-artifact") {
        if (artifact_path.empty()) {
            std::cerr << "verify-artifact needs --artifact\n";
            return rtree::cli::ExitCode::failure;
        }
        try {
            const int rc = rtree::cli::verify_artifact(slurp(artifact_path), cfg, std::cerr);
            if (rc == 0) std::cout << "fresh\n";
            return rc;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return rtree::cli::ExitCode::failure;
        }
    }

    if (out_path.empty()) return rtree::cli::run(command, cfg, std::cout, std::cerr);
    std::ostringstream buffer;
    const int rc = rtree::cli::run(command, cfg, buffer, std::cerr);
    if (rc != 0) return rc;
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write " << out_path << '\n';
        return rtree::cli::ExitCode::failure;
    }
    out << buffer.str();
    return rc;
}

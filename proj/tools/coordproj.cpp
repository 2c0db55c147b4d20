#include "coordproj/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    const auto result = coordproj::cli::run(args);
    const bool to_file = [&] {
        for (std::size_t i = 0; i + 1 < args.size(); ++i)
            if (args[i] == "--output" || args[i] == "-o") return true;
        for (const auto& a : args)
            if (a.rfind("--output=", 0) == 0) return true;
        return false;
    }();
    if (!to_file || result.exit_code != 0) (result.exit_code == 0 ? std::cout : std::cerr) << result.report;
    return result.exit_code;
}

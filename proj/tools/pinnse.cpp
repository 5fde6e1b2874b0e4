#include <cstdio>

#include "CLI11.hpp"

#include "pinnse/case_io.hpp"
#include "pinnse/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"physics-informed state estimation workbench"};
    app.require_subcommand(1);

    auto* case_cmd = app.add_subcommand("case", "grid case utilities");
    auto* validate = case_cmd->add_subcommand("validate", "parse and validate a case file");
    std::string case_path;
    bool is_cdf = false;
    validate->add_option("path", case_path, "case file")->required();
    validate->add_flag("--cdf", is_cdf, "input is IEEE Common Data Format");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (validate->parsed()) {
            pinnse::grid::GridCase gc =
                is_cdf ? pinnse::grid::import_cdf(pinnse::read_file(case_path), "imported")
                       : pinnse::grid::load_case(case_path);
            std::printf("ok: %s, %d buses, %zu branches\n", gc.name.c_str(), gc.n(),
                        gc.branches.size());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}

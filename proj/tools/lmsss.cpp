#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lmsss/cli.hpp"
#include "lmsss/parallel.hpp"

int main(int argc, char** argv)
{
    using namespace lmsss;
    CLI::App app { "Large-scale multi-objective feature selection with search-space shrinking" };
    app.require_subcommand(1);

    std::optional<std::size_t> threads;
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;

    auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
    std::string config;
    run->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
    run->add_option("--threads", threads, "Worker threads (default: config, then logical cores)");
    run->add_option("--output-dir", output_dir, "Output directory (overrides the config)");
    run->add_option("--seed", seed, "Base seed (overrides the config)");

    auto* shr = app.add_subcommand("shrink", "Shrink one dataset and write the selection and scatter data");
    ShrinkCommand sc;
    std::string dataset;
    std::string label = "last";
    std::string shrink_out = ".";
    std::uint64_t shrink_seed = 0;
    std::size_t shrink_threads = default_threads();
    bool no_header = false;
    shr->add_option("dataset", dataset, "CSV file")->required()->check(CLI::ExistingFile);
    shr->add_option("--label", label, "Label column: last, an index or a header name")->capture_default_str();
    shr->add_flag("--no-header", no_header, "The CSV has no header row");
    shr->add_option("--n-mic", sc.pipeline.shrink.n_mic, "Features kept by the MIC filter")->capture_default_str();
    shr->add_option("--n-nds", sc.pipeline.shrink.n_nds, "Size of the shrunk space")->capture_default_str();
    shr->add_option("--runs", sc.pipeline.shrink.runs, "Lightweight runs")->capture_default_str();
    shr->add_option("--generations", sc.pipeline.shrink.generations, "Generations per lightweight run")
        ->capture_default_str();
    shr->add_option("--pop-size", sc.pipeline.budget.pop_size, "Population size")->capture_default_str();
    shr->add_option("--n-fs-fraction", sc.pipeline.shrink.n_fs_fraction, "Share of pooled solutions counted")
        ->capture_default_str();
    shr->add_option("--threads", shrink_threads, "Worker threads");
    shr->add_option("--output-dir", shrink_out, "Output directory")->capture_default_str();
    shr->add_option("--seed", shrink_seed, "Split and shrink seed")->capture_default_str();

    auto* gen = app.add_subcommand("gen", "Write a synthetic dataset and its informative-feature file");
    GenCommand gc;
    std::string gen_out = "synthetic.csv";
    gen->add_option("--instances", gc.spec.instances, "Rows")->capture_default_str();
    gen->add_option("--features", gc.spec.features, "Columns")->capture_default_str();
    gen->add_option("--informative", gc.spec.informative, "Informative columns")->capture_default_str();
    gen->add_option("--seed", gc.spec.seed, "Generator seed")->capture_default_str();
    gen->add_option("--output,-o", gen_out, "CSV path; the truth file goes next to it")->capture_default_str();
    gen->add_option("--output-dir", output_dir, "Directory for the CSV");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        std::optional<std::filesystem::path> dir;
        if (output_dir) {
            dir = *output_dir;
        }
        return cmd_run(config, dir, threads, seed, std::cout, std::cerr);
    }
    if (shr->parsed()) {
        sc.dataset = dataset;
        sc.csv.header = !no_header;
        if (label == "last") {
            sc.csv.label_column = std::monostate {};
        } else if (label.find_first_not_of("0123456789") == std::string::npos) {
            sc.csv.label_column = static_cast<std::size_t>(std::stoull(label));
        } else {
            sc.csv.label_column = label;
        }
        sc.seed = shrink_seed;
        sc.output_dir = shrink_out;
        sc.pipeline.threads = shrink_threads;
        return cmd_shrink(sc, std::cout, std::cerr);
    }
    gc.output = output_dir ? std::filesystem::path(*output_dir) / gen_out : std::filesystem::path(gen_out);
    return cmd_gen(gc, std::cout, std::cerr);
}

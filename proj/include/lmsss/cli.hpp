#ifndef LMSSS_CLI_HPP
#define LMSSS_CLI_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lmsss/dataset.hpp"
#include "lmsss/pipeline.hpp"
#include "lmsss/stats.hpp"

namespace lmsss {

struct SyntheticSpec {
    std::size_t instances { 200 };
    std::size_t features { 500 };
    std::size_t informative { 10 };
    std::uint64_t seed { 0 };
};

struct DatasetSpec {
    std::string name;
    std::optional<std::filesystem::path> path {}; // CSV; otherwise synthetic
    CsvOptions csv {};
    SyntheticSpec synthetic {};
};

// Flat `key = value` file, one entry per line, `#` starts a comment.
//
//   output_dir = out            runs = 31           base_seed = 0
//   threads = 8                 variants = NSGA2, INIT_NSGA2, SS_NSGA2, LMSSS
//   reference_variant = LMSSS   alpha = 0.05
//   budget.pop_size = 200       budget.total_generations = 100
//   shrink.n_mic = 1000         shrink.n_nds = 200
//   shrink.runs = 5             shrink.generations = 10
//   shrink.n_fs_fraction = 0.5  shrink.pool = final_population | pareto_front
//   classifier.k = 5            classifier.loss = macro_f1 | error_rate
//   ea.pr = 0.7                 ea.uniform_rate = 0.5
//   ea.revival_window = 0.1     ea.mutation_width = current | original
//   split.train_fraction = 0.7
//   mic.alpha = 0.6             mic.max_clumps_factor = 5   mic.refine = true
//
// Datasets, any number:
//   dataset.<name>.path = file.csv     (relative to the config file)
//   dataset.<name>.label = last | <column index> | <header name>
//   dataset.<name>.delimiter = ,       dataset.<name>.header = true
//   dataset.<name>.impute = false
// or a synthetic one:
//   dataset.<name>.synthetic.instances = 200   .features = 500
//   dataset.<name>.synthetic.informative = 10  .seed = 7
//
// LMSSS_OUTPUT_DIR and LMSSS_THREADS override output_dir and threads.
struct ExperimentConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<Variant> variants;
    std::size_t runs { 31 };
    std::uint64_t base_seed { 0 };
    PipelineConfig pipeline {};
    std::filesystem::path output_dir { "lmsss_out" };
    std::size_t threads { 1 };
    Variant reference { Variant::lmsss };
    double alpha { 0.05 };

    // Checks counts, variant list, budget feasibility and that every CSV exists.
    void validate() const;
};

ExperimentConfig parse_experiment_config(std::string const& text, std::filesystem::path const& base_dir = ".");
ExperimentConfig load_experiment_config(std::filesystem::path const& path);

Dataset load_dataset(DatasetSpec const& spec);

// Shared by every variant at the same run index.
std::uint64_t run_seed(std::uint64_t base_seed, std::string const& dataset, std::size_t run_index);

struct ExperimentResult {
    std::vector<RunReport> reports; // dataset, variant, run order; igd filled
    std::vector<Table> tables;      // hv, igd, mce
};

// Executes every (dataset, variant, run) and writes:
//   reports/<dataset>__<variant>__run<k>.json
//   fronts/<dataset>__<variant>__run<k>.csv    run,variant,dataset,f1,loss,n_features,mask
//   table_hv.csv  table_igd.csv  table_mce.csv  tables.json
//   timing.csv                                  dataset,variant,mean_seconds
ExperimentResult run_experiment(ExperimentConfig const& cfg, std::ostream* log = nullptr);

std::string fronts_csv(RunReport const& r, std::size_t run_index);
std::string timing_csv(std::vector<RunReport> const& reports);

struct ShrinkCommand {
    std::filesystem::path dataset;
    CsvOptions csv {};
    PipelineConfig pipeline {}; // shrink settings, split fraction, operators
    std::uint64_t seed { 0 };
    std::filesystem::path output_dir { "." };
};

struct GenCommand {
    SyntheticSpec spec {};
    std::filesystem::path output; // CSV; the truth file is <stem>_truth.txt next to it
};

// Verbs. Errors are reported on `err` and turned into a nonzero exit code.
int cmd_run(std::filesystem::path const& config_path, std::optional<std::filesystem::path> output_dir,
    std::optional<std::size_t> threads, std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err);
int cmd_shrink(ShrinkCommand const& c, std::ostream& out, std::ostream& err);
int cmd_gen(GenCommand const& c, std::ostream& out, std::ostream& err);

} // namespace lmsss

#endif

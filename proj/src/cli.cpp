#include "lmsss/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <fmt/core.h>

#include "lmsss/error.hpp"
#include "lmsss/parallel.hpp"
#include "lmsss/rng.hpp"

namespace lmsss {

namespace {

std::string trim(std::string_view s)
{
    auto const b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    auto const e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string const& s)
{
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (auto t = trim(item); !t.empty()) {
            out.push_back(std::move(t));
        }
    }
    return out;
}

template <typename T>
T parse_unsigned(std::string const& key, std::string const& v)
{
    T out {};
    auto const [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc {} || ptr != v.data() + v.size()) {
        throw Error(fmt::format("{}: expected a non-negative integer, got '{}'", key, v));
    }
    return out;
}

double parse_double(std::string const& key, std::string const& v)
{
    char* end = nullptr;
    double const out = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size()) {
        throw Error(fmt::format("{}: expected a number, got '{}'", key, v));
    }
    return out;
}

bool parse_bool(std::string const& key, std::string const& v)
{
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw Error(fmt::format("{}: expected true or false, got '{}'", key, v));
}

void set_dataset_key(DatasetSpec& d, std::string const& field, std::string const& key, std::string const& v,
    std::filesystem::path const& base_dir)
{
    if (field == "path") {
        std::filesystem::path p(v);
        d.path = p.is_absolute() ? p : base_dir / p;
    } else if (field == "label") {
        if (v == "last") {
            d.csv.label_column = std::monostate {};
        } else if (!v.empty() && std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            d.csv.label_column = parse_unsigned<std::size_t>(key, v);
        } else {
            d.csv.label_column = v;
        }
    } else if (field == "delimiter") {
        if (v == "tab" || v == "\\t") {
            d.csv.delimiter = '\t';
        } else if (v.size() == 1) {
            d.csv.delimiter = v[0];
        } else {
            throw Error(fmt::format("{}: delimiter must be one character", key));
        }
    } else if (field == "header") {
        d.csv.header = parse_bool(key, v);
    } else if (field == "impute") {
        d.csv.impute_mean = parse_bool(key, v);
    } else if (field == "synthetic.instances") {
        d.synthetic.instances = parse_unsigned<std::size_t>(key, v);
    } else if (field == "synthetic.features") {
        d.synthetic.features = parse_unsigned<std::size_t>(key, v);
    } else if (field == "synthetic.informative") {
        d.synthetic.informative = parse_unsigned<std::size_t>(key, v);
    } else if (field == "synthetic.seed") {
        d.synthetic.seed = parse_unsigned<std::uint64_t>(key, v);
    } else {
        throw Error(fmt::format("unknown key '{}'", key));
    }
}

void set_key(ExperimentConfig& c, std::string const& key, std::string const& v)
{
    auto& p = c.pipeline;
    if (key == "output_dir") {
        c.output_dir = v;
    } else if (key == "runs") {
        c.runs = parse_unsigned<std::size_t>(key, v);
    } else if (key == "base_seed") {
        c.base_seed = parse_unsigned<std::uint64_t>(key, v);
    } else if (key == "threads") {
        c.threads = parse_unsigned<std::size_t>(key, v);
    } else if (key == "variants") {
        c.variants.clear();
        for (auto const& name : split_list(v)) {
            c.variants.push_back(parse_variant(name));
        }
    } else if (key == "reference_variant") {
        c.reference = parse_variant(v);
    } else if (key == "alpha") {
        c.alpha = parse_double(key, v);
    } else if (key == "budget.pop_size") {
        p.budget.pop_size = parse_unsigned<std::size_t>(key, v);
    } else if (key == "budget.total_generations") {
        p.budget.total_generations = parse_unsigned<std::size_t>(key, v);
    } else if (key == "shrink.n_mic") {
        p.shrink.n_mic = parse_unsigned<std::size_t>(key, v);
    } else if (key == "shrink.n_nds") {
        p.shrink.n_nds = parse_unsigned<std::size_t>(key, v);
    } else if (key == "shrink.runs") {
        p.shrink.runs = parse_unsigned<std::size_t>(key, v);
    } else if (key == "shrink.generations") {
        p.shrink.generations = parse_unsigned<std::size_t>(key, v);
    } else if (key == "shrink.n_fs_fraction") {
        p.shrink.n_fs_fraction = parse_double(key, v);
    } else if (key == "shrink.pool") {
        if (v == "final_population") {
            p.shrink.pool = PoolMode::final_population;
        } else if (v == "pareto_front") {
            p.shrink.pool = PoolMode::pareto_front;
        } else {
            throw Error(fmt::format("{}: expected final_population or pareto_front, got '{}'", key, v));
        }
    } else if (key == "classifier.k") {
        p.classifier.k = parse_unsigned<std::size_t>(key, v);
    } else if (key == "classifier.loss") {
        if (v == "macro_f1") {
            p.classifier.loss_metric = LossMetric::one_minus_macro_f1;
        } else if (v == "error_rate") {
            p.classifier.loss_metric = LossMetric::error_rate;
        } else {
            throw Error(fmt::format("{}: expected macro_f1 or error_rate, got '{}'", key, v));
        }
    } else if (key == "ea.pr") {
        p.pr = parse_double(key, v);
    } else if (key == "ea.uniform_rate") {
        p.uniform_rate = parse_double(key, v);
    } else if (key == "ea.revival_window") {
        p.revival_window = parse_double(key, v);
    } else if (key == "ea.mutation_width") {
        if (v == "current") {
            p.mutation_width = MutationWidth::current;
        } else if (v == "original") {
            p.mutation_width = MutationWidth::original;
        } else {
            throw Error(fmt::format("{}: expected current or original, got '{}'", key, v));
        }
    } else if (key == "split.train_fraction") {
        p.train_fraction = parse_double(key, v);
    } else if (key == "mic.alpha") {
        p.shrink.mic.alpha = parse_double(key, v);
    } else if (key == "mic.max_clumps_factor") {
        p.shrink.mic.max_clumps_factor = parse_unsigned<std::size_t>(key, v);
    } else if (key == "mic.refine") {
        p.shrink.mic.refine = parse_bool(key, v);
    } else {
        throw Error(fmt::format("unknown key '{}'", key));
    }
}

std::string safe_name(std::string const& s)
{
    std::string out;
    for (char c : s) {
        bool const ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-'
            || c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out;
}

void write_file(std::filesystem::path const& path, std::string const& content)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error(fmt::format("cannot write {}", path.string()));
    }
    f << content;
    if (!f) {
        throw Error(fmt::format("write failed for {}", path.string()));
    }
}

std::string report_stem(RunReport const& r, std::size_t run_index)
{
    return fmt::format("{}__{}__run{}", safe_name(r.dataset), to_string(r.variant), run_index);
}

} // namespace

void ExperimentConfig::validate() const
{
    if (runs < 1) {
        throw Error("runs must be at least 1");
    }
    if (variants.empty()) {
        throw Error("no variants configured");
    }
    if (datasets.empty()) {
        throw Error("no datasets configured");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(fmt::format("alpha {} not in (0,1)", alpha));
    }
    if (!(pipeline.train_fraction > 0.0 && pipeline.train_fraction < 1.0)) {
        throw Error(fmt::format("split.train_fraction {} not in (0,1)", pipeline.train_fraction));
    }
    for (auto v : variants) {
        pipeline.validate(v);
    }
    if (variants.size() > 1 && std::find(variants.begin(), variants.end(), reference) == variants.end()) {
        throw Error(fmt::format("reference variant {} is not in the variant list", to_string(reference)));
    }
    for (auto const& d : datasets) {
        if (d.path && !std::filesystem::exists(*d.path)) {
            throw Error(fmt::format("dataset '{}': file not found: {}", d.name, d.path->string()));
        }
    }
}

ExperimentConfig parse_experiment_config(std::string const& text, std::filesystem::path const& base_dir)
{
    ExperimentConfig c;
    c.threads = default_threads();
    std::map<std::string, std::size_t> dataset_slot;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto const hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        if (trim(line).empty()) {
            continue;
        }
        auto const eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(fmt::format("config line {}: expected key = value", line_no));
        }
        auto const key = trim(std::string_view(line).substr(0, eq));
        auto const value = trim(std::string_view(line).substr(eq + 1));
        try {
            if (key.rfind("dataset.", 0) == 0) {
                auto const rest = key.substr(8);
                auto const dot = rest.find('.');
                if (dot == std::string::npos || dot == 0) {
                    throw Error(fmt::format("malformed dataset key '{}'", key));
                }
                auto const name = rest.substr(0, dot);
                auto [it, inserted] = dataset_slot.emplace(name, c.datasets.size());
                if (inserted) {
                    c.datasets.push_back({ name });
                }
                set_dataset_key(c.datasets[it->second], rest.substr(dot + 1), key, value, base_dir);
            } else {
                set_key(c, key, value);
            }
        } catch (Error const& e) {
            throw Error(fmt::format("config line {}: {}", line_no, e.what()));
        }
    }
    if (!c.output_dir.is_absolute()) {
        c.output_dir = base_dir / c.output_dir;
    }
    return c;
}

ExperimentConfig load_experiment_config(std::filesystem::path const& path)
{
    std::ifstream f(path);
    if (!f) {
        throw Error(fmt::format("cannot open config {}", path.string()));
    }
    std::stringstream buf;
    buf << f.rdbuf();
    auto c = parse_experiment_config(buf.str(), path.parent_path());
    if (char const* dir = std::getenv("LMSSS_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
        c.output_dir = dir;
    }
    if (char const* t = std::getenv("LMSSS_THREADS"); t != nullptr && *t != '\0') {
        c.threads = parse_unsigned<std::size_t>("LMSSS_THREADS", t);
    }
    return c;
}

Dataset load_dataset(DatasetSpec const& spec)
{
    if (spec.path) {
        auto csv = spec.csv;
        csv.normalize = false; // scaled per split, on the train side
        return load_csv(*spec.path, csv);
    }
    auto const& s = spec.synthetic;
    return generate_synthetic(s.instances, s.features, s.informative, s.seed).data;
}

std::uint64_t run_seed(std::uint64_t base_seed, std::string const& dataset, std::size_t run_index)
{
    return hash_combine(hash_combine(base_seed, hash_string(dataset)), run_index);
}

std::string fronts_csv(RunReport const& r, std::size_t run_index)
{
    std::string out = "run,variant,dataset,f1,loss,n_features,mask\n";
    for (auto const& e : r.test_front) {
        std::string mask;
        for (auto id : e.features) {
            mask += mask.empty() ? fmt::format("{}", id) : fmt::format(" {}", id);
        }
        out += fmt::format("{},{},{},{:.17g},{:.17g},{},{}\n", run_index, to_string(r.variant), r.dataset,
            e.objectives.f1, e.objectives.loss, e.features.size(), mask);
    }
    return out;
}

std::string timing_csv(std::vector<RunReport> const& reports)
{
    std::vector<std::pair<std::string, Variant>> keys;
    std::map<std::pair<std::string, Variant>, std::pair<double, std::size_t>> sums;
    for (auto const& r : reports) {
        std::pair key { r.dataset, r.variant };
        auto [it, inserted] = sums.emplace(key, std::pair { 0.0, std::size_t { 0 } });
        if (inserted) {
            keys.push_back(key);
        }
        it->second.first += r.timing.wall_seconds;
        ++it->second.second;
    }
    std::string out = "dataset,variant,mean_seconds\n";
    for (auto const& k : keys) {
        auto const& [sum, n] = sums.at(k);
        out += fmt::format("{},{},{:.6f}\n", k.first, to_string(k.second), sum / static_cast<double>(n));
    }
    return out;
}

ExperimentResult run_experiment(ExperimentConfig const& cfg, std::ostream* log)
{
    cfg.validate();
    std::vector<Dataset> data;
    for (auto const& d : cfg.datasets) {
        try {
            data.push_back(load_dataset(d));
        } catch (std::exception const& e) {
            throw Error(fmt::format("dataset '{}': {}", d.name, e.what()));
        }
    }

    struct Job {
        std::size_t dataset;
        Variant variant;
        std::size_t run;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::size_t d = 0; d < cfg.datasets.size(); ++d) {
        for (auto v : cfg.variants) {
            for (std::size_t k = 0; k < cfg.runs; ++k) {
                jobs.push_back({ d, v, k, run_seed(cfg.base_seed, cfg.datasets[d].name, k) });
            }
        }
    }

    PipelineConfig pipeline = cfg.pipeline;
    std::size_t const workers = std::max<std::size_t>(1, cfg.threads);
    pipeline.threads = std::max<std::size_t>(1, workers / jobs.size());

    ExperimentResult result;
    result.reports.resize(jobs.size());
    std::mutex log_mutex;
    std::size_t done = 0;
    parallel_for(jobs.size(), workers, [&](std::size_t i) {
        auto const& job = jobs[i];
        auto const& name = cfg.datasets[job.dataset].name;
        try {
            result.reports[i] = run_variant(job.variant, data[job.dataset], pipeline, job.seed, name);
        } catch (std::exception const& e) {
            throw Error(fmt::format("run failed (dataset {}, variant {}, seed {}): {}", name, to_string(job.variant),
                job.seed, e.what()));
        }
        if (log != nullptr) {
            std::lock_guard lock(log_mutex);
            ++done;
            *log << fmt::format("[{}/{}] {} {} run {} hv={:.4f} mce={:.4f} {:.1f}s\n", done, jobs.size(), name,
                to_string(job.variant), job.run, result.reports[i].hv, result.reports[i].mce,
                result.reports[i].timing.wall_seconds);
            log->flush();
        }
    });

    assign_igd(result.reports);

    auto const& out = cfg.output_dir;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto const& r = result.reports[i];
        auto const stem = report_stem(r, jobs[i].run);
        write_file(out / "reports" / (stem + ".json"), to_json(r).dump(2) + "\n");
        write_file(out / "fronts" / (stem + ".csv"), fronts_csv(r, jobs[i].run));
    }
    nlohmann::json tables = nlohmann::json::object();
    if (cfg.variants.size() >= 2) {
        for (auto m : { Metric::hv, Metric::igd, Metric::mce }) {
            auto t = tabulate(result.reports, m, cfg.reference, cfg.alpha);
            write_file(out / fmt::format("table_{}.csv", to_string(m)), to_csv(t));
            tables[std::string(to_string(m))] = to_json(t);
            result.tables.push_back(std::move(t));
        }
        write_file(out / "tables.json", tables.dump(2) + "\n");
    }
    write_file(out / "timing.csv", timing_csv(result.reports));
    return result;
}

int cmd_run(std::filesystem::path const& config_path, std::optional<std::filesystem::path> output_dir,
    std::optional<std::size_t> threads, std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err)
{
    try {
        auto cfg = load_experiment_config(config_path);
        if (output_dir) {
            cfg.output_dir = *output_dir;
        }
        if (threads) {
            cfg.threads = *threads;
        }
        if (seed) {
            cfg.base_seed = *seed;
        }
        auto const result = run_experiment(cfg, &out);
        out << fmt::format("{} runs written to {}\n", result.reports.size(), cfg.output_dir.string());
        return 0;
    } catch (std::exception const& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_shrink(ShrinkCommand const& c, std::ostream& out, std::ostream& err)
{
    try {
        c.pipeline.shrink.validate();
        auto csv = c.csv;
        csv.normalize = false;
        auto const data = load_csv(c.dataset, csv);
        auto const split = stratified_split(data, c.pipeline.train_fraction, c.seed);
        auto const train = MinMaxScaler::fit(split.train).apply(split.train);
        auto const shrink_cfg
            = lightweight_config(c.pipeline, data.n_features(), hash_combine(c.seed, hash_string("shrink")));
        auto const result = shrink(train, shrink_cfg);

        write_file(c.output_dir / "shrink.json", to_json(result).dump(2) + "\n");
        std::string scatter = "column_id,mic,freq,nds_rank\n";
        for (auto const& cand : result.candidates) {
            scatter += fmt::format("{},{:.17g},{:.17g},{}\n", cand.column_id, cand.mic, cand.freq, cand.nds_rank);
        }
        write_file(c.output_dir / "shrink_scatter.csv", scatter);
        out << fmt::format("{} of {} features kept ({} after the MIC filter)\n", result.selected.size(),
            data.n_features(), result.candidates.size());
        return 0;
    } catch (std::exception const& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_gen(GenCommand const& c, std::ostream& out, std::ostream& err)
{
    try {
        auto const& s = c.spec;
        auto const syn = generate_synthetic(s.instances, s.features, s.informative, s.seed);
        if (c.output.has_parent_path()) {
            std::filesystem::create_directories(c.output.parent_path());
        }
        write_csv(syn.data, c.output);
        std::string truth;
        for (auto i : syn.informative) {
            truth += fmt::format("{}\n", i);
        }
        auto const truth_path = c.output.parent_path() / (c.output.stem().string() + "_truth.txt");
        write_file(truth_path, truth);
        out << fmt::format("wrote {} and {}\n", c.output.string(), truth_path.string());
        return 0;
    } catch (std::exception const& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace lmsss

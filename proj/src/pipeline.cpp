#include "lmsss/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <unordered_map>

#include <fmt/core.h>

#include "lmsss/error.hpp"
#include "lmsss/rng.hpp"

namespace lmsss {

std::string_view to_string(Variant v)
{
    switch (v) {
    case Variant::nsga2:
        return "NSGA2";
    case Variant::init_nsga2:
        return "INIT_NSGA2";
    case Variant::ss_nsga2:
        return "SS_NSGA2";
    case Variant::lmsss:
        return "LMSSS";
    }
    return "?";
}

Variant parse_variant(std::string_view name)
{
    std::string up;
    for (char c : name) {
        up.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    for (auto v : { Variant::nsga2, Variant::init_nsga2, Variant::ss_nsga2, Variant::lmsss }) {
        if (up == to_string(v)) {
            return v;
        }
    }
    if (up == "NSGA_II") {
        return Variant::nsga2;
    }
    if (up == "INIT_NSGA_II") {
        return Variant::init_nsga2;
    }
    if (up == "SS_NSGA_II") {
        return Variant::ss_nsga2;
    }
    throw Error(fmt::format("unknown variant '{}'", name));
}

bool uses_shrinking(Variant v)
{
    return v == Variant::ss_nsga2 || v == Variant::lmsss;
}

std::size_t PipelineConfig::main_generations(Variant v) const
{
    if (!uses_shrinking(v)) {
        return budget.total_generations;
    }
    std::size_t const spent = shrink.runs * shrink.generations;
    return budget.total_generations > spent ? budget.total_generations - spent : 0;
}

void PipelineConfig::validate(Variant v) const
{
    if (uses_shrinking(v) && budget.total_generations < shrink.runs * shrink.generations + 1) {
        throw Error(fmt::format("budget of {} generations cannot cover {} lightweight runs x {} generations plus a main phase",
            budget.total_generations, shrink.runs, shrink.generations));
    }
    shrink.validate();
}

std::vector<FrontEntry> test_front(Dataset const& train, Dataset const& test, std::span<FeatureMask const> masks,
    ClassifierConfig const& cfg)
{
    if (masks.empty()) {
        throw Error("test_front: no masks");
    }
    std::vector<FrontEntry> scored;
    std::vector<ObjectiveVector> points;
    for (auto const& mask : masks) {
        auto const r = test_eval(train, test, mask, cfg);
        ObjectiveVector const obj { static_cast<double>(mask.count()) / static_cast<double>(mask.width()), r.loss };
        std::vector<std::size_t> ids;
        for (auto i : mask.indices()) {
            ids.push_back(train.column_ids()[i]);
        }
        std::sort(ids.begin(), ids.end());
        scored.push_back({ std::move(ids), obj, r.error_rate });
        points.push_back(obj);
    }
    std::vector<FrontEntry> out;
    for (auto i : non_dominated_indices(points)) {
        out.push_back(std::move(scored[i]));
    }
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

EAConfig main_ea_config(Variant v, PipelineConfig const& cfg, std::size_t generations, std::size_t original_width,
    std::uint64_t seed)
{
    EAConfig ea;
    ea.pop_size = cfg.budget.pop_size;
    ea.generations = generations;
    ea.classifier = cfg.classifier;
    ea.seed = seed;
    ea.threads = cfg.threads;
    ea.pr = cfg.pr;
    ea.uniform_rate = cfg.uniform_rate;
    if (cfg.mutation_width == MutationWidth::original) {
        ea.mutation_rate = 1.0 / static_cast<double>(original_width);
    }
    switch (v) {
    case Variant::nsga2:
        ea.init = InitMode::bit_uniform;
        ea.crossover = CrossoverKind::uniform;
        ea.revival_window = 0.0;
        break;
    case Variant::init_nsga2:
    case Variant::ss_nsga2:
        ea.init = InitMode::size_uniform;
        ea.crossover = CrossoverKind::uniform;
        ea.revival_window = 0.0;
        break;
    case Variant::lmsss:
        ea.init = InitMode::size_uniform;
        ea.crossover = CrossoverKind::voting;
        ea.revival_window = cfg.revival_window;
        break;
    }
    return ea;
}

} // namespace

ShrinkConfig lightweight_config(PipelineConfig const& cfg, std::size_t original_width, std::uint64_t seed)
{
    ShrinkConfig s = cfg.shrink;
    s.ea = main_ea_config(Variant::lmsss, cfg, s.generations, original_width, seed);
    s.threads = cfg.threads;
    return s;
}

RunReport run_variant(Variant v, Dataset const& data, PipelineConfig const& cfg, std::uint64_t seed,
    std::string dataset_name)
{
    cfg.validate(v);
    auto const t0 = Clock::now();
    RunReport report;
    report.dataset = std::move(dataset_name);
    report.variant = v;
    report.seed = seed;
    report.n_features = data.n_features();

    auto split = stratified_split(data, cfg.train_fraction, seed);
    report.partition_hash = partition_hash(split);
    auto const scaler = MinMaxScaler::fit(split.train);
    Dataset const train = scaler.apply(split.train);
    Dataset const test = scaler.apply(split.test);

    std::unordered_map<std::size_t, std::size_t> position_of;
    for (std::size_t c = 0; c < train.n_features(); ++c) {
        position_of.emplace(train.column_ids()[c], c);
    }

    Dataset search = train;
    if (uses_shrinking(v)) {
        auto const ts = Clock::now();
        auto const shrunk = shrink(train, lightweight_config(cfg, data.n_features(), hash_combine(seed, hash_string("shrink"))));
        report.timing.shrink_seconds = seconds_since(ts);
        std::vector<std::size_t> positions;
        for (auto id : shrunk.selected) {
            positions.push_back(position_of.at(id));
        }
        search = project_columns(train, positions);
        report.ledger.push_back({ "lightweight", shrunk.runs, shrunk.generations, cfg.budget.pop_size,
            shrunk.evaluations, shrunk.initial_evaluations, shrunk.classifier_calls });
    }
    report.search_space.assign(search.column_ids().begin(), search.column_ids().end());

    std::size_t const generations = cfg.main_generations(v);
    auto const ea = main_ea_config(v, cfg, generations, data.n_features(), hash_combine(seed, hash_string(to_string(v))));
    auto const tm = Clock::now();
    auto const result = run_ea(search, ea);
    report.timing.main_seconds = seconds_since(tm);
    report.timing.main_seconds_per_generation
        = generations > 0 ? report.timing.main_seconds / static_cast<double>(generations) : 0.0;
    report.ledger.push_back({ "main", 1, generations, cfg.budget.pop_size, result.evaluations - cfg.budget.pop_size,
        cfg.budget.pop_size, result.classifier_calls });
    report.history = result.history;

    std::vector<FeatureMask> masks;
    for (auto const& ind : result.front) {
        FeatureMask full(train.n_features());
        std::vector<std::size_t> ids;
        for (auto i : ind.mask.indices()) {
            auto const id = search.column_ids()[i];
            full.set(position_of.at(id));
            ids.push_back(id);
        }
        std::sort(ids.begin(), ids.end());
        ObjectiveVector const obj { static_cast<double>(full.count()) / static_cast<double>(full.width()),
            ind.fitness().loss };
        report.train_front.push_back({ std::move(ids), obj, 0.0 });
        masks.push_back(std::move(full));
    }
    for (std::size_t i = 0; i < masks.size(); ++i) {
        // Training error rate of each front member, for reference next to its loss.
        report.train_front[i].error_rate = loocv_eval(train, masks[i], { cfg.classifier.k, LossMetric::error_rate }).error_rate;
    }
    report.test_front = test_front(train, test, masks, cfg.classifier);

    std::vector<ObjectiveVector> points;
    report.mce = 1.0;
    for (auto const& e : report.test_front) {
        points.push_back(e.objectives);
        report.mce = std::min(report.mce, e.error_rate);
    }
    report.hv = hypervolume_2d(points);

    for (auto const& phase : report.ledger) {
        report.budget_used += phase.evaluations;
        report.total_evaluations += phase.evaluations + phase.initial_evaluations;
        report.classifier_calls += phase.classifier_calls;
    }
    report.timing.wall_seconds = seconds_since(t0);
    return report;
}

namespace {

nlohmann::json front_json(std::vector<FrontEntry> const& front)
{
    auto arr = nlohmann::json::array();
    for (auto const& e : front) {
        arr.push_back({ { "features", e.features }, { "f1", e.objectives.f1 }, { "loss", e.objectives.loss },
            { "error_rate", e.error_rate } });
    }
    return arr;
}

std::vector<FrontEntry> front_from_json(nlohmann::json const& arr)
{
    std::vector<FrontEntry> out;
    for (auto const& e : arr) {
        out.push_back({ e.at("features").get<std::vector<std::size_t>>(),
            { e.at("f1").get<double>(), e.at("loss").get<double>() }, e.at("error_rate").get<double>() });
    }
    return out;
}

} // namespace

nlohmann::json to_json(RunReport const& r, bool include_timing)
{
    auto ledger = nlohmann::json::array();
    for (auto const& p : r.ledger) {
        ledger.push_back({ { "phase", p.phase }, { "runs", p.runs }, { "generations", p.generations },
            { "pop_size", p.pop_size }, { "evaluations", p.evaluations },
            { "initial_evaluations", p.initial_evaluations }, { "classifier_calls", p.classifier_calls } });
    }
    auto history = nlohmann::json::array();
    for (auto const& h : r.history) {
        history.push_back({ { "generation", h.generation }, { "best_loss", h.best_loss }, { "front_hv", h.front_hv },
            { "offspring_coverage", h.offspring_coverage } });
    }
    nlohmann::json j {
        { "dataset", r.dataset },
        { "variant", to_string(r.variant) },
        { "seed", r.seed },
        { "partition_hash", fmt::format("{:016x}", r.partition_hash) },
        { "n_features", r.n_features },
        { "search_space", r.search_space },
        { "train_front", front_json(r.train_front) },
        { "test_front", front_json(r.test_front) },
        { "hv", r.hv },
        { "igd", r.igd ? nlohmann::json(*r.igd) : nlohmann::json(nullptr) },
        { "mce", r.mce },
        { "budget_used", r.budget_used },
        { "total_evaluations", r.total_evaluations },
        { "classifier_calls", r.classifier_calls },
        { "budget_ledger", ledger },
        { "history", history },
    };
    if (include_timing) {
        j["wall_time"] = r.timing.wall_seconds;
        j["timing"] = { { "shrink_seconds", r.timing.shrink_seconds }, { "main_seconds", r.timing.main_seconds },
            { "main_seconds_per_generation", r.timing.main_seconds_per_generation } };
    }
    return j;
}

RunReport run_report_from_json(nlohmann::json const& j)
{
    RunReport r;
    r.dataset = j.at("dataset").get<std::string>();
    r.variant = parse_variant(j.at("variant").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.partition_hash = std::stoull(j.at("partition_hash").get<std::string>(), nullptr, 16);
    r.n_features = j.at("n_features").get<std::size_t>();
    r.search_space = j.at("search_space").get<std::vector<std::size_t>>();
    r.train_front = front_from_json(j.at("train_front"));
    r.test_front = front_from_json(j.at("test_front"));
    r.hv = j.at("hv").get<double>();
    if (!j.at("igd").is_null()) {
        r.igd = j.at("igd").get<double>();
    }
    r.mce = j.at("mce").get<double>();
    r.budget_used = j.at("budget_used").get<std::size_t>();
    r.total_evaluations = j.at("total_evaluations").get<std::size_t>();
    r.classifier_calls = j.at("classifier_calls").get<std::size_t>();
    for (auto const& p : j.at("budget_ledger")) {
        r.ledger.push_back({ p.at("phase").get<std::string>(), p.at("runs"), p.at("generations"), p.at("pop_size"),
            p.at("evaluations"), p.at("initial_evaluations"), p.at("classifier_calls") });
    }
    for (auto const& h : j.at("history")) {
        r.history.push_back({ h.at("generation"), h.at("best_loss"), h.at("front_hv"), h.at("offspring_coverage") });
    }
    if (j.contains("wall_time")) {
        r.timing.wall_seconds = j.at("wall_time").get<double>();
        auto const& t = j.at("timing");
        r.timing.shrink_seconds = t.at("shrink_seconds");
        r.timing.main_seconds = t.at("main_seconds");
        r.timing.main_seconds_per_generation = t.at("main_seconds_per_generation");
    }
    return r;
}

} // namespace lmsss

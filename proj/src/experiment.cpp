#include "centershift/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <thread>

#include "json.hpp"

#include "centershift/checkpoint.hpp"
#include "centershift/errors.hpp"
#include "centershift/format.hpp"

namespace centershift {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- parsing

struct RawConfig {
    // section -> key -> value, with consumption tracking for unknown-key checks
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::map<std::string, std::set<std::string>> consumed;
    fs::path path;

    bool has(const std::string& section, const std::string& key) {
        auto s = sections.find(section);
        if (s == sections.end()) return false;
        return s->second.count(key) > 0;
    }

    std::string take(const std::string& section, const std::string& key) {
        consumed[section].insert(key);
        return sections.at(section).at(key);
    }

    void reject_unknown() const {
        for (const auto& [section, keys] : sections) {
            auto c = consumed.find(section);
            for (const auto& [key, value] : keys) {
                if (c == consumed.end() || c->second.count(key) == 0) {
                    throw config_error(path.string() + ": unknown key '" + key + "' in [" +
                                       section + "]");
                }
            }
        }
    }
};

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return std::string(s);
}

RawConfig read_raw_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config " + path.string());
    RawConfig raw;
    raw.path = path;
    const std::set<std::string> known_sections{"dataset", "shift", "train", "output"};
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text.front() == '#' || text.front() == ';') continue;
        if (text.front() == '[') {
            if (text.back() != ']') {
                throw config_error(path.string() + ":" + std::to_string(line_no) +
                                   ": malformed section header");
            }
            section = trim(std::string_view(text).substr(1, text.size() - 2));
            if (!known_sections.count(section)) {
                throw config_error(path.string() + ":" + std::to_string(line_no) +
                                   ": unknown section [" + section + "]");
            }
            continue;
        }
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos || section.empty()) {
            throw config_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 'key = value' inside a section");
        }
        const std::string key = trim(std::string_view(text).substr(0, eq));
        const std::string value = trim(std::string_view(text).substr(eq + 1));
        if (key.empty()) {
            throw config_error(path.string() + ":" + std::to_string(line_no) + ": empty key");
        }
        if (!raw.sections[section].emplace(key, value).second) {
            throw config_error(path.string() + ":" + std::to_string(line_no) +
                               ": duplicate key '" + key + "'");
        }
    }
    return raw;
}

double parse_double(const std::string& value, const std::string& key) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw config_error("bad numeric value for '" + key + "': '" + value + "'");
    }
    return out;
}

std::size_t parse_size(const std::string& value, const std::string& key) {
    unsigned long long out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw config_error("bad integer value for '" + key + "': '" + value + "'");
    }
    return static_cast<std::size_t>(out);
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw config_error("bad boolean value for '" + key + "': '" + value + "'");
}

std::vector<double> parse_double_list(const std::string& value, const std::string& key) {
    std::vector<double> out;
    std::string_view rest = value;
    while (true) {
        const std::size_t comma = rest.find(',');
        out.push_back(parse_double(trim(rest.substr(0, comma)), key));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& value, const std::string& key) {
    std::vector<std::size_t> out;
    std::string_view rest = value;
    while (true) {
        const std::size_t comma = rest.find(',');
        out.push_back(parse_size(trim(rest.substr(0, comma)), key));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

bool shift_is_identity(const ShiftSpec& shift) {
    if (shift.rotation != 0.0 || shift.scale != 1.0 || shift.noise_sigma != 0.0) return false;
    return std::all_of(shift.translation.begin(), shift.translation.end(),
                       [](double t) { return t == 0.0; });
}

// ------------------------------------------------------------ file output

json a_distance_to_json(const ADistanceReport& report) {
    json j;
    j["epsilon"] = report.epsilon;
    j["dist_a"] = report.dist_a;
    j["split_seed"] = report.split_seed;
    return j;
}

json spec_to_json(const ExperimentSpec& spec) {
    json d;
    switch (spec.dataset.kind) {
        case DatasetSpec::Kind::blobs: d["generator"] = "blobs"; break;
        case DatasetSpec::Kind::moons: d["generator"] = "moons"; break;
        case DatasetSpec::Kind::csv: d["generator"] = "csv"; break;
    }
    d["classes"] = spec.dataset.class_count;
    d["per_class"] = spec.dataset.per_class;
    d["input_dim"] = spec.dataset.input_dim;
    d["spread"] = spec.dataset.spread;
    d["noise_sigma"] = spec.dataset.noise_sigma;
    d["source_csv"] = spec.dataset.source_csv.string();
    d["target_csv"] = spec.dataset.target_csv.string();
    d["target_labels"] = spec.dataset.target_labels;

    json s;
    s["rotation_deg"] = spec.shift.rotation * 180.0 / std::numbers::pi;
    s["translate"] = spec.shift.translation;
    s["scale"] = spec.shift.scale;
    s["noise_sigma"] = spec.shift.noise_sigma;

    json t;
    t["mode"] = to_string(spec.train.mode);
    t["iterations"] = spec.train.iterations;
    t["refresh_every"] = spec.train.refresh_every;
    t["alpha"] = spec.train.margins.alpha;
    t["beta"] = spec.train.margins.beta;
    t["target_weight"] = spec.train.target_weight;
    t["pseudo_start"] = spec.train.pseudo_start;
    t["lr_net"] = spec.train.lr_net;
    t["lr_centers"] = spec.train.lr_centers;
    t["batch_size"] = spec.train.batch_size;
    t["embedding_dim"] = spec.train.embedding_dim;
    t["generator_hidden"] = spec.train.generator_hidden;
    t["discriminator_hidden"] = spec.train.discriminator_hidden;
    if (spec.train.lambda_c) t["lambda_c"] = *spec.train.lambda_c;
    else t["lambda_c"] = nullptr;
    t["seed"] = spec.train.seed;
    t["log_every"] = spec.train.log_every;

    json o;
    o["dir"] = spec.output.dir.string();
    o["repeat"] = spec.output.repeat;
    o["checkpoint_every"] = spec.output.checkpoint_every;
    o["dump_pseudo"] = spec.output.dump_pseudo;

    json j;
    j["dataset"] = std::move(d);
    j["shift"] = std::move(s);
    j["train"] = std::move(t);
    j["output"] = std::move(o);
    return j;
}

void prepare_output_dir(const fs::path& dir, bool force) {
    std::error_code ec;
    if (fs::exists(dir) && fs::is_directory(dir) && !fs::is_empty(dir, ec)) {
        if (!force) {
            throw config_error("output directory " + dir.string() +
                               " is not empty; pass --force to reuse it");
        }
    }
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory " + dir.string());
}

struct PseudoTrend {
    double first_ramp = std::numeric_limits<double>::quiet_NaN();
    double final = std::numeric_limits<double>::quiet_NaN();
};

PseudoTrend pseudo_trend(const RunMetrics& metrics, std::size_t pseudo_start) {
    PseudoTrend trend;
    for (const RefreshPoint& p : metrics.refresh_points) {
        if (p.iteration >= pseudo_start && std::isnan(trend.first_ramp)) {
            trend.first_ramp = p.pseudo_accuracy;
        }
    }
    if (!metrics.refresh_points.empty()) {
        trend.final = metrics.refresh_points.back().pseudo_accuracy;
    }
    return trend;
}

SeedOutcome run_one_seed(const ExperimentSpec& spec, std::uint64_t seed, const fs::path& dir,
                         bool csv_header) {
    auto [source, target] = build_datasets(spec, seed, csv_header);
    TrainConfig config = spec.train;
    config.seed = seed;

    const std::string suffix = "_seed" + std::to_string(seed);
    std::ofstream pseudo_out;
    if (spec.output.dump_pseudo) {
        pseudo_out.open(dir / ("pseudo" + suffix + ".csv"));
        if (!pseudo_out) throw io_error("cannot write pseudo snapshot CSV");
        pseudo_out << "iteration,sample_id,label,weight\n";
    }

    Trainer trainer(config, source, target);
    const std::size_t every = spec.output.checkpoint_every;
    while (trainer.iteration() < config.iterations) {
        const std::size_t at = trainer.iteration();
        trainer.step();
        if (pseudo_out.is_open() && should_refresh(at, config.refresh_every)) {
            const PseudoState& state = trainer.pseudo();
            for (std::size_t i = 0; i < state.labels.size(); ++i) {
                pseudo_out << at << ',' << i << ',' << state.labels[i] << ','
                           << format_double(state.weights[i]) << '\n';
            }
        }
        if (every != 0 && trainer.iteration() % every == 0 &&
            trainer.iteration() < config.iterations) {
            save_checkpoint(dir / ("checkpoint_seed" + std::to_string(seed) + "_iter" +
                                   std::to_string(trainer.iteration()) + ".json"),
                            trainer.finish());
        }
    }
    trainer.finalize_metrics();
    TrainResult result = trainer.finish();

    write_metrics_csv(dir / ("metrics" + suffix + ".csv"), result.metrics);
    save_checkpoint(dir / ("checkpoint" + suffix + ".json"), result);
    if (spec.output.dump_pseudo) {
        std::ofstream acc_out(dir / ("pseudo_accuracy" + suffix + ".csv"));
        if (!acc_out) throw io_error("cannot write pseudo accuracy CSV");
        acc_out << "iteration,pseudo_accuracy\n";
        for (const RefreshPoint& p : result.metrics.refresh_points) {
            acc_out << p.iteration << ',' << format_double(p.pseudo_accuracy) << '\n';
        }
    }

    SeedOutcome outcome;
    outcome.seed = seed;
    outcome.final_accuracy = result.metrics.final_accuracy;
    outcome.a_distance = result.metrics.a_distance;
    const PseudoTrend trend = pseudo_trend(result.metrics, config.pseudo_start);
    outcome.pseudo_first_ramp = trend.first_ramp;
    outcome.pseudo_final = trend.final;
    outcome.wall_seconds = result.metrics.wall_seconds;
    outcome.trajectory = trajectory_hash(result);

    // How often the target-side labeling rule agrees with the source truth
    // when applied to source samples; a coarse health signal for the shared
    // classifier, with no pass threshold attached.
    const double source_agreement =
        accuracy(predict_target(result, source.features()), source.training_labels());

    json summary;
    summary["schema_version"] = 1;
    summary["seed"] = seed;
    summary["mode"] = to_string(config.mode);
    summary["final_accuracy"] = outcome.final_accuracy;
    summary["source_agreement"] = source_agreement;
    summary["a_distance"] = a_distance_to_json(outcome.a_distance);
    summary["pseudo_accuracy_first_ramp"] = outcome.pseudo_first_ramp;
    summary["pseudo_accuracy_final"] = outcome.pseudo_final;
    summary["wall_clock_seconds"] = outcome.wall_seconds;
    summary["trajectory_hash"] = outcome.trajectory;
    summary["logged_rows"] = result.metrics.rows.size();
    ExperimentSpec echo = spec;
    echo.train = config;
    summary["config"] = spec_to_json(echo);

    std::ofstream out(dir / ("summary" + suffix + ".json"));
    if (!out) throw io_error("cannot write summary for seed " + std::to_string(seed));
    out << summary.dump(2) << '\n';
    return outcome;
}

std::vector<SeedOutcome> run_seeds(const ExperimentSpec& spec, const fs::path& dir,
                                   const RunOptions& options) {
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < spec.output.repeat; ++i) seeds.push_back(spec.train.seed + i);

    std::vector<SeedOutcome> outcomes(seeds.size());
    const std::size_t workers = resolve_worker_count(options.threads, seeds.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            outcomes[i] = run_one_seed(spec, seeds[i], dir, options.csv_header);
        }
        return outcomes;
    }

    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= seeds.size()) return;
            try {
                outcomes[i] = run_one_seed(spec, seeds[i], dir, options.csv_header);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return outcomes;
}

double mean_of(const std::vector<double>& values) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    const double mu = mean_of(values);
    double acc = 0.0;
    for (double v : values) acc += (v - mu) * (v - mu);
    return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

}  // namespace

ExperimentSpec default_experiment() {
    ExperimentSpec spec;
    // Clockwise 50 degrees: with the stock translation this leaves part of the
    // constellation matched across domains, so adaptation has a foothold.
    spec.shift.rotation = -50.0 * std::numbers::pi / 180.0;
    spec.shift.translation = {2.0, -1.0};
    spec.shift.scale = 1.2;
    spec.shift.noise_sigma = 0.0;
    return spec;
}

ExperimentSpec parse_experiment_file(const fs::path& path) {
    RawConfig raw = read_raw_config(path);
    ExperimentSpec spec = default_experiment();

    if (raw.has("dataset", "generator")) {
        const std::string kind = raw.take("dataset", "generator");
        if (kind == "blobs") spec.dataset.kind = DatasetSpec::Kind::blobs;
        else if (kind == "moons") spec.dataset.kind = DatasetSpec::Kind::moons;
        else if (kind == "csv") spec.dataset.kind = DatasetSpec::Kind::csv;
        else throw config_error("unknown dataset generator '" + kind + "'");
    }
    if (raw.has("dataset", "classes")) {
        spec.dataset.class_count = parse_size(raw.take("dataset", "classes"), "classes");
    }
    if (raw.has("dataset", "per_class")) {
        spec.dataset.per_class = parse_size(raw.take("dataset", "per_class"), "per_class");
    }
    if (raw.has("dataset", "input_dim")) {
        spec.dataset.input_dim = parse_size(raw.take("dataset", "input_dim"), "input_dim");
    }
    if (raw.has("dataset", "spread")) {
        spec.dataset.spread = parse_double(raw.take("dataset", "spread"), "spread");
    }
    if (raw.has("dataset", "noise_sigma")) {
        spec.dataset.noise_sigma = parse_double(raw.take("dataset", "noise_sigma"), "noise_sigma");
    }
    if (raw.has("dataset", "source_csv")) spec.dataset.source_csv = raw.take("dataset", "source_csv");
    if (raw.has("dataset", "target_csv")) spec.dataset.target_csv = raw.take("dataset", "target_csv");
    if (raw.has("dataset", "target_labels")) {
        spec.dataset.target_labels = parse_bool(raw.take("dataset", "target_labels"),
                                                "target_labels");
    }

    if (raw.has("shift", "rotation_deg")) {
        spec.shift.rotation = parse_double(raw.take("shift", "rotation_deg"), "rotation_deg") *
                              std::numbers::pi / 180.0;
    }
    if (raw.has("shift", "translate")) {
        spec.shift.translation = parse_double_list(raw.take("shift", "translate"), "translate");
    }
    if (raw.has("shift", "scale")) {
        spec.shift.scale = parse_double(raw.take("shift", "scale"), "scale");
    }
    if (raw.has("shift", "noise_sigma")) {
        spec.shift.noise_sigma = parse_double(raw.take("shift", "noise_sigma"), "noise_sigma");
    }

    if (raw.has("train", "mode")) spec.train.mode = mode_from_string(raw.take("train", "mode"));
    if (raw.has("train", "iterations")) {
        spec.train.iterations = parse_size(raw.take("train", "iterations"), "iterations");
    }
    if (raw.has("train", "refresh_every")) {
        spec.train.refresh_every = parse_size(raw.take("train", "refresh_every"), "refresh_every");
    }
    if (raw.has("train", "alpha")) {
        spec.train.margins.alpha = parse_double(raw.take("train", "alpha"), "alpha");
    }
    if (raw.has("train", "beta")) {
        spec.train.margins.beta = parse_double(raw.take("train", "beta"), "beta");
    }
    if (raw.has("train", "target_weight")) {
        spec.train.target_weight = parse_double(raw.take("train", "target_weight"),
                                                "target_weight");
    }
    if (raw.has("train", "pseudo_start")) {
        spec.train.pseudo_start = parse_size(raw.take("train", "pseudo_start"), "pseudo_start");
    }
    if (raw.has("train", "lr_net")) {
        spec.train.lr_net = parse_double(raw.take("train", "lr_net"), "lr_net");
    }
    if (raw.has("train", "lr_centers")) {
        spec.train.lr_centers = parse_double(raw.take("train", "lr_centers"), "lr_centers");
    }
    if (raw.has("train", "batch_size")) {
        spec.train.batch_size = parse_size(raw.take("train", "batch_size"), "batch_size");
    }
    if (raw.has("train", "embedding_dim")) {
        spec.train.embedding_dim = parse_size(raw.take("train", "embedding_dim"), "embedding_dim");
    }
    if (raw.has("train", "generator_hidden")) {
        spec.train.generator_hidden = parse_size_list(raw.take("train", "generator_hidden"),
                                                      "generator_hidden");
    }
    if (raw.has("train", "discriminator_hidden")) {
        spec.train.discriminator_hidden =
            parse_size_list(raw.take("train", "discriminator_hidden"), "discriminator_hidden");
    }
    if (raw.has("train", "lambda_c")) {
        spec.train.lambda_c = parse_double(raw.take("train", "lambda_c"), "lambda_c");
    }
    if (raw.has("train", "seed")) {
        spec.train.seed = parse_size(raw.take("train", "seed"), "seed");
    }
    if (raw.has("train", "log_every")) {
        spec.train.log_every = parse_size(raw.take("train", "log_every"), "log_every");
    }

    if (raw.has("output", "dir")) spec.output.dir = raw.take("output", "dir");
    if (raw.has("output", "repeat")) {
        spec.output.repeat = parse_size(raw.take("output", "repeat"), "repeat");
    }
    if (raw.has("output", "checkpoint_every")) {
        spec.output.checkpoint_every = parse_size(raw.take("output", "checkpoint_every"),
                                                  "checkpoint_every");
    }
    if (raw.has("output", "dump_pseudo")) {
        spec.output.dump_pseudo = parse_bool(raw.take("output", "dump_pseudo"), "dump_pseudo");
    }

    raw.reject_unknown();
    if (spec.output.repeat < 1) throw config_error("output repeat must be >= 1");
    return spec;
}

std::pair<DomainDataset, DomainDataset> build_datasets(const ExperimentSpec& spec,
                                                       std::uint64_t seed, bool csv_header) {
    Rng root(seed);
    Rng source_rng = root.fork();
    Rng target_rng = root.fork();
    Rng shift_rng = root.fork();

    switch (spec.dataset.kind) {
        case DatasetSpec::Kind::blobs: {
            DomainDataset source = gen_blobs(spec.dataset.class_count, spec.dataset.per_class,
                                             spec.dataset.input_dim, spec.dataset.spread,
                                             source_rng);
            DomainDataset base = gen_blobs(spec.dataset.class_count, spec.dataset.per_class,
                                           spec.dataset.input_dim, spec.dataset.spread,
                                           target_rng);
            return {std::move(source), apply_shift(base, spec.shift, shift_rng)};
        }
        case DatasetSpec::Kind::moons: {
            DomainDataset source = gen_moons(spec.dataset.per_class, spec.dataset.noise_sigma,
                                             source_rng);
            DomainDataset base = gen_moons(spec.dataset.per_class, spec.dataset.noise_sigma,
                                           target_rng);
            return {std::move(source), apply_shift(base, spec.shift, shift_rng)};
        }
        case DatasetSpec::Kind::csv: {
            if (!shift_is_identity(spec.shift)) {
                throw config_error("the [shift] block applies to synthetic generators only");
            }
            if (spec.dataset.source_csv.empty() || spec.dataset.target_csv.empty()) {
                throw config_error("csv datasets need source_csv and target_csv paths");
            }
            DomainDataset source =
                load_csv(spec.dataset.source_csv, true, Domain::source, csv_header);
            DomainDataset raw_target = load_csv(spec.dataset.target_csv,
                                                spec.dataset.target_labels, Domain::target,
                                                csv_header);
            if (raw_target.class_count() > source.class_count()) {
                throw config_error("target csv labels exceed the source class count");
            }
            // Rebuild so the target carries the source's class count.
            DomainDataset target(raw_target.features(),
                                 raw_target.has_labels() ? raw_target.evaluation_labels()
                                                         : std::vector<std::size_t>{},
                                 Domain::target, source.class_count());
            return {std::move(source), std::move(target)};
        }
    }
    throw config_error("unknown dataset kind");
}

void write_metrics_csv(const fs::path& path, const RunMetrics& metrics) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path.string());
    out << "iteration,loss_source,loss_target,loss_domain,loss_align,loss_generator,"
           "lambda_d,lambda_t,target_accuracy,pseudo_accuracy\n";
    for (const MetricsRow& row : metrics.rows) {
        out << row.iteration << ',' << format_double(row.loss_source) << ','
            << format_double(row.loss_target) << ',' << format_double(row.loss_domain) << ','
            << format_double(row.loss_align) << ',' << format_double(row.loss_generator) << ','
            << format_double(row.lambda_d) << ',' << format_double(row.lambda_t) << ','
            << format_double(row.target_accuracy) << ',' << format_double(row.pseudo_accuracy)
            << '\n';
    }
    if (!out) throw io_error("failed writing " + path.string());
}

std::size_t resolve_worker_count(std::size_t requested, std::size_t seeds) {
    std::size_t workers = requested;
    if (workers == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        workers = hw == 0 ? 1 : hw;
    }
    if (const char* env = std::getenv("CENTERSHIFT_THREADS")) {
        const std::string value(env);
        unsigned long long cap = 0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), cap);
        if (ec == std::errc() && ptr == value.data() + value.size() && cap >= 1) {
            workers = std::min<std::size_t>(workers, cap);
        }
    }
    return std::max<std::size_t>(1, std::min(workers, seeds));
}

std::vector<SeedOutcome> run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
    prepare_output_dir(spec.output.dir, options.force);
    return run_seeds(spec, spec.output.dir, options);
}

void ablate_experiment(const ExperimentSpec& spec, const std::vector<Mode>& modes,
                       const RunOptions& options) {
    if (modes.empty()) throw config_error("ablate: no modes requested");
    prepare_output_dir(spec.output.dir, options.force);

    std::ofstream table(spec.output.dir / "ablation.csv");
    if (!table) throw io_error("cannot write ablation table");
    table << "mode,seeds,mean_accuracy,std_accuracy,mean_dist_a,std_dist_a\n";

    for (Mode mode : modes) {
        ExperimentSpec mode_spec = spec;
        mode_spec.train.mode = mode;
        if (mode_spec.train.lambda_c && !mode_losses(mode).alignment) {
            mode_spec.train.lambda_c.reset();  // lambda_c only applies to alignment modes
        }
        mode_spec.output.dir = spec.output.dir / to_string(mode);
        prepare_output_dir(mode_spec.output.dir, options.force);
        const std::vector<SeedOutcome> outcomes = run_seeds(mode_spec, mode_spec.output.dir,
                                                            options);

        std::vector<double> accuracies, distances;
        for (const SeedOutcome& o : outcomes) {
            accuracies.push_back(o.final_accuracy);
            distances.push_back(o.a_distance.dist_a);
        }
        table << to_string(mode) << ',' << outcomes.size() << ','
              << format_double(mean_of(accuracies)) << ',' << format_double(sample_std(accuracies))
              << ',' << format_double(mean_of(distances)) << ','
              << format_double(sample_std(distances)) << '\n';
    }
    if (!table) throw io_error("failed writing ablation table");
}

}  // namespace centershift

/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <shardprof/aggregation.hpp>
#include <shardprof/comm.hpp>
#include <shardprof/error.hpp>
#include <shardprof/generation.hpp>
#include <shardprof/manifest.hpp>
#include <shardprof/report.hpp>
#include <shardprof/synth.hpp>
#include <shardprof/trace_ingest.hpp>

#include "cli.hpp"

namespace shardprof::cli {

namespace {

/// Bad flag values discovered after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Backend { InProcess, Process };

struct JobOptions {
    int workers{1};
    Backend backend{Backend::InProcess};
    double timeout_s{300.0};
};

struct GenerateOptions {
    std::vector<std::string> dbs;
    std::string out;
    std::optional<std::int64_t> num_shards;
    std::string codec{"uncompressed"};
    bool force{false};
};

struct AggregateOptions {
    double interval_s{1.0};
    int top_k{5};
    std::string variability_frac{"0.05"};
};

struct ReportOptions {
    std::vector<std::string> runs;
    std::vector<std::string> manifests;
    bool svg{false};
};

struct SynthOptions {
    std::string out;
    std::uint64_t seed{7};
    double duration_s{60.0};
    double kernels_per_s{100.0};
    double memcpys_per_s{20.0};
    int devices{1};
    int streams{2};
    std::string ratio{"50:50:1"};
    std::vector<std::string> bursts;
    std::uint64_t memcpy_duration_ns{2'000'000};
};

std::vector<double> split_numbers(std::string const& text, char sep, std::size_t count, char const* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (true) {
        auto const end = text.find(sep, pos);
        auto const field = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(field, &used));
            if (used != field.size()) {
                throw std::invalid_argument{field};
            }
        } catch (std::logic_error const&) {
            throw UsageError{fmt::format("{} '{}' is malformed", what, text)};
        }
        if (end == std::string::npos) {
            break;
        }
        pos = end + 1;
    }
    if (out.size() != count) {
        throw UsageError{fmt::format("{} '{}' needs {} fields", what, text, count)};
    }
    return out;
}

AggregationConfig aggregation_config(AggregateOptions const& o) {
    AggregationConfig cfg;
    if (!(o.interval_s > 0) || !std::isfinite(o.interval_s)) {
        throw UsageError{"--interval-s must be positive"};
    }
    auto const ns = std::llround(o.interval_s * 1e9);
    if (ns < 1) {
        throw UsageError{"--interval-s is below one nanosecond"};
    }
    cfg.interval_ns = static_cast<Nanoseconds>(ns);
    if (o.top_k < 0) {
        throw UsageError{"--top-k must be >= 0"};
    }
    cfg.top_k_shards = o.top_k;
    try {
        cfg.variability_fraction = Fraction::parse(o.variability_frac);
    } catch (Error const& e) {
        throw UsageError{fmt::format("--variability-frac: {}", e.what())};
    }
    return cfg;
}

synth::SynthSpec synth_spec(SynthOptions const& o) {
    synth::SynthSpec spec;
    spec.seed = o.seed;
    spec.duration_s = o.duration_s;
    spec.kernels_per_s = o.kernels_per_s;
    spec.memcpys_per_s = o.memcpys_per_s;
    spec.devices = o.devices;
    spec.streams_per_device = o.streams;
    auto const ratio = split_numbers(o.ratio, ':', 3, "--ratio");
    spec.direction_ratio = {ratio[0], ratio[1], ratio[2]};
    for (auto const& b : o.bursts) {
        auto const f = split_numbers(b, ':', 3, "--burst");
        spec.stall_bursts.push_back(synth::StallBurst{f[0], f[1], f[2]});
    }
    spec.memcpy_duration_ns = o.memcpy_duration_ns;
    try {
        spec.validate();
    } catch (Error const& e) {
        throw UsageError{e.what()};
    }
    return spec;
}

parquet::Codec codec_of(std::string const& name) {
    return name == "gzip" ? parquet::Codec::Gzip : parquet::Codec::Uncompressed;
}

std::filesystem::path run_dir_for(GenerateOptions const& o, std::size_t trace) {
    if (o.dbs.size() == 1) {
        return o.out;
    }
    return std::filesystem::path{o.out} / fmt::format("trace_{}", trace);
}

/// Remove earlier generation outputs so a run with a different shard layout may reuse the directory.
void clear_run_dir(std::filesystem::path const& dir) {
    if (!std::filesystem::is_directory(dir)) {
        return;
    }
    static std::regex const shard{R"(rank\d{4}_shard\d{6}\.parquet)"};
    for (auto const& entry : std::filesystem::directory_iterator{dir}) {
        auto const name = entry.path().filename().string();
        if (std::regex_match(name, shard) || name == kManifestName || name == kKernelNamesName
            || name == kIntervalStatsName || name == kAnomaliesName)
        {
            std::filesystem::remove(entry.path());
        }
    }
}

// --- collective stages -------------------------------------------------------

Manifest generate_one(
    TraceDatabaseRef const& db,
    GenerateOptions const& o,
    Communicator& comm,
    std::filesystem::path const& run_dir
) {
    auto const range = scan_kernel_time_range(db);
    PartitionConfig cfg;
    cfg.num_workers = comm.ctx().world_size;
    cfg.num_shards = o.num_shards.value_or(std::int64_t{8} * comm.ctx().world_size);
    cfg.range_start = range.begin;
    cfg.range_end = range.end;
    GenerationOptions gen;
    gen.writer.codec = codec_of(o.codec);
    auto result = run_generation(db, cfg, comm, run_dir, gen);
    return result.manifest.value_or(Manifest{});
}

std::optional<AggregationResult> aggregate_one(
    std::filesystem::path const& run_dir,
    AggregationConfig const& cfg,
    Communicator& comm,
    std::optional<std::int64_t> num_shards
) {
    AggregationExpectations expect;
    expect.num_shards = num_shards;
    return run_aggregation(run_dir, cfg, comm, expect);
}

double max_seconds(Manifest const& m, bool generation) {
    std::uint64_t best = 0;
    for (auto const& [rank, t] : m.timings) {
        auto const& v = generation ? t.generation_ns : t.aggregation_ns;
        best = std::max(best, v.value_or(0));
    }
    return static_cast<double>(best) / 1e9;
}

// --- report (rank 0 only) ----------------------------------------------------

std::vector<IntervalKey> top_intervals_of(std::filesystem::path const& run_dir, IntervalStatsMap const& stats) {
    auto const j = nlohmann::json::parse(read_text_file(run_dir / kAnomaliesName));
    std::vector<IntervalKey> out;
    for (auto const& item : j.at("top_intervals")) {
        auto const index = item.at("index").get<std::uint64_t>();
        auto const it = stats.find(index);
        SHARDPROF_EXPECTS(
            it != stats.end(),
            ErrorKind::MalformedFile,
            fmt::format("anomalies.json names unknown interval {}", index)
        );
        out.push_back(it->second.key);
    }
    return out;
}

void write_report(ReportOptions const& o, std::filesystem::path const& out) {
    std::filesystem::create_directories(out);
    std::vector<Manifest> manifests;
    std::vector<IntervalStatsMap> stats;
    for (auto const& run : o.runs) {
        manifests.push_back(Manifest::load(std::filesystem::path{run} / kManifestName));
        stats.push_back(read_interval_stats(std::filesystem::path{run} / kIntervalStatsName));
    }
    std::vector<report::TraceSeries> series;
    for (std::size_t i = 0; i < o.runs.size(); ++i) {
        series.push_back({manifests[i].trace_label, manifests[i].config.range_start, &stats[i]});
    }
    report::emit_stall_timeseries(series, out / report::kTimeseriesName);

    std::vector<std::filesystem::path> parcoords;
    for (std::size_t i = 0; i < o.runs.size(); ++i) {
        auto const top = top_intervals_of(o.runs[i], stats[i]);
        if (top.empty()) {
            spdlog::warn("{}: no non-empty intervals, skipping parallel coordinates", o.runs[i]);
            continue;
        }
        auto const t0 = manifests[i].config.range_start;
        if (i == 0) {
            report::emit_parallel_coordinates(stats[i], top, t0, out / report::kParcoordsName);
            parcoords.push_back(out / report::kParcoordsName);
        }
        if (o.runs.size() > 1) {
            auto const name = fmt::format("parcoords_trace{}.csv", manifests[i].trace_label);
            report::emit_parallel_coordinates(stats[i], top, t0, out / name);
            parcoords.push_back(out / name);
        }
    }

    auto overhead_inputs = manifests;
    for (auto const& m : o.manifests) {
        overhead_inputs.push_back(Manifest::load(m));
    }
    report::emit_overhead_report(overhead_inputs, out / report::kOverheadName);

    if (o.svg) {
        auto svg = [](std::filesystem::path const& csv, report::PlotKind kind) {
            auto target = csv;
            target.replace_extension(".svg");
            report::render_svg(csv, kind, target);
        };
        svg(out / report::kTimeseriesName, report::PlotKind::Timeseries);
        for (auto const& p : parcoords) {
            svg(p, report::PlotKind::Parcoords);
        }
        svg(out / report::kOverheadName, report::PlotKind::OverheadBars);
    }
}

// --- dispatch ----------------------------------------------------------------

using Body = std::function<void(Communicator&)>;

void run_job(JobOptions const& job, Body const& body) {
    CommOptions comm;
    comm.timeout = std::chrono::milliseconds{static_cast<std::int64_t>(job.timeout_s * 1000)};
    if (job.backend == Backend::Process) {
        auto worker = FileCommunicator::from_environment(comm);
        body(*worker);
        return;
    }
    run_in_process(job.workers, body, comm);
}

bool is_worker_process() {
    return std::getenv(kEnvRank) != nullptr;
}

void configure_logging(std::string const& level) {
    auto logger = spdlog::stderr_color_mt("shardprof");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(level));
    if (auto const* rank = std::getenv(kEnvRank)) {
        spdlog::set_pattern(fmt::format("[%l] [rank {}] %v", rank));
    } else {
        spdlog::set_pattern("[%l] %v");
    }
}

void add_job_flags(CLI::App* cmd, JobOptions& job) {
    cmd->add_option("--workers", job.workers, "Number of workers (P)")->check(CLI::PositiveNumber);
    cmd->add_option("--backend", job.backend, "Worker backend")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, Backend>{{"process", Backend::Process}, {"inprocess", Backend::InProcess}}
        ));
    cmd->add_option("--timeout-s", job.timeout_s, "Collective timeout in seconds")->check(CLI::PositiveNumber);
}

void add_aggregate_flags(CLI::App* cmd, AggregateOptions& agg) {
    cmd->add_option("--interval-s", agg.interval_s, "Aggregation interval in seconds");
    cmd->add_option("--top-k", agg.top_k, "Number of anomalous shards to report");
    cmd->add_option("--variability-frac", agg.variability_frac, "Fraction of intervals kept for root-cause view");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sharded GPU trace generation and anomaly aggregation"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

    JobOptions job;
    GenerateOptions gen;
    AggregateOptions agg;
    ReportOptions rep;
    SynthOptions syn;
    std::string run_out;

    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic trace database with ground truth");
    synth_cmd->add_option("--out", syn.out, "Output directory")->required();
    synth_cmd->add_option("--seed", syn.seed, "Generator seed");
    synth_cmd->add_option("--duration-s", syn.duration_s, "Trace duration in seconds");
    synth_cmd->add_option("--kernels-per-s", syn.kernels_per_s, "Kernel launch rate");
    synth_cmd->add_option("--memcpys-per-s", syn.memcpys_per_s, "Memcpy rate");
    synth_cmd->add_option("--devices", syn.devices, "Number of devices");
    synth_cmd->add_option("--streams", syn.streams, "Streams per device");
    synth_cmd->add_option("--ratio", syn.ratio, "HtoD:DtoH:DtoD weights");
    synth_cmd->add_option("--burst", syn.bursts, "Stall burst TIME_S:WIDTH_S:AMPLITUDE (repeatable)");
    synth_cmd->add_option("--memcpy-duration-ns", syn.memcpy_duration_ns, "Mean memcpy duration");

    auto* generate_cmd = app.add_subcommand("generate", "Partition a trace into joined shard files");
    generate_cmd->add_option("--db", gen.dbs, "Trace database")->required()->expected(1)->check(CLI::ExistingFile);
    generate_cmd->add_option("--out", gen.out, "Run directory")->required();
    generate_cmd->add_option("--num-shards", gen.num_shards, "Number of shards N (default 8 x workers)")
        ->check(CLI::PositiveNumber);
    generate_cmd->add_option("--codec", gen.codec, "Shard file compression")
        ->check(CLI::IsMember({"uncompressed", "gzip"}));
    generate_cmd->add_flag("--force", gen.force, "Replace an earlier run in the output directory");
    add_job_flags(generate_cmd, job);

    auto* aggregate_cmd = app.add_subcommand("aggregate", "Compute interval statistics and anomalies");
    aggregate_cmd->add_option("--out", gen.out, "Run directory written by generate")->required();
    aggregate_cmd->add_option("--num-shards", gen.num_shards, "Expected number of shards")
        ->check(CLI::PositiveNumber);
    add_aggregate_flags(aggregate_cmd, agg);
    add_job_flags(aggregate_cmd, job);

    auto* report_cmd = app.add_subcommand("report", "Write CSV (and SVG) report artifacts");
    report_cmd->add_option("--out", run_out, "Report directory")->required();
    report_cmd->add_option("--run", rep.runs, "Aggregated run directory (repeatable; default --out)");
    report_cmd->add_option("--manifest", rep.manifests, "Extra manifests for the overhead table")
        ->check(CLI::ExistingFile);
    report_cmd->add_flag("--svg", rep.svg, "Also render SVG plots");

    auto* pipeline_cmd = app.add_subcommand("pipeline", "generate, aggregate and report in one go");
    pipeline_cmd->add_option("--db", gen.dbs, "Trace database (repeatable)")->required()->check(CLI::ExistingFile);
    pipeline_cmd->add_option("--out", gen.out, "Output directory")->required();
    pipeline_cmd->add_option("--num-shards", gen.num_shards, "Number of shards N (default 8 x workers)")
        ->check(CLI::PositiveNumber);
    pipeline_cmd->add_option("--codec", gen.codec, "Shard file compression")
        ->check(CLI::IsMember({"uncompressed", "gzip"}));
    pipeline_cmd->add_flag("--force", gen.force, "Replace an earlier run in the output directory");
    pipeline_cmd->add_flag("--svg", rep.svg, "Also render SVG plots");
    add_aggregate_flags(pipeline_cmd, agg);
    add_job_flags(pipeline_cmd, job);

    try {
        app.parse(argc, argv);
    } catch (CLI::CallForHelp const& e) {
        return app.exit(e);
    } catch (CLI::CallForAllHelp const& e) {
        return app.exit(e);
    } catch (CLI::CallForVersion const& e) {
        return app.exit(e);
    } catch (CLI::ParseError const& e) {
        app.exit(e);
        return kExitUsage;
    }

    configure_logging(log_level);

    AggregationConfig agg_cfg;
    synth::SynthSpec spec;
    try {
        agg_cfg = aggregation_config(agg);
        if (synth_cmd->parsed()) {
            spec = synth_spec(syn);
        }
        if (job.backend == Backend::Process && is_worker_process()) {
            auto const world = std::getenv(kEnvWorldSize);
            if (world == nullptr || std::atoi(world) != job.workers) {
                throw UsageError{"SHARDPROF_WORLD_SIZE does not match --workers"};
            }
        }
    } catch (UsageError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (synth_cmd->parsed()) {
            auto const [db, gt] = synth::generate_db(spec, syn.out);
            fmt::print(
                "{}: {} kernels, {} memcpys, {} joined rows expected\n",
                db.path.string(),
                gt.kernel_count,
                gt.memcpy_count,
                gt.expected_join_rows
            );
            return kExitOk;
        }
        if (report_cmd->parsed()) {
            if (rep.runs.empty()) {
                rep.runs.push_back(run_out);
            }
            write_report(rep, run_out);
            fmt::print("report written to {}\n", run_out);
            return kExitOk;
        }

        bool const collective = generate_cmd->parsed() || aggregate_cmd->parsed() || pipeline_cmd->parsed();
        if (!collective) {
            return kExitUsage;
        }

        // Launcher side of the process backend: prepare, then re-exec as P workers.
        if (!is_worker_process()) {
            if (gen.force && (generate_cmd->parsed() || pipeline_cmd->parsed())) {
                for (std::size_t i = 0; i < gen.dbs.size(); ++i) {
                    clear_run_dir(run_dir_for(gen, i));
                }
            }
            if (job.backend == Backend::Process) {
                std::vector<std::string> args(argv, argv + argc);
                return launch_workers("/proc/self/exe", args, job.workers);
            }
        }

        run_job(job, [&](Communicator& comm) {
            bool const root = comm.ctx().is_root();
            if (generate_cmd->parsed()) {
                auto const m = generate_one(TraceDatabaseRef{gen.dbs.front(), 0}, gen, comm, gen.out);
                if (root) {
                    fmt::print(
                        "generation: {} shards, {:.3f} s max wall, manifest {}\n",
                        m.files.size(),
                        max_seconds(m, true),
                        (std::filesystem::path{gen.out} / kManifestName).string()
                    );
                }
                return;
            }
            if (aggregate_cmd->parsed()) {
                auto const r = aggregate_one(gen.out, agg_cfg, comm, gen.num_shards);
                if (root && r) {
                    fmt::print(
                        "aggregation: {} intervals, {} flagged shards, {} top intervals\n",
                        r->stats.size(),
                        r->report.flagged_shards.size(),
                        r->report.top_intervals.size()
                    );
                }
                return;
            }
            ReportOptions pipeline_report;
            pipeline_report.svg = rep.svg;
            for (std::size_t i = 0; i < gen.dbs.size(); ++i) {
                auto const dir = run_dir_for(gen, i);
                generate_one(TraceDatabaseRef{gen.dbs[i], static_cast<int>(i)}, gen, comm, dir);
                aggregate_one(dir, agg_cfg, comm, gen.num_shards);
                pipeline_report.runs.push_back(dir.string());
            }
            if (root) {
                write_report(pipeline_report, gen.out);
                for (auto const& run : pipeline_report.runs) {
                    auto const m = Manifest::load(std::filesystem::path{run} / kManifestName);
                    fmt::print(
                        "{}: generation {:.3f} s, aggregation {:.3f} s (max over {} workers)\n",
                        run,
                        max_seconds(m, true),
                        max_seconds(m, false),
                        comm.ctx().world_size
                    );
                }
            }
            comm.barrier();
        });
        return kExitOk;
    } catch (Error const& e) {
        spdlog::error("{}", e.what());
        return kExitRuntime;
    } catch (std::exception const& e) {
        spdlog::error("{}", e.what());
        return kExitRuntime;
    }
}

}  // namespace shardprof::cli

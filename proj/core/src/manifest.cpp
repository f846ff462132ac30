/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, shardprof contributors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include <shardprof/error.hpp>
#include <shardprof/manifest.hpp>

namespace shardprof {

std::string partition_hash(PartitionConfig const& cfg) {
    auto const canon = fmt::format(
        "num_shards={};range_start={};range_end={}",
        cfg.num_shards,
        cfg.range_start.ns(),
        cfg.range_end.ns()
    );
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return fmt::format("{:016x}", h);
}

nlohmann::ordered_json Manifest::to_json() const {
    nlohmann::ordered_json j;
    j["config"] = {
        {"num_shards", config.num_shards},
        {"num_workers", config.num_workers},
        {"range_start", config.range_start.ns()},
        {"range_end", config.range_end.ns()},
        {"db", db_path},
        {"trace_label", trace_label},
        {"codec", codec},
        {"config_hash", config_hash()},
    };
    j["t0"] = config.range_start.ns();
    j["t1"] = config.range_end.ns();
    auto files_json = nlohmann::ordered_json::array();
    for (auto const& f : files) {
        files_json.push_back({
            {"rank", f.rank},
            {"shard_index", f.shard_index},
            {"path", f.path.generic_string()},
            {"row_count", f.row_count},
            {"window", {f.window.begin.ns(), f.window.end.ns()}},
            {"wall_time_ns", f.wall_time_ns},
        });
    }
    j["files"] = std::move(files_json);
    auto timings_json = nlohmann::ordered_json::object();
    for (auto const& [rank, t] : timings) {
        nlohmann::ordered_json entry = nlohmann::ordered_json::object();
        if (t.generation_ns) {
            entry["generation_ns"] = *t.generation_ns;
        }
        if (t.aggregation_ns) {
            entry["aggregation_ns"] = *t.aggregation_ns;
        }
        timings_json[std::to_string(rank)] = std::move(entry);
    }
    j["timings"] = std::move(timings_json);
    if (aggregation_workers) {
        j["aggregation_workers"] = *aggregation_workers;
    }
    return j;
}

Manifest Manifest::from_json(nlohmann::json const& j) {
    try {
        Manifest m;
        auto const& c = j.at("config");
        m.config.num_shards = c.at("num_shards").get<std::int64_t>();
        m.config.num_workers = c.at("num_workers").get<std::int64_t>();
        m.config.range_start = Timestamp{j.at("t0").get<std::uint64_t>()};
        m.config.range_end = Timestamp{j.at("t1").get<std::uint64_t>()};
        m.db_path = c.value("db", std::string{});
        m.trace_label = c.value("trace_label", 0);
        m.codec = c.value("codec", std::string{"uncompressed"});
        if (c.contains("config_hash")) {
            SHARDPROF_EXPECTS(
                c.at("config_hash").get<std::string>() == m.config_hash(),
                ErrorKind::ManifestMismatch,
                "manifest config_hash does not match its config"
            );
        }
        for (auto const& f : j.at("files")) {
            ShardFileMeta meta;
            meta.rank = f.at("rank").get<int>();
            meta.shard_index = f.at("shard_index").get<std::int64_t>();
            meta.path = f.at("path").get<std::string>();
            meta.row_count = f.at("row_count").get<std::uint64_t>();
            auto const& w = f.at("window");
            meta.window = TimeWindow{
                Timestamp{w.at(0).get<std::uint64_t>()}, Timestamp{w.at(1).get<std::uint64_t>()}
            };
            meta.wall_time_ns = f.value("wall_time_ns", std::uint64_t{0});
            m.files.push_back(std::move(meta));
        }
        if (j.contains("timings")) {
            for (auto const& [rank, t] : j.at("timings").items()) {
                RankTimings rt;
                if (t.contains("generation_ns")) {
                    rt.generation_ns = t.at("generation_ns").get<std::uint64_t>();
                }
                if (t.contains("aggregation_ns")) {
                    rt.aggregation_ns = t.at("aggregation_ns").get<std::uint64_t>();
                }
                m.timings[std::stoi(rank)] = rt;
            }
        }
        if (j.contains("aggregation_workers")) {
            m.aggregation_workers = j.at("aggregation_workers").get<int>();
        }
        return m;
    } catch (nlohmann::json::exception const& e) {
        fail(ErrorKind::MalformedFile, fmt::format("manifest: {}", e.what()));
    }
}

void write_file_atomic(std::filesystem::path const& path, std::string const& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out{tmp, std::ios::binary | std::ios::trunc};
        SHARDPROF_EXPECTS(out, ErrorKind::IoError, fmt::format("cannot write {}", tmp.string()));
        out << text;
        out.flush();
        SHARDPROF_EXPECTS(out, ErrorKind::IoError, fmt::format("short write on {}", tmp.string()));
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    SHARDPROF_EXPECTS(
        !ec, ErrorKind::IoError, fmt::format("cannot publish {}: {}", path.string(), ec.message())
    );
}

std::string read_text_file(std::filesystem::path const& path) {
    std::ifstream in{path, std::ios::binary};
    SHARDPROF_EXPECTS(in, ErrorKind::IoError, fmt::format("cannot open {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void Manifest::save(std::filesystem::path const& path) const {
    write_file_atomic(path, to_json().dump(2) + "\n");
}

Manifest Manifest::load(std::filesystem::path const& path) {
    auto const text = read_text_file(path);
    auto const j = nlohmann::json::parse(text, nullptr, false);
    SHARDPROF_EXPECTS(
        !j.is_discarded(), ErrorKind::MalformedFile, fmt::format("{} is not valid JSON", path.string())
    );
    return from_json(j);
}

}  // namespace shardprof

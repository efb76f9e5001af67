#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <cereal/archives/binary.hpp>
#include <cereal/types/array.hpp>
#include <cereal/types/deque.hpp>
#include <cereal/types/map.hpp>
#include <cereal/types/memory.hpp>
#include <cereal/types/optional.hpp>
#include <cereal/types/set.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/utility.hpp>
#include <cereal/types/variant.hpp>
#include <cereal/types/vector.hpp>

#include "fakestream/core.hpp"
#include "fakestream/engine.hpp"
#include "fakestream/resources.hpp"

namespace fakestream {

inline constexpr std::uint32_t kSnapshotMagic = 0x46534E50;  // "FSNP"
inline constexpr std::uint32_t kSnapshotVersion = 1;

struct SnapshotHeader {
    std::uint32_t magic = kSnapshotMagic;
    std::uint32_t version = kSnapshotVersion;
    std::uint64_t events = 0;        ///< events learned when the snapshot was taken
    std::uint64_t stream_size = 0;
    std::string last_tweet_id;

    template <class Archive>
    void serialize(Archive& ar) { ar(magic, version, events, stream_size, last_tweet_id); }
};

inline void save_snapshot(const PrequentialRunner& runner, std::uint64_t stream_size, const std::string& last_tweet_id,
                          std::ostream& out) {
    cereal::BinaryOutputArchive ar(out);
    SnapshotHeader h;
    h.events = runner.samples();
    h.stream_size = stream_size;
    h.last_tweet_id = last_tweet_id;
    ar(h);
    // Construction arguments first, so loading can build a runner to fill.
    ar(runner.engine().config());
    ar(const_cast<PrequentialRunner&>(runner));
}

inline void save_snapshot(const PrequentialRunner& runner, std::uint64_t stream_size, const std::string& last_tweet_id,
                          const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write snapshot: " + path.string());
    save_snapshot(runner, stream_size, last_tweet_id, out);
    if (!out) throw Error("snapshot write failed: " + path.string());
}

struct LoadedSnapshot {
    SnapshotHeader header;
    std::unique_ptr<PrequentialRunner> runner;
};

/// Restores a runner; text resources are not stored and must be supplied.
inline LoadedSnapshot load_snapshot(std::istream& in, std::shared_ptr<const TextResources> resources) {
    cereal::BinaryInputArchive ar(in);
    LoadedSnapshot out;
    try {
        ar(out.header);
    } catch (const std::exception&) {
        throw Error("not a snapshot file");
    }
    if (out.header.magic != kSnapshotMagic) throw Error("not a snapshot file");
    if (out.header.version != kSnapshotVersion)
        throw Error("unsupported snapshot version " + std::to_string(out.header.version));
    EngineConfig config;
    ar(config);
    out.runner = std::make_unique<PrequentialRunner>(Engine(config, std::move(resources)), WindowSpec{},
                                                     out.header.stream_size);
    ar(*out.runner);
    return out;
}

inline LoadedSnapshot load_snapshot(const std::filesystem::path& path, std::shared_ptr<const TextResources> resources) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read snapshot: " + path.string());
    return load_snapshot(in, std::move(resources));
}

[[nodiscard]] inline std::filesystem::path snapshot_path(const std::filesystem::path& run_dir, std::uint64_t events) {
    return run_dir / "snapshots" / ("snapshot_" + std::to_string(events) + ".bin");
}

/// Event counts of the snapshots present in a run directory, ascending.
[[nodiscard]] inline std::vector<std::uint64_t> list_snapshots(const std::filesystem::path& run_dir) {
    std::vector<std::uint64_t> out;
    const auto dir = run_dir / "snapshots";
    if (!std::filesystem::is_directory(dir)) return out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (!name.starts_with("snapshot_") || !name.ends_with(".bin")) continue;
        const std::string digits = name.substr(9, name.size() - 13);
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) continue;
        out.push_back(std::stoull(digits));
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Latest snapshot taken with at most `events` events learned.
[[nodiscard]] inline std::optional<std::uint64_t> nearest_snapshot(const std::filesystem::path& run_dir,
                                                                   std::uint64_t events) {
    std::optional<std::uint64_t> best;
    for (auto n : list_snapshots(run_dir))
        if (n <= events) best = n;
    return best;
}

}  // namespace fakestream

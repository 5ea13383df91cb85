#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "dnd/dataio.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using dnd::Communicator;
using dnd::index_t;

namespace fs = std::filesystem;

namespace {

std::string write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
    return path.string();
}

}  // namespace

TEST_CASE("save and load round-trip bitwise for every split and rank count") {
    const auto dir = testutil::scratch_dir("roundtrip");
    oracle::Rng rng(179);
    const std::vector<index_t> shape{5, 4, 3};
    const auto data = rng.vector(60);
    const std::vector<std::optional<int>> splits{std::nullopt, 0, 1, 2};

    for (int p : {1, 3}) {
        for (const auto& save_split : splits) {
            for (const auto& load_split : splits) {
                const auto path = (dir / ("t" + std::to_string(p))).string();
                dnd::run_world(p, [&](const Communicator& comm) {
                    auto a = dnd::from_global(data, shape, save_split, comm);
                    dnd::dnb_save(a, path);
                    auto b = dnd::dnb_load<double>(path, load_split, comm);
                    CHECK(b.shape() == shape);
                    CHECK(b.split() == load_split);
                    CHECK(dnd::gather(b) == data);
                });
            }
        }
    }
}

TEST_CASE("f32 containers round-trip bitwise") {
    const auto dir = testutil::scratch_dir("f32");
    const auto path = (dir / "x.dnb").string();
    oracle::Rng rng(181);
    std::vector<float> data;
    for (int i = 0; i < 24; ++i) data.push_back(static_cast<float>(rng.uniform()));

    dnd::run_world(2, [&](const Communicator& comm) {
        auto a = dnd::from_global(data, {6, 4}, 0, comm);
        dnd::dnb_save(a, path);
        auto b = dnd::dnb_load<float>(path, 0, comm);
        CHECK(dnd::gather(b) == data);
        CHECK_THROWS_AS(dnd::dnb_load<double>(path, 0, comm), dnd::DataError);
    });
    const auto header = dnd::dnb_read_header(path);
    CHECK(header.dtype == dnd::DnbDtype::f32);
}

TEST_CASE("an empty array produces a header-only file") {
    const auto dir = testutil::scratch_dir("empty");
    const auto path = (dir / "empty.dnb").string();
    dnd::run_world(2, [&](const Communicator& comm) {
        auto a = dnd::zeros<double>({0, 7}, 0, comm);
        dnd::dnb_save(a, path);
        auto b = dnd::dnb_load<double>(path, 0, comm);
        CHECK(b.shape() == std::vector<index_t>{0, 7});
        CHECK(b.tile().data.empty());
    });
    CHECK(fs::file_size(path) == 6 + 8 * 2);
}

TEST_CASE("file sizes follow the header law") {
    const auto dir = testutil::scratch_dir("sizes");
    oracle::Rng rng(191);
    for (int rep = 0; rep < 6; ++rep) {
        std::vector<index_t> shape;
        const int d = 1 + static_cast<int>(rng.below(3));
        for (int k = 0; k < d; ++k) shape.push_back(1 + rng.below(6));
        const auto path = (dir / ("s" + std::to_string(rep))).string();
        dnd::run_world(1, [&](const Communicator& comm) {
            dnd::dnb_save(dnd::random_uniform<double>(shape, std::nullopt, 3, comm), path);
        });
        CHECK(fs::file_size(path) ==
              6 + 8 * static_cast<std::uint64_t>(d) +
                  8 * static_cast<std::uint64_t>(dnd::detail::product(shape)));
    }
}

TEST_CASE("chunked loads slice like the chunk map") {
    const auto dir = testutil::scratch_dir("slices");
    const auto path = (dir / "arange.dnb").string();
    dnd::run_world(1, [&](const Communicator& comm) {
        dnd::dnb_save(dnd::arange<double>(5, std::nullopt, comm), path);
    });

    auto tiles = testutil::collect_per_rank<std::vector<double>>(3, [&](const Communicator& comm) {
        return dnd::dnb_load<double>(path, 0, comm).tile().data;
    });
    CHECK(tiles[0] == std::vector<double>{0, 1});
    CHECK(tiles[1] == std::vector<double>{2, 3});
    CHECK(tiles[2] == std::vector<double>{4});

    dnd::run_world(3, [&](const Communicator& comm) {
        auto replicated = dnd::dnb_load<double>(path, std::nullopt, comm);
        auto chunked = dnd::dnb_load<double>(path, 0, comm);
        CHECK(replicated.tile().data == dnd::gather(chunked));
    });
}

TEST_CASE("malformed containers are rejected with the offending field") {
    const auto dir = testutil::scratch_dir("bad");

    const auto good = (dir / "good.dnb").string();
    dnd::run_world(1, [&](const Communicator& comm) {
        dnd::dnb_save(dnd::arange<double>(4, std::nullopt, comm), good);
    });

    auto clone_with = [&](const std::string& name, std::size_t offset, char value) {
        std::ifstream in(good, std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
        bytes[offset] = value;
        const auto path = (dir / name).string();
        std::ofstream out(path, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        return path;
    };

    const auto bad_magic = clone_with("magic.dnb", 0, 'X');
    CHECK_THROWS_WITH_AS(dnd::dnb_read_header(bad_magic), doctest::Contains("magic"),
                         dnd::DataError);

    const auto bad_dtype = clone_with("dtype.dnb", 4, 9);
    CHECK_THROWS_WITH_AS(dnd::dnb_read_header(bad_dtype), doctest::Contains("dtype_code"),
                         dnd::DataError);

    const auto truncated = (dir / "short.dnb").string();
    {
        std::ifstream in(good, std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
        std::ofstream out(truncated, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 8));
    }
    dnd::run_world(1, [&](const Communicator& comm) {
        CHECK_THROWS_WITH_AS(dnd::dnb_load<double>(truncated, std::nullopt, comm),
                             doctest::Contains("truncated"), dnd::DataError);
    });

    CHECK_THROWS_AS(dnd::dnb_read_header((dir / "missing.dnb").string()), dnd::DataError);
}

TEST_CASE("csv conversion handles the 2x2 hand case") {
    const auto dir = testutil::scratch_dir("csv");
    const auto csv = write_text(dir / "m.csv", "1,2\n3,4\n");
    const auto dnb = (dir / "m.dnb").string();
    dnd::csv_to_dnb(csv, dnb);

    dnd::run_world(1, [&](const Communicator& comm) {
        auto a = dnd::dnb_load<double>(dnb, std::nullopt, comm);
        CHECK(a.shape() == std::vector<index_t>{2, 2});
        CHECK(a.tile().data == std::vector<double>{1, 2, 3, 4});
    });
}

TEST_CASE("csv round trip matches an in-memory parse") {
    const auto dir = testutil::scratch_dir("csvrt");
    oracle::Rng rng(193);
    std::string text;
    std::vector<double> expected;
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 4; ++j) {
            const double v = rng.uniform() * 100.0 - 50.0;
            expected.push_back(v);
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            text += buf;
            text += j + 1 < 4 ? "," : "\n";
        }
    }
    const auto csv = write_text(dir / "r.csv", text);
    const auto dnb = (dir / "r.dnb").string();
    dnd::csv_to_dnb(csv, dnb);
    dnd::run_world(2, [&](const Communicator& comm) {
        CHECK(dnd::gather(dnd::dnb_load<double>(dnb, 0, comm)) == expected);
    });
}

TEST_CASE("csv errors carry line numbers") {
    const auto dir = testutil::scratch_dir("csvbad");
    const auto ragged = write_text(dir / "ragged.csv", "1,2\n3\n");
    CHECK_THROWS_WITH_AS(dnd::csv_to_dnb(ragged, (dir / "o.dnb").string()),
                         doctest::Contains("line 2"), dnd::DataError);

    const auto garbage = write_text(dir / "garbage.csv", "1,2\n3,x\n");
    CHECK_THROWS_WITH_AS(dnd::csv_to_dnb(garbage, (dir / "o.dnb").string()),
                         doctest::Contains("line 2"), dnd::DataError);

    const auto empty = write_text(dir / "empty.csv", "\n");
    CHECK_THROWS_AS(dnd::csv_to_dnb(empty, (dir / "o.dnb").string()), dnd::DataError);
}

TEST_CASE("csv header skipping and f32 output") {
    const auto dir = testutil::scratch_dir("csvops");
    const auto csv = write_text(dir / "h.csv", "a,b\n1.5,2.5\n3.5, 4.5\n");
    const auto dnb = (dir / "h.dnb").string();
    dnd::csv_to_dnb(csv, dnb, dnd::DnbDtype::f32, /*skip_header=*/true);
    dnd::run_world(1, [&](const Communicator& comm) {
        auto a = dnd::dnb_load<float>(dnb, std::nullopt, comm);
        CHECK(a.shape() == std::vector<index_t>{2, 2});
        CHECK(a.tile().data == std::vector<float>{1.5f, 2.5f, 3.5f, 4.5f});
    });
}

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "centershift/data.hpp"
#include "centershift/errors.hpp"

using namespace centershift;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("gen_blobs is balanced, labeled and seeded") {
    Rng a(7), b(7);
    const DomainDataset da = gen_blobs(3, 50, 4, 1.0, a);
    const DomainDataset db = gen_blobs(3, 50, 4, 1.0, b);
    CHECK(da.size() == 150);
    CHECK(da.class_count() == 3);
    CHECK(da.domain_tag() == Domain::source);
    CHECK(da.features().data == db.features().data);

    std::vector<std::size_t> counts(3, 0);
    for (std::size_t y : da.training_labels()) counts[y] += 1;
    for (std::size_t c : counts) CHECK(c == 50);
}

TEST_CASE("gen_blobs collapses to class means as spread shrinks") {
    Rng rng(8);
    const double spread = 1e-9;
    const DomainDataset ds = gen_blobs(4, 10, 3, spread, rng);
    const double radius = 4.0 * spread;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const std::size_t y = ds.training_labels()[i];
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(y) / 4.0;
        CHECK(ds.features()(i, 0) == doctest::Approx(radius * std::cos(angle)).epsilon(1e-3));
        CHECK(std::abs(ds.features()(i, 2)) < 1e-7);
    }
}

TEST_CASE("gen_moons lies on unit half-circles without noise") {
    Rng rng(9);
    const DomainDataset ds = gen_moons(40, 0.0, rng);
    CHECK(ds.size() == 80);
    CHECK(ds.class_count() == 2);
    std::size_t outer = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double x = ds.features()(i, 0);
        const double y = ds.features()(i, 1);
        if (ds.training_labels()[i] == 0) {
            ++outer;
            CHECK(x * x + y * y == doctest::Approx(1.0).epsilon(1e-12));
        } else {
            const double dx = x - 1.0;
            const double dy = y - 0.5;
            CHECK(dx * dx + dy * dy == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    CHECK(outer == 40);
}

TEST_CASE("apply_shift identity spec only retags the dataset") {
    Rng rng(10), shift_rng(11);
    const DomainDataset source = gen_blobs(2, 10, 3, 1.0, rng);
    const DomainDataset target = apply_shift(source, ShiftSpec{}, shift_rng);
    CHECK(target.domain_tag() == Domain::target);
    CHECK(target.features().data == source.features().data);
    CHECK(target.evaluation_labels() == source.training_labels());
}

TEST_CASE("apply_shift rotation by pi is an involution") {
    Rng rng(12), s1(13), s2(14);
    const DomainDataset source = gen_blobs(2, 8, 2, 1.0, rng);
    ShiftSpec spec;
    spec.rotation = std::numbers::pi;
    const DomainDataset once = apply_shift(source, spec, s1);
    const DomainDataset twice = apply_shift(once, spec, s2);
    for (std::size_t i = 0; i < source.features().data.size(); ++i) {
        CHECK(twice.features().data[i] ==
              doctest::Approx(source.features().data[i]).epsilon(1e-12));
    }
}

TEST_CASE("apply_shift translation moves the first coordinate exactly") {
    Rng rng(15), shift_rng(16);
    const DomainDataset source = gen_blobs(2, 10, 3, 1.0, rng);
    ShiftSpec spec;
    spec.translation = {10.0};
    const DomainDataset target = apply_shift(source, spec, shift_rng);
    for (std::size_t i = 0; i < source.size(); ++i) {
        CHECK(target.features()(i, 0) - source.features()(i, 0) ==
              doctest::Approx(10.0).epsilon(1e-12));
        CHECK(target.features()(i, 1) == source.features()(i, 1));
    }
}

TEST_CASE("apply_shift preserves labels and sample count") {
    Rng rng(17), shift_rng(18);
    const DomainDataset source = gen_blobs(5, 20, 4, 0.7, rng);
    ShiftSpec spec;
    spec.rotation = 0.9;
    spec.scale = 1.3;
    spec.translation = {1.0, -2.0};
    spec.noise_sigma = 0.05;
    const DomainDataset target = apply_shift(source, spec, shift_rng);
    CHECK(target.size() == source.size());
    CHECK(target.evaluation_labels() == source.training_labels());
}

TEST_CASE("target labels are quarantined from the training surface") {
    Rng rng(19), shift_rng(20);
    const DomainDataset source = gen_blobs(2, 5, 2, 1.0, rng);
    const DomainDataset target = apply_shift(source, ShiftSpec{}, shift_rng);
    CHECK_THROWS_AS(target.training_labels(), config_error);
    CHECK_NOTHROW(target.evaluation_labels());
    CHECK_NOTHROW(source.training_labels());
}

TEST_CASE("csv round-trip preserves values and labels") {
    Rng rng(21);
    const DomainDataset ds = gen_blobs(3, 6, 3, 1.0, rng);
    const fs::path path = temp_file("centershift_test_roundtrip.csv");
    write_csv(path, ds, true);
    const DomainDataset loaded = load_csv(path, true, Domain::source);
    CHECK(loaded.size() == ds.size());
    CHECK(loaded.class_count() == 3);
    CHECK(loaded.training_labels() == ds.training_labels());
    for (std::size_t i = 0; i < ds.features().data.size(); ++i) {
        CHECK(loaded.features().data[i] == ds.features().data[i]);
    }
    fs::remove(path);
}

TEST_CASE("load_csv parses a small labeled file") {
    const fs::path path = temp_file("centershift_test_small.csv");
    {
        std::ofstream out(path);
        out << "0.5,1.25,0\n-1,0.75,2\n3,4,1\n";
    }
    const DomainDataset ds = load_csv(path, true, Domain::source);
    CHECK(ds.size() == 3);
    CHECK(ds.input_dim() == 2);
    CHECK(ds.class_count() == 3);
    CHECK(ds.features()(0, 1) == 1.25);
    CHECK(ds.training_labels()[1] == 2);
    fs::remove(path);
}

TEST_CASE("load_csv error paths name the offending row") {
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", true, Domain::source), io_error);

    const fs::path ragged = temp_file("centershift_test_ragged.csv");
    {
        std::ofstream out(ragged);
        out << "1,2,0\n1,2,3,0\n";
    }
    CHECK_THROWS_WITH_AS(load_csv(ragged, true, Domain::source),
                         doctest::Contains(":2"), io_error);
    fs::remove(ragged);

    const fs::path bad_cell = temp_file("centershift_test_badcell.csv");
    {
        std::ofstream out(bad_cell);
        out << "1,oops,0\n";
    }
    CHECK_THROWS_AS(load_csv(bad_cell, true, Domain::source), io_error);
    fs::remove(bad_cell);

    const fs::path bad_label = temp_file("centershift_test_badlabel.csv");
    {
        std::ofstream out(bad_label);
        out << "1,2,-3\n";
    }
    CHECK_THROWS_AS(load_csv(bad_label, true, Domain::source), io_error);
    fs::remove(bad_label);
}

TEST_CASE("load_csv optionally skips one header line") {
    const fs::path path = temp_file("centershift_test_header.csv");
    {
        std::ofstream out(path);
        out << "x,y,label\n1,2,0\n3,4,1\n";
    }
    CHECK_THROWS_AS(load_csv(path, true, Domain::source, false), io_error);
    const DomainDataset ds = load_csv(path, true, Domain::source, true);
    CHECK(ds.size() == 2);
    fs::remove(path);
}

TEST_CASE("batch sampler with batch_size == N yields a permutation") {
    BatchSampler sampler(10, 10, Rng(30));
    const auto batch = sampler.next();
    std::vector<std::size_t> sorted = batch;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 10; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("two epochs of batches cover every index exactly twice") {
    const std::size_t n = 12;
    const std::size_t batch = 4;
    BatchSampler sampler(n, batch, Rng(31));
    std::vector<std::size_t> counts(n, 0);
    for (std::size_t draw = 0; draw < 2 * n / batch; ++draw) {
        for (std::size_t i : sampler.next()) counts[i] += 1;
    }
    for (std::size_t c : counts) CHECK(c == 2);
}

TEST_CASE("batch stream wraps epochs without skipping indices") {
    const std::size_t n = 10;
    const std::size_t batch = 4;  // does not divide n
    BatchSampler sampler(n, batch, Rng(32));
    std::vector<std::size_t> counts(n, 0);
    for (std::size_t draw = 0; draw < n; ++draw) {  // 40 indices = 4 epochs
        const auto& indices = sampler.next();
        CHECK(indices.size() == batch);
        for (std::size_t i : indices) counts[i] += 1;
    }
    for (std::size_t c : counts) CHECK(c == 4);
}

TEST_CASE("batch streams are identical across runs with the same seed") {
    BatchSampler a(25, 8, Rng(33));
    BatchSampler b(25, 8, Rng(33));
    for (int draw = 0; draw < 20; ++draw) CHECK(a.next() == b.next());
    CHECK_THROWS_AS(BatchSampler(5, 6, Rng(34)), config_error);
}

TEST_CASE("draw_batch fills labels only for the source domain") {
    Rng rng(35), shift_rng(36);
    const DomainDataset source = gen_blobs(2, 10, 2, 1.0, rng);
    const DomainDataset target = apply_shift(source, ShiftSpec{}, shift_rng);

    BatchSampler source_sampler(source.size(), 5, Rng(37));
    BatchSampler target_sampler(target.size(), 5, Rng(38));
    const Batch sb = draw_batch(source, source_sampler);
    const Batch tb = draw_batch(target, target_sampler);
    CHECK(sb.labels.size() == 5);
    CHECK(tb.labels.empty());
    CHECK(sb.features.rows == 5);
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(sb.labels[k] == source.training_labels()[sb.indices[k]]);
    }
}

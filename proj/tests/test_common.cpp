#include "llmloc/common.hpp"

#include "support.hpp"

#include <doctest.h>

#include <thread>

using namespace llmloc;

TEST_CASE("sha256 of known inputs") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("normalize_path") {
    CHECK(normalize_path("./a/b.py") == "a/b.py");
    CHECK(normalize_path("/a//b/./c.py") == "a/b/c.py");
    CHECK(normalize_path("a/x/../b.py") == "a/b.py");
    CHECK(normalize_path("../../a.py") == "a.py");
    CHECK(normalize_path("a\\b.py") == "a/b.py");
    CHECK(normalize_path("") == "");
}

TEST_CASE("path pieces") {
    CHECK(basename_of("a/b/c.py") == "c.py");
    CHECK(basename_of("c.py") == "c.py");
    CHECK(dirname_of("a/b/c.py") == "a/b");
    CHECK(dirname_of("c.py") == "");
    CHECK(extension_of("a/B.YAML") == ".yaml");
    CHECK(extension_of("Makefile") == "");
    CHECK(extension_of(".hidden") == "");
}

TEST_CASE("line counting") {
    CHECK(count_lines("") == 0);
    CHECK(count_lines("a") == 1);
    CHECK(count_lines("a\n") == 1);
    CHECK(count_lines("a\nb") == 2);
    CHECK(split_lines("a\r\nb\n").size() == 2);
}

TEST_CASE("trim and prefix") {
    CHECK(trim("  x y \t\n") == "x y");
    CHECK(trim("   ").empty());
    CHECK(starts_with("### FILE: a", "### FILE: "));
    CHECK_FALSE(starts_with("#", "##"));
}

TEST_CASE("file round trip and missing file") {
    testing::TempDir dir;
    write_file(dir / "sub/x.txt", "hello\n");
    CHECK(read_file(dir / "sub/x.txt") == "hello\n");
    try {
        read_file(dir / "absent.txt");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::io);
    }
}

TEST_CASE("diagnostic sink takes concurrent appends") {
    DiagnosticSink sink;
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&sink] {
            for (int i = 0; i < 250; ++i) sink.warn("t", "m");
        });
    for (auto& t : threads) t.join();
    CHECK(sink.count(Severity::warning) == 1000);
    CHECK(sink.count(Severity::error) == 0);
    sink.clear();
    CHECK(sink.snapshot().empty());
}

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "gcm/io.hpp"
#include "test_support.hpp"

using namespace gcm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("gcm_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("tensor text round trip and stability") {
    TempDir dir;
    Rng rng(111);
    const Tensor t = testutil::random_tensor({2, 3, 4}, rng);
    const std::string p1 = dir.file("t1.txt"), p2 = dir.file("t2.txt");
    save_tensor_text(p1, t);
    const Tensor back = load_tensor_text(p1);
    CHECK(back.shape() == t.shape());
    CHECK(testutil::rel_dev(back, t) <= 1e-8); // 9 significant digits

    // the format is a fixed point: dump(load(dump(x))) == dump(x)
    save_tensor_text(p2, back);
    CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("tensor text rejects malformed files") {
    TempDir dir;
    const std::string path = dir.file("bad.txt");
    {
        std::ofstream f(path);
        f << "not a header\n1 2 3\n";
    }
    CHECK_THROWS_AS(load_tensor_text(path), ParseError);
    {
        std::ofstream f(path);
        f << "shape: 2 2\n1 2 3\n";
    }
    CHECK_THROWS_AS(load_tensor_text(path), ParseError);
    CHECK_THROWS_AS(load_tensor_text(dir.file("missing.txt")), ParseError);
}

TEST_CASE("weight container round trips exactly") {
    TempDir dir;
    Rng rng(112);
    WeightFile wf;
    wf.add("stem.conv1.kernel", testutil::random_tensor({4, 3, 3, 3}, rng));
    wf.add("stem.conv1.bias", testutil::random_tensor({4}, rng));
    wf.add("odss.ss2d.0.a", testutil::random_tensor({2, 2}, rng));
    const std::string path = dir.file("w.bin");
    save_weights(path, wf);

    const WeightFile back = load_weights(path);
    REQUIRE(back.sections().size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.sections()[i].first == wf.sections()[i].first);
        CHECK(max_abs_diff(back.sections()[i].second, wf.sections()[i].second) == 0.0);
    }
    CHECK(back.find("missing") == nullptr);
    CHECK_THROWS_AS(back.require("missing"), ParseError);
    CHECK(max_abs_diff(back.require("stem.conv1.bias"), wf.sections()[1].second) == 0.0);
}

TEST_CASE("weight container rejects corrupt files") {
    TempDir dir;
    const std::string path = dir.file("bad.bin");
    {
        std::ofstream f(path, std::ios::binary);
        f << "NOPE";
    }
    CHECK_THROWS_WITH_AS(load_weights(path), doctest::Contains("bad magic"), ParseError);

    // truncate a valid file mid-payload
    WeightFile wf;
    Rng rng(113);
    wf.add("x", testutil::random_tensor({8}, rng));
    const std::string good = dir.file("good.bin");
    save_weights(good, wf);
    const std::string bytes = slurp(good);
    {
        std::ofstream f(path, std::ios::binary);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 9));
    }
    CHECK_THROWS_WITH_AS(load_weights(path), doctest::Contains("truncated"), ParseError);
}

TEST_CASE("deterministic JSON serialization") {
    nlohmann::json j;
    j["zeta"] = 1.5;
    j["alpha"] = 3;
    j["nested"]["b"] = false;
    j["nested"]["a"] = "text with \"quotes\" and\nnewline";
    j["list"] = {1.0, 2.25, 3.0};

    const std::string s = dump_json(j);
    // keys come out sorted
    CHECK(s.find("\"alpha\"") < s.find("\"list\""));
    CHECK(s.find("\"list\"") < s.find("\"nested\""));
    CHECK(s.find("\"nested\"") < s.find("\"zeta\""));
    // floats carry exactly six decimals
    CHECK(s.find("1.500000") != std::string::npos);
    CHECK(s.find("2.250000") != std::string::npos);
    // integers stay integral
    CHECK(s.find("\"alpha\": 3") != std::string::npos);
    // escapes survive
    CHECK(s.find("\\\"quotes\\\"") != std::string::npos);
    CHECK(s.find("\\n") != std::string::npos);

    CHECK(dump_json(j) == s);

    TempDir dir;
    const std::string path = dir.file("r.json");
    save_json(path, j);
    CHECK(slurp(path) == s);

    // parseable by the shipped JSON parser
    const auto parsed = nlohmann::json::parse(s);
    CHECK(parsed["alpha"] == 3);
    CHECK(parsed["zeta"] == doctest::Approx(1.5));
}

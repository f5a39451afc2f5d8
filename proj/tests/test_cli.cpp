#include <doctest.h>

#include <fstream>
#include <sstream>

#include "support/support.hpp"
#include "uelicit/cli.hpp"
#include "uelicit/error.hpp"

using namespace uelicit;

namespace {

struct Result
{
    int status;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args, const std::string& input = {})
{
    args.insert(args.begin(), "uelicit");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::istringstream in(input);
    std::ostringstream out, err;
    const int status = run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
    return {status, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

// Generates the noisy corpus into `dir` and returns the common input flags.
std::vector<std::string> inputs(const support::TempDir& dir)
{
    const auto db = (dir / "db.csv").string();
    if (!std::filesystem::exists(db)) {
        const auto r = run({"gen", "--spec", support::data_path("archetypes4_noisy.json").string(), "-o", db});
        REQUIRE(r.status == 0);
    }
    return {"--model", support::data_path("mini_panda.json").string(), "--db", db};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace

TEST_CASE("range parsing")
{
    CHECK(parse_range("1..4") == std::vector<std::size_t>{1, 2, 3, 4});
    CHECK(parse_range("2,8,5") == std::vector<std::size_t>{2, 8, 5});
    CHECK(parse_range("7") == std::vector<std::size_t>{7});
    CHECK_THROWS_AS(parse_range("4..1"), ValidationError);
    CHECK_THROWS_AS(parse_range("a..b"), ValidationError);
    CHECK_THROWS_AS(parse_range(""), ValidationError);
}

TEST_CASE("gen writes a deterministic database and labels")
{
    support::TempDir dir;
    const auto spec = support::data_path("archetypes4_noisy.json").string();
    const auto a = run({"gen", "--spec", spec, "-o", (dir / "a.csv").string(), "--labels", (dir / "l.csv").string()});
    REQUIRE(a.status == 0);
    CHECK(a.err.find("warning") != std::string::npos);
    const auto b = run({"gen", "--spec", spec});
    REQUIRE(b.status == 0);
    CHECK(slurp(dir / "a.csv") == b.out);
    CHECK(lines_of(b.out).size() == 61);
    CHECK(lines_of(slurp(dir / "l.csv")).front() == "id,archetype");

    const auto c = run({"gen", "--spec", spec, "--seed", "5"});
    CHECK(c.out != b.out);
}

TEST_CASE("cluster and tree export json")
{
    support::TempDir dir;
    const auto in = inputs(dir);
    const auto one = run(concat({"cluster"}, concat(in, {"--history", "1", "--k", "3"})));
    REQUIRE(one.status == 0);
    const auto doc = nlohmann::json::parse(one.out);
    CHECK(doc["k"] == 3);
    CHECK(doc["clusters"].size() == 3);

    const auto all = run(concat({"cluster", "--all-histories"}, in));
    REQUIRE(all.status == 0);
    CHECK(nlohmann::json::parse(all.out).size() == 4);

    const auto tree = run(concat({"tree"}, concat(in, {"--history", "2", "-o", (dir / "t.json").string()})));
    REQUIRE(tree.status == 0);
    const auto t = nlohmann::json::parse(slurp(dir / "t.json"));
    CHECK(t["history"] == "2");
    CHECK(t["root"].contains("question"));
}

TEST_CASE("elicit walks the tree from scripted answers")
{
    support::TempDir dir;
    const auto in = inputs(dir);
    std::string script;
    for (int i = 0; i < 40; ++i) script += i == 0 ? "why\n" : (i % 2 ? "y\n" : "no\n");
    const auto r = run(concat({"elicit"}, in), "maybe\n" + script);
    REQUIRE(r.status == 0);
    CHECK(r.out.find("Q: ") != std::string::npos);
    CHECK(r.out.find("please answer y, n or why") != std::string::npos);
    CHECK(r.out.find("answer y if you strictly prefer") != std::string::npos);
    CHECK(r.out.find("strategy: ") != std::string::npos);
    CHECK(r.out.find("expected utility: ") != std::string::npos);

    const auto cut = run(concat({"elicit"}, in), "");
    CHECK(cut.status == 1);
    CHECK(cut.err.find("input ended") != std::string::npos);
}

TEST_CASE("eval loocv prints one row per k")
{
    support::TempDir dir;
    const auto in = inputs(dir);
    const auto r = run(concat({"eval", "loocv", "--k-range", "1..10"}, in));
    REQUIRE(r.status == 0);
    const auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 11);
    CHECK(rows[0] == "protocol,history,x,mean_error,runs");
    CHECK(rows[1].rfind("loocv,0,1,", 0) == 0);
    CHECK_FALSE(r.err.empty());

    const auto h = run(concat({"eval", "holdout", "--runs", "5", "--seed", "2", "--threads", "2"}, in));
    REQUIRE(h.status == 0);
    CHECK(lines_of(h.out).size() == 2);
    const auto h1 = run(concat({"eval", "holdout", "--runs", "5", "--seed", "2"}, in));
    CHECK(h1.out == h.out);

    const auto lc = run(concat({"eval", "learning-curve", "--runs", "5", "--train-sizes", "8,16,24"}, in));
    REQUIRE(lc.status == 0);
    CHECK(lines_of(lc.out).size() == 4);
}

TEST_CASE("bad invocations fail with a message")
{
    support::TempDir dir;
    const auto in = inputs(dir);
    CHECK(run({}).status != 0);
    CHECK(run({"frobnicate"}).status != 0);
    CHECK(run({"tree", "--model", "/nonexistent.json", "--db", "/nonexistent.csv"}).status != 0);
    CHECK(run(concat({"eval", "bogus"}, in)).status != 0);
    CHECK(run(concat({"eval", "loocv", "--k-range", "0..3"}, in)).status != 0);
    const auto r = run(concat({"tree", "--history", "nope"}, in));
    CHECK(r.status == 1);
    CHECK(r.err.find("error:") == 0);
}

TEST_CASE("dropped rows are reported")
{
    support::TempDir dir;
    const auto in = inputs(dir);
    auto text = slurp(dir / "db.csv");
    // blank one cell in the second data row
    auto second = text.find('\n', text.find('\n') + 1) + 1;
    auto comma = text.find(',', second);
    auto next = text.find(',', comma + 1);
    text.erase(comma + 1, next - comma - 1);
    std::ofstream(dir / "holey.csv") << text;
    const auto r = run({"tree", "--model", in[1], "--db", (dir / "holey.csv").string()});
    REQUIRE(r.status == 0);
    CHECK(r.err.find("59 loaded, 1 dropped") != std::string::npos);
}

#include <doctest.h>

#include <string>

#include "../support/reference.hpp"
#include "lfgen/errors.hpp"
#include "lfgen/rng.hpp"
#include "lfgen/tree.hpp"
#include "lfgen/tree_io.hpp"

using namespace lfgen;

namespace {

ErrorKind kind_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an lfgen::Error");
    return ErrorKind::OutOfRange;
}

} // namespace

TEST_CASE("single lineage")
{
    const Tree t = depths_to_tree(DepthSeq{4, {}});
    CHECK(t.height() == 4);
    CHECK(t.tip_count() == 1);
    CHECK(tree_to_depths(t) == DepthSeq{4, {}});
    CHECK(write_newick(depths_to_tree(DepthSeq{2, {}})) == "0:2;");
}

TEST_CASE("caterpillar drawing")
{
    const Tree t = depths_to_tree(DepthSeq{3, {1, 2}});
    CHECK(t.height() == 3);
    CHECK(t.tip_count() == 3);
    CHECK(t.internal_count() == 3);
    const TreeNode& root = t.node(t.root());
    REQUIRE(root.children.size() == 1);
    const TreeNode& top = t.node(root.children[0]);
    CHECK(top.depth == 2);
    REQUIRE(top.children.size() == 2);
    const TreeNode& cherry = t.node(top.children[0]);
    CHECK(cherry.depth == 1);
    CHECK(t.node(cherry.children[0]).label == 0);
    CHECK(t.node(cherry.children[1]).label == 1);
    CHECK(t.node(top.children[1]).label == 2);
    CHECK(write_newick(t) == "((0:1,1:1):1,2:2):1;");
    CHECK(tree_to_depths(t) == DepthSeq{3, {1, 2}});
}

TEST_CASE("equal depths form a multifurcation")
{
    const Tree t = depths_to_tree(DepthSeq{3, {2, 2}});
    const TreeNode& stem = t.node(t.node(t.root()).children[0]);
    CHECK(stem.depth == 2);
    CHECK(stem.children.size() == 3);
    CHECK(write_newick(t) == "(0:2,1:2,2:2):1;");
    CHECK(tree_to_depths(t) == DepthSeq{3, {2, 2}});
}

TEST_CASE("coalescence at the full height has no stem")
{
    const Tree t = depths_to_tree(DepthSeq{2, {2}});
    CHECK(t.node(t.root()).children.size() == 2);
    CHECK(write_newick(t) == "(0:2,1:2):0;");
}

TEST_CASE("newick parsing")
{
    CHECK(tree_to_depths(parse_newick("((0:1,1:1):2,2:3):0;")) == DepthSeq{3, {1, 3}});
    CHECK(tree_to_depths(parse_newick("((0:1,1:1):1,2:2):1;")) == DepthSeq{3, {1, 2}});
    CHECK(tree_to_depths(parse_newick("(0:2,1:2,2:2):1;")) == DepthSeq{3, {2, 2}});
    CHECK(tree_to_depths(parse_newick("0:2;")) == DepthSeq{2, {}});
    CHECK(tree_to_depths(parse_newick("[a comment] ( a:1 , b:1 )[x]:2 ;")) == DepthSeq{3, {1}});
    CHECK(tree_to_depths(parse_newick("((0:1,1:1):0,2:1):1;")) == DepthSeq{2, {1, 1}});

    CHECK(kind_of([] { parse_newick("(0:1,(1:0.5,2:0.5):0.5):0;"); }) == ErrorKind::NonIntegerDepth);
    CHECK(kind_of([] { parse_newick("(0:1,1:2):0;"); }) == ErrorKind::NotUltrametric);
    CHECK(kind_of([] { parse_newick("(0:1,1:1:0;"); }) == ErrorKind::SyntaxError);
    CHECK(kind_of([] { parse_newick("(0:1,1:1)"); }) == ErrorKind::SyntaxError);
    try {
        parse_newick("(0:1,1:x):0;");
        FAIL("no throw");
    } catch (const SyntaxError& e) {
        CHECK(e.position() > 0);
    }
}

TEST_CASE("depth validation")
{
    CHECK(kind_of([] { DepthSeq{2, {3}}.validate(); }) == ErrorKind::InvalidDepth);
    CHECK(kind_of([] { DepthSeq{2, {0}}.validate(); }) == ErrorKind::InvalidDepth);
    CHECK(kind_of([] { DepthSeq{0, {}}.validate(); }) == ErrorKind::InvalidDepth);
    CHECK(kind_of([] { depths_to_tree(DepthSeq{1, {2}}); }) == ErrorKind::InvalidDepth);
}

TEST_CASE("exhaustive round trips for T <= 4, n <= 5")
{
    int count = 0;
    for (int T = 1; T <= 4; ++T)
        for (int n = 1; n <= 5; ++n)
            for (const auto& x : ref::all_vectors(T, n - 1)) {
                const DepthSeq seq{T, x};
                const Tree t = depths_to_tree(seq);
                CHECK(t.tip_count() == n);
                CHECK(tree_to_depths(t) == seq);
                const std::string nwk = write_newick(t);
                const Tree back = parse_newick(nwk);
                CHECK(structurally_equal(back, t));
                CHECK(write_newick(back) == nwk);
                ++count;
            }
    CHECK(count > 400);
}

TEST_CASE("random round trips")
{
    Rng rng(2024);
    for (int i = 0; i < 2000; ++i) {
        const int T = 1 + static_cast<int>(rng.below(12));
        const int n = 1 + static_cast<int>(rng.below(30));
        DepthSeq seq{T, {}};
        for (int j = 1; j < n; ++j)
            seq.depths.push_back(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(T))));
        CHECK(tree_to_depths(parse_newick(write_newick(depths_to_tree(seq)))) == seq);
    }
}

TEST_CASE("json lines records")
{
    const TreeRecord rec{DepthSeq{6, {2, 1, 3}}, 4};
    const std::string line = to_jsonl(rec);
    CHECK(parse_jsonl_record(line) == rec);
    CHECK(parse_jsonl_record(R"({"T": 6, "depths": [2,1,3]})").seq == DepthSeq{6, {2, 1, 3}});

    const std::vector<TreeRecord> recs{{DepthSeq{3, {1, 2}}, {}}, {DepthSeq{2, {}}, 1}};
    const std::string doc = write_jsonl(recs);
    CHECK(doc.rfind(jsonl_header(), 0) == 0);
    CHECK(read_jsonl(doc) == recs);
    CHECK(read_trees(doc) == recs);
    CHECK(sniff_format(doc) == TreeFormat::JsonLines);

    const std::string nwk = write_newick_lines(recs);
    CHECK(sniff_format(nwk) == TreeFormat::Newick);
    const auto back = read_trees(nwk);
    REQUIRE(back.size() == 2);
    CHECK(back[0].seq == recs[0].seq);
    CHECK(back[1].seq == recs[1].seq);

    CHECK(kind_of([] { parse_jsonl_record("{\"T\": 2}"); }) == ErrorKind::FormatError);
    CHECK(kind_of([] { parse_jsonl_record("not json"); }) == ErrorKind::FormatError);
    CHECK(kind_of([] { parse_jsonl_record(R"({"T": 2, "depths": [3]})"); }) == ErrorKind::InvalidDepth);
}

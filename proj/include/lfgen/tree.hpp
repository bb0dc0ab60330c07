#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lfgen {

/// A CPP(T) realization: height T and node depths H_1..H_{n-1}, each in [1, T].
/// H_0 = T is implicit. This is the canonical tree encoding used everywhere.
struct DepthSeq {
    int height = 1;
    std::vector<int> depths;

    int tip_count() const noexcept { return static_cast<int>(depths.size()) + 1; }

    /// Throws Error{InvalidDepth} when height < 1 or some depth is outside [1, height].
    void validate() const;

    friend bool operator==(const DepthSeq&, const DepthSeq&) = default;
};

struct TreeNode {
    int depth = 0;              ///< generations before present
    int label = -1;             ///< tip index, -1 for internal nodes
    std::vector<int> children;  ///< left to right

    bool is_tip() const noexcept { return children.empty(); }
};

/// Rooted, oriented, ultrametric tree with integer node depths. Tips sit at
/// depth 0 and the root at depth `height`; when no coalescence happens at the
/// height, the root has a single child (the stem).
class Tree {
public:
    Tree() = default;

    int height() const noexcept { return nodes_.empty() ? 0 : nodes_[root_].depth; }
    int root() const noexcept { return root_; }
    const TreeNode& node(int index) const { return nodes_.at(index); }
    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    int tip_count() const;
    int internal_count() const;

    int add_node(int depth, int label = -1);
    void add_child(int parent, int child);
    void set_root(int index) { root_ = index; }
    TreeNode& mutable_node(int index) { return nodes_.at(index); }

private:
    std::vector<TreeNode> nodes_;
    int root_ = 0;
};

/// Recursive comparison of shape, depths and tip labels (node storage order ignored).
bool structurally_equal(const Tree& a, const Tree& b);

Tree depths_to_tree(const DepthSeq& seq);

/// Throws Error{NotUltrametric} if a tip is not at depth 0, Error{InvalidTree}
/// for a non-positive edge or malformed links.
DepthSeq tree_to_depths(const Tree& tree);

/// Parses one Newick tree. Bracketed comments are skipped; tip labels are read
/// but tips are re-indexed left to right. The top-level branch length is the
/// stem above the root. Zero-length internal edges collapse into multifurcations.
/// Throws SyntaxError, Error{NotUltrametric} or Error{NonIntegerDepth}.
Tree parse_newick(std::string_view text);

/// One tree per non-blank line; lines holding only a bracketed comment are skipped.
std::vector<Tree> parse_newick_lines(std::string_view text);

/// Canonical form: integer branch lengths, tips labelled by left-to-right index.
std::string write_newick(const Tree& tree);

/// Tolerance for the integer-depth and ultrametric checks of parse_newick.
inline constexpr double kNewickTolerance = 1e-9;

} // namespace lfgen

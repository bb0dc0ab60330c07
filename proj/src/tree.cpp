#include "lfgen/tree.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <utility>

#include "lfgen/errors.hpp"

namespace lfgen {

void DepthSeq::validate() const
{
    if (height < 1)
        throw Error(ErrorKind::InvalidDepth, "tree height must be at least 1");
    for (std::size_t i = 0; i < depths.size(); ++i) {
        if (depths[i] < 1 || depths[i] > height) {
            std::ostringstream os;
            os << "depth H_" << i + 1 << " = " << depths[i] << " outside [1, " << height << "]";
            throw Error(ErrorKind::InvalidDepth, os.str());
        }
    }
}

int Tree::tip_count() const
{
    int n = 0;
    for (const auto& nd : nodes_)
        n += nd.is_tip() ? 1 : 0;
    return n;
}

int Tree::internal_count() const
{
    return static_cast<int>(nodes_.size()) - tip_count();
}

int Tree::add_node(int depth, int label)
{
    nodes_.push_back(TreeNode{depth, label, {}});
    return static_cast<int>(nodes_.size()) - 1;
}

void Tree::add_child(int parent, int child) { nodes_.at(parent).children.push_back(child); }

namespace {

bool equal_from(const Tree& a, int ia, const Tree& b, int ib)
{
    const TreeNode& na = a.node(ia);
    const TreeNode& nb = b.node(ib);
    if (na.depth != nb.depth || na.label != nb.label || na.children.size() != nb.children.size())
        return false;
    for (std::size_t c = 0; c < na.children.size(); ++c)
        if (!equal_from(a, na.children[c], b, nb.children[c]))
            return false;
    return true;
}

/// Left-to-right sweep: when descending into a non-first child of v, the next
/// tip reached coalesces with the previous tip at v.
template <class Children, class Depth>
std::vector<int> consecutive_mrca_depths(int root, Children children, Depth depth)
{
    std::vector<int> out;
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    int pending = -1;
    bool seen_tip = false;
    while (!stack.empty()) {
        auto& [v, next] = stack.back();
        const auto& kids = children(v);
        if (kids.empty()) {
            if (seen_tip)
                out.push_back(pending);
            seen_tip = true;
            stack.pop_back();
            continue;
        }
        if (next == kids.size()) {
            stack.pop_back();
            continue;
        }
        if (next > 0)
            pending = depth(v);
        const int child = kids[next++];
        stack.emplace_back(child, 0);
    }
    return out;
}

} // namespace

bool structurally_equal(const Tree& a, const Tree& b)
{
    if (a.nodes().empty() || b.nodes().empty())
        return a.nodes().empty() && b.nodes().empty();
    return equal_from(a, a.root(), b, b.root());
}

Tree depths_to_tree(const DepthSeq& seq)
{
    seq.validate();
    Tree tree;
    const int root = tree.add_node(seq.height);
    tree.set_root(root);
    const int first_tip = tree.add_node(0, 0);
    tree.add_child(root, first_tip);

    // Right spine of the tree built so far, root first.
    std::vector<int> spine{root, first_tip};
    for (std::size_t i = 0; i < seq.depths.size(); ++i) {
        const int h = seq.depths[i];
        int last = -1;
        while (tree.node(spine.back()).depth < h) {
            last = spine.back();
            spine.pop_back();
        }
        int attach = spine.back();
        if (tree.node(attach).depth > h) {
            // The horizontal line meets the middle of a branch: split it.
            const int split = tree.add_node(h);
            tree.mutable_node(attach).children.back() = split;
            tree.add_child(split, last);
            spine.push_back(split);
            attach = split;
        }
        const int tip = tree.add_node(0, static_cast<int>(i) + 1);
        tree.add_child(attach, tip);
        spine.push_back(tip);
    }
    return tree;
}

DepthSeq tree_to_depths(const Tree& tree)
{
    if (tree.nodes().empty())
        throw Error(ErrorKind::InvalidTree, "empty tree");
    const auto& nodes = tree.nodes();
    for (const auto& nd : nodes) {
        if (nd.is_tip() && nd.depth != 0)
            throw Error(ErrorKind::NotUltrametric, "tip not at depth 0");
        for (int c : nd.children) {
            if (c < 0 || c >= static_cast<int>(nodes.size()))
                throw Error(ErrorKind::InvalidTree, "child index out of range");
            if (nodes[c].depth >= nd.depth)
                throw Error(ErrorKind::InvalidTree, "edge with non-positive length");
        }
    }
    DepthSeq seq;
    seq.height = tree.height();
    seq.depths = consecutive_mrca_depths(
        tree.root(), [&](int v) -> const std::vector<int>& { return nodes[v].children; },
        [&](int v) { return nodes[v].depth; });
    seq.validate();
    return seq;
}

// ---------------------------------------------------------------------------
// Newick

namespace {

struct RawNode {
    int parent = -1;
    double length = 0.0;
    bool has_length = false;
    std::vector<int> children;
};

class NewickReader {
public:
    explicit NewickReader(std::string_view text) : text_(text) {}

    Tree read()
    {
        const int root = add(-1);
        int cur = root;
        bool expect_node = true;
        for (;;) {
            skip_blank();
            if (pos_ >= text_.size())
                throw SyntaxError(pos_, "unexpected end of input (missing ';'?)");
            const char c = text_[pos_];
            if (expect_node) {
                if (c == '(') {
                    ++pos_;
                    cur = add(cur);
                    continue;
                }
                read_label();
                read_length(cur);
                expect_node = false;
                continue;
            }
            if (c == ',') {
                if (nodes_[cur].parent < 0)
                    throw SyntaxError(pos_, "',' outside parentheses");
                ++pos_;
                cur = add(nodes_[cur].parent);
                expect_node = true;
            } else if (c == ')') {
                if (nodes_[cur].parent < 0)
                    throw SyntaxError(pos_, "unbalanced ')'");
                ++pos_;
                cur = nodes_[cur].parent;
                read_label();
                read_length(cur);
            } else if (c == ';') {
                if (cur != root)
                    throw SyntaxError(pos_, "unbalanced '(' before ';'");
                ++pos_;
                break;
            } else {
                throw SyntaxError(pos_, std::string("unexpected character '") + c + "'");
            }
        }
        skip_blank();
        if (pos_ != text_.size())
            throw SyntaxError(pos_, "trailing characters after ';'");
        return build();
    }

private:
    int add(int parent)
    {
        nodes_.push_back(RawNode{parent, 0.0, false, {}});
        const int id = static_cast<int>(nodes_.size()) - 1;
        if (parent >= 0)
            nodes_[parent].children.push_back(id);
        return id;
    }

    void skip_blank()
    {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                ++pos_;
            } else if (c == '[') {
                const auto close = text_.find(']', pos_);
                if (close == std::string_view::npos)
                    throw SyntaxError(pos_, "unterminated comment");
                pos_ = close + 1;
            } else {
                break;
            }
        }
    }

    static bool is_label_char(char c)
    {
        switch (c) {
        case '(': case ')': case '[': case ']': case '\'': case ':': case ';': case ',':
        case ' ': case '\t': case '\n': case '\r':
            return false;
        default:
            return true;
        }
    }

    void read_label()
    {
        skip_blank();
        if (pos_ < text_.size() && text_[pos_] == '\'') {
            ++pos_;
            for (;;) {
                if (pos_ >= text_.size())
                    throw SyntaxError(pos_, "unterminated quoted label");
                if (text_[pos_] == '\'') {
                    if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
                        pos_ += 2;
                        continue;
                    }
                    ++pos_;
                    break;
                }
                ++pos_;
            }
            return;
        }
        while (pos_ < text_.size() && is_label_char(text_[pos_]))
            ++pos_;
    }

    void read_length(int node)
    {
        skip_blank();
        if (pos_ < text_.size() && text_[pos_] == ':') {
            ++pos_;
            skip_blank();
            double value = 0.0;
            const char* first = text_.data() + pos_;
            const char* last = text_.data() + text_.size();
            const auto [ptr, ec] = std::from_chars(first, last, value);
            if (ec != std::errc() || ptr == first)
                throw SyntaxError(pos_, "malformed branch length");
            if (!std::isfinite(value) || value < 0.0)
                throw SyntaxError(pos_, "branch length must be finite and nonnegative");
            pos_ += static_cast<std::size_t>(ptr - first);
            nodes_[node].length = value;
            nodes_[node].has_length = true;
        } else if (nodes_[node].parent >= 0) {
            throw SyntaxError(pos_, "missing branch length");
        }
    }

    Tree build() const
    {
        const std::size_t n = nodes_.size();
        // Nodes are created in preorder, so parents precede children.
        std::vector<double> dist(n, 0.0);
        for (std::size_t v = 1; v < n; ++v)
            dist[v] = dist[nodes_[v].parent] + nodes_[v].length;

        double tip_level = 0.0;
        for (std::size_t v = 0; v < n; ++v)
            if (nodes_[v].children.empty())
                tip_level = std::max(tip_level, dist[v]);
        for (std::size_t v = 0; v < n; ++v)
            if (nodes_[v].children.empty() && std::abs(dist[v] - tip_level) > kNewickTolerance)
                throw Error(ErrorKind::NotUltrametric, "tips are not equidistant from the root");

        auto to_integer = [](double x) {
            const double rounded = std::round(x);
            if (std::abs(x - rounded) > kNewickTolerance) {
                std::ostringstream os;
                os.precision(17);
                os << "node depth " << x << " is not an integer number of generations";
                throw Error(ErrorKind::NonIntegerDepth, os.str());
            }
            return static_cast<int>(rounded);
        };
        std::vector<int> depth(n);
        for (std::size_t v = 0; v < n; ++v)
            depth[v] = nodes_[v].children.empty() ? 0 : to_integer(tip_level - dist[v]);
        const int height = to_integer(tip_level + nodes_[0].length);

        DepthSeq seq;
        seq.height = height;
        seq.depths = consecutive_mrca_depths(
            0, [&](int v) -> const std::vector<int>& { return nodes_[v].children; },
            [&](int v) { return depth[v]; });
        return depths_to_tree(seq);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::vector<RawNode> nodes_;
};

void write_subtree(const Tree& tree, int v, int parent_depth, std::string& out)
{
    const TreeNode& nd = tree.node(v);
    if (nd.is_tip()) {
        out += std::to_string(nd.label);
    } else {
        out += '(';
        for (std::size_t c = 0; c < nd.children.size(); ++c) {
            if (c > 0)
                out += ',';
            write_subtree(tree, nd.children[c], nd.depth, out);
        }
        out += ')';
    }
    out += ':';
    out += std::to_string(parent_depth - nd.depth);
}

bool blank_or_comment(std::string_view line)
{
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
        } else if (c == '[') {
            const auto close = line.find(']', i);
            if (close == std::string_view::npos)
                return false;
            i = close + 1;
        } else {
            return false;
        }
    }
    return true;
}

} // namespace

Tree parse_newick(std::string_view text) { return NewickReader(text).read(); }

std::vector<Tree> parse_newick_lines(std::string_view text)
{
    std::vector<Tree> trees;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        const auto line = text.substr(start, end - start);
        if (!blank_or_comment(line))
            trees.push_back(parse_newick(line));
        start = end + 1;
    }
    return trees;
}

std::string write_newick(const Tree& tree)
{
    if (tree.nodes().empty())
        throw Error(ErrorKind::InvalidTree, "empty tree");
    const TreeNode& root = tree.node(tree.root());
    std::string out;
    if (root.children.size() == 1)
        write_subtree(tree, root.children.front(), root.depth, out);
    else
        write_subtree(tree, tree.root(), root.depth, out);
    out += ';';
    return out;
}

} // namespace lfgen

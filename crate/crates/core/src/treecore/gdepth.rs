use super::RootedEvoTree;

/// g-depth of a rooted tree.
///
/// The g-depth of a node is the number of edges to its nearest leaf (taxon).
/// Cutting an edge `u1 u2` leaves two components; the edge's g-depth is the
/// larger of `u1`'s g-depth in its component and `u2`'s in its. The tree's
/// g-depth is the largest edge g-depth. The root and its two edges take part
/// like any other node; the root never counts as a leaf.
///
/// Runs in linear time: `down[v]` is the nearest leaf below `v`, `up[v]` the
/// nearest leaf reached from `v` by first stepping to its parent.
pub fn g_depth(t: &RootedEvoTree) -> usize {
    const NONE: usize = usize::MAX / 4;
    let nodes = t.nodes();
    let order = t.preorder();

    let mut down = vec![NONE; nodes.len()];
    for &u in order.iter().rev() {
        down[u] = if nodes[u].leaf.is_some() {
            0
        } else {
            1 + nodes[u].children.iter().map(|&c| down[c]).min().unwrap_or(NONE)
        };
    }

    let mut up = vec![NONE; nodes.len()];
    let mut depth = 0;
    for &u in &order {
        let children = &nodes[u].children;
        for (i, &c) in children.iter().enumerate() {
            let sibling = children
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &s)| 1 + down[s])
                .min()
                .unwrap_or(NONE);
            // Nearest leaf from u once the edge u-c is cut.
            let parent_side = up[u].min(sibling);
            up[c] = 1 + parent_side;
            depth = depth.max(parent_side.max(down[c]));
        }
    }
    depth
}

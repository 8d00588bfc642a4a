//! Tarjan's strongly connected components, iterative so deep chains cannot
//! overflow the stack.

/// Components of the digraph given by adjacency lists, each sorted, listed in
/// order of their smallest vertex.
pub fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut next_index = 0;
    // (vertex, position in its adjacency list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        while let Some(&(v, pos)) = call.last() {
            if pos == 0 && index[v] == UNVISITED {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(pos) {
                if let Some(top) = call.last_mut() {
                    top.1 += 1;
                }
                if index[w] == UNVISITED {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                while let Some(w) = stack.pop() {
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
        }
    }
    components.sort_by_key(|c| c[0]);
    components
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_is_one_component() {
        let adj = vec![vec![1], vec![2], vec![0]];
        assert_eq!(strongly_connected_components(&adj), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn two_swap_pairs() {
        let adj = vec![vec![1], vec![0], vec![3], vec![2]];
        assert_eq!(strongly_connected_components(&adj), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn one_way_edge_splits() {
        // 0 <-> 1 -> 2 <-> 3
        let adj = vec![vec![1], vec![0, 2], vec![3], vec![2]];
        assert_eq!(strongly_connected_components(&adj), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn long_path_does_not_recurse() {
        let n = 100_000;
        let adj: Vec<Vec<usize>> = (0..n).map(|i| vec![(i + 1) % n]).collect();
        assert_eq!(strongly_connected_components(&adj).len(), 1);
    }
}

//! Small directed-graph utilities over dense `usize` node ids.

/// Tarjan's strongly connected components, iterative.
///
/// `succ(v)` lists the successors of `v`; nodes with `active[v] == false` are
/// skipped entirely. Components come out in reverse topological order (sinks
/// first), each sorted ascending.
pub fn tarjan_scc<S>(n: usize, active: &[bool], succ: S) -> Vec<Vec<usize>>
where
    S: Fn(usize) -> Vec<usize>,
{
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next = 0usize;
    let mut out = Vec::new();

    for root in 0..n {
        if !active[root] || index[root] != UNSEEN {
            continue;
        }
        // (node, successor list, cursor)
        let mut work: Vec<(usize, Vec<usize>, usize)> = Vec::new();
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        work.push((root, succ(root), 0));

        while let Some((v, succs, cursor)) = work.last_mut() {
            let v = *v;
            if *cursor < succs.len() {
                let w = succs[*cursor];
                *cursor += 1;
                if !active[w] {
                    continue;
                }
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    let ws = succ(w);
                    work.push((w, ws, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some((parent, _, _)) = work.last() {
                    let p = *parent;
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Nodes from which some node in `targets` is reachable (targets included).
pub fn backward_reachable(n: usize, preds: &[Vec<usize>], targets: &[bool]) -> Vec<bool> {
    let mut seen = targets.to_vec();
    let mut queue: Vec<usize> = (0..n).filter(|&v| targets[v]).collect();
    while let Some(v) = queue.pop() {
        for &u in &preds[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push(u);
            }
        }
    }
    seen
}

/// Nodes reachable from `sources` (sources included).
pub fn forward_reachable<S>(n: usize, sources: &[usize], succ: S) -> Vec<bool>
where
    S: Fn(usize) -> Vec<usize>,
{
    let mut seen = vec![false; n];
    let mut queue = Vec::new();
    for &s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push(s);
        }
    }
    while let Some(v) = queue.pop() {
        for w in succ(v) {
            if !seen[w] {
                seen[w] = true;
                queue.push(w);
            }
        }
    }
    seen
}

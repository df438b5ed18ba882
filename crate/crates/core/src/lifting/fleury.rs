use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trail {
    /// Indices into the input edge list, in walking order.
    pub edges: Vec<usize>,
    /// Vertices visited; `edges.len() + 1` entries.
    pub vertices: Vec<usize>,
    /// Closed trail from a component with no odd-degree vertex.
    pub closed: bool,
    /// Both ends are boundary vertices; such trails are disregarded by the lower-bound argument.
    pub boundary_pair: bool,
}

/// Euler circuit of the unused edges reachable from `start`, as (vertex, edge-in) pairs.
fn circuit(start: usize, adj: &[Vec<(usize, usize)>], used: &mut [bool], ptr: &mut [usize]) -> Vec<(usize, Option<usize>)> {
    let mut stack = vec![(start, None)];
    let mut out = Vec::new();
    while let Some(&(v, _)) = stack.last() {
        while ptr[v] < adj[v].len() && used[adj[v][ptr[v]].1] {
            ptr[v] += 1;
        }
        if ptr[v] < adj[v].len() {
            let (w, e) = adj[v][ptr[v]];
            used[e] = true;
            stack.push((w, Some(e)));
        } else {
            out.push(stack.pop().unwrap());
        }
    }
    out.reverse();
    out
}

/// Partitions the edges of a multigraph into trails joining odd-degree
/// vertices in pairs, plus closed trails for even components.
///
/// A virtual vertex is joined to every odd vertex; an Euler circuit of the
/// augmented graph (Hierholzer) is cut at the virtual vertex.
pub fn fleury_trails(n_vertices: usize, edges: &[(usize, usize)], boundary: &[bool]) -> Result<Vec<Trail>> {
    let virt = n_vertices;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_vertices + 1];
    for (k, &(a, b)) in edges.iter().enumerate() {
        if a == b {
            return Err(Error::Input(format!("self-loop at vertex {a}")));
        }
        if a >= n_vertices || b >= n_vertices {
            return Err(Error::Input(format!("edge {k} has a vertex out of range")));
        }
        adj[a].push((b, k));
        adj[b].push((a, k));
    }
    let m = edges.len();
    let mut all_edges: Vec<(usize, usize)> = edges.to_vec();
    for v in 0..n_vertices {
        if adj[v].len() % 2 == 1 {
            let k = all_edges.len();
            all_edges.push((v, virt));
            adj[v].push((virt, k));
            adj[virt].push((v, k));
        }
    }
    let mut used = vec![false; all_edges.len()];
    let mut ptr = vec![0; n_vertices + 1];
    let is_bd = |v: usize| boundary.get(v).copied().unwrap_or(false);
    let mut trails = Vec::new();
    if !adj[virt].is_empty() {
        let c = circuit(virt, &adj, &mut used, &mut ptr);
        let mut cur: Option<Trail> = None;
        for &(v, e) in &c {
            if v == virt {
                if let Some(mut t) = cur.take() {
                    let (a, b) = (t.vertices[0], *t.vertices.last().unwrap());
                    t.boundary_pair = is_bd(a) && is_bd(b);
                    trails.push(t);
                }
                continue;
            }
            match (&mut cur, e) {
                (Some(t), Some(e)) => {
                    t.edges.push(e);
                    t.vertices.push(v);
                }
                (None, _) => {
                    cur = Some(Trail {
                        edges: Vec::new(),
                        vertices: vec![v],
                        closed: false,
                        boundary_pair: false,
                    })
                }
                (Some(_), None) => unreachable!("only the first entry lacks an edge"),
            }
        }
    }
    for v in 0..n_vertices {
        if adj[v].iter().any(|&(_, e)| !used[e]) {
            let c = circuit(v, &adj, &mut used, &mut ptr);
            trails.push(Trail {
                edges: c.iter().filter_map(|&(_, e)| e).collect(),
                vertices: c.iter().map(|&(v, _)| v).collect(),
                closed: true,
                boundary_pair: false,
            });
        }
    }
    debug_assert_eq!(trails.iter().map(|t| t.edges.len()).sum::<usize>(), m);
    Ok(trails)
}

use super::{config_cmp, Connection, Costs, PairJoin};
use crate::error::{Error, Result};
use crate::geom::{Domain, Vec2};

pub const ORACLE_MAX_POINTS: usize = 8;

const MAX_DEGREE: usize = 3;

#[derive(Clone, Copy)]
enum Edge {
    Boundary(usize),
    Pair(usize, usize, PairJoin),
}

struct Search<'a> {
    costs: &'a Costs,
    /// Cheapest edge touching each point, halved for pair edges.
    cheapest: Vec<f64>,
    deg: Vec<usize>,
    stack: Vec<Edge>,
    best: f64,
    found: Vec<(f64, Vec<Edge>)>,
}

/// Exhaustive minimum over all edge subsets (point pairs and boundary feet) in
/// which every point has degree 1 or 3. Independent of the solver's matching structure.
pub fn oracle_min_connection(domain: &Domain, points: &[Vec2]) -> Result<Connection> {
    if points.len() > ORACLE_MAX_POINTS {
        return Err(Error::Capacity {
            what: "oracle points",
            got: points.len(),
            limit: ORACLE_MAX_POINTS,
        });
    }
    let costs = Costs::new(domain, points)?;
    let n = costs.n();
    let cheapest = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .filter_map(|j| costs.pair(i, j).map(|(c, _)| 0.5 * c))
                .fold(costs.boundary[i].0, f64::min)
        })
        .collect();
    let mut s = Search {
        costs: &costs,
        cheapest,
        deg: vec![0; n],
        stack: Vec::new(),
        best: f64::INFINITY,
        found: Vec::new(),
    };
    s.visit(0, 0.0);
    let limit = s.best + costs.tol;
    s.found
        .into_iter()
        .filter(|(c, _)| *c <= limit)
        .map(|(_, edges)| {
            let mut segs = Vec::new();
            for e in edges {
                match e {
                    Edge::Boundary(i) => segs.push(costs.boundary_segment(i)),
                    Edge::Pair(i, j, join) => segs.extend(costs.pair_segments(i, j, join)),
                }
            }
            Connection::from_segments(segs)
        })
        .min_by(config_cmp)
        .ok_or_else(|| Error::Numeric("oracle found no connection".into()))
}

impl Search<'_> {
    fn lower_bound(&self, from: usize) -> f64 {
        (from..self.deg.len())
            .filter(|&k| self.deg[k] % 2 == 0)
            .map(|k| self.cheapest[k])
            .sum()
    }

    /// Decides all edges at point `i` towards higher indices, plus its boundary edge.
    fn visit(&mut self, i: usize, acc: f64) {
        let n = self.deg.len();
        if acc + self.lower_bound(i) > self.best + self.costs.tol {
            return;
        }
        if i == n {
            if acc < self.best {
                self.best = acc;
                let limit = acc + self.costs.tol;
                self.found.retain(|(c, _)| *c <= limit);
            }
            self.found.push((acc, self.stack.clone()));
            return;
        }
        let later: Vec<(usize, f64, PairJoin)> = (i + 1..n)
            .filter(|&j| self.deg[j] < MAX_DEGREE)
            .filter_map(|j| self.costs.pair(i, j).map(|(c, join)| (j, c, join)))
            .collect();
        let room = MAX_DEGREE - self.deg[i];
        for subset in 0u32..(1 << later.len()) {
            let k = subset.count_ones() as usize;
            if k > room {
                continue;
            }
            for with_boundary in [false, true] {
                let d = self.deg[i] + k + with_boundary as usize;
                if d % 2 == 0 || d > MAX_DEGREE {
                    continue;
                }
                let mut cost = acc;
                let mark = self.stack.len();
                for (bit, &(j, c, join)) in later.iter().enumerate() {
                    if subset & (1 << bit) != 0 {
                        cost += c;
                        self.deg[j] += 1;
                        self.stack.push(Edge::Pair(i, j, join));
                    }
                }
                if with_boundary {
                    cost += self.costs.boundary[i].0;
                    self.stack.push(Edge::Boundary(i));
                }
                let saved = self.deg[i];
                self.deg[i] = d;
                self.visit(i + 1, cost);
                self.deg[i] = saved;
                for e in self.stack.drain(mark..) {
                    if let Edge::Pair(_, j, _) = e {
                        self.deg[j] -= 1;
                    }
                }
            }
        }
    }
}

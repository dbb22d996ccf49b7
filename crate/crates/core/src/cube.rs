//! The cube of resolutions, including pseudo-diagram vertices where one or
//! two crossings are left unresolved and traversed straight through.

use thiserror::Error;

use crate::diagram::{Diagram, EdgeId, MarkingData};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CubeError {
    #[error("cube with {size} resolved crossings exceeds bound {bound}")]
    CubeTooLarge { size: usize, bound: usize },
    #[error("invalid dropped set: {0}")]
    BadDropped(String),
}

/// Resolution of a single crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Res {
    Zero,
    One,
    Dropped,
}

/// A vertex of a (possibly reduced) cube: one bit per resolved crossing,
/// in increasing crossing order. Dropped crossings carry no bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(pub u32);

impl Vertex {
    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    pub fn bit(self, coord: usize) -> bool {
        self.0 >> coord & 1 == 1
    }

    pub fn flip(self, coord: usize) -> Vertex {
        Vertex(self.0 ^ (1 << coord))
    }
}

/// A fully-traced resolution circle: `steps[t]` travels an edge and then
/// passes through a crossing site, arriving at `arrive` and departing at
/// `depart` (ports are `4*crossing + slot`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TracedCircle {
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStep {
    pub edge: EdgeId,
    pub arrive: usize,
    pub depart: usize,
}

impl TracedCircle {
    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.steps.iter().map(|s| s.edge)
    }

    /// Indices of steps whose passage happens at crossing `k`.
    pub fn passages_at(&self, k: usize) -> Vec<usize> {
        self.steps
            .iter()
            .enumerate()
            .filter(|(_, s)| s.arrive / 4 == k)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Circles of one (pseudo-)resolution with per-circle marking parity.
/// Circles are numbered by their minimal edge id; crossing-free extras
/// come last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedState {
    pub circle_of_edge: Vec<u16>,
    pub n_circles: usize,
    /// Bit c set iff circle c carries an odd number of marked points.
    pub parity: u64,
    pub killed: bool,
}

impl ResolvedState {
    pub fn trivial(&self) -> bool {
        self.parity == 0
    }

    pub fn circle(&self, e: EdgeId) -> usize {
        self.circle_of_edge[e] as usize
    }

    /// Edge sets per circle (extras yield empty sets).
    pub fn circle_edges(&self, n_edges: usize) -> Vec<Vec<EdgeId>> {
        let mut out = vec![Vec::new(); self.n_circles];
        for e in 1..=n_edges {
            out[self.circle_of_edge[e] as usize].push(e);
        }
        out
    }
}

fn port_pairs(r: Res) -> [(usize, usize); 2] {
    match r {
        Res::Zero => [(0, 3), (1, 2)],
        Res::One => [(0, 1), (2, 3)],
        Res::Dropped => [(0, 2), (1, 3)],
    }
}

/// Port-level pairing for an assignment: `mate[port]` is the port joined to
/// `port` across its crossing site.
fn crossing_mates(d: &Diagram, assignment: &[Res]) -> Vec<usize> {
    let n = d.n_crossings();
    let mut mate = vec![usize::MAX; 4 * n];
    for k in 0..n {
        for (s, t) in port_pairs(assignment[k]) {
            mate[4 * k + s] = 4 * k + t;
            mate[4 * k + t] = 4 * k + s;
        }
    }
    mate
}

/// For each edge its two occurrence ports, lowest first.
fn edge_ports(d: &Diagram) -> Vec<[usize; 2]> {
    let mut out = vec![[usize::MAX; 2]; d.n_edges() + 1];
    for (k, q) in d.crossings().iter().enumerate() {
        for (s, &e) in q.iter().enumerate() {
            let p = 4 * k + s;
            if out[e][0] == usize::MAX {
                out[e][0] = p;
            } else {
                out[e][1] = p;
            }
        }
    }
    out
}

/// Traces all circles of a (pseudo-)resolution, walking ports.
pub fn trace(d: &Diagram, assignment: &[Res]) -> Vec<TracedCircle> {
    assert_eq!(assignment.len(), d.n_crossings());
    let mate = crossing_mates(d, assignment);
    let eports = edge_ports(d);
    let other_port = |e: EdgeId, p: usize| -> usize {
        let [p0, p1] = eports[e];
        if p == p0 {
            p1
        } else {
            p0
        }
    };
    let edge_at = |p: usize| -> EdgeId { d.quad(p / 4)[p % 4] };

    let mut visited = vec![false; d.n_edges() + 1];
    let mut circles = Vec::new();
    for start in 1..=d.n_edges() {
        if visited[start] {
            continue;
        }
        // Travel `start` toward its lower occurrence port first.
        let mut steps = Vec::new();
        let mut edge = start;
        let mut arrive = eports[start][0];
        loop {
            visited[edge] = true;
            let depart = mate[arrive];
            steps.push(TraceStep {
                edge,
                arrive,
                depart,
            });
            edge = edge_at(depart);
            arrive = other_port(edge, depart);
            if edge == start && arrive == eports[start][0] {
                break;
            }
        }
        circles.push(TracedCircle { steps });
    }
    circles
}

/// Computes the compact resolution data for an assignment.
pub fn resolve(d: &Diagram, m: &MarkingData, assignment: &[Res]) -> ResolvedState {
    // Union-find over edges is enough for circle membership.
    let n_edges = d.n_edges();
    let mut parent: Vec<usize> = (0..=n_edges).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for (k, q) in d.crossings().iter().enumerate() {
        for (s, t) in port_pairs(assignment[k]) {
            let (a, b) = (q[s], q[t]);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut circle_of_edge = vec![u16::MAX; n_edges + 1];
    let mut n_circles = 0usize;
    for e in 1..=n_edges {
        if find(&mut parent, e) == e {
            circle_of_edge[e] = n_circles as u16;
            n_circles += 1;
        }
    }
    for e in 1..=n_edges {
        let r = find(&mut parent, e);
        circle_of_edge[e] = circle_of_edge[r];
    }
    n_circles += d.unknotted_extras();
    assert!(n_circles <= 64, "more than 64 circles in one resolution");

    let mut parity = 0u64;
    for &e in m.odd_edges() {
        parity ^= 1 << circle_of_edge[e];
    }
    ResolvedState {
        circle_of_edge,
        n_circles,
        parity,
        killed: parity != 0,
    }
}

/// A cube of (pseudo-)resolutions with up to two dropped crossings.
#[derive(Debug)]
pub struct Cube {
    /// Crossing ids carrying a cube coordinate, increasing.
    pub coords: Vec<usize>,
    /// Crossings left unresolved at every vertex.
    pub dropped: Vec<usize>,
    states: Vec<ResolvedState>,
}

pub const DEFAULT_CUBE_BOUND: usize = 24;

impl Cube {
    /// Enumerates all `2^(n-|dropped|)` resolution states.
    pub fn enumerate(
        d: &Diagram,
        m: &MarkingData,
        dropped: &[usize],
        bound: usize,
    ) -> Result<Cube, CubeError> {
        if dropped.len() > 2 {
            return Err(CubeError::BadDropped(
                "at most two crossings may be dropped".into(),
            ));
        }
        for &x in dropped {
            if x >= d.n_crossings() {
                return Err(CubeError::BadDropped(format!("no crossing {x}")));
            }
        }
        let coords: Vec<usize> = (0..d.n_crossings())
            .filter(|k| !dropped.contains(k))
            .collect();
        let size = coords.len();
        if size > bound.min(31) {
            return Err(CubeError::CubeTooLarge { size, bound });
        }
        let mut assignment = vec![Res::Dropped; d.n_crossings()];
        let mut states = Vec::with_capacity(1 << size);
        for mask in 0u32..1 << size {
            for (i, &k) in coords.iter().enumerate() {
                assignment[k] = if mask >> i & 1 == 1 { Res::One } else { Res::Zero };
            }
            states.push(resolve(d, m, &assignment));
        }
        Ok(Cube {
            coords,
            dropped: dropped.to_vec(),
            states,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, v: Vertex) -> &ResolvedState {
        &self.states[v.0 as usize]
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        (0..self.len() as u32).map(Vertex)
    }

    /// Full per-crossing assignment for a vertex.
    pub fn assignment(&self, d: &Diagram, v: Vertex) -> Vec<Res> {
        let mut a = vec![Res::Dropped; d.n_crossings()];
        for (i, &k) in self.coords.iter().enumerate() {
            a[k] = if v.bit(i) { Res::One } else { Res::Zero };
        }
        a
    }
}

/// Searches for a path from `v` to `u` through trivial vertices that flips
/// each differing coordinate exactly once. Moves are tried greedily: merges
/// first, then splits, with every admissible split choice explored.
pub fn trivial_path_exists(cube: &Cube, v: Vertex, u: Vertex) -> (bool, Vec<Vertex>) {
    assert!(cube.dropped.is_empty(), "path search runs on the full cube");
    if cube.state(v).killed || cube.state(u).killed {
        return (false, Vec::new());
    }
    let diff = v.0 ^ u.0;
    let mut path = vec![v];
    let mut seen = std::collections::HashSet::new();
    if dfs(cube, v, u, diff, &mut path, &mut seen) {
        (true, path)
    } else {
        (false, Vec::new())
    }
}

fn dfs(
    cube: &Cube,
    w: Vertex,
    target: Vertex,
    remaining: u32,
    path: &mut Vec<Vertex>,
    seen: &mut std::collections::HashSet<u32>,
) -> bool {
    if remaining == 0 {
        return true;
    }
    if !seen.insert(w.0) {
        return false;
    }
    let cur = cube.state(w).n_circles;
    // Candidate flips: each remaining coordinate, classified by circle count.
    let mut merges = Vec::new();
    let mut splits = Vec::new();
    for i in 0..cube.dim() {
        if remaining >> i & 1 == 0 {
            continue;
        }
        let w2 = w.flip(i);
        let st = cube.state(w2);
        if st.killed {
            continue;
        }
        if st.n_circles < cur {
            merges.push((i, w2));
        } else {
            splits.push((i, w2));
        }
    }
    for (i, w2) in merges.into_iter().chain(splits) {
        path.push(w2);
        if dfs(cube, w2, target, remaining & !(1 << i), path, seen) {
            return true;
        }
        path.pop();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trefoil_left() -> Diagram {
        Diagram::from_pd(vec![[1, 4, 2, 5], [3, 6, 4, 1], [5, 2, 6, 3]], 0).unwrap()
    }

    fn trefoil_right() -> Diagram {
        Diagram::from_pd(vec![[4, 2, 5, 1], [6, 4, 1, 3], [2, 6, 3, 5]], 0).unwrap()
    }

    #[test]
    fn trefoil_all_zero_has_two_circles() {
        let d = trefoil_left();
        let m = MarkingData::empty(&d);
        let st = resolve(&d, &m, &[Res::Zero, Res::Zero, Res::Zero]);
        assert_eq!(st.n_circles, 2);
        assert!(st.trivial());
    }

    #[test]
    fn crossing_free_unknot_single_circle() {
        let d = Diagram::from_pd(vec![], 1).unwrap();
        let m = MarkingData::empty(&d);
        let st = resolve(&d, &m, &[]);
        assert_eq!(st.n_circles, 1);
        assert_eq!(st.parity, 0);
    }

    #[test]
    fn marked_trefoil_surviving_two_circle_vertex() {
        // Right-handed trefoil with marked points on edges 1 and 2: the only
        // multi-circle state that is not killed is (1,0,0).
        let d = trefoil_right();
        let m = MarkingData::from_odd_edges(&d, &[1, 2]).unwrap();
        let cube = Cube::enumerate(&d, &m, &[], DEFAULT_CUBE_BOUND).unwrap();
        let mut survivors = Vec::new();
        for v in cube.vertices() {
            let st = cube.state(v);
            if st.n_circles > 1 && !st.killed {
                survivors.push(v.0);
            }
        }
        assert_eq!(survivors, vec![0b001]);
        let st = cube.state(Vertex(0b001));
        assert_eq!(st.n_circles, 2);
        assert_eq!(st.parity, 0);
    }

    #[test]
    fn cube_sizes() {
        let d = trefoil_left();
        let m = MarkingData::empty(&d);
        assert_eq!(Cube::enumerate(&d, &m, &[], 24).unwrap().len(), 8);
        assert_eq!(Cube::enumerate(&d, &m, &[0], 24).unwrap().len(), 4);
        let r = Cube::enumerate(&d, &m, &[], 2);
        assert_eq!(
            r.err(),
            Some(CubeError::CubeTooLarge { size: 3, bound: 2 })
        );
    }

    #[test]
    fn circle_count_changes_by_one_on_edges() {
        let d = trefoil_left();
        let m = MarkingData::empty(&d);
        let cube = Cube::enumerate(&d, &m, &[], 24).unwrap();
        for v in cube.vertices() {
            for i in 0..cube.dim() {
                if !v.bit(i) {
                    let a = cube.state(v).n_circles as i64;
                    let b = cube.state(v.flip(i)).n_circles as i64;
                    assert_eq!((a - b).abs(), 1);
                }
            }
        }
    }

    #[test]
    fn trivial_path_trivial_cases() {
        let d = trefoil_left();
        let m = MarkingData::empty(&d);
        let cube = Cube::enumerate(&d, &m, &[], 24).unwrap();
        let (ok, path) = trivial_path_exists(&cube, Vertex(0), Vertex(0));
        assert!(ok);
        assert_eq!(path, vec![Vertex(0)]);
        let (ok, path) = trivial_path_exists(&cube, Vertex(0b111), Vertex(0));
        assert!(ok);
        assert_eq!(path.len(), 4);
    }

    #[test]
    fn traced_circles_consistent_with_resolve() {
        let d = trefoil_right();
        let m = MarkingData::empty(&d);
        for mask in 0u32..8 {
            let mut a = Vec::new();
            for i in 0..3 {
                a.push(if mask >> i & 1 == 1 { Res::One } else { Res::Zero });
            }
            let st = resolve(&d, &m, &a);
            let tr = trace(&d, &a);
            assert_eq!(tr.len(), st.n_circles);
            for c in &tr {
                let ids: Vec<usize> = c.edges().map(|e| st.circle(e)).collect();
                assert!(ids.windows(2).all(|w| w[0] == w[1]));
            }
        }
    }

    #[test]
    fn dropped_kink_single_circle() {
        let d = Diagram::from_pd(vec![[1, 1, 2, 2]], 0).unwrap();
        let m = MarkingData::empty(&d);
        let st = resolve(&d, &m, &[Res::Dropped]);
        assert_eq!(st.n_circles, 1);
        let tr = trace(&d, &[Res::Dropped]);
        assert_eq!(tr.len(), 1);
        assert_eq!(tr[0].steps.len(), 2);
    }
}

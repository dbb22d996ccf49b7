//! Oriented link diagrams given by PD codes, plus marking data.
//!
//! A crossing is a quadruple of edge ids listed counterclockwise starting
//! from the incoming under-strand. Edge ids run 1..=2n, increasing along
//! each component, with each component occupying one contiguous block.
//! Crossing-free circle components cannot be expressed in PD form and are
//! carried as an explicit `unknotted_extras` count.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 1-based edge id as used in PD codes.
pub type EdgeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiagramError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("empty diagram: no crossings and no unknotted components")]
    EmptyDiagram,
    #[error("component {0} has an odd number of marked points but never passes under a crossing")]
    NoUnderCrossing(usize),
}

/// One step of a component traversal: travel `edge`, then pass through
/// `crossing` (under or over) onto the next edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub edge: EdgeId,
    pub crossing: usize,
    pub under: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Traversal in orientation order; `steps[i].edge` is followed by
    /// `steps[i+1].edge` after passing `steps[i].crossing`.
    pub steps: Vec<Step>,
    /// Contiguous edge-id block occupied by this component.
    pub min_edge: EdgeId,
    pub max_edge: EdgeId,
}

/// An oriented link diagram with derived combinatorial data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    crossings: Vec<[EdgeId; 4]>,
    unknotted_extras: usize,
    n_edges: usize,
    components: Vec<Component>,
    comp_of_edge: Vec<usize>,
    signs: Vec<i8>,
    /// Slot (1 or 3) of the incoming over-strand edge, per crossing.
    over_in_slot: Vec<u8>,
}

/// Input JSON schema shared by the library and the CLI.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct DiagramInput {
    pub pd: Vec<[EdgeId; 4]>,
    #[serde(default)]
    pub unknotted_extras: usize,
    #[serde(default)]
    pub omega_edges: Vec<EdgeId>,
    #[serde(default)]
    pub basepoint_edge: Option<EdgeId>,
}

/// Marked-point data: per-edge parity of ω endpoints, with per-component
/// parities and (after reduction) one marked crossing per odd component.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MarkingData {
    /// Edges carrying an odd number of ω endpoints.
    odd_edges: Vec<EdgeId>,
    component_parity: Vec<bool>,
    /// Populated by `reduce_marking`: crossing index per odd component.
    pub marked_crossings: BTreeMap<usize, usize>,
}

impl MarkingData {
    pub fn empty(d: &Diagram) -> Self {
        MarkingData {
            odd_edges: Vec::new(),
            component_parity: vec![false; d.components.len() + d.unknotted_extras],
            marked_crossings: BTreeMap::new(),
        }
    }

    /// Builds marking data from the set of odd-parity edges. Duplicate
    /// listings cancel mod 2.
    pub fn from_odd_edges(d: &Diagram, edges: &[EdgeId]) -> Result<Self, DiagramError> {
        let mut parity = vec![false; d.n_edges + 1];
        for &e in edges {
            if e == 0 || e > d.n_edges {
                return Err(DiagramError::MalformedInput(format!(
                    "omega edge {e} out of range 1..={}",
                    d.n_edges
                )));
            }
            parity[e] = !parity[e];
        }
        let odd_edges: Vec<EdgeId> = (1..=d.n_edges).filter(|&e| parity[e]).collect();
        let mut component_parity = vec![false; d.components.len() + d.unknotted_extras];
        for &e in &odd_edges {
            component_parity[d.comp_of_edge[e]] ^= true;
        }
        if component_parity.iter().filter(|&&p| p).count() % 2 != 0 {
            return Err(DiagramError::MalformedInput(
                "total number of marked points is odd".into(),
            ));
        }
        Ok(MarkingData {
            odd_edges,
            component_parity,
            marked_crossings: BTreeMap::new(),
        })
    }

    pub fn odd_edges(&self) -> &[EdgeId] {
        &self.odd_edges
    }

    pub fn edge_parity(&self, e: EdgeId) -> bool {
        self.odd_edges.binary_search(&e).is_ok()
    }

    pub fn component_parity(&self, comp: usize) -> bool {
        self.component_parity[comp]
    }

    pub fn is_empty(&self) -> bool {
        self.odd_edges.is_empty()
    }
}

impl Diagram {
    /// Builds and validates a diagram from a PD code.
    pub fn from_pd(pd: Vec<[EdgeId; 4]>, unknotted_extras: usize) -> Result<Self, DiagramError> {
        if pd.is_empty() && unknotted_extras == 0 {
            return Err(DiagramError::EmptyDiagram);
        }
        let n = pd.len();
        let n_edges = 2 * n;

        // Every edge id must appear exactly twice, ids contiguous 1..=2n.
        let mut occ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_edges + 1];
        for (k, q) in pd.iter().enumerate() {
            for (s, &e) in q.iter().enumerate() {
                if e == 0 || e > n_edges {
                    return Err(DiagramError::MalformedInput(format!(
                        "edge id {e} outside 1..={n_edges} (non-contiguous numbering)"
                    )));
                }
                occ[e].push((k, s));
            }
        }
        for e in 1..=n_edges {
            if occ[e].len() != 2 {
                return Err(DiagramError::MalformedInput(format!(
                    "edge id {e} appears {} times, expected 2",
                    occ[e].len()
                )));
            }
        }

        // Trace undirected components of the 4-valent graph: at every
        // crossing the strands pass straight through (a-c and b-d).
        let mut comp_of_edge = vec![usize::MAX; n_edges + 1];
        let mut comp_edges: Vec<Vec<EdgeId>> = Vec::new();
        for start in 1..=n_edges {
            if comp_of_edge[start] != usize::MAX {
                continue;
            }
            let idx = comp_edges.len();
            let mut edges = Vec::new();
            let mut stack = vec![start];
            while let Some(e) = stack.pop() {
                if comp_of_edge[e] != usize::MAX {
                    continue;
                }
                comp_of_edge[e] = idx;
                edges.push(e);
                for &(k, s) in &occ[e] {
                    let partner = pd[k][(s + 2) % 4];
                    stack.push(partner);
                }
            }
            edges.sort_unstable();
            comp_edges.push(edges);
        }

        // Each component must occupy a contiguous id block.
        for (i, edges) in comp_edges.iter().enumerate() {
            let (lo, hi) = (edges[0], edges[edges.len() - 1]);
            if hi - lo + 1 != edges.len() {
                return Err(DiagramError::MalformedInput(format!(
                    "component {i} edges are not a contiguous id block"
                )));
            }
        }
        comp_edges.sort_by_key(|e| e[0]);
        for (i, edges) in comp_edges.iter().enumerate() {
            for &e in edges {
                comp_of_edge[e] = i;
            }
        }

        // Successor along the orientation: ids increase with one wrap per
        // component block.
        let succ = |e: EdgeId| -> EdgeId {
            let c = &comp_edges[comp_of_edge[e]];
            if e == c[c.len() - 1] {
                c[0]
            } else {
                e + 1
            }
        };

        // Under-strand consistency: quadruples start at the incoming
        // under-edge, so succ(a) must be c.
        for (k, q) in pd.iter().enumerate() {
            if succ(q[0]) != q[2] {
                return Err(DiagramError::MalformedInput(format!(
                    "crossing {k}: under-strand {} -> {} does not follow edge numbering",
                    q[0], q[2]
                )));
            }
        }

        // Orient the over-strand at each crossing. Each edge needs exactly
        // one incoming and one outgoing occurrence; under-strands already
        // fix a as incoming and c as outgoing. Two-edge blocks can satisfy
        // the numbering in both directions, so propagate the in/out
        // constraint globally and only tie-break truly free components.
        let mut over_in_slot = vec![0u8; n];
        // role[e] = Some((crossing, slot)) once the incoming occurrence of e
        // is known.
        let mut incoming: Vec<Option<(usize, usize)>> = vec![None; n_edges + 1];
        let mut outgoing: Vec<Option<(usize, usize)>> = vec![None; n_edges + 1];
        let set_in = |v: &mut Vec<Option<(usize, usize)>>, e: EdgeId, at: (usize, usize)| {
            match v[e] {
                None => {
                    v[e] = Some(at);
                    Ok(())
                }
                Some(prev) if prev == at => Ok(()),
                Some(_) => Err(DiagramError::MalformedInput(format!(
                    "edge {e} has two occurrences with the same direction"
                ))),
            }
        };
        for (k, q) in pd.iter().enumerate() {
            set_in(&mut incoming, q[0], (k, 0))?;
            set_in(&mut outgoing, q[2], (k, 2))?;
        }
        let mut pending: Vec<usize> = Vec::new();
        for (k, q) in pd.iter().enumerate() {
            let (b, d) = (q[1], q[3]);
            let b_in = succ(b) == d;
            let d_in = succ(d) == b;
            match (b_in, d_in) {
                (true, false) => {
                    over_in_slot[k] = 1;
                    set_in(&mut incoming, b, (k, 1))?;
                    set_in(&mut outgoing, d, (k, 3))?;
                }
                (false, true) => {
                    over_in_slot[k] = 3;
                    set_in(&mut incoming, d, (k, 3))?;
                    set_in(&mut outgoing, b, (k, 1))?;
                }
                (true, true) => pending.push(k),
                (false, false) => {
                    return Err(DiagramError::MalformedInput(format!(
                        "crossing {k}: over-strand edges {b},{d} are not consecutive"
                    )))
                }
            }
        }
        while !pending.is_empty() {
            let mut progressed = false;
            let mut rest = Vec::new();
            for &k in &pending {
                let (b, d) = (pd[k][1], pd[k][3]);
                // An edge already incoming elsewhere must be outgoing here,
                // and vice versa.
                let d_is_in = incoming[b].map_or(false, |at| at != (k, 1))
                    || outgoing[d].map_or(false, |at| at != (k, 3));
                let b_is_in = incoming[d].map_or(false, |at| at != (k, 3))
                    || outgoing[b].map_or(false, |at| at != (k, 1));
                let slot = if d_is_in && !b_is_in {
                    3
                } else if b_is_in && !d_is_in {
                    1
                } else if b_is_in && d_is_in {
                    return Err(DiagramError::MalformedInput(format!(
                        "crossing {k}: inconsistent over-strand orientation"
                    )));
                } else {
                    rest.push(k);
                    continue;
                };
                over_in_slot[k] = slot;
                let (e_in, e_out) = if slot == 1 { (b, d) } else { (d, b) };
                set_in(&mut incoming, e_in, (k, slot as usize))?;
                set_in(&mut outgoing, e_out, (k, (4 - slot) as usize))?;
                progressed = true;
            }
            if !progressed {
                // A component traversed only as the over-strand: both
                // orientations are consistent; fix the lowest-index pending
                // crossing with its smaller over-edge incoming.
                let k = *rest.iter().min().unwrap();
                let (b, d) = (pd[k][1], pd[k][3]);
                let slot = if d <= b { 3 } else { 1 };
                over_in_slot[k] = slot;
                let (e_in, e_out) = if slot == 1 { (b, d) } else { (d, b) };
                set_in(&mut incoming, e_in, (k, slot as usize))?;
                set_in(&mut outgoing, e_out, (k, (4 - slot) as usize))?;
                rest.retain(|&x| x != k);
            }
            pending = rest;
        }

        // Directed traversal per component, recording under/over passages.
        // Edge e ends where it is incoming; the passage there leads to succ(e).
        let mut components = Vec::new();
        for edges in &comp_edges {
            let mut steps = Vec::new();
            for &e in edges {
                let (k, s) = incoming[e].ok_or_else(|| {
                    DiagramError::MalformedInput(format!("edge {e} has no incoming occurrence"))
                })?;
                steps.push(Step {
                    edge: e,
                    crossing: k,
                    under: s == 0,
                });
            }
            components.push(Component {
                steps,
                min_edge: edges[0],
                max_edge: edges[edges.len() - 1],
            });
        }

        // Crossing signs. With the under-strand entering at slot 0 and the
        // quadruple counterclockwise, the crossing is positive exactly when
        // the over-strand comes in at slot 3.
        let signs: Vec<i8> = over_in_slot
            .iter()
            .map(|&s| if s == 3 { 1 } else { -1 })
            .collect();

        Ok(Diagram {
            crossings: pd,
            unknotted_extras,
            n_edges,
            components,
            comp_of_edge,
            signs,
            over_in_slot,
        })
    }

    pub fn n_crossings(&self) -> usize {
        self.crossings.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn unknotted_extras(&self) -> usize {
        self.unknotted_extras
    }

    pub fn crossings(&self) -> &[[EdgeId; 4]] {
        &self.crossings
    }

    pub fn quad(&self, k: usize) -> [EdgeId; 4] {
        self.crossings[k]
    }

    /// Components with at least one crossing, in edge-id order.
    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Total component count including crossing-free circles.
    pub fn n_components(&self) -> usize {
        self.components.len() + self.unknotted_extras
    }

    pub fn component_of_edge(&self, e: EdgeId) -> usize {
        self.comp_of_edge[e]
    }

    /// Incoming over-strand slot (1 or 3) at crossing `k`.
    pub fn over_in_slot(&self, k: usize) -> u8 {
        self.over_in_slot[k]
    }

    pub fn next_edge(&self, e: EdgeId) -> EdgeId {
        let c = &self.components[self.comp_of_edge[e]];
        if e == c.max_edge {
            c.min_edge
        } else {
            e + 1
        }
    }

    pub fn prev_edge(&self, e: EdgeId) -> EdgeId {
        let c = &self.components[self.comp_of_edge[e]];
        if e == c.min_edge {
            c.max_edge
        } else {
            e - 1
        }
    }

    /// Standard crossing signs derived from the orientation.
    pub fn crossing_signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn sign(&self, k: usize) -> i8 {
        self.signs[k]
    }

    /// True iff along every component the passages alternate over/under.
    pub fn is_alternating(&self) -> bool {
        self.components.iter().all(|c| {
            let m = c.steps.len();
            (0..m).all(|i| c.steps[i].under != c.steps[(i + 1) % m].under)
        })
    }

    /// Serializes back to the input schema.
    pub fn to_input(&self, m: &MarkingData, basepoint: Option<EdgeId>) -> DiagramInput {
        DiagramInput {
            pd: self.crossings.clone(),
            unknotted_extras: self.unknotted_extras,
            omega_edges: m.odd_edges.clone(),
            basepoint_edge: basepoint,
        }
    }
}

/// Parses the JSON input format into a diagram plus marking data.
pub fn parse_input(text: &str) -> Result<(Diagram, MarkingData, Option<EdgeId>), DiagramError> {
    let input: DiagramInput = serde_json::from_str(text)
        .map_err(|e| DiagramError::MalformedInput(format!("json: {e}")))?;
    let d = Diagram::from_pd(input.pd, input.unknotted_extras)?;
    let m = MarkingData::from_odd_edges(&d, &input.omega_edges)?;
    Ok((d, m, input.basepoint_edge))
}

pub(crate) mod rebuild {
    //! Rebuilding a PD code from crossing data over abstract edge tokens.
    //! Used by diagram surgery: tokens are renumbered along each component
    //! so the result satisfies the numbering conventions again.

    use super::*;

    /// A crossing over tokens: `slots` in the same counterclockwise order
    /// the final quadruple will use, rotated so the incoming under-strand
    /// sits at slot 0. `over_in` is 1 or 3.
    #[derive(Debug, Clone, Copy)]
    pub struct ProtoCrossing {
        pub slots: [usize; 4],
        pub over_in: usize,
    }

    /// Renumbers tokens into contiguous per-component edge blocks.
    ///
    /// `key` orders components (smallest key first) and picks each
    /// component's starting token. Returns the PD code and the
    /// token -> new edge id map.
    pub fn renumber(
        protos: &[ProtoCrossing],
        key: impl Fn(usize) -> usize,
    ) -> Result<(Vec<[EdgeId; 4]>, BTreeMap<usize, EdgeId>), DiagramError> {
        // Occurrences and incoming slots per token.
        let mut occ: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (k, p) in protos.iter().enumerate() {
            for (s, &t) in p.slots.iter().enumerate() {
                occ.entry(t).or_default().push((k, s));
            }
        }
        for (t, o) in &occ {
            if o.len() != 2 {
                return Err(DiagramError::MalformedInput(format!(
                    "token {t} appears {} times during rebuild",
                    o.len()
                )));
            }
        }
        let incoming_at = |t: usize| -> Option<(usize, usize)> {
            occ[&t]
                .iter()
                .copied()
                .find(|&(k, s)| s == 0 || s == protos[k].over_in)
        };
        // Follow the strand through the incoming crossing.
        let next_token = |t: usize| -> usize {
            let (k, s) = incoming_at(t).expect("token has an incoming occurrence");
            protos[k].slots[(s + 2) % 4]
        };

        // Trace components and order them.
        let mut comp_of: BTreeMap<usize, usize> = BTreeMap::new();
        let mut comps: Vec<Vec<usize>> = Vec::new();
        let mut tokens: Vec<usize> = occ.keys().copied().collect();
        tokens.sort_by_key(|&t| key(t));
        for &start in &tokens {
            if comp_of.contains_key(&start) {
                continue;
            }
            let idx = comps.len();
            let mut cycle = vec![start];
            comp_of.insert(start, idx);
            let mut t = next_token(start);
            while t != start {
                comp_of.insert(t, idx);
                cycle.push(t);
                t = next_token(t);
            }
            comps.push(cycle);
        }

        // Assign new ids: components in discovery order (lowest key first),
        // starting each cycle at its discovery token.
        let mut new_id: BTreeMap<usize, EdgeId> = BTreeMap::new();
        let mut next = 1;
        for cycle in &comps {
            for &t in cycle {
                new_id.insert(t, next);
                next += 1;
            }
        }
        let pd: Vec<[EdgeId; 4]> = protos
            .iter()
            .map(|p| {
                [
                    new_id[&p.slots[0]],
                    new_id[&p.slots[1]],
                    new_id[&p.slots[2]],
                    new_id[&p.slots[3]],
                ]
            })
            .collect();
        Ok((pd, new_id))
    }
}

/// Chooses one marked crossing per odd-parity component: the lowest-index
/// crossing where that component passes under.
pub fn reduce_marking(d: &Diagram, m: &MarkingData) -> Result<MarkingData, DiagramError> {
    let mut out = m.clone();
    out.marked_crossings.clear();
    for comp in 0..d.n_components() {
        if !m.component_parity(comp) {
            continue;
        }
        if comp >= d.components().len() {
            // A crossing-free circle cannot pass under anything.
            return Err(DiagramError::NoUnderCrossing(comp));
        }
        let k = d.components()[comp]
            .steps
            .iter()
            .filter(|s| s.under)
            .map(|s| s.crossing)
            .min();
        match k {
            Some(k) => {
                out.marked_crossings.insert(comp, k);
            }
            None => return Err(DiagramError::NoUnderCrossing(comp)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn trefoil_left() -> Diagram {
        Diagram::from_pd(vec![[1, 4, 2, 5], [3, 6, 4, 1], [5, 2, 6, 3]], 0).unwrap()
    }

    pub fn trefoil_right() -> Diagram {
        Diagram::from_pd(vec![[4, 2, 5, 1], [6, 4, 1, 3], [2, 6, 3, 5]], 0).unwrap()
    }

    #[test]
    fn trefoil_parses() {
        let d = trefoil_left();
        assert_eq!(d.n_crossings(), 3);
        assert_eq!(d.n_components(), 1);
        assert_eq!(d.n_edges(), 6);
    }

    #[test]
    fn crossing_free_unknot() {
        let d = Diagram::from_pd(vec![], 1).unwrap();
        assert_eq!(d.n_crossings(), 0);
        assert_eq!(d.n_components(), 1);
        assert!(d.is_alternating());
    }

    #[test]
    fn empty_diagram_rejected() {
        assert_eq!(Diagram::from_pd(vec![], 0), Err(DiagramError::EmptyDiagram));
    }

    #[test]
    fn repeated_edge_rejected() {
        let r = Diagram::from_pd(vec![[1, 1, 2, 1], [3, 6, 4, 1], [5, 2, 6, 3]], 0);
        assert!(matches!(r, Err(DiagramError::MalformedInput(_))));
    }

    #[test]
    fn non_contiguous_ids_rejected() {
        let r = Diagram::from_pd(vec![[1, 7, 2, 8], [7, 1, 8, 2]], 0);
        assert!(matches!(r, Err(DiagramError::MalformedInput(_))));
    }

    #[test]
    fn trefoil_alternating() {
        assert!(trefoil_left().is_alternating());
        assert!(trefoil_right().is_alternating());
    }

    #[test]
    fn kink_alternates_by_the_rule() {
        // One-crossing kink: the single component passes over then under the
        // same crossing, which alternates around the cycle.
        let d = Diagram::from_pd(vec![[1, 1, 2, 2]], 0).unwrap();
        assert!(d.is_alternating());
    }

    #[test]
    fn trefoil_signs() {
        assert!(trefoil_left().crossing_signs().iter().all(|&s| s == -1));
        assert!(trefoil_right().crossing_signs().iter().all(|&s| s == 1));
    }

    #[test]
    fn hopf_signs_equal() {
        let d = Diagram::from_pd(vec![[1, 4, 2, 3], [3, 2, 4, 1]], 0).unwrap();
        assert_eq!(d.n_components(), 2);
        assert_eq!(d.sign(0), d.sign(1));
    }

    #[test]
    fn doubled_endpoints_cancel() {
        let d = trefoil_left();
        let m = MarkingData::from_odd_edges(&d, &[2, 2]).unwrap();
        assert!(m.is_empty());
        let r = reduce_marking(&d, &m).unwrap();
        assert!(r.marked_crossings.is_empty());
    }

    #[test]
    fn hopf_cross_arc_marks_two_crossings() {
        let d = Diagram::from_pd(vec![[1, 4, 2, 3], [3, 2, 4, 1]], 0).unwrap();
        let m = MarkingData::from_odd_edges(&d, &[1, 3]).unwrap();
        assert!(m.component_parity(0) && m.component_parity(1));
        let r = reduce_marking(&d, &m).unwrap();
        assert_eq!(r.marked_crossings.len(), 2);
    }

    #[test]
    fn over_only_component_has_no_under_crossing() {
        // Two circles, the first passing over the second twice.
        // Component 1 = edges 1,2 always over; component 2 = edges 3,4.
        let d = Diagram::from_pd(vec![[3, 1, 4, 2], [4, 2, 3, 1]], 0).unwrap();
        assert_eq!(d.n_components(), 2);
        let m = MarkingData::from_odd_edges(&d, &[1, 3]).unwrap();
        let r = reduce_marking(&d, &m);
        assert_eq!(r, Err(DiagramError::NoUnderCrossing(0)));
    }

    #[test]
    fn roundtrip_identity() {
        let d = trefoil_right();
        let m = MarkingData::from_odd_edges(&d, &[1, 2]).unwrap();
        let text = serde_json::to_string(&d.to_input(&m, None)).unwrap();
        let (d2, m2, bp) = parse_input(&text).unwrap();
        assert_eq!(d, d2);
        assert_eq!(m.odd_edges(), m2.odd_edges());
        assert_eq!(bp, None);
    }

    #[test]
    fn edge_count_is_twice_crossing_count() {
        for d in [trefoil_left(), trefoil_right()] {
            assert_eq!(d.n_edges(), 2 * d.n_crossings());
        }
    }
}

//! Cyclic lifting of standard protographs into finite sparse codes.
//!
//! Each socket of the protograph becomes a circulant bundle of Z edges; the
//! shift of every bundle is chosen greedily to maximize the length of the
//! shortest cycle it closes, with ties broken by the smallest shift. Shifts
//! within a bundle of parallel sockets are distinct, so the lifted graph is
//! simple whenever Z is at least the largest base-matrix entry.

use crate::error::{Error, Result};
use crate::protograph::Protograph;

/// Bipartite sparse code over checks and variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseCode {
    num_checks: usize,
    num_vars: usize,
    check_neighbors: Vec<Vec<usize>>,
    var_neighbors: Vec<Vec<usize>>,
    punctured: Vec<bool>,
}

impl SparseCode {
    /// Builds from per-check neighbor lists; parallel edges are repeated
    /// entries.
    pub fn new(
        num_vars: usize,
        check_neighbors: Vec<Vec<usize>>,
        punctured: Vec<bool>,
    ) -> Result<Self> {
        if punctured.len() != num_vars {
            return Err(Error::Invalid("puncturing mask length mismatch".into()));
        }
        let mut var_neighbors = vec![Vec::new(); num_vars];
        for (i, row) in check_neighbors.iter().enumerate() {
            for &v in row {
                if v >= num_vars {
                    return Err(Error::Invalid(format!(
                        "check {i} references variable {v} out of range"
                    )));
                }
                var_neighbors[v].push(i);
            }
        }
        Ok(Self { num_checks: check_neighbors.len(), num_vars, check_neighbors, var_neighbors, punctured })
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn check_neighbors(&self, i: usize) -> &[usize] {
        &self.check_neighbors[i]
    }

    pub fn var_neighbors(&self, v: usize) -> &[usize] {
        &self.var_neighbors[v]
    }

    pub fn is_punctured(&self, v: usize) -> bool {
        self.punctured[v]
    }

    pub fn punctured_mask(&self) -> &[bool] {
        &self.punctured
    }

    pub fn set_punctured(&mut self, mask: Vec<bool>) -> Result<()> {
        if mask.len() != self.num_vars {
            return Err(Error::Invalid("puncturing mask length mismatch".into()));
        }
        self.punctured = mask;
        Ok(())
    }

    pub fn num_transmitted(&self) -> usize {
        self.punctured.iter().filter(|&&p| !p).count()
    }

    pub fn num_edges(&self) -> usize {
        self.check_neighbors.iter().map(Vec::len).sum()
    }
}

/// Result of lifting a protograph.
#[derive(Debug, Clone)]
pub struct LiftedCode {
    pub code: SparseCode,
    pub z: usize,
    /// Circulant shift per protograph socket, in global socket order.
    pub shifts: Vec<usize>,
    pub protograph: Protograph,
    pub girth: u32,
}

/// Combined adjacency (variables then checks) with edge ids, for cycle
/// search.
struct EdgeGraph {
    adj: Vec<Vec<(usize, usize)>>,
}

impl EdgeGraph {
    fn from_code(code: &SparseCode) -> Self {
        let mut adj = vec![Vec::new(); code.num_vars() + code.num_checks()];
        let mut eid = 0usize;
        for i in 0..code.num_checks() {
            for &v in code.check_neighbors(i) {
                let c = code.num_vars() + i;
                adj[v].push((c, eid));
                adj[c].push((v, eid));
                eid += 1;
            }
        }
        Self { adj }
    }

    /// Shortest cycle length found from this root; exact for the cycles
    /// through the root, a valid upper bound otherwise.
    fn shortest_cycle_from(&self, root: usize, best: u32) -> u32 {
        let n = self.adj.len();
        let mut dist = vec![u32::MAX; n];
        let mut pedge = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        dist[root] = 0;
        queue.push_back(root);
        let mut found = best;
        while let Some(u) = queue.pop_front() {
            if 2 * dist[u] + 1 >= found {
                break;
            }
            for &(w, id) in &self.adj[u] {
                if id == pedge[u] {
                    continue;
                }
                if dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    pedge[w] = id;
                    queue.push_back(w);
                } else {
                    found = found.min(dist[u] + dist[w] + 1);
                }
            }
        }
        found
    }

    fn girth_over_roots(&self, roots: impl Iterator<Item = usize>) -> u32 {
        let mut best = u32::MAX;
        for r in roots {
            best = self.shortest_cycle_from(r, best);
        }
        if best == u32::MAX {
            0
        } else {
            best
        }
    }
}

/// Length of the shortest cycle in the bipartite graph; 0 for a forest.
pub fn graph_girth(code: &SparseCode) -> u32 {
    let g = EdgeGraph::from_code(code);
    let n = g.adj.len();
    g.girth_over_roots(0..n)
}

/// Lifts a standard protograph by cyclic factor `z`.
pub fn lift(p: &Protograph, z: usize) -> Result<LiftedCode> {
    if !p.is_standard() {
        return Err(Error::Unsupported(
            "lifting supports repetition/SPC protographs only".into(),
        ));
    }
    if z == 0 {
        return Err(Error::Invalid("lift size must be positive".into()));
    }
    let max_mult = (0..p.num_checks())
        .flat_map(|i| (0..p.num_vars()).map(move |j| (i, j)))
        .map(|(i, j)| p.multiplicity(i, j))
        .max()
        .unwrap_or(0);
    if (max_mult as usize) > z {
        return Err(Error::Invalid(format!(
            "lift size {z} is below the largest base-matrix entry {max_mult}"
        )));
    }

    let num_vars = p.num_vars() * z;
    let num_checks = p.num_checks() * z;
    // Adjacency with edge ids, grown socket by socket. Variables occupy
    // [0, num_vars), checks [num_vars, num_vars + num_checks).
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_vars + num_checks];
    let mut shifts = Vec::with_capacity(p.sockets().len());
    let sockets = p.sockets();

    for (sid, s) in sockets.iter().enumerate() {
        let used: Vec<usize> = (0..sid)
            .rev()
            .take_while(|&t| sockets[t].check == s.check && sockets[t].var == s.var)
            .map(|t| shifts[t])
            .collect();
        // The partially built graph is invariant under the cyclic shift of
        // copies, so distances from one representative decide every copy.
        let root = s.var * z;
        let mut dist = vec![u32::MAX; adj.len()];
        let mut queue = std::collections::VecDeque::new();
        dist[root] = 0;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for &(w, _) in &adj[u] {
                if dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        let mut pick = None;
        let mut pick_dist = 0u32;
        for cand in 0..z {
            if used.contains(&cand) {
                continue;
            }
            let d = dist[num_vars + s.check * z + cand];
            if pick.is_none() || d > pick_dist {
                pick = Some(cand);
                pick_dist = d;
                if d == u32::MAX {
                    break;
                }
            }
        }
        let shift = pick.expect("z >= multiplicity leaves a free shift");
        shifts.push(shift);
        for m in 0..z {
            let u = s.var * z + m;
            let w = num_vars + s.check * z + (m + shift) % z;
            let eid = sid * z + m;
            adj[u].push((w, eid));
            adj[w].push((u, eid));
        }
    }

    let mut check_neighbors = vec![Vec::new(); num_checks];
    for v in 0..num_vars {
        for &(w, _) in &adj[v] {
            check_neighbors[w - num_vars].push(v);
        }
    }
    let punctured = (0..num_vars).map(|v| p.is_punctured(v / z)).collect();
    let code = SparseCode::new(num_vars, check_neighbors, punctured)?;

    // One representative per protograph node suffices: the cyclic
    // automorphism carries any vertex onto its copy-0 representative.
    let g = EdgeGraph::from_code(&code);
    let roots = (0..p.num_vars())
        .map(|j| j * z)
        .chain((0..p.num_checks()).map(|i| num_vars + i * z));
    let girth = g.girth_over_roots(roots);

    Ok(LiftedCode { code, z, shifts, protograph: p.clone(), girth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protograph::parse_protograph;

    #[test]
    fn unit_lift_of_simple_protograph_is_identity() {
        let p = parse_protograph("2 3\n1 1 0\n0 1 1\n").unwrap();
        let l = lift(&p, 1).unwrap();
        assert_eq!(l.code.num_checks(), 2);
        assert_eq!(l.code.num_vars(), 3);
        assert_eq!(l.code.check_neighbors(0), &[0, 1]);
        assert_eq!(l.code.check_neighbors(1), &[1, 2]);
        assert!(l.shifts.iter().all(|&s| s == 0));
    }

    #[test]
    fn multiplicity_requires_room() {
        let p = parse_protograph("1 1\n2\n").unwrap();
        assert!(matches!(lift(&p, 1), Err(Error::Invalid(_))));
        let l = lift(&p, 2).unwrap();
        assert_eq!(l.code.num_edges(), 4);
        assert_ne!(l.shifts[0], l.shifts[1]);
        assert_eq!(l.girth, 4);
        assert_eq!(l.girth, graph_girth(&l.code));
    }

    #[test]
    fn two_by_four_reaches_girth_six() {
        let p = parse_protograph("2 4\n1 1 1 1\n1 1 1 1\n").unwrap();
        let l = lift(&p, 16).unwrap();
        assert!(l.girth >= 6, "girth {}", l.girth);
        assert_eq!(l.girth, graph_girth(&l.code));
    }

    #[test]
    fn lifted_degrees_match_protograph() {
        let p = parse_protograph("2 3\n2 1 0\n1 1 3\n").unwrap();
        let l = lift(&p, 5).unwrap();
        for j in 0..3 {
            let want = p.var_degree(j);
            for m in 0..5 {
                assert_eq!(l.code.var_neighbors(j * 5 + m).len(), want);
            }
        }
        for i in 0..2 {
            let want = p.check_degree(i);
            for m in 0..5 {
                assert_eq!(l.code.check_neighbors(i * 5 + m).len(), want);
            }
        }
        assert_eq!(l.code.num_edges(), 5 * p.sockets().len());
    }

    #[test]
    fn forest_has_girth_zero() {
        let p = parse_protograph("1 2\n1 1\n").unwrap();
        let l = lift(&p, 4).unwrap();
        assert_eq!(l.girth, 0);
        assert_eq!(graph_girth(&l.code), 0);
    }

    #[test]
    fn puncturing_propagates_to_copies() {
        let p = parse_protograph("1 2\n1 1\npunctured 2\n").unwrap();
        let l = lift(&p, 3).unwrap();
        for m in 0..3 {
            assert!(!l.code.is_punctured(m));
            assert!(l.code.is_punctured(3 + m));
        }
        assert_eq!(l.code.num_transmitted(), 3);
    }

    #[test]
    fn representative_girth_agrees_with_full_scan() {
        let p = parse_protograph("3 6\n1 1 1 1 1 1\n1 1 1 1 1 1\n1 1 1 1 1 1\n").unwrap();
        for z in [2usize, 3, 7] {
            let l = lift(&p, z).unwrap();
            assert_eq!(l.girth, graph_girth(&l.code), "z={z}");
        }
    }
}

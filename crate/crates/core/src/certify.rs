//! Certification that the block-error threshold matches the bit-error
//! threshold: graph reduction to the doubly-exponentially-converging core,
//! fixed-point propagation of the converging edge sets, and the final
//! information-coverage verdict.
//!
//! Two reducers are provided. The standard one removes degree-one variables
//! and cycles of degree-two variables together with their adjacent checks.
//! The generalized one classifies edges through the minimum edge-degree of
//! each node's extrinsic erasure polynomial under substitution of removed
//! messages, which degenerates to the standard behavior on repetition/SPC
//! nodes.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{extrinsic_erasure_polynomial, ChannelPolynomial};
use crate::protograph::{EdgeSocket, Protograph};

/// External form of one edge socket: 1-based check, variable, and copy,
/// matching the text format's indexing.
#[derive(Serialize, Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SocketTriple {
    pub check: usize,
    pub var: usize,
    pub copy: usize,
}

impl SocketTriple {
    pub fn from_socket(s: &EdgeSocket) -> Self {
        Self { check: s.check + 1, var: s.var + 1, copy: s.copy + 1 }
    }
}

/// One step of a reduction, in removal order. Node indices are 1-based.
#[derive(Serialize, Clone, Debug, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RemovalEvent {
    CycleVariables { pass: u32, vars: Vec<usize>, checks: Vec<usize> },
    DegreeOneVariables { pass: u32, vars: Vec<usize>, checks: Vec<usize> },
    LoopEdges { pass: u32, edges: Vec<SocketTriple> },
    DegreeZeroEdges { pass: u32, edges: Vec<SocketTriple> },
}

/// Surviving subgraph of a reduction. A node survives only while it keeps
/// at least one surviving socket.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RedSubgraph {
    pub vars: BTreeSet<usize>,
    pub checks: BTreeSet<usize>,
    /// Global socket indices into `Protograph::sockets`.
    pub sockets: BTreeSet<usize>,
}

impl RedSubgraph {
    fn from_alive(p: &Protograph, alive: &[bool]) -> Self {
        let mut out = Self::default();
        for (e, s) in p.sockets().iter().enumerate() {
            if alive[e] {
                out.sockets.insert(e);
                out.vars.insert(s.var);
                out.checks.insert(s.check);
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.sockets.is_empty()
    }
}

/// Removed-edge classification: degree-zero contributions (E1) and loop
/// contributions (E2), as global socket indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeClassification {
    pub e1: BTreeSet<usize>,
    pub e2: BTreeSet<usize>,
}

/// Full result of a reduction.
#[derive(Clone, Debug)]
pub struct RedReduction {
    pub subgraph: RedSubgraph,
    pub trace: Vec<RemovalEvent>,
    pub classification: EdgeClassification,
}

/// Converging-edge sets from the fixed-point propagation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DexSets {
    /// Sockets whose variable-to-check message converges.
    pub dx: BTreeSet<usize>,
    /// Sockets whose check-to-variable message converges.
    pub dy: BTreeSet<usize>,
}

/// Auditable verdict for the block-error threshold condition. Lists use
/// 1-based indices; the internal sets keep 0-based socket/node ids.
#[derive(Serialize, Clone, Debug)]
pub struct BlockCertificate {
    pub verdict: bool,
    pub required_info: i64,
    /// Non-punctured variables covered by the converging set.
    pub dex_info_count: i64,
    pub dex_vars: Vec<usize>,
    pub red_vars: Vec<usize>,
    pub red_checks: Vec<usize>,
    pub red_edges: Vec<SocketTriple>,
    pub dx: Vec<SocketTriple>,
    pub dy: Vec<SocketTriple>,
    pub removal_trace: Vec<RemovalEvent>,
    #[serde(skip)]
    pub internals: CertificateInternals,
}

#[derive(Clone, Debug, Default)]
pub struct CertificateInternals {
    pub red: RedSubgraph,
    pub dx: BTreeSet<usize>,
    pub dy: BTreeSet<usize>,
    pub dex_vars: BTreeSet<usize>,
}

fn ensure_valid(p: &Protograph) -> Result<()> {
    let report = p.validate();
    if report.ok {
        Ok(())
    } else {
        Err(Error::Invalid("certification requires a valid protograph".into()))
    }
}

/// Bridge edge ids of an undirected multigraph given as (a, b, payload)
/// triples; the id is the triple's position. Self-loops must not appear.
fn bridge_edge_ids(num_nodes: usize, edges: &[(usize, usize, usize)]) -> BTreeSet<usize> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_nodes];
    for (idx, &(a, b, _)) in edges.iter().enumerate() {
        adj[a].push((b, idx));
        adj[b].push((a, idx));
    }
    let mut disc = vec![usize::MAX; num_nodes];
    let mut low = vec![0usize; num_nodes];
    let mut timer = 0usize;
    let mut bridges = BTreeSet::new();
    // Frames: (node, edge used to enter it, next child cursor).
    let mut call: Vec<(usize, usize, usize)> = Vec::new();
    for root in 0..num_nodes {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        call.push((root, usize::MAX, 0));
        while let Some(frame) = call.last_mut() {
            let (u, parent_edge) = (frame.0, frame.1);
            if frame.2 < adj[u].len() {
                let (w, eid) = adj[u][frame.2];
                frame.2 += 1;
                if eid == parent_edge {
                    continue;
                }
                if disc[w] != usize::MAX {
                    low[u] = low[u].min(disc[w]);
                } else {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    call.push((w, eid, 0));
                }
            } else {
                let u_low = low[u];
                call.pop();
                if let Some(pframe) = call.last_mut() {
                    let v = pframe.0;
                    low[v] = low[v].min(u_low);
                    if u_low > disc[v] {
                        bridges.insert(parent_edge);
                    }
                }
            }
        }
    }
    bridges
}

/// States lying on a directed cycle (member of a strongly connected
/// component of size at least two; the arc relation has no self-arcs).
fn states_on_cycles(adj: &[Vec<usize>]) -> Vec<bool> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next = 0usize;
    let mut cyclic = vec![false; n];
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, 0));
        while let Some(frame) = call.last_mut() {
            let u = frame.0;
            if frame.1 < adj[u].len() {
                let w = adj[u][frame.1];
                frame.1 += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[u] = low[u].min(index[w]);
                }
            } else {
                let u_low = low[u];
                call.pop();
                if let Some(pframe) = call.last_mut() {
                    low[pframe.0] = low[pframe.0].min(u_low);
                }
                if u_low == index[u] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().expect("scc stack underflow");
                        on_stack[w] = false;
                        component.push(w);
                        if w == u {
                            break;
                        }
                    }
                    if component.len() >= 2 {
                        for w in component {
                            cyclic[w] = true;
                        }
                    }
                }
            }
        }
    }
    cyclic
}

/// Standard reduction: repeatedly remove (i) variables of degree two lying
/// on cycles of the degree-two induced subgraph, then (ii) degree-one
/// variables, each together with all adjacent checks. Parallel pairs at a
/// degree-two variable count as 2-cycles.
pub fn red_reduce(p: &Protograph) -> Result<RedReduction> {
    if !p.is_standard() {
        return Err(Error::Unsupported(
            "standard reduction handles repetition/SPC nodes only; use the generalized reducer"
                .into(),
        ));
    }
    ensure_valid(p)?;
    let sockets = p.sockets();
    let mut alive_var = vec![true; p.num_vars()];
    let mut alive_check = vec![true; p.num_checks()];
    let mut trace = Vec::new();
    let mut classification = EdgeClassification::default();
    let mut pass = 0u32;
    loop {
        pass += 1;
        let mut changed = false;
        let live_sockets = |j: usize, av: &[bool], ac: &[bool]| -> Vec<usize> {
            p.var_sockets(j)
                .iter()
                .copied()
                .filter(|&e| av[sockets[e].var] && ac[sockets[e].check])
                .collect()
        };

        // (i) cycles among current degree-two variables.
        let mut cyclic_vars: BTreeSet<usize> = BTreeSet::new();
        let mut contracted: Vec<(usize, usize, usize)> = Vec::new();
        for j in 0..p.num_vars() {
            if !alive_var[j] {
                continue;
            }
            let live = live_sockets(j, &alive_var, &alive_check);
            if live.len() != 2 {
                continue;
            }
            let (a, b) = (sockets[live[0]].check, sockets[live[1]].check);
            if a == b {
                cyclic_vars.insert(j);
            } else {
                contracted.push((a, b, j));
            }
        }
        if !contracted.is_empty() {
            let bridges = bridge_edge_ids(p.num_checks(), &contracted);
            for (idx, &(_, _, j)) in contracted.iter().enumerate() {
                if !bridges.contains(&idx) {
                    cyclic_vars.insert(j);
                }
            }
        }
        if !cyclic_vars.is_empty() {
            changed = true;
            let mut adjacent: BTreeSet<usize> = BTreeSet::new();
            for &j in &cyclic_vars {
                for e in live_sockets(j, &alive_var, &alive_check) {
                    classification.e2.insert(e);
                    adjacent.insert(sockets[e].check);
                }
            }
            trace.push(RemovalEvent::CycleVariables {
                pass,
                vars: cyclic_vars.iter().map(|j| j + 1).collect(),
                checks: adjacent.iter().map(|i| i + 1).collect(),
            });
            for &j in &cyclic_vars {
                alive_var[j] = false;
            }
            for &i in &adjacent {
                alive_check[i] = false;
            }
        }

        // (ii) degree-one variables.
        let mut deg1: BTreeSet<usize> = BTreeSet::new();
        for j in 0..p.num_vars() {
            if alive_var[j] && live_sockets(j, &alive_var, &alive_check).len() == 1 {
                deg1.insert(j);
            }
        }
        if !deg1.is_empty() {
            changed = true;
            let mut adjacent: BTreeSet<usize> = BTreeSet::new();
            for &j in &deg1 {
                for e in live_sockets(j, &alive_var, &alive_check) {
                    classification.e1.insert(e);
                    adjacent.insert(sockets[e].check);
                }
            }
            trace.push(RemovalEvent::DegreeOneVariables {
                pass,
                vars: deg1.iter().map(|j| j + 1).collect(),
                checks: adjacent.iter().map(|i| i + 1).collect(),
            });
            for &j in &deg1 {
                alive_var[j] = false;
            }
            for &i in &adjacent {
                alive_check[i] = false;
            }
        }

        if !changed {
            break;
        }
    }
    let mut alive = vec![false; sockets.len()];
    for (e, s) in sockets.iter().enumerate() {
        alive[e] = alive_var[s.var] && alive_check[s.check];
    }
    Ok(RedReduction {
        subgraph: RedSubgraph::from_alive(p, &alive),
        trace,
        classification,
    })
}

/// Per-node polynomial state for the generalized reducer: one extrinsic
/// polynomial per socket, updated by substitution as edges are removed.
struct GenNode {
    polys: Vec<ChannelPolynomial>,
    pos_of_local: Vec<usize>,
    local_of_pos: Vec<usize>,
}

impl GenNode {
    fn for_variable(p: &Protograph, j: usize) -> Result<Option<Self>> {
        let Some(a) = p.var_code(j) else { return Ok(None) };
        let ext = a.code.extend_for_variable()?;
        let deg = p.var_degree(j);
        let mut pos_of_local = Vec::with_capacity(deg);
        let mut local_of_pos = vec![usize::MAX; deg];
        let mut polys = Vec::with_capacity(deg);
        for local in 0..deg {
            let pos = a.position_of_socket(local);
            pos_of_local.push(pos);
            local_of_pos[pos] = local;
            let h = extrinsic_erasure_polynomial(&ext, pos);
            polys.push(ChannelPolynomial::from_extended(&h, a.code.len(), p.is_punctured(j)));
        }
        Ok(Some(Self { polys, pos_of_local, local_of_pos }))
    }

    fn for_check(p: &Protograph, i: usize) -> Result<Option<Self>> {
        let Some(a) = p.check_code(i) else { return Ok(None) };
        let deg = p.check_degree(i);
        let mut pos_of_local = Vec::with_capacity(deg);
        let mut local_of_pos = vec![usize::MAX; deg];
        let mut polys = Vec::with_capacity(deg);
        for local in 0..deg {
            let pos = a.position_of_socket(local);
            pos_of_local.push(pos);
            local_of_pos[pos] = local;
            let h = extrinsic_erasure_polynomial(&a.code, pos);
            polys.push(ChannelPolynomial::from_plain(&h));
        }
        Ok(Some(Self { polys, pos_of_local, local_of_pos }))
    }

    fn substitute(&mut self, dead_local: usize) {
        let pos = self.pos_of_local[dead_local];
        for poly in &mut self.polys {
            *poly = poly.substitute_one(pos);
        }
    }
}

struct GenWork<'a> {
    p: &'a Protograph,
    alive: Vec<bool>,
    var_nodes: Vec<Option<GenNode>>,
    check_nodes: Vec<Option<GenNode>>,
    /// Standard check with no removed incident edge; once an edge is gone
    /// its extrinsic outputs are constant 1.
    spc_intact: Vec<bool>,
    local_at_var: Vec<usize>,
    local_at_check: Vec<usize>,
}

impl<'a> GenWork<'a> {
    fn new(p: &'a Protograph) -> Result<Self> {
        let mut var_nodes = Vec::with_capacity(p.num_vars());
        for j in 0..p.num_vars() {
            var_nodes.push(GenNode::for_variable(p, j)?);
        }
        let mut check_nodes = Vec::with_capacity(p.num_checks());
        for i in 0..p.num_checks() {
            check_nodes.push(GenNode::for_check(p, i)?);
        }
        let n = p.sockets().len();
        let mut local_at_var = vec![0usize; n];
        let mut local_at_check = vec![0usize; n];
        for j in 0..p.num_vars() {
            for (l, &e) in p.var_sockets(j).iter().enumerate() {
                local_at_var[e] = l;
            }
        }
        for i in 0..p.num_checks() {
            for (l, &e) in p.check_sockets(i).iter().enumerate() {
                local_at_check[e] = l;
            }
        }
        Ok(Self {
            p,
            alive: vec![true; n],
            var_nodes,
            check_nodes,
            spc_intact: vec![true; p.num_checks()],
            local_at_var,
            local_at_check,
        })
    }

    fn alive_var_degree(&self, j: usize) -> usize {
        self.p.var_sockets(j).iter().filter(|&&e| self.alive[e]).count()
    }

    fn alive_check_degree(&self, i: usize) -> usize {
        self.p.check_sockets(i).iter().filter(|&&e| self.alive[e]).count()
    }

    fn kill(&mut self, e: usize) {
        debug_assert!(self.alive[e]);
        self.alive[e] = false;
        let s = self.p.sockets()[e];
        if let Some(node) = self.var_nodes[s.var].as_mut() {
            node.substitute(self.local_at_var[e]);
        }
        match self.check_nodes[s.check].as_mut() {
            Some(node) => node.substitute(self.local_at_check[e]),
            None => self.spc_intact[s.check] = false,
        }
    }

    /// Minimum edge degree of the variable-side extrinsic polynomial.
    fn d_ve(&self, e: usize) -> Option<usize> {
        let s = self.p.sockets()[e];
        match &self.var_nodes[s.var] {
            Some(node) => node.polys[self.local_at_var[e]].min_degree(),
            None => {
                let d = self.alive_var_degree(s.var);
                Some(d - 1)
            }
        }
    }

    /// Minimum edge degree of the check-side extrinsic polynomial.
    fn d_ce(&self, e: usize) -> Option<usize> {
        let s = self.p.sockets()[e];
        match &self.check_nodes[s.check] {
            Some(node) => node.polys[self.local_at_check[e]].min_degree(),
            None => {
                if !self.spc_intact[s.check] {
                    Some(0)
                } else if self.alive_check_degree(s.check) == 1 {
                    None
                } else {
                    Some(1)
                }
            }
        }
    }

    /// Directed arcs between message states: state 2e is the variable-to-
    /// check message of socket e, state 2e+1 the check-to-variable one. An
    /// arc u -> w means a degree-one monomial passes erasure from u to w.
    fn degree_one_arcs(&self) -> Vec<Vec<usize>> {
        let n = self.p.sockets().len();
        let mut adj = vec![Vec::new(); 2 * n];
        for j in 0..self.p.num_vars() {
            let live: Vec<usize> =
                self.p.var_sockets(j).iter().copied().filter(|&e| self.alive[e]).collect();
            match &self.var_nodes[j] {
                None => {
                    if live.len() == 2 {
                        adj[2 * live[0] + 1].push(2 * live[1]);
                        adj[2 * live[1] + 1].push(2 * live[0]);
                    }
                }
                Some(node) => {
                    for &e in &live {
                        for pos in node.polys[self.local_at_var[e]].degree_one_vars() {
                            let f = self.p.var_sockets(j)[node.local_of_pos[pos]];
                            if self.alive[f] {
                                adj[2 * f + 1].push(2 * e);
                            }
                        }
                    }
                }
            }
        }
        for i in 0..self.p.num_checks() {
            let live: Vec<usize> =
                self.p.check_sockets(i).iter().copied().filter(|&e| self.alive[e]).collect();
            match &self.check_nodes[i] {
                None => {
                    if self.spc_intact[i] && live.len() >= 2 {
                        for &e in &live {
                            for &f in &live {
                                if f != e {
                                    adj[2 * f].push(2 * e + 1);
                                }
                            }
                        }
                    }
                }
                Some(node) => {
                    for &e in &live {
                        for pos in node.polys[self.local_at_check[e]].degree_one_vars() {
                            let f = self.p.check_sockets(i)[node.local_of_pos[pos]];
                            if self.alive[f] {
                                adj[2 * f].push(2 * e + 1);
                            }
                        }
                    }
                }
            }
        }
        adj
    }
}

/// Generalized reduction via edge classification: per pass, remove loop
/// edges (strongly connected degree-one-monomial chains), then degree-zero
/// edges, substituting 1 for every removed message, until stable.
pub fn red_reduce_dgldpc(p: &Protograph) -> Result<RedReduction> {
    ensure_valid(p)?;
    let mut work = GenWork::new(p)?;
    let mut trace = Vec::new();
    let mut classification = EdgeClassification::default();
    let mut pass = 0u32;
    loop {
        pass += 1;
        let mut changed = false;

        let arcs = work.degree_one_arcs();
        let cyclic = states_on_cycles(&arcs);
        let loops: BTreeSet<usize> = (0..p.sockets().len())
            .filter(|&e| work.alive[e] && (cyclic[2 * e] || cyclic[2 * e + 1]))
            .collect();
        if !loops.is_empty() {
            changed = true;
            trace.push(RemovalEvent::LoopEdges {
                pass,
                edges: loops.iter().map(|&e| SocketTriple::from_socket(&p.sockets()[e])).collect(),
            });
            for &e in &loops {
                classification.e2.insert(e);
                work.kill(e);
            }
        }

        let zero: BTreeSet<usize> = (0..p.sockets().len())
            .filter(|&e| {
                work.alive[e] && (work.d_ve(e) == Some(0) || work.d_ce(e) == Some(0))
            })
            .collect();
        if !zero.is_empty() {
            changed = true;
            trace.push(RemovalEvent::DegreeZeroEdges {
                pass,
                edges: zero.iter().map(|&e| SocketTriple::from_socket(&p.sockets()[e])).collect(),
            });
            for &e in &zero {
                classification.e1.insert(e);
                work.kill(e);
            }
        }

        if !changed {
            break;
        }
    }
    Ok(RedReduction {
        subgraph: RedSubgraph::from_alive(p, &work.alive),
        trace,
        classification,
    })
}

/// Fast screen from component-code minimum-distance structure alone, on the
/// unreduced graph: weight-1 codewords mark degree-zero edges, weight-2
/// codewords induce the degree-one arcs whose cycles mark loop edges. The
/// screen never flags an edge the full reducer keeps.
pub fn min_distance_screen(p: &Protograph) -> Result<EdgeClassification> {
    ensure_valid(p)?;
    let n = p.sockets().len();
    let mut out = EdgeClassification::default();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); 2 * n];

    for j in 0..p.num_vars() {
        let sockets = p.var_sockets(j);
        match p.var_code(j) {
            None => {
                if sockets.len() == 1 {
                    out.e1.insert(sockets[0]);
                } else if sockets.len() == 2 {
                    adj[2 * sockets[0] + 1].push(2 * sockets[1]);
                    adj[2 * sockets[1] + 1].push(2 * sockets[0]);
                }
            }
            Some(a) => {
                let local_of_pos = |pos: usize| {
                    (0..sockets.len())
                        .find(|&l| a.position_of_socket(l) == pos)
                        .expect("labels are a bijection")
                };
                for cw in a.code.enumerate_codewords() {
                    match cw.count_ones() {
                        1 => {
                            let pos = cw.trailing_zeros() as usize;
                            out.e1.insert(sockets[local_of_pos(pos)]);
                        }
                        2 => {
                            let pq = [
                                cw.trailing_zeros() as usize,
                                (31 - cw.leading_zeros()) as usize,
                            ];
                            let (ep, eq) =
                                (sockets[local_of_pos(pq[0])], sockets[local_of_pos(pq[1])]);
                            adj[2 * eq + 1].push(2 * ep);
                            adj[2 * ep + 1].push(2 * eq);
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    for i in 0..p.num_checks() {
        let sockets = p.check_sockets(i);
        match p.check_code(i) {
            None => {
                for (li, &e) in sockets.iter().enumerate() {
                    for (lf, &f) in sockets.iter().enumerate() {
                        if li != lf {
                            adj[2 * f].push(2 * e + 1);
                        }
                    }
                }
            }
            Some(a) => {
                let local_of_pos = |pos: usize| {
                    (0..sockets.len())
                        .find(|&l| a.position_of_socket(l) == pos)
                        .expect("labels are a bijection")
                };
                for cw in a.code.enumerate_codewords() {
                    match cw.count_ones() {
                        1 => {
                            let pos = cw.trailing_zeros() as usize;
                            out.e1.insert(sockets[local_of_pos(pos)]);
                        }
                        2 => {
                            let pq = [
                                cw.trailing_zeros() as usize,
                                (31 - cw.leading_zeros()) as usize,
                            ];
                            let (ep, eq) =
                                (sockets[local_of_pos(pq[0])], sockets[local_of_pos(pq[1])]);
                            adj[2 * eq].push(2 * ep + 1);
                            adj[2 * ep].push(2 * eq + 1);
                        }
                        _ => {}
                    }
                }
            }
        }
    }

    let cyclic = states_on_cycles(&adj);
    for e in 0..n {
        if cyclic[2 * e] || cyclic[2 * e + 1] {
            out.e2.insert(e);
        }
    }
    Ok(out)
}

enum VarRule {
    Siblings,
    Terms { masks_per_local: Vec<Vec<u32>>, socket_of_pos: Vec<usize> },
}

enum CheckRule {
    AllSiblings,
    Terms { masks_per_local: Vec<Vec<u32>>, socket_of_pos: Vec<usize> },
}

/// Fixed-point propagation of converging messages, seeded by the surviving
/// reduction edges: a variable-to-check message converges when every
/// monomial of its extrinsic polynomial contains a converging incoming
/// message; dually on the check side. For standard nodes this is "some
/// sibling converges" at variables and "all siblings converge" at checks.
pub fn propagate_dex(p: &Protograph, red_sockets: &BTreeSet<usize>) -> Result<DexSets> {
    ensure_valid(p)?;
    let n = p.sockets().len();
    let mut r = vec![false; n];
    let mut s = vec![false; n];
    for &e in red_sockets {
        r[e] = true;
    }

    let mut var_rules = Vec::with_capacity(p.num_vars());
    for j in 0..p.num_vars() {
        let rule = match GenNode::for_variable(p, j)? {
            None => VarRule::Siblings,
            Some(node) => {
                let sockets = p.var_sockets(j);
                let socket_of_pos: Vec<usize> =
                    node.local_of_pos.iter().map(|&l| sockets[l]).collect();
                let masks_per_local = node
                    .polys
                    .iter()
                    .map(|poly| poly.term_masks().collect())
                    .collect();
                VarRule::Terms { masks_per_local, socket_of_pos }
            }
        };
        var_rules.push(rule);
    }
    let mut check_rules = Vec::with_capacity(p.num_checks());
    for i in 0..p.num_checks() {
        let rule = match GenNode::for_check(p, i)? {
            None => CheckRule::AllSiblings,
            Some(node) => {
                let sockets = p.check_sockets(i);
                let socket_of_pos: Vec<usize> =
                    node.local_of_pos.iter().map(|&l| sockets[l]).collect();
                let masks_per_local = node
                    .polys
                    .iter()
                    .map(|poly| poly.term_masks().collect())
                    .collect();
                CheckRule::Terms { masks_per_local, socket_of_pos }
            }
        };
        check_rules.push(rule);
    }

    let all_terms_marked = |masks: &[u32], socket_of_pos: &[usize], marked: &[bool]| {
        masks.iter().all(|&mask| {
            let mut m = mask;
            while m != 0 {
                let pos = m.trailing_zeros() as usize;
                if marked[socket_of_pos[pos]] {
                    return true;
                }
                m &= m - 1;
            }
            false
        })
    };

    loop {
        let mut changed = false;
        for j in 0..p.num_vars() {
            let sockets = p.var_sockets(j);
            for (local, &e) in sockets.iter().enumerate() {
                if s[e] {
                    continue;
                }
                let hit = match &var_rules[j] {
                    VarRule::Siblings => sockets.iter().any(|&f| f != e && r[f]),
                    VarRule::Terms { masks_per_local, socket_of_pos } => {
                        all_terms_marked(&masks_per_local[local], socket_of_pos, &r)
                    }
                };
                if hit {
                    s[e] = true;
                    changed = true;
                }
            }
        }
        for i in 0..p.num_checks() {
            let sockets = p.check_sockets(i);
            for (local, &e) in sockets.iter().enumerate() {
                if r[e] {
                    continue;
                }
                let hit = match &check_rules[i] {
                    CheckRule::AllSiblings => sockets.iter().all(|&f| f == e || s[f]),
                    CheckRule::Terms { masks_per_local, socket_of_pos } => {
                        all_terms_marked(&masks_per_local[local], socket_of_pos, &s)
                    }
                };
                if hit {
                    r[e] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut out = DexSets::default();
    for e in 0..n {
        if s[e] {
            out.dx.insert(e);
        }
        if r[e] {
            out.dy.insert(e);
        }
    }
    Ok(out)
}

/// Variables touched by a converging check-to-variable message.
pub fn dex_variable_nodes(p: &Protograph, dy: &BTreeSet<usize>) -> BTreeSet<usize> {
    (0..p.num_vars())
        .filter(|&j| p.var_sockets(j).iter().any(|e| dy.contains(e)))
        .collect()
}

/// Base matrix of a surviving subgraph, rows and columns restricted to the
/// surviving nodes in original index order.
pub fn red_base_matrix(p: &Protograph, red: &RedSubgraph) -> Vec<Vec<u32>> {
    let mut matrix =
        vec![vec![0u32; red.vars.len()]; red.checks.len()];
    let check_row: std::collections::BTreeMap<usize, usize> =
        red.checks.iter().enumerate().map(|(row, &i)| (i, row)).collect();
    let var_col: std::collections::BTreeMap<usize, usize> =
        red.vars.iter().enumerate().map(|(col, &j)| (j, col)).collect();
    for &e in &red.sockets {
        let s = p.sockets()[e];
        matrix[check_row[&s.check]][var_col[&s.var]] += 1;
    }
    matrix
}

/// Runs the full certification: reduce (generalized reducer when any node
/// carries a component code), propagate, extract the covered variables, and
/// compare against the requested information count over non-punctured
/// variables.
pub fn check_block_condition(p: &Protograph, required_info: i64) -> Result<BlockCertificate> {
    check_block_condition_opts(p, required_info, None)
}

/// As `check_block_condition`, with the reducer choice forced.
pub fn check_block_condition_opts(
    p: &Protograph,
    required_info: i64,
    force_generalized: Option<bool>,
) -> Result<BlockCertificate> {
    let rate = p.design_rate()?;
    if required_info < 0 || required_info > rate.info {
        return Err(Error::Invalid(format!(
            "required_info {} outside the protograph's information capacity {}",
            required_info, rate.info
        )));
    }
    let use_generalized = force_generalized.unwrap_or(!p.is_standard());
    let reduction = if use_generalized { red_reduce_dgldpc(p)? } else { red_reduce(p)? };
    let dex_sets = propagate_dex(p, &reduction.subgraph.sockets)?;
    let dex_vars = dex_variable_nodes(p, &dex_sets.dy);
    let dex_info_count =
        dex_vars.iter().filter(|&&j| !p.is_punctured(j)).count() as i64;
    let triple = |e: &usize| SocketTriple::from_socket(&p.sockets()[*e]);
    Ok(BlockCertificate {
        verdict: dex_info_count >= required_info,
        required_info,
        dex_info_count,
        dex_vars: dex_vars.iter().map(|j| j + 1).collect(),
        red_vars: reduction.subgraph.vars.iter().map(|j| j + 1).collect(),
        red_checks: reduction.subgraph.checks.iter().map(|i| i + 1).collect(),
        red_edges: reduction.subgraph.sockets.iter().map(triple).collect(),
        dx: dex_sets.dx.iter().map(triple).collect(),
        dy: dex_sets.dy.iter().map(triple).collect(),
        removal_trace: reduction.trace,
        internals: CertificateInternals {
            red: reduction.subgraph,
            dx: dex_sets.dx,
            dy: dex_sets.dy,
            dex_vars,
        },
    })
}

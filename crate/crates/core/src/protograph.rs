//! Protograph data model, text format, validation, and rate computation.
//!
//! A protograph is a small bipartite multigraph between check nodes and
//! variable nodes, stored as a |C| x |V| multiplicity matrix (parallel edges
//! allowed). Variable nodes may be punctured (not transmitted). Nodes may
//! carry a generalized component code; absent codes mean repetition at
//! variables and single parity check at checks.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;

use crate::code::{builtin, parse_codeword, BinaryLinearCode};
use crate::error::{Error, Result};

/// A component code attached to one node, with optional socket labels.
/// `labels[s]` is the 0-based code position served by the node's socket `s`;
/// `None` means the identity assignment. Identity labels are normalized to
/// `None` so structural equality is canonical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeAssignment {
    pub name: String,
    pub code: BinaryLinearCode,
    pub labels: Option<Vec<usize>>,
}

impl CodeAssignment {
    pub fn new(name: impl Into<String>, code: BinaryLinearCode, labels: Option<Vec<usize>>) -> Self {
        let labels = labels.filter(|l| !l.iter().enumerate().all(|(i, &p)| i == p));
        Self { name: name.into(), code, labels }
    }

    /// Code position served by socket `s` of this node.
    pub fn position_of_socket(&self, s: usize) -> usize {
        match &self.labels {
            Some(l) => l[s],
            None => s,
        }
    }
}

/// One edge socket: parallel edges between check `check` and variable `var`
/// are distinguished by `copy`. Socket positions at each endpoint follow the
/// deterministic (peer index ascending, copy ascending) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct EdgeSocket {
    pub check: usize,
    pub var: usize,
    pub copy: usize,
    pub check_position: usize,
    pub var_position: usize,
}

/// Severity of a validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub message: String,
    pub location: String,
}

/// Outcome of structural validation; `ok` iff no error-severity issue.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
}

/// Exact design and transmitted rates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateReport {
    /// 1 - sum(d_c - k_c) / sum(k_v).
    pub design: Ratio<i64>,
    /// Information bits per transmitted position (punctured nodes excluded).
    pub transmitted: Ratio<i64>,
    /// Information positions: sum(k_v) - sum(d_c - k_c).
    pub info: i64,
    /// Transmitted positions: sum of k_v over non-punctured variables.
    pub transmitted_positions: i64,
}

#[derive(Debug, Clone)]
pub struct Protograph {
    num_checks: usize,
    num_vars: usize,
    multiplicity: Vec<Vec<u32>>,
    punctured: BTreeSet<usize>,
    var_codes: Vec<Option<CodeAssignment>>,
    check_codes: Vec<Option<CodeAssignment>>,
    sockets: Vec<EdgeSocket>,
    var_sockets: Vec<Vec<usize>>,
    check_sockets: Vec<Vec<usize>>,
}

impl PartialEq for Protograph {
    fn eq(&self, other: &Self) -> bool {
        self.multiplicity == other.multiplicity
            && self.punctured == other.punctured
            && self.var_codes == other.var_codes
            && self.check_codes == other.check_codes
    }
}
impl Eq for Protograph {}

impl Protograph {
    /// Builds and validates a protograph. Errors collect every invariant
    /// violation found.
    pub fn new(
        multiplicity: Vec<Vec<u32>>,
        punctured: BTreeSet<usize>,
        var_codes: Vec<Option<CodeAssignment>>,
        check_codes: Vec<Option<CodeAssignment>>,
    ) -> Result<Self> {
        let p = Self::new_unchecked(multiplicity, punctured, var_codes, check_codes)?;
        let report = p.validate();
        if report.ok {
            Ok(p)
        } else {
            let msgs: Vec<String> = report
                .issues
                .iter()
                .filter(|i| i.severity == Severity::Error)
                .map(|i| format!("{}: {}", i.location, i.message))
                .collect();
            Err(Error::Invalid(msgs.join("; ")))
        }
    }

    /// Builds without running semantic validation (dimension checks only);
    /// used by the optimizer for candidates that may still need repair.
    pub fn new_unchecked(
        multiplicity: Vec<Vec<u32>>,
        punctured: BTreeSet<usize>,
        var_codes: Vec<Option<CodeAssignment>>,
        check_codes: Vec<Option<CodeAssignment>>,
    ) -> Result<Self> {
        let num_checks = multiplicity.len();
        if num_checks == 0 {
            return Err(Error::Invalid("protograph needs at least one check row".into()));
        }
        let num_vars = multiplicity[0].len();
        if num_vars == 0 {
            return Err(Error::Invalid("protograph needs at least one variable column".into()));
        }
        if multiplicity.iter().any(|r| r.len() != num_vars) {
            return Err(Error::Invalid("ragged multiplicity matrix".into()));
        }
        if var_codes.len() != num_vars || check_codes.len() != num_checks {
            return Err(Error::Invalid("code assignment lists must match dimensions".into()));
        }
        let mut p = Self {
            num_checks,
            num_vars,
            multiplicity,
            punctured,
            var_codes,
            check_codes,
            sockets: Vec::new(),
            var_sockets: vec![Vec::new(); num_vars],
            check_sockets: vec![Vec::new(); num_checks],
        };
        p.rebuild_sockets();
        Ok(p)
    }

    /// All-standard protograph (repetition/SPC everywhere, no puncturing).
    pub fn standard(multiplicity: Vec<Vec<u32>>) -> Result<Self> {
        let nc = multiplicity.len();
        let nv = multiplicity.first().map_or(0, |r| r.len());
        Self::new(multiplicity, BTreeSet::new(), vec![None; nv], vec![None; nc])
    }

    pub fn with_punctured(mut self, punctured: impl IntoIterator<Item = usize>) -> Result<Self> {
        self.punctured = punctured.into_iter().collect();
        Self::new(self.multiplicity, self.punctured, self.var_codes, self.check_codes)
    }

    fn rebuild_sockets(&mut self) {
        self.sockets.clear();
        self.var_sockets = vec![Vec::new(); self.num_vars];
        self.check_sockets = vec![Vec::new(); self.num_checks];
        // Global order (check, var, copy) makes per-node orders follow the
        // (peer ascending, copy ascending) rule on both sides.
        for i in 0..self.num_checks {
            for j in 0..self.num_vars {
                for copy in 0..self.multiplicity[i][j] as usize {
                    let idx = self.sockets.len();
                    self.sockets.push(EdgeSocket {
                        check: i,
                        var: j,
                        copy,
                        check_position: self.check_sockets[i].len(),
                        var_position: usize::MAX, // fixed below
                    });
                    self.check_sockets[i].push(idx);
                }
            }
        }
        // Variable-side positions: scan by (check ascending, copy ascending),
        // which is exactly ascending global index restricted to the column.
        for j in 0..self.num_vars {
            for i in 0..self.num_checks {
                // Collect this column's sockets in global order.
                for &idx in &self.check_sockets[i] {
                    if self.sockets[idx].var == j {
                        self.sockets[idx].var_position = self.var_sockets[j].len();
                        self.var_sockets[j].push(idx);
                    }
                }
            }
        }
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn multiplicity(&self, check: usize, var: usize) -> u32 {
        self.multiplicity[check][var]
    }

    pub fn matrix(&self) -> &[Vec<u32>] {
        &self.multiplicity
    }

    pub fn punctured(&self) -> &BTreeSet<usize> {
        &self.punctured
    }

    pub fn is_punctured(&self, var: usize) -> bool {
        self.punctured.contains(&var)
    }

    pub fn var_code(&self, var: usize) -> Option<&CodeAssignment> {
        self.var_codes[var].as_ref()
    }

    pub fn check_code(&self, check: usize) -> Option<&CodeAssignment> {
        self.check_codes[check].as_ref()
    }

    pub fn var_codes(&self) -> &[Option<CodeAssignment>] {
        &self.var_codes
    }

    pub fn check_codes(&self) -> &[Option<CodeAssignment>] {
        &self.check_codes
    }

    pub fn is_standard(&self) -> bool {
        self.var_codes.iter().all(Option::is_none) && self.check_codes.iter().all(Option::is_none)
    }

    /// Deterministic global socket enumeration.
    pub fn sockets(&self) -> &[EdgeSocket] {
        &self.sockets
    }

    /// Socket indices at variable `j`, in node order.
    pub fn var_sockets(&self, j: usize) -> &[usize] {
        &self.var_sockets[j]
    }

    /// Socket indices at check `i`, in node order.
    pub fn check_sockets(&self, i: usize) -> &[usize] {
        &self.check_sockets[i]
    }

    pub fn var_degree(&self, j: usize) -> usize {
        self.var_sockets[j].len()
    }

    pub fn check_degree(&self, i: usize) -> usize {
        self.check_sockets[i].len()
    }

    /// Dimension contributed by variable `j` (k of its code; 1 if standard).
    pub fn var_dimension(&self, j: usize) -> usize {
        self.var_codes[j].as_ref().map_or(1, |a| a.code.dimension())
    }

    /// Parity deficit of check `i` (d_c - k_c; 1 if standard SPC).
    pub fn check_deficit(&self, i: usize) -> usize {
        self.check_codes[i]
            .as_ref()
            .map_or(1, |a| a.code.len() - a.code.dimension())
    }

    /// Information positions: sum(k_v) - sum(d_c - k_c). May be nonpositive
    /// for overconstrained graphs.
    pub fn info_count(&self) -> i64 {
        let kv: i64 = (0..self.num_vars).map(|j| self.var_dimension(j) as i64).sum();
        let deficit: i64 = (0..self.num_checks).map(|i| self.check_deficit(i) as i64).sum();
        kv - deficit
    }

    /// Structural validation; never fails, reports findings.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        fn error(issues: &mut Vec<Issue>, message: String, location: String) {
            issues.push(Issue { severity: Severity::Error, message, location });
        }

        for (&j, loc) in self.punctured.iter().zip(std::iter::repeat("punctured")) {
            if j >= self.num_vars {
                error(&mut issues, format!("punctured index {} out of range", j + 1), loc.into());
            }
        }
        if (0..self.num_vars).all(|j| self.punctured.contains(&j)) {
            error(&mut issues, "every variable node is punctured".into(), "punctured".into());
        }

        for j in 0..self.num_vars {
            let deg = self.var_degree(j);
            if let Some(a) = &self.var_codes[j] {
                if deg != a.code.len() {
                    error(
                        &mut issues,
                        format!("degree {} != code length {}", deg, a.code.len()),
                        format!("vnode {}", j + 1),
                    );
                } else if let Some(l) = &a.labels {
                    check_labels(l, deg, &mut issues, format!("vnode {}", j + 1));
                }
            }
        }
        for i in 0..self.num_checks {
            let deg = self.check_degree(i);
            if let Some(a) = &self.check_codes[i] {
                if deg != a.code.len() {
                    error(
                        &mut issues,
                        format!("degree {} != code length {}", deg, a.code.len()),
                        format!("cnode {}", i + 1),
                    );
                } else if let Some(l) = &a.labels {
                    check_labels(l, deg, &mut issues, format!("cnode {}", i + 1));
                }
            }
        }
        for j in 0..self.num_vars {
            if self.var_degree(j) == 0 {
                issues.push(Issue {
                    severity: Severity::Warning,
                    message: "variable node has no edges".into(),
                    location: format!("column {}", j + 1),
                });
            }
        }
        for i in 0..self.num_checks {
            if self.check_degree(i) == 0 {
                issues.push(Issue {
                    severity: Severity::Warning,
                    message: "check node has no edges".into(),
                    location: format!("row {}", i + 1),
                });
            }
        }

        let ok = issues.iter().all(|i| i.severity != Severity::Error);
        ValidationReport { ok, issues }
    }

    /// Exact design and transmitted rates.
    pub fn design_rate(&self) -> Result<RateReport> {
        let report = self.validate();
        if !report.ok {
            return Err(Error::Invalid("design_rate requires a valid protograph".into()));
        }
        let kv: i64 = (0..self.num_vars).map(|j| self.var_dimension(j) as i64).sum();
        let info = self.info_count();
        let transmitted_positions: i64 = (0..self.num_vars)
            .filter(|&j| !self.is_punctured(j))
            .map(|j| self.var_dimension(j) as i64)
            .sum();
        if info <= 0 {
            return Err(Error::Invalid("overconstrained protograph".into()));
        }
        Ok(RateReport {
            design: Ratio::new(info, kv),
            transmitted: Ratio::new(info, transmitted_positions),
            info,
            transmitted_positions,
        })
    }
}

fn check_labels(labels: &[usize], degree: usize, issues: &mut Vec<Issue>, location: String) {
    let mut seen = vec![false; degree];
    let mut ok = labels.len() == degree;
    if ok {
        for &p in labels {
            if p >= degree || seen[p] {
                ok = false;
                break;
            }
            seen[p] = true;
        }
    }
    if !ok {
        issues.push(Issue {
            severity: Severity::Error,
            message: "labels must be a bijection onto code positions".into(),
            location,
        });
    }
}

/// Parses the protograph text format. See the crate README for the grammar.
pub fn parse_protograph(text: &str) -> Result<Protograph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty file".into() })?;
    let dims: Vec<usize> = parse_ints(header, line_no)?;
    if dims.len() != 2 {
        return Err(Error::Parse { line: line_no, msg: "header must be `nc nv`".into() });
    }
    let (nc, nv) = (dims[0], dims[1]);

    let mut multiplicity = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (line_no, row) = lines.next().ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("expected {nc} matrix rows"),
        })?;
        let entries: Vec<u32> = parse_ints(row, line_no)?;
        if entries.len() != nv {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("row has {} entries, expected {nv}", entries.len()),
            });
        }
        multiplicity.push(entries);
    }

    struct NodeDirective {
        line: usize,
        index: usize,
        code_name: String,
        labels: Option<Vec<usize>>,
    }
    let mut punctured: BTreeSet<usize> = BTreeSet::new();
    let mut defined: Vec<(String, BinaryLinearCode)> = Vec::new();
    let mut vnode_directives: Vec<NodeDirective> = Vec::new();
    let mut cnode_directives: Vec<NodeDirective> = Vec::new();

    for (line, l) in lines {
        let mut words = l.split_whitespace();
        let keyword = words.next().unwrap();
        let rest: Vec<&str> = words.collect();
        match keyword {
            "punctured" => {
                for w in &rest {
                    let j: usize = w
                        .parse()
                        .ok()
                        .filter(|&j| j >= 1)
                        .ok_or_else(|| Error::Parse {
                            line,
                            msg: format!("bad punctured index '{w}' (1-based)"),
                        })?;
                    punctured.insert(j - 1);
                }
            }
            "code" => {
                let (name, n, k) = match rest.as_slice() {
                    [name, n, k, ..] => {
                        let n: usize = n.parse().map_err(|_| Error::Parse {
                            line,
                            msg: format!("bad code length '{n}'"),
                        })?;
                        let k: usize = k.parse().map_err(|_| Error::Parse {
                            line,
                            msg: format!("bad code dimension '{k}'"),
                        })?;
                        (name.to_string(), n, k)
                    }
                    _ => {
                        return Err(Error::Parse {
                            line,
                            msg: "code directive needs NAME n k words...".into(),
                        })
                    }
                };
                let words = &rest[3..];
                let masks: Vec<u32> = words
                    .iter()
                    .map(|w| {
                        if w.len() != n {
                            return Err(Error::Parse {
                                line,
                                msg: format!("codeword '{w}' is not length {n}"),
                            });
                        }
                        parse_codeword(w).map_err(|e| Error::Parse { line, msg: e.to_string() })
                    })
                    .collect::<Result<_>>()?;
                let code = if k <= 24 && words.len() == 1usize << k {
                    BinaryLinearCode::from_codewords(n, &masks)
                } else if words.len() == k {
                    BinaryLinearCode::new(n, masks)
                } else {
                    return Err(Error::Parse {
                        line,
                        msg: format!(
                            "code {name} lists {} words; expected 2^{k} codewords or {k} generators",
                            words.len()
                        ),
                    });
                }
                .map_err(|e| Error::Parse { line, msg: format!("code {name}: {e}") })?;
                if code.dimension() != k {
                    return Err(Error::Parse {
                        line,
                        msg: format!("code {name} has dimension {}, not {k}", code.dimension()),
                    });
                }
                defined.push((name, code));
            }
            "vnode" | "cnode" => {
                let parse_err = |msg: String| Error::Parse { line, msg };
                if rest.len() < 3 || rest[1] != "code" {
                    return Err(parse_err(format!(
                        "{keyword} directive needs: {keyword} INDEX code NAME [labels ...]"
                    )));
                }
                let index: usize = rest[0]
                    .parse()
                    .ok()
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| parse_err(format!("bad node index '{}' (1-based)", rest[0])))?;
                let code_name = rest[2].to_string();
                let labels = match rest.get(3) {
                    None => None,
                    Some(&"labels") => {
                        let ps: Vec<usize> = rest[4..]
                            .iter()
                            .map(|w| {
                                w.parse::<usize>()
                                    .ok()
                                    .filter(|&p| p >= 1)
                                    .map(|p| p - 1)
                                    .ok_or_else(|| parse_err(format!("bad label '{w}' (1-based)")))
                            })
                            .collect::<Result<_>>()?;
                        Some(ps)
                    }
                    Some(w) => return Err(parse_err(format!("unexpected word '{w}'"))),
                };
                let d = NodeDirective { line, index: index - 1, code_name, labels };
                if keyword == "vnode" {
                    vnode_directives.push(d);
                } else {
                    cnode_directives.push(d);
                }
            }
            _ => {
                return Err(Error::Parse { line, msg: format!("unknown directive '{keyword}'") });
            }
        }
    }

    let resolve = |d: &NodeDirective| -> Result<CodeAssignment> {
        let code = defined
            .iter()
            .rev()
            .find(|(n, _)| *n == d.code_name)
            .map(|(_, c)| c.clone())
            .or_else(|| builtin(&d.code_name))
            .ok_or_else(|| Error::Parse {
                line: d.line,
                msg: format!("unknown code name '{}'", d.code_name),
            })?;
        Ok(CodeAssignment::new(d.code_name.clone(), code, d.labels.clone()))
    };

    let mut var_codes: Vec<Option<CodeAssignment>> = vec![None; nv];
    for d in &vnode_directives {
        if d.index >= nv {
            return Err(Error::Parse {
                line: d.line,
                msg: format!("vnode index {} out of range", d.index + 1),
            });
        }
        var_codes[d.index] = Some(resolve(d)?);
    }
    let mut check_codes: Vec<Option<CodeAssignment>> = vec![None; nc];
    for d in &cnode_directives {
        if d.index >= nc {
            return Err(Error::Parse {
                line: d.line,
                msg: format!("cnode index {} out of range", d.index + 1),
            });
        }
        check_codes[d.index] = Some(resolve(d)?);
    }

    Protograph::new(multiplicity, punctured, var_codes, check_codes)
}

fn parse_ints<T: std::str::FromStr>(line: &str, line_no: usize) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|w| {
            w.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad integer '{w}'"),
            })
        })
        .collect()
}

impl fmt::Display for Protograph {
    /// Canonical text form; `parse_protograph` of the output reproduces the
    /// protograph exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.num_checks, self.num_vars)?;
        for row in &self.multiplicity {
            let words: Vec<String> = row.iter().map(u32::to_string).collect();
            writeln!(f, "{}", words.join(" "))?;
        }
        if !self.punctured.is_empty() {
            let words: Vec<String> = self.punctured.iter().map(|j| (j + 1).to_string()).collect();
            writeln!(f, "punctured {}", words.join(" "))?;
        }
        // Emit non-builtin code definitions once each, sorted by name.
        let mut defined: Vec<(&str, &BinaryLinearCode)> = Vec::new();
        for a in self.var_codes.iter().chain(&self.check_codes).flatten() {
            if builtin(&a.name).as_ref() != Some(&a.code)
                && !defined.iter().any(|(n, _)| *n == a.name)
            {
                defined.push((&a.name, &a.code));
            }
        }
        defined.sort_unstable_by_key(|&(n, _)| n);
        for (name, code) in defined {
            let words: Vec<String> = code
                .enumerate_codewords()
                .iter()
                .map(|&cw| code.codeword_string(cw))
                .collect();
            writeln!(
                f,
                "code {} {} {} {}",
                name,
                code.len(),
                code.dimension(),
                words.join(" ")
            )?;
        }
        let fmt_node = |f: &mut fmt::Formatter<'_>, kw: &str, idx: usize, a: &CodeAssignment| {
            write!(f, "{kw} {} code {}", idx + 1, a.name)?;
            if let Some(l) = &a.labels {
                let words: Vec<String> = l.iter().map(|p| (p + 1).to_string()).collect();
                write!(f, " labels {}", words.join(" "))?;
            }
            writeln!(f)
        };
        for (j, a) in self.var_codes.iter().enumerate() {
            if let Some(a) = a {
                fmt_node(f, "vnode", j, a)?;
            }
        }
        for (i, a) in self.check_codes.iter().enumerate() {
            if let Some(a) = a {
                fmt_node(f, "cnode", i, a)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal() {
        let p = parse_protograph("2 2\n1 1\n0 2\n").unwrap();
        assert_eq!(p.num_checks(), 2);
        assert_eq!(p.num_vars(), 2);
        assert_eq!(p.matrix(), &[vec![1, 1], vec![0, 2]]);
        assert!(p.is_standard());
    }

    #[test]
    fn socket_enumeration_deterministic_and_ordered() {
        let p = parse_protograph("2 2\n1 1\n0 2\n").unwrap();
        let s = p.sockets();
        assert_eq!(s.len(), 4);
        // (check, var, copy) global order.
        assert_eq!((s[0].check, s[0].var, s[0].copy), (0, 0, 0));
        assert_eq!((s[1].check, s[1].var, s[1].copy), (0, 1, 0));
        assert_eq!((s[2].check, s[2].var, s[2].copy), (1, 1, 0));
        assert_eq!((s[3].check, s[3].var, s[3].copy), (1, 1, 1));
        // Variable 1 sees check 0 then check 1's two copies.
        assert_eq!(p.var_sockets(1), &[1, 2, 3]);
        assert_eq!(s[2].var_position, 1);
        assert_eq!(s[3].var_position, 2);
        let p2 = parse_protograph("2 2\n1 1\n0 2\n").unwrap();
        assert_eq!(p2.sockets(), p.sockets());
    }

    #[test]
    fn parse_directives() {
        let text = "2 3\n2 1 0\n0 1 2\npunctured 2\nvnode 1 code rep2\ncnode 2 code spc3 labels 2 1 3\n";
        let p = parse_protograph(text).unwrap();
        assert!(p.is_punctured(1));
        assert_eq!(p.var_code(0).unwrap().name, "rep2");
        let c = p.check_code(1).unwrap();
        assert_eq!(c.labels, Some(vec![1, 0, 2]));
        assert_eq!(c.position_of_socket(0), 1);
    }

    #[test]
    fn parse_custom_code_by_codewords() {
        let text = "1 5\n1 1 1 1 1\ncode pent 5 2 00000 01011 10101 11110\ncnode 1 code pent\n";
        let p = parse_protograph(text).unwrap();
        let c = p.check_code(0).unwrap();
        assert_eq!((c.code.len(), c.code.dimension()), (5, 2));
    }

    #[test]
    fn parse_custom_code_by_generators() {
        let text = "1 5\n1 1 1 1 1\ncode pent 5 2 10101 01011\ncnode 1 code pent\n";
        let p = parse_protograph(text).unwrap();
        assert_eq!(p.check_code(0).unwrap().code.dimension(), 2);
    }

    #[test]
    fn degree_code_mismatch_rejected() {
        let text = "1 4\n1 1 1 1\ncnode 1 code spc3\n";
        assert!(parse_protograph(text).is_err());
        // validate() reports instead of failing.
        let p = Protograph::new_unchecked(
            vec![vec![1, 1, 1, 1]],
            BTreeSet::new(),
            vec![None; 4],
            vec![Some(CodeAssignment::new("spc3", builtin("spc3").unwrap(), None))],
        )
        .unwrap();
        let r = p.validate();
        assert!(!r.ok);
        assert!(r.issues.iter().any(|i| i.message.contains("code length")));
    }

    #[test]
    fn all_punctured_rejected() {
        let err = parse_protograph("1 2\n1 1\npunctured 1 2\n");
        assert!(err.is_err());
    }

    #[test]
    fn bad_labels_rejected() {
        let text = "1 3\n1 1 1\ncnode 1 code spc3 labels 1 1 2\n";
        assert!(parse_protograph(text).is_err());
    }

    #[test]
    fn rates_standard() {
        let p = parse_protograph("1 2\n1 1\n").unwrap();
        let r = p.design_rate().unwrap();
        assert_eq!(r.design, Ratio::new(1, 2));
        assert_eq!(r.transmitted, Ratio::new(1, 2));
    }

    #[test]
    fn rates_with_puncturing() {
        // 28x41 with 2 punctured columns: transmitted (41-28)/(41-2) = 1/3.
        let mut rows = vec![vec![0u32; 41]; 28];
        // Any matrix with the right dimensions works for the rate formula;
        // give every node one edge to keep degrees positive.
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1;
            row[28 + i % 13] += 1;
        }
        let p = Protograph::standard(rows).unwrap().with_punctured([0, 1]).unwrap();
        let r = p.design_rate().unwrap();
        assert_eq!(r.design, Ratio::new(13, 41));
        assert_eq!(r.transmitted, Ratio::new(1, 3));
    }

    #[test]
    fn overconstrained_rejected() {
        let p = parse_protograph("2 2\n1 1\n1 1\n").unwrap();
        assert!(matches!(p.design_rate(), Err(Error::Invalid(m)) if m.contains("overconstrained")));
    }

    #[test]
    fn generalized_rate() {
        // One dual_hamming74 check (d=7, k=3): deficit 4. Vars standard.
        let text = "1 7\n1 1 1 1 1 1 1\ncnode 1 code dual_hamming74\n";
        let p = parse_protograph(text).unwrap();
        let r = p.design_rate().unwrap();
        assert_eq!(r.design, Ratio::new(3, 7));
        assert_eq!(r.info, 3);
    }

    #[test]
    fn display_roundtrip() {
        let text = "2 3\n2 1 0\n0 1 2\npunctured 2\ncode pent 5 2 10101 01011\nvnode 1 code rep2\ncnode 2 code spc3 labels 2 1 3\n";
        let p = parse_protograph(text).unwrap();
        let q = parse_protograph(&p.to_string()).unwrap();
        assert_eq!(p, q);
        // Canonical form is a fixpoint of parse . display.
        assert_eq!(p.to_string(), q.to_string());
    }
}

//! Sparse-code text I/O in the familiar adjacency-list format, plus a JSON
//! sidecar for lift metadata the list itself cannot carry.
//!
//! Layout: `N M`, then max column/row degrees, then N column degrees, M row
//! degrees, N lines of 1-based check indices, M lines of 1-based variable
//! indices. Zero-padded entries from strict writers are accepted and
//! ignored; output is unpadded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lift::{LiftedCode, SparseCode};

/// Lift metadata written next to the adjacency list. All indices 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeMeta {
    pub z: usize,
    /// Circulant shift per protograph socket, in global socket order.
    pub shifts: Vec<usize>,
    pub girth: u32,
    /// 1-based indices of punctured lifted variables.
    pub punctured: Vec<usize>,
    /// Canonical text of the origin protograph.
    pub protograph: String,
}

impl CodeMeta {
    pub fn from_lifted(l: &LiftedCode) -> Self {
        let punctured = (0..l.code.num_vars())
            .filter(|&v| l.code.is_punctured(v))
            .map(|v| v + 1)
            .collect();
        Self {
            z: l.z,
            shifts: l.shifts.clone(),
            girth: l.girth,
            punctured,
            protograph: l.protograph.to_string(),
        }
    }

    /// Applies the puncturing mask to a code read from the plain list.
    pub fn apply_puncturing(&self, code: &mut SparseCode) -> Result<()> {
        let mut mask = vec![false; code.num_vars()];
        for &v in &self.punctured {
            if v == 0 || v > code.num_vars() {
                return Err(Error::Invalid(format!(
                    "punctured index {v} out of range 1..={}",
                    code.num_vars()
                )));
            }
            mask[v - 1] = true;
        }
        code.set_punctured(mask)
    }
}

/// Serializes the adjacency structure; puncturing lives in the sidecar.
pub fn write_alist(code: &SparseCode) -> String {
    let n = code.num_vars();
    let m = code.num_checks();
    let col: Vec<&[usize]> = (0..n).map(|v| code.var_neighbors(v)).collect();
    let row: Vec<&[usize]> = (0..m).map(|i| code.check_neighbors(i)).collect();
    let max_col = col.iter().map(|c| c.len()).max().unwrap_or(0);
    let max_row = row.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut out = String::new();
    out.push_str(&format!("{n} {m}\n{max_col} {max_row}\n"));
    let join_deg = |xs: &[&[usize]]| {
        xs.iter().map(|x| x.len().to_string()).collect::<Vec<_>>().join(" ")
    };
    out.push_str(&join_deg(&col));
    out.push('\n');
    out.push_str(&join_deg(&row));
    out.push('\n');
    for c in &col {
        let line: Vec<String> = c.iter().map(|&i| (i + 1).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    for r in &row {
        let line: Vec<String> = r.iter().map(|&v| (v + 1).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Parses the adjacency list; no variables are marked punctured.
pub fn read_alist(text: &str) -> Result<SparseCode> {
    let mut tokens = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        for tok in body.split_whitespace() {
            let v: usize = tok.parse().map_err(|_| Error::Parse {
                line: ln + 1,
                msg: format!("expected an integer, found {tok:?}"),
            })?;
            tokens.push(v);
        }
    }
    let mut it = tokens.into_iter();
    let mut next = |what: &str| {
        it.next().ok_or_else(|| Error::Parse { line: 0, msg: format!("missing {what}") })
    };
    let n = next("variable count")?;
    let m = next("check count")?;
    let _max_col = next("max column degree")?;
    let _max_row = next("max row degree")?;
    let col_deg: Vec<usize> =
        (0..n).map(|_| next("column degree")).collect::<Result<_>>()?;
    let row_deg: Vec<usize> =
        (0..m).map(|_| next("row degree")).collect::<Result<_>>()?;

    // Entries may be zero-padded up to the max degree; read degree-many
    // nonzero entries, then swallow padding zeros.
    let total: usize = col_deg.iter().sum::<usize>() + row_deg.iter().sum::<usize>();
    let rest: Vec<usize> = it.collect();
    let mut col_lists: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut row_lists: Vec<Vec<usize>> = Vec::with_capacity(m);
    let padded = rest.len() > total;
    let mut pos = 0usize;
    let mut take = |deg: usize, max: usize, what: &str| -> Result<Vec<usize>> {
        let width = if padded { max } else { deg };
        if pos + width > rest.len() {
            return Err(Error::Parse { line: 0, msg: format!("truncated {what} lists") });
        }
        let chunk = &rest[pos..pos + width];
        pos += width;
        let vals: Vec<usize> = chunk.iter().copied().filter(|&x| x != 0).collect();
        if vals.len() != deg {
            return Err(Error::Parse {
                line: 0,
                msg: format!("{what} list does not match its declared degree"),
            });
        }
        Ok(vals)
    };
    let max_col = col_deg.iter().copied().max().unwrap_or(0);
    let max_row = row_deg.iter().copied().max().unwrap_or(0);
    for &d in &col_deg {
        col_lists.push(take(d, max_col, "column")?);
    }
    for &d in &row_deg {
        row_lists.push(take(d, max_row, "row")?);
    }
    if pos != rest.len() {
        return Err(Error::Parse { line: 0, msg: "trailing entries after lists".into() });
    }

    let mut check_neighbors: Vec<Vec<usize>> = Vec::with_capacity(m);
    for (i, list) in row_lists.iter().enumerate() {
        let mut row = Vec::with_capacity(list.len());
        for &v in list {
            if v == 0 || v > n {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("check {} references variable {v} out of range", i + 1),
                });
            }
            row.push(v - 1);
        }
        check_neighbors.push(row);
    }
    let code = SparseCode::new(n, check_neighbors, vec![false; n])?;
    // Cross-check the column lists against the rows.
    for (v, list) in col_lists.iter().enumerate() {
        let mut want: Vec<usize> = list
            .iter()
            .map(|&i| {
                if i == 0 || i > m {
                    Err(Error::Parse {
                        line: 0,
                        msg: format!("variable {} references check {i} out of range", v + 1),
                    })
                } else {
                    Ok(i - 1)
                }
            })
            .collect::<Result<_>>()?;
        let mut have = code.var_neighbors(v).to_vec();
        want.sort_unstable();
        have.sort_unstable();
        if want != have {
            return Err(Error::Parse {
                line: 0,
                msg: format!("row and column lists disagree at variable {}", v + 1),
            });
        }
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::lift;
    use crate::protograph::parse_protograph;

    #[test]
    fn roundtrip_lifted_code() {
        let p = parse_protograph("2 4\n1 1 1 1\n1 1 1 1\npunctured 3\n").unwrap();
        let l = lift(&p, 8).unwrap();
        let text = write_alist(&l.code);
        let mut back = read_alist(&text).unwrap();
        assert_eq!(back.num_vars(), l.code.num_vars());
        assert_eq!(back.num_checks(), l.code.num_checks());
        for i in 0..back.num_checks() {
            let mut a = back.check_neighbors(i).to_vec();
            let mut b = l.code.check_neighbors(i).to_vec();
            a.sort_unstable();
            b.sort_unstable();
            assert_eq!(a, b);
        }
        let meta = CodeMeta::from_lifted(&l);
        meta.apply_puncturing(&mut back).unwrap();
        assert_eq!(back.punctured_mask(), l.code.punctured_mask());
    }

    #[test]
    fn meta_roundtrips_through_json() {
        let p = parse_protograph("1 2\n1 1\npunctured 1\n").unwrap();
        let l = lift(&p, 3).unwrap();
        let meta = CodeMeta::from_lifted(&l);
        let text = serde_json::to_string(&meta).unwrap();
        let back: CodeMeta = serde_json::from_str(&text).unwrap();
        assert_eq!(back.z, 3);
        assert_eq!(back.punctured, vec![1, 2, 3]);
        assert_eq!(back.shifts, l.shifts);
        let reparsed = parse_protograph(&back.protograph).unwrap();
        assert_eq!(reparsed.matrix(), p.matrix());
    }

    #[test]
    fn padded_lists_are_accepted() {
        let text = "3 2\n2 3\n2 1 1\n3 1\n1 2\n1 0\n1 0\n1 2 3\n1 0 0\n";
        let code = read_alist(text).unwrap();
        assert_eq!(code.num_vars(), 3);
        assert_eq!(code.check_neighbors(0), &[0, 1, 2]);
        assert_eq!(code.check_neighbors(1), &[0]);
    }

    #[test]
    fn inconsistent_lists_are_rejected() {
        let text = "2 1\n1 2\n1 1\n2\n1\n2\n1 2\n";
        assert!(read_alist(text).is_err());
    }
}

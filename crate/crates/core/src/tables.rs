//! Exact coefficient tables `a^n, b^n, c^n` and `d_q`, with CSV/JSON output
//! and a cell-by-cell diff.

use std::io::Write;

use num_traits::Zero;
use serde::Serialize;

use crate::exact::Rational;
use crate::report::SCHEMA_VERSION;

/// Coefficients of the step-`n` kernel. Matrices are `(n+1) x (n+1)`,
/// indexed `[p][q]`; `d` holds `d_0..=d_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffTables {
    pub n: usize,
    pub a: Vec<Vec<Rational>>,
    pub b: Vec<Vec<Rational>>,
    pub c: Vec<Vec<Rational>>,
    pub d: Vec<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Table {
    A,
    B,
    C,
}

impl Table {
    pub const ALL: [Table; 3] = [Table::A, Table::B, Table::C];

    pub fn as_str(self) -> &'static str {
        match self {
            Table::A => "a",
            Table::B => "b",
            Table::C => "c",
        }
    }
}

/// One mismatched cell between two sets of tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellDiff {
    pub n: usize,
    pub table: Table,
    pub p: usize,
    pub q: usize,
    pub left: String,
    pub right: String,
}

impl CoeffTables {
    pub fn zeros(n: usize) -> Self {
        let m = vec![vec![Rational::zero(); n + 1]; n + 1];
        CoeffTables {
            n,
            a: m.clone(),
            b: m.clone(),
            c: m,
            d: vec![Rational::zero(); n + 1],
        }
    }

    pub fn table(&self, t: Table) -> &Vec<Vec<Rational>> {
        match t {
            Table::A => &self.a,
            Table::B => &self.b,
            Table::C => &self.c,
        }
    }

    /// Entry lookup that treats indices outside the stored square as zero.
    pub fn get(&self, t: Table, p: i64, q: i64) -> Rational {
        if p < 0 || q < 0 || p as usize > self.n || q as usize > self.n {
            return Rational::zero();
        }
        self.table(t)[p as usize][q as usize].clone()
    }

    /// Cells where `a`, `b` or `c` differ. Tables of different size are
    /// compared over the union of their supports.
    pub fn diff(&self, other: &CoeffTables) -> Vec<CellDiff> {
        let m = self.n.max(other.n) as i64;
        let mut out = Vec::new();
        for t in Table::ALL {
            for p in 0..=m {
                for q in 0..=m {
                    let (l, r) = (self.get(t, p, q), other.get(t, p, q));
                    if l != r {
                        out.push(CellDiff {
                            n: self.n,
                            table: t,
                            p: p as usize,
                            q: q as usize,
                            left: l.to_string(),
                            right: r.to_string(),
                        });
                    }
                }
            }
        }
        out
    }

    /// CSV rows `p,q,table,value` for `a`, `b`, `c` followed by `d` rows with an
    /// empty `p`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["p", "q", "table", "value"])?;
        for t in Table::ALL {
            for (p, row) in self.table(t).iter().enumerate() {
                for (q, v) in row.iter().enumerate() {
                    wr.write_record([p.to_string(), q.to_string(), t.as_str().into(), v.to_string()])?;
                }
            }
        }
        for (q, v) in self.d.iter().enumerate() {
            wr.write_record([String::new(), q.to_string(), "d".into(), v.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mat = |m: &Vec<Vec<Rational>>| -> Vec<Vec<String>> {
            m.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect()
        };
        serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "a": mat(&self.a),
            "b": mat(&self.b),
            "c": mat(&self.c),
            "d": self.d.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        })
    }
}
